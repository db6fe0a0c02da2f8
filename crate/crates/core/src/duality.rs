//! Elliptic curves over small finite fields as sources of unramified Galois
//! modules, and the cardinality identities they satisfy over F = F_q((t)):
//! the local Euler characteristic |H¹(F, M)| = |M(F)|·|M^∨(F)| for the tame
//! cocycle model, and |E(F_q)/nE(F_q)| = |E\[n\](F_q)| for the multiplication
//! isogeny. All counts are exhaustive.

use crate::cyclotomic::{gcd, lcm, Cyclotomic};
use crate::ff::{ff_make_field, Embedding, FFElement, FfError, FieldSpec, MAX_FIELD_SIZE};
use crate::galois::{Character, FinAbGroup, GroupElem};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DualityError {
    #[error("curve is singular (discriminant zero)")]
    SingularCurve,
    #[error("field size exceeds the desk-scale cap")]
    TooLarge,
    #[error("full n-torsion not rational over any field within the scale cap")]
    TorsionFieldTooLarge,
    #[error(transparent)]
    Field(#[from] FfError),
}

/// A smooth Weierstrass curve y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6.
#[derive(Clone, Debug)]
pub struct EllipticCurveModel {
    field: FieldSpec,
    a: [FFElement; 5],
}

/// Affine point or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EcPoint {
    Infinity,
    Affine(FFElement, FFElement),
}

impl EllipticCurveModel {
    pub fn new(field: &FieldSpec, coeffs: [i64; 5]) -> Result<Self, DualityError> {
        let a = [
            field.from_int(coeffs[0]),
            field.from_int(coeffs[1]),
            field.from_int(coeffs[2]),
            field.from_int(coeffs[3]),
            field.from_int(coeffs[4]),
        ];
        let curve = EllipticCurveModel {
            field: field.clone(),
            a,
        };
        if curve.discriminant().is_zero() {
            return Err(DualityError::SingularCurve);
        }
        Ok(curve)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn coeffs(&self) -> &[FFElement; 5] {
        &self.a
    }

    fn b_invariants(&self) -> (FFElement, FFElement, FFElement, FFElement) {
        let [a1, a2, a3, a4, a6] = &self.a;
        let f = &self.field;
        let b2 = a1.mul(a1).add(&f.from_int(4).mul(a2));
        let b4 = f.from_int(2).mul(a4).add(&a1.mul(a3));
        let b6 = a3.mul(a3).add(&f.from_int(4).mul(a6));
        let b8 = a1
            .mul(a1)
            .mul(a6)
            .add(&f.from_int(4).mul(a2).mul(a6))
            .sub(&a1.mul(a3).mul(a4))
            .add(&a2.mul(a3).mul(a3))
            .sub(&a4.mul(a4));
        (b2, b4, b6, b8)
    }

    pub fn discriminant(&self) -> FFElement {
        let (b2, b4, b6, b8) = self.b_invariants();
        let f = &self.field;
        f.zero()
            .sub(&b2.mul(&b2).mul(&b8))
            .sub(&f.from_int(8).mul(&b4).mul(&b4).mul(&b4))
            .sub(&f.from_int(27).mul(&b6).mul(&b6))
            .add(&f.from_int(9).mul(&b2).mul(&b4).mul(&b6))
    }

    /// The same curve with coefficients pushed into an overfield.
    pub fn base_change(&self, emb: &Embedding) -> EllipticCurveModel {
        EllipticCurveModel {
            field: emb.ext().clone(),
            a: [
                emb.map(&self.a[0]),
                emb.map(&self.a[1]),
                emb.map(&self.a[2]),
                emb.map(&self.a[3]),
                emb.map(&self.a[4]),
            ],
        }
    }

    pub fn is_on_curve(&self, pt: &EcPoint) -> bool {
        match pt {
            EcPoint::Infinity => true,
            EcPoint::Affine(x, y) => {
                let [a1, a2, a3, a4, a6] = &self.a;
                let lhs = y.mul(y).add(&a1.mul(x).mul(y)).add(&a3.mul(y));
                let rhs = x
                    .mul(x)
                    .mul(x)
                    .add(&a2.mul(x).mul(x))
                    .add(&a4.mul(x))
                    .add(a6);
                lhs == rhs
            }
        }
    }

    pub fn neg(&self, pt: &EcPoint) -> EcPoint {
        match pt {
            EcPoint::Infinity => EcPoint::Infinity,
            EcPoint::Affine(x, y) => {
                let [a1, _, a3, _, _] = &self.a;
                EcPoint::Affine(x.clone(), y.neg().sub(&a1.mul(x)).sub(a3))
            }
        }
    }

    pub fn add(&self, p: &EcPoint, q: &EcPoint) -> EcPoint {
        let [a1, a2, a3, a4, a6] = &self.a;
        match (p, q) {
            (EcPoint::Infinity, _) => q.clone(),
            (_, EcPoint::Infinity) => p.clone(),
            (EcPoint::Affine(x1, y1), EcPoint::Affine(x2, y2)) => {
                let (lambda, nu) = if x1 != x2 {
                    let dx_inv = x2.sub(x1).inv();
                    let lambda = y2.sub(y1).mul(&dx_inv);
                    let nu = y1.mul(x2).sub(&y2.mul(x1)).mul(&dx_inv);
                    (lambda, nu)
                } else if *q == self.neg(p) {
                    return EcPoint::Infinity;
                } else {
                    let denom = self
                        .field
                        .from_int(2)
                        .mul(y1)
                        .add(&a1.mul(x1))
                        .add(a3)
                        .inv();
                    let x1sq = x1.mul(x1);
                    let lambda = self
                        .field
                        .from_int(3)
                        .mul(&x1sq)
                        .add(&self.field.from_int(2).mul(a2).mul(x1))
                        .add(a4)
                        .sub(&a1.mul(y1))
                        .mul(&denom);
                    let nu = x1sq
                        .mul(x1)
                        .neg()
                        .add(&a4.mul(x1))
                        .add(&self.field.from_int(2).mul(a6))
                        .sub(&a3.mul(y1))
                        .mul(&denom);
                    (lambda, nu)
                };
                let x3 = lambda
                    .mul(&lambda)
                    .add(&a1.mul(&lambda))
                    .sub(a2)
                    .sub(x1)
                    .sub(x2);
                let y3 = lambda.add(a1).mul(&x3).neg().sub(&nu).sub(a3);
                EcPoint::Affine(x3, y3)
            }
        }
    }

    pub fn mul_scalar(&self, n: u64, p: &EcPoint) -> EcPoint {
        let mut acc = EcPoint::Infinity;
        let mut base = p.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// All rational points, by an x-sweep with exact quadratic solving.
    pub fn points(&self) -> Vec<EcPoint> {
        let ctx = field_ctx(&self.field);
        let [a1, a2, a3, a4, a6] = &self.a;
        let f = &self.field;
        let mut out = vec![EcPoint::Infinity];
        for xi in 0..f.q() {
            let x = f.from_index(xi);
            let b = a1.mul(&x).add(a3);
            let rhs = x
                .mul(&x)
                .mul(&x)
                .add(&a2.mul(&x).mul(&x))
                .add(&a4.mul(&x))
                .add(a6);
            for y in solve_y_quadratic(f, &ctx, &b, &rhs) {
                out.push(EcPoint::Affine(x.clone(), y));
            }
        }
        out
    }
}

/// Solutions of y² + b·y = rhs over F_q.
fn solve_y_quadratic(
    f: &FieldSpec,
    ctx: &FieldCtx,
    b: &FFElement,
    rhs: &FFElement,
) -> Vec<FFElement> {
    if f.p() == 2 {
        if b.is_zero() {
            // y ↦ y² is bijective
            return vec![ctx.sqrt(rhs).expect("squaring is bijective in char 2")];
        }
        // y = b z turns the equation into z² + z = rhs/b²
        let b_inv_sq = b.inv();
        let c = rhs.mul(&b_inv_sq).mul(&b_inv_sq);
        if absolute_trace(&c) == 0 {
            let z = ctx
                .artin_schreier(&c)
                .expect("trace-zero elements lie in the image of z² + z");
            return vec![b.mul(&z), b.mul(&z.add(&f.one()))];
        }
        return Vec::new();
    }
    // complete the square: (2y + b)² = 4·rhs + b²
    let disc = f.from_int(4).mul(rhs).add(&b.mul(b));
    let half = f.from_int(2).inv();
    match ctx.sqrt(&disc) {
        None => Vec::new(),
        Some(s) if s.is_zero() => vec![b.neg().mul(&half)],
        Some(s) => vec![s.sub(b).mul(&half), s.neg().sub(b).mul(&half)],
    }
}

/// Trace to F_2 (characteristic 2 only).
fn absolute_trace(x: &FFElement) -> u64 {
    let f = x.field();
    let deg = f.m();
    let mut acc = x.clone();
    let mut term = x.clone();
    for _ in 1..deg {
        term = term.mul(&term.clone()); // x^(2^i)
        acc = acc.add(&term);
    }
    if acc.is_zero() {
        0
    } else {
        1
    }
}

/// Per-field solver tables, cached for reuse across battery runs.
struct FieldCtx {
    sqrt_tbl: Vec<Option<u32>>,
    /// preimage of z ↦ z² + z, characteristic 2 only
    as_tbl: Vec<Option<u32>>,
}

impl FieldCtx {
    fn sqrt(&self, x: &FFElement) -> Option<FFElement> {
        self.sqrt_tbl[x.index() as usize].map(|i| x.field().from_index(i as u64))
    }

    fn artin_schreier(&self, x: &FFElement) -> Option<FFElement> {
        self.as_tbl[x.index() as usize].map(|i| x.field().from_index(i as u64))
    }
}

#[allow(clippy::type_complexity)]
fn field_ctx(field: &FieldSpec) -> Arc<FieldCtx> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<FieldCtx>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (field.p(), field.m());
    let mut guard = cache.lock().unwrap();
    if let Some(ctx) = guard.get(&key) {
        return ctx.clone();
    }
    let q = field.q() as usize;
    let mut sqrt_tbl: Vec<Option<u32>> = vec![None; q];
    let mut as_tbl: Vec<Option<u32>> = vec![None; if field.p() == 2 { q } else { 0 }];
    for yi in 0..q as u64 {
        let y = field.from_index(yi);
        let sq = y.mul(&y).index() as usize;
        if sqrt_tbl[sq].is_none() {
            sqrt_tbl[sq] = Some(yi as u32);
        }
        if field.p() == 2 {
            let img = y.mul(&y).add(&y).index() as usize;
            if as_tbl[img].is_none() {
                as_tbl[img] = Some(yi as u32);
            }
        }
    }
    let ctx = Arc::new(FieldCtx { sqrt_tbl, as_tbl });
    guard.insert(key, ctx.clone());
    ctx
}

/// Extension field F_{q^m} with an embedding of the base, cached.
#[allow(clippy::type_complexity)]
fn extension_with_embedding(
    base: &FieldSpec,
    m: u32,
) -> Result<(FieldSpec, Arc<Embedding>), DualityError> {
    let ext_deg = base.m() * m;
    let mut size: u64 = 1;
    for _ in 0..ext_deg {
        size = size.checked_mul(base.p()).ok_or(DualityError::TooLarge)?;
        if size > MAX_FIELD_SIZE {
            return Err(DualityError::TooLarge);
        }
    }
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32, u32), Arc<Embedding>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (base.p(), base.m(), ext_deg);
    let mut guard = cache.lock().unwrap();
    if let Some(emb) = guard.get(&key) {
        return Ok((emb.ext().clone(), emb.clone()));
    }
    let ext = ff_make_field(base.p(), ext_deg)?;
    let emb = Arc::new(Embedding::new(base, &ext));
    guard.insert(key, emb.clone());
    Ok((ext, emb))
}

/// #E(F_{q^m}) by exhaustive projective count; requires q^m within the scale
/// cap and satisfies the Hasse bound.
pub fn ec_count(curve: &EllipticCurveModel, m: u32) -> Result<u64, DualityError> {
    assert!(m >= 1);
    let counted = if m == 1 {
        curve.points().len() as u64
    } else {
        let (_, emb) = extension_with_embedding(&curve.field, m)?;
        curve.base_change(&emb).points().len() as u64
    };
    let qm = (0..m).fold(1u64, |acc, _| acc * curve.field.q());
    let delta = counted as i128 - (qm as i128 + 1);
    assert!(delta * delta <= 4 * qm as i128, "Hasse bound violated");
    Ok(counted)
}

/// #E(F_{q^m}) from the trace recursion s_{j+1} = a·s_j − q·s_{j−1}.
pub fn ec_count_recursion(curve: &EllipticCurveModel, m: u32) -> Result<u64, DualityError> {
    let q = curve.field.q() as i128;
    let n1 = ec_count(curve, 1)? as i128;
    let a = q + 1 - n1;
    let mut s_prev = 2i128;
    let mut s = a;
    for _ in 1..m {
        let next = a * s - q * s_prev;
        s_prev = s;
        s = next;
    }
    let qm = (0..m).fold(1i128, |acc, _| acc * q);
    Ok((qm + 1 - if m == 0 { 2 } else { s }) as u64)
}

/// Invariant factors of E(F_q), by exhaustive order computation.
pub fn ec_group(curve: &EllipticCurveModel) -> Result<FinAbGroup, DualityError> {
    let pts = curve.points();
    let n = pts.len() as u64;
    let primes = crate::ff::factorize(n);
    let mut exponent = 1u64;
    for p in &pts {
        let mut ord = n;
        for &ell in &primes {
            while ord.is_multiple_of(ell) && curve.mul_scalar(ord / ell, p) == EcPoint::Infinity {
                ord /= ell;
            }
        }
        exponent = lcm(exponent, ord);
    }
    let d2 = exponent;
    let d1 = n / d2;
    if n == 1 {
        Ok(FinAbGroup::trivial())
    } else if d1 == 1 {
        Ok(FinAbGroup::cyclic(d2))
    } else {
        Ok(FinAbGroup::new(vec![d1, d2]))
    }
}

/// A finite étale module (Z/n)^r over F = F_q((t)) with unramified Galois
/// action: Frobenius acts through an invertible matrix mod n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnramifiedModule {
    pub n: u64,
    pub rank: usize,
    /// Frobenius matrix, columns are images of basis vectors, entries mod n.
    pub sigma: Vec<Vec<u64>>,
    pub q: u64,
}

impl UnramifiedModule {
    pub fn new(n: u64, sigma: Vec<Vec<u64>>, q: u64) -> Self {
        let rank = sigma.len();
        assert!(sigma.iter().all(|row| row.len() == rank));
        let sigma: Vec<Vec<u64>> = sigma
            .iter()
            .map(|row| row.iter().map(|x| x % n.max(1)).collect())
            .collect();
        let m = UnramifiedModule { n, rank, sigma, q };
        assert!(
            n <= 1 || gcd(m.det_mod_n(), n) == 1,
            "Frobenius must be invertible mod n"
        );
        m
    }

    fn det_mod_n(&self) -> u64 {
        let d = det_i128(&to_i128(&self.sigma));
        d.rem_euclid(self.n.max(1) as i128) as u64
    }

    /// Frobenius trace mod n.
    pub fn trace_mod_n(&self) -> u64 {
        let mut t = 0u64;
        for i in 0..self.rank {
            t = (t + self.sigma[i][i]) % self.n.max(1);
        }
        t
    }

    pub fn det(&self) -> u64 {
        self.det_mod_n()
    }

    /// The Cartier dual: Frobenius q·(σ⁻¹)ᵀ mod n.
    #[allow(clippy::needless_range_loop)]
    pub fn dual(&self) -> UnramifiedModule {
        let n = self.n.max(1) as i128;
        let m = to_i128(&self.sigma);
        let inv = inverse_mod(&m, n);
        let mut sigma = vec![vec![0u64; self.rank]; self.rank];
        for i in 0..self.rank {
            for j in 0..self.rank {
                sigma[i][j] = ((self.q as i128 * inv[j][i]).rem_euclid(n)) as u64;
            }
        }
        UnramifiedModule::new(self.n, sigma, self.q)
    }

    fn vectors(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for _ in 0..self.rank {
            let mut next = Vec::with_capacity(out.len() * self.n.max(1) as usize);
            for v in &out {
                for x in 0..self.n.max(1) {
                    let mut w = v.clone();
                    w.push(x);
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }

    fn apply(&self, matrix: &[Vec<u64>], v: &[u64]) -> Vec<u64> {
        let n = self.n.max(1);
        (0..self.rank)
            .map(|i| {
                v.iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, x)| (acc + matrix[i][j] * x) % n)
            })
            .collect()
    }

    /// |ker(matrix)| over (Z/n)^r, by enumeration.
    fn kernel_size(&self, matrix: &[Vec<u64>]) -> u64 {
        self.vectors()
            .iter()
            .filter(|v| self.apply(matrix, v).iter().all(|&x| x == 0))
            .count() as u64
    }

    /// |coker(matrix)| = n^r / |im(matrix)|, image by enumeration.
    fn cokernel_size(&self, matrix: &[Vec<u64>]) -> u64 {
        let image: std::collections::BTreeSet<Vec<u64>> = self
            .vectors()
            .iter()
            .map(|v| self.apply(matrix, v))
            .collect();
        let total = self.n.max(1).pow(self.rank as u32);
        total / image.len() as u64
    }

    fn sigma_minus_scalar(&self, c: u64) -> Vec<Vec<u64>> {
        let n = self.n.max(1);
        let mut m = self.sigma.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = (row[i] + n - c % n) % n;
        }
        m
    }

    /// |M(F)| = |ker(σ − 1)|.
    pub fn fixed_points(&self) -> u64 {
        self.kernel_size(&self.sigma_minus_scalar(1))
    }
}

fn to_i128(m: &[Vec<u64>]) -> Vec<Vec<i128>> {
    m.iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect()
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let r = m.len();
    if r == 0 {
        return 1;
    }
    if r == 1 {
        return m[0][0];
    }
    let mut acc = 0i128;
    for j in 0..r {
        let minor: Vec<Vec<i128>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        acc += sign * m[0][j] * det_i128(&minor);
    }
    acc
}

/// Inverse of a matrix mod n via the adjugate; determinant must be a unit.
#[allow(clippy::needless_range_loop)]
fn inverse_mod(m: &[Vec<i128>], n: i128) -> Vec<Vec<i128>> {
    let r = m.len();
    if r == 0 {
        return Vec::new();
    }
    let det = det_i128(m).rem_euclid(n);
    let det_inv = crate::cyclotomic::mod_inverse(det as u64, n as u64) as i128;
    let mut adj = vec![vec![0i128; r]; r];
    for i in 0..r {
        for j in 0..r {
            let minor: Vec<Vec<i128>> = m
                .iter()
                .enumerate()
                .filter(|(row, _)| *row != i)
                .map(|(_, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            // adjugate transposes the cofactor matrix
            adj[j][i] = (sign * det_i128(&minor)).rem_euclid(n);
        }
    }
    for row in adj.iter_mut() {
        for x in row.iter_mut() {
            *x = (*x * det_inv).rem_euclid(n);
        }
    }
    adj
}

/// |H¹(F, M)| from the tame presentation: Frobenius σ and a topological
/// inertia generator τ acting trivially, subject to στσ⁻¹ = τ^q; cocycles
/// contribute |coker(σ − 1)| · |ker(σ − q)|.
pub fn h1_size(module: &UnramifiedModule) -> u64 {
    if module.n <= 1 {
        return 1;
    }
    let unramified = module.cokernel_size(&module.sigma_minus_scalar(1));
    let ramified = module.kernel_size(&module.sigma_minus_scalar(module.q));
    unramified * ramified
}

/// Both sides of the local Euler characteristic identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerReport {
    pub m_points: u64,
    pub m_dual_points: u64,
    pub h1: u64,
    pub pass: bool,
}

/// |H¹(F, M)| = |M(F)|·|M^∨(F)|, both sides computed independently.
pub fn check_euler(module: &UnramifiedModule) -> EulerReport {
    let m_points = if module.n <= 1 {
        1
    } else {
        module.fixed_points()
    };
    let m_dual_points = if module.n <= 1 {
        1
    } else {
        module.dual().fixed_points()
    };
    let h1 = h1_size(module);
    EulerReport {
        m_points,
        m_dual_points,
        h1,
        pass: h1 == m_points * m_dual_points,
    }
}

/// Both sides of the self-dual isogeny identity for multiplication by n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfDualReport {
    pub group_order: u64,
    pub cokernel: u64,
    pub kernel: u64,
    pub pass: bool,
}

/// |E(F_q)/nE(F_q)| = |E\[n\](F_q)|: the left side by enumerating the image
/// nE(F_q), the right by counting n-torsion directly. The reduction from
/// F-points to residue points is carried by good reduction together with
/// unique n-divisibility of the formal group for gcd(n, p) = 1.
pub fn check_selfdual(curve: &EllipticCurveModel, n: u64) -> Result<SelfDualReport, DualityError> {
    assert!(
        n >= 1 && !n.is_multiple_of(curve.field.p()),
        "need gcd(n, p) = 1"
    );
    let pts = curve.points();
    let image: std::collections::HashSet<EcPoint> =
        pts.iter().map(|p| curve.mul_scalar(n, p)).collect();
    let kernel = pts
        .iter()
        .filter(|p| curve.mul_scalar(n, p) == EcPoint::Infinity)
        .count() as u64;
    let group_order = pts.len() as u64;
    let cokernel = group_order / image.len() as u64;
    Ok(SelfDualReport {
        group_order,
        cokernel,
        kernel,
        pass: cokernel == kernel,
    })
}

/// The full n-torsion E\[n\] with its Frobenius matrix, found over the smallest
/// extension F_{q^M} within the scale cap. Requires p ≥ 5 and gcd(n, p) = 1,
/// n ∈ {2, 3, 4}.
pub fn ec_torsion_module(
    curve: &EllipticCurveModel,
    n: u64,
) -> Result<UnramifiedModule, DualityError> {
    assert!(matches!(n, 2..=4), "torsion modules for n in {{2,3,4}}");
    assert!(curve.field.p() >= 5, "torsion extraction needs p >= 5");
    assert!(!n.is_multiple_of(curve.field.p()));
    let q = curve.field.q();
    let n1 = ec_count(curve, 1)? as i128;
    let a = q as i128 + 1 - n1;

    let mut m_deg = 1u32;
    loop {
        // scale cap on the torsion field
        let mut qm: u64 = 1;
        let mut too_large = false;
        for _ in 0..m_deg {
            qm = match qm.checked_mul(q) {
                Some(v) if v <= MAX_FIELD_SIZE => v,
                _ => {
                    too_large = true;
                    break;
                }
            };
        }
        if too_large {
            return Err(DualityError::TorsionFieldTooLarge);
        }
        // necessary conditions: μ_n ⊂ F_{q^M}, n² | #E(F_{q^M}), and the
        // Frobenius trace over F_{q^M} congruent to 2 mod n (full torsion
        // forces σ ≡ 1, hence tr ≡ 2)
        let count_m = count_via_recursion(q, a, m_deg);
        let trace_m = qm as i128 + 1 - count_m;
        if (qm - 1).is_multiple_of(n)
            && count_m % (n * n) as i128 == 0
            && (trace_m - 2).rem_euclid(n as i128) == 0
        {
            let (ext, emb) = if m_deg == 1 {
                (curve.field.clone(), None)
            } else {
                let (ext, emb) = extension_with_embedding(&curve.field, m_deg)?;
                (ext, Some(emb))
            };
            let big = match &emb {
                None => curve.clone(),
                Some(e) => curve.base_change(e),
            };
            let torsion = n_torsion_points(&big, n, &ext);
            if torsion.len() as u64 == n * n {
                return build_sigma(&big, &torsion, n, q, n1 as u64);
            }
        }
        m_deg += 1;
    }
}

fn count_via_recursion(q: u64, a: i128, m: u32) -> i128 {
    let q = q as i128;
    let mut s_prev = 2i128;
    let mut s = a;
    for _ in 1..m {
        let next = a * s - q * s_prev;
        s_prev = s;
        s = next;
    }
    let qm = (0..m).fold(1i128, |acc, _| acc * q);
    qm + 1 - s
}

/// E\[n\] over the given field via the x-coordinates cut out by the division
/// polynomials (univariate for n ≤ 4), then verified point by point.
fn n_torsion_points(curve: &EllipticCurveModel, n: u64, field: &FieldSpec) -> Vec<EcPoint> {
    let ctx = field_ctx(field);
    let (b2, b4, b6, b8) = curve.b_invariants();
    let f = field;
    // division polynomials in x, low degree first; separable for smooth E
    let psi2_sq = vec![
        b6.clone(),
        f.from_int(2).mul(&b4),
        b2.clone(),
        f.from_int(4),
    ];
    let psi3 = vec![
        b8.clone(),
        f.from_int(3).mul(&b6),
        f.from_int(3).mul(&b4),
        b2.clone(),
        f.from_int(3),
    ];
    let psi4_odd = vec![
        b4.mul(&b8).sub(&b6.mul(&b6)),
        b2.mul(&b8).sub(&b4.mul(&b6)),
        f.from_int(10).mul(&b8),
        f.from_int(10).mul(&b6),
        f.from_int(5).mul(&b4),
        b2.clone(),
        f.from_int(2),
    ];
    let mut candidates: Vec<FFElement> = match n {
        2 => poly_roots_in_field(&psi2_sq, f),
        3 => poly_roots_in_field(&psi3, f),
        4 => {
            let mut r = poly_roots_in_field(&psi2_sq, f);
            r.extend(poly_roots_in_field(&psi4_odd, f));
            r
        }
        _ => unreachable!(),
    };
    candidates.sort_by_key(|x| x.index());
    candidates.dedup();

    let mut out = vec![EcPoint::Infinity];
    let [a1, a2, a3, a4, a6] = &curve.a;
    for x in candidates {
        let b = a1.mul(&x).add(a3);
        let rhs = x
            .mul(&x)
            .mul(&x)
            .add(&a2.mul(&x).mul(&x))
            .add(&a4.mul(&x))
            .add(a6);
        for y in solve_y_quadratic(f, &ctx, &b, &rhs) {
            let pt = EcPoint::Affine(x.clone(), y);
            if curve.mul_scalar(n, &pt) == EcPoint::Infinity {
                out.push(pt);
            }
        }
    }
    out
}

// --- univariate polynomial helpers over F_q ----------------------------------
//
// Dense coefficient vectors, low degree first, no trailing zeros.

type Poly = Vec<FFElement>;

fn ptrim(p: &mut Poly) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn pmonic(mut p: Poly) -> Poly {
    ptrim(&mut p);
    if let Some(lead) = p.last() {
        let inv = lead.inv();
        for c in p.iter_mut() {
            *c = c.mul(&inv);
        }
    }
    p
}

fn prem(a: &Poly, b: &Poly, f: &FieldSpec) -> Poly {
    let mut r = a.clone();
    ptrim(&mut r);
    let db = b.len() - 1;
    let lead_inv = b.last().unwrap().inv();
    while r.len() > db {
        let top = r.len() - 1;
        let c = r[top].mul(&lead_inv);
        r.pop();
        if !c.is_zero() {
            for j in 0..db {
                let sub = c.mul(&b[j]);
                r[top - db + j] = r[top - db + j].sub(&sub);
            }
        }
        ptrim(&mut r);
        let _ = f;
    }
    r
}

fn pmulmod(a: &Poly, b: &Poly, h: &Poly, f: &FieldSpec) -> Poly {
    let mut raw = vec![f.zero(); a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            raw[i + j] = raw[i + j].add(&x.mul(y));
        }
    }
    prem(&raw, h, f)
}

fn pgcd(a: &Poly, b: &Poly, f: &FieldSpec) -> Poly {
    let mut x = a.clone();
    let mut y = b.clone();
    ptrim(&mut x);
    ptrim(&mut y);
    while !y.is_empty() {
        let r = prem(&x, &y, f);
        x = y;
        y = r;
    }
    pmonic(x)
}

/// base^e mod h by square and multiply.
fn ppowmod(base: &Poly, e: u64, h: &Poly, f: &FieldSpec) -> Poly {
    let mut acc = vec![f.one()];
    let mut sq = prem(base, h, f);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = pmulmod(&acc, &sq, h, f);
        }
        sq = pmulmod(&sq, &sq, h, f);
        e >>= 1;
    }
    acc
}

/// All roots of p in F_q, each once: strip to the part splitting over F_q via
/// gcd with x^q − x, then separate by quadratic-character splitting with a
/// deterministic shift sweep.
fn poly_roots_in_field(p: &Poly, f: &FieldSpec) -> Vec<FFElement> {
    let mut h = pmonic(p.clone());
    if h.len() <= 1 {
        return Vec::new();
    }
    // x^q mod h minus x has the same roots in F_q as h, all simple
    let xq = ppowmod(&vec![f.zero(), f.one()], f.q(), &h, f);
    let mut xq_minus_x = xq;
    while xq_minus_x.len() < 2 {
        xq_minus_x.push(f.zero());
    }
    xq_minus_x[1] = xq_minus_x[1].sub(&f.one());
    ptrim(&mut xq_minus_x);
    h = pgcd(&h, &xq_minus_x, f);
    let mut roots = Vec::new();
    split_linear_factors(h, f, &mut roots);
    roots
}

fn split_linear_factors(h: Poly, f: &FieldSpec, out: &mut Vec<FFElement>) {
    let deg = h.len().saturating_sub(1);
    if deg == 0 {
        return;
    }
    if deg == 1 {
        out.push(h[0].neg());
        return;
    }
    // root 0 splits off directly
    if h[0].is_zero() {
        out.push(f.zero());
        let rest: Poly = h[1..].to_vec();
        split_linear_factors(pmonic(rest), f, out);
        return;
    }
    assert!(f.p() != 2, "character splitting needs odd q");
    let half = (f.q() - 1) / 2;
    for ci in 0..f.q() {
        let c = f.from_index(ci);
        // (x + c)^((q−1)/2) − 1 separates roots by quadratic character
        let shifted = vec![c.clone(), f.one()];
        let mut w = ppowmod(&shifted, half, &h, f);
        if w.is_empty() {
            w.push(f.zero());
        }
        w[0] = w[0].sub(&f.one());
        ptrim(&mut w);
        if w.is_empty() {
            continue;
        }
        let g = pgcd(&w, &h, f);
        let dg = g.len().saturating_sub(1);
        if dg > 0 && dg < deg {
            let quot = pdiv_exact(&h, &g, f);
            split_linear_factors(g, f, out);
            split_linear_factors(quot, f, out);
            return;
        }
    }
    unreachable!("a splitting shift exists for distinct roots");
}

fn pdiv_exact(a: &Poly, b: &Poly, f: &FieldSpec) -> Poly {
    let mut r = a.clone();
    ptrim(&mut r);
    let db = b.len() - 1;
    let lead_inv = b.last().unwrap().inv();
    let mut q = vec![f.zero(); r.len().saturating_sub(db)];
    while r.len() > db {
        let top = r.len() - 1;
        let c = r[top].mul(&lead_inv);
        q[top - db] = c.clone();
        r.pop();
        if !c.is_zero() {
            for j in 0..db {
                let sub = c.mul(&b[j]);
                r[top - db + j] = r[top - db + j].sub(&sub);
            }
        }
        ptrim(&mut r);
    }
    assert!(r.is_empty(), "division not exact");
    pmonic(q)
}

/// Express Frobenius on a basis of E\[n\] ≅ (Z/n)².
fn build_sigma(
    curve: &EllipticCurveModel,
    torsion: &[EcPoint],
    n: u64,
    q: u64,
    base_count: u64,
) -> Result<UnramifiedModule, DualityError> {
    // basis: a point of exact order n, then a second one spanning
    let order = |p: &EcPoint| -> u64 {
        (1..=n)
            .find(|&k| curve.mul_scalar(k, p) == EcPoint::Infinity)
            .expect("torsion point")
    };
    let p1 = torsion
        .iter()
        .find(|p| order(p) == n)
        .expect("full torsion contains a point of exact order n")
        .clone();
    // the second basis point must make (u, v) ↦ u·P1 + v·P2 injective
    let p2 = torsion
        .iter()
        .find(|p| {
            if order(p) != n {
                return false;
            }
            let mut span = std::collections::HashSet::new();
            for u in 0..n {
                for v in 0..n {
                    span.insert(curve.add(&curve.mul_scalar(u, &p1), &curve.mul_scalar(v, p)));
                }
            }
            span.len() as u64 == n * n
        })
        .expect("rank two")
        .clone();
    // coordinates of a torsion point against (p1, p2) by exhaustive search
    let coords = |p: &EcPoint| -> (u64, u64) {
        for u in 0..n {
            for v in 0..n {
                let cand = curve.add(&curve.mul_scalar(u, &p1), &curve.mul_scalar(v, &p2));
                if cand == *p {
                    return (u, v);
                }
            }
        }
        panic!("point outside the span of the chosen basis");
    };
    let frob = |p: &EcPoint| -> EcPoint {
        match p {
            EcPoint::Infinity => EcPoint::Infinity,
            EcPoint::Affine(x, y) => EcPoint::Affine(x.pow(q), y.pow(q)),
        }
    };
    let (a, b) = coords(&frob(&p1));
    let (c, d) = coords(&frob(&p2));
    let module = UnramifiedModule::new(n, vec![vec![a, c], vec![b, d]], q);
    // Weil-pairing compatibilities
    assert_eq!(module.det(), q % n, "det(σ) ≡ q (mod n)");
    assert_eq!(
        module.trace_mod_n(),
        (q as i128 + 1 - base_count as i128).rem_euclid(n as i128) as u64,
        "tr(σ) ≡ q + 1 − #E(F_q) (mod n)"
    );
    Ok(module)
}

/// The function a ↦ ξ₀ · e(t(a)) on a finite abelian group, valued exactly in
/// a cyclotomic integer ring; the Brauer-normalization automorphism is taken
/// to be the identity.
pub fn f_alpha_model(
    group: &FinAbGroup,
    t: &Character,
    xi0: &Cyclotomic,
) -> Vec<(GroupElem, Cyclotomic)> {
    let m = lcm(group.exponent().max(1), xi0.order());
    let xi = embed_cyclotomic(xi0, m);
    group
        .elements()
        .into_iter()
        .map(|a| {
            let chi = embed_cyclotomic(&t.eval_root(&a, group.exponent().max(1)), m);
            let v = xi.mul(&chi);
            (a, v)
        })
        .collect()
}

/// Reinterpret an element of Z\[ζ_r\] inside Z\[ζ_m\] for r | m.
pub fn embed_cyclotomic(x: &Cyclotomic, m: u64) -> Cyclotomic {
    let r = x.order();
    assert!(m.is_multiple_of(r));
    if r == m {
        return x.clone();
    }
    let step = m / r;
    let mut acc = Cyclotomic::zero(m);
    for (i, &c) in x.coeffs().iter().enumerate() {
        if c != 0 {
            acc = acc.add(&Cyclotomic::root(m, (i as u64 * step) % m).scale(c));
        }
    }
    acc
}

/// Deterministic battery: the first `count` smooth curves in lexicographic
/// (a1, a2, a3, a4, a6) order.
pub fn curve_battery(field: &FieldSpec, count: usize) -> Vec<EllipticCurveModel> {
    let q = field.q() as i64;
    let mut out = Vec::with_capacity(count);
    'outer: for a1 in 0..q {
        for a2 in 0..q {
            for a3 in 0..q {
                for a4 in 0..q {
                    for a6 in 0..q {
                        if let Ok(curve) = EllipticCurveModel::new(field, [a1, a2, a3, a4, a6]) {
                            out.push(curve);
                            if out.len() == count {
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::QZ;

    fn f(p: u64) -> FieldSpec {
        ff_make_field(p, 1).unwrap()
    }

    #[test]
    fn count_examples() {
        let e = EllipticCurveModel::new(&f(5), [0, 0, 0, 1, 0]).unwrap();
        assert_eq!(ec_count(&e, 1).unwrap(), 4);
        // recursion agrees with the exhaustive extension count
        assert_eq!(ec_count(&e, 2).unwrap(), ec_count_recursion(&e, 2).unwrap());
        assert_eq!(ec_count(&e, 3).unwrap(), ec_count_recursion(&e, 3).unwrap());

        let e6 = EllipticCurveModel::new(&f(5), [0, 0, 0, 0, 1]).unwrap();
        assert_eq!(ec_count(&e6, 1).unwrap(), 6);

        assert_eq!(
            EllipticCurveModel::new(&f(5), [0, 0, 0, 0, 0]).err(),
            Some(DualityError::SingularCurve)
        );
    }

    #[test]
    fn group_structure_examples() {
        let e = EllipticCurveModel::new(&f(5), [0, 0, 0, 1, 0]).unwrap();
        assert_eq!(ec_group(&e).unwrap().factors(), &[2, 2]);
        let e6 = EllipticCurveModel::new(&f(5), [0, 0, 0, 0, 1]).unwrap();
        assert_eq!(ec_group(&e6).unwrap().factors(), &[6]);
    }

    #[test]
    fn addition_law_closure_random() {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for coeffs in [[0i64, 0, 0, 1, 0], [1, 2, 3, 4, 0], [0, 1, 1, 0, 3]] {
            let e = match EllipticCurveModel::new(&f(13), coeffs) {
                Ok(e) => e,
                Err(_) => continue,
            };
            let pts = e.points();
            for _ in 0..200 {
                let p = pts.choose(&mut rng).unwrap();
                let q = pts.choose(&mut rng).unwrap();
                let r = pts.choose(&mut rng).unwrap();
                let s = e.add(p, q);
                assert!(e.is_on_curve(&s));
                assert_eq!(e.add(&s, r), e.add(p, &e.add(q, r)));
                assert_eq!(e.add(p, &e.neg(p)), EcPoint::Infinity);
            }
            // the point count is consistent with Lagrange on orders
            let n = pts.len() as u64;
            for p in pts.iter().take(20) {
                assert_eq!(e.mul_scalar(n, p), EcPoint::Infinity);
            }
        }
    }

    #[test]
    fn torsion_module_examples() {
        let e = EllipticCurveModel::new(&f(5), [0, 0, 0, 1, 0]).unwrap();
        let m = ec_torsion_module(&e, 2).unwrap();
        // all 2-torsion rational: sigma is the identity mod 2
        assert_eq!(m.sigma, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(m.det(), 5 % 2);

        let e6 = EllipticCurveModel::new(&f(5), [0, 0, 0, 0, 1]).unwrap();
        let m = ec_torsion_module(&e6, 3).unwrap();
        assert_eq!(m.trace_mod_n(), 0);
        assert_eq!(m.det(), 2);
    }

    #[test]
    fn h1_size_examples() {
        let id2 = UnramifiedModule::new(2, vec![vec![1, 0], vec![0, 1]], 5);
        assert_eq!(h1_size(&id2), 16);
        let trivial = UnramifiedModule::new(1, vec![vec![0]], 5);
        assert_eq!(h1_size(&trivial), 1);
        // swap of coordinates, n = 3, q ≡ 1 (mod 3)
        let swap = UnramifiedModule::new(3, vec![vec![0, 1], vec![1, 0]], 7);
        assert_eq!(h1_size(&swap), 9);
    }

    #[test]
    fn euler_identity_examples() {
        let id2 = UnramifiedModule::new(2, vec![vec![1, 0], vec![0, 1]], 5);
        let rep = check_euler(&id2);
        assert!(rep.pass);
        assert_eq!((rep.m_points, rep.m_dual_points, rep.h1), (4, 4, 16));
        let trivial = UnramifiedModule::new(1, vec![vec![0]], 5);
        assert!(check_euler(&trivial).pass);
    }

    #[test]
    fn euler_and_duality_on_handmade_modules() {
        // a spread of invertible matrices over Z/n for several n and q
        let cases = [
            (2u64, vec![vec![1u64, 1], vec![0, 1]], 5u64),
            (3, vec![vec![0, 1], vec![1, 0]], 7),
            (3, vec![vec![2, 0], vec![0, 2]], 7),
            (4, vec![vec![1, 2], vec![0, 3]], 5),
            (4, vec![vec![3, 1], vec![2, 1]], 13),
            (6, vec![vec![5, 0], vec![3, 1]], 7),
        ];
        for (n, sigma, q) in cases {
            let m = UnramifiedModule::new(n, sigma, q);
            let rep = check_euler(&m);
            assert!(rep.pass, "Euler fails for n={n} q={q}: {rep:?}");
            // cardinality-level perfection: the dual has the same H¹ size
            assert_eq!(h1_size(&m), h1_size(&m.dual()), "n={n} q={q}");
        }
    }

    #[test]
    fn selfdual_examples() {
        let e = EllipticCurveModel::new(&f(5), [0, 0, 0, 1, 0]).unwrap();
        let rep = check_selfdual(&e, 2).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.cokernel, rep.kernel), (4, 4));

        let e6 = EllipticCurveModel::new(&f(5), [0, 0, 0, 0, 1]).unwrap();
        let rep = check_selfdual(&e6, 3).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.cokernel, rep.kernel), (3, 3));
        // n coprime to the group order: both sides 1
        let rep = check_selfdual(&e6, 7).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.cokernel, rep.kernel), (1, 1));
    }

    #[test]
    fn f_alpha_examples() {
        let g = FinAbGroup::cyclic(4);
        let trivial = g.trivial_character();
        let one = Cyclotomic::one(1);
        let tbl = f_alpha_model(&g, &trivial, &one);
        assert!(tbl.iter().all(|(_, v)| v.as_integer() == Some(1)));

        // order-4 character: values are the four 4th roots of unity, sum 0
        let chi = g.character(vec![1]);
        let tbl = f_alpha_model(&g, &chi, &one);
        let mut acc = Cyclotomic::zero(4);
        for (_, v) in &tbl {
            acc = acc.add(v);
        }
        assert!(acc.is_zero());
        assert_eq!(tbl[1].1, Cyclotomic::root(4, 1));

        // ξ₀ of order 2, trivial character: constant −1
        let minus_one = Cyclotomic::root(2, 1);
        let tbl = f_alpha_model(&g, &trivial, &minus_one);
        assert!(tbl.iter().all(|(_, v)| v.as_integer() == Some(-1)));
        // evaluation matches the Q/Z values
        assert_eq!(chi.eval(&vec![3]), QZ::new(3, 4));
    }

    #[test]
    fn battery_is_deterministic() {
        let b1 = curve_battery(&f(5), 5);
        let b2 = curve_battery(&f(5), 5);
        let key = |c: &EllipticCurveModel| c.coeffs().iter().map(|a| a.index()).collect::<Vec<_>>();
        assert_eq!(
            b1.iter().map(key).collect::<Vec<_>>(),
            b2.iter().map(key).collect::<Vec<_>>()
        );
        // the first smooth curve over F_5 in lexicographic order is y² = x³ + 1
        assert_eq!(key(&b1[0]), vec![0, 0, 0, 0, 1]);
    }
}
