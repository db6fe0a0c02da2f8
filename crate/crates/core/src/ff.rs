//! Exact arithmetic in finite fields F_q, q = p^m ≤ 10^6.
//!
//! The defining modulus is pinned canonically (lexicographically smallest
//! monic irreducible, coefficients compared low-degree-first), so every
//! derived choice (primitive roots, roots of unity, discrete logs) is
//! reproducible bit for bit. All group-structure computations are
//! exhaustive; the scale cap keeps that honest.

use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Largest permitted field size p^m.
pub const MAX_FIELD_SIZE: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FfError {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("field size {0} exceeds the desk-scale cap {MAX_FIELD_SIZE}")]
    TooLarge(u64),
    #[error("p divides n: no n-th roots of unity in characteristic p")]
    PDividesN,
    #[error("element does not lie in the subgroup generated by the base")]
    NotInSubgroup,
}

#[derive(PartialEq, Eq, Hash)]
struct FieldData {
    p: u64,
    m: u32,
    /// Monic degree-m modulus over Z/p, low degree first (length m + 1).
    modulus: Vec<u64>,
}

/// A finite field F_{p^m}, canonically presented.
#[derive(Clone)]
pub struct FieldSpec(Arc<FieldData>);

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for FieldSpec {}

impl std::hash::Hash for FieldSpec {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q())
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Build F_{p^m} with the canonical modulus.
pub fn ff_make_field(p: u64, m: u32) -> Result<FieldSpec, FfError> {
    if !is_prime(p) {
        return Err(FfError::NonPrime(p));
    }
    if m == 0 {
        return Err(FfError::TooLarge(0));
    }
    let mut q: u64 = 1;
    for _ in 0..m {
        q = q.checked_mul(p).ok_or(FfError::TooLarge(u64::MAX))?;
        if q > MAX_FIELD_SIZE {
            return Err(FfError::TooLarge(q));
        }
    }
    let modulus = smallest_irreducible(p, m);
    Ok(FieldSpec(Arc::new(FieldData { p, m, modulus })))
}

/// Lexicographically smallest monic irreducible of degree m over Z/p,
/// comparing coefficient vectors low-degree-first.
fn smallest_irreducible(p: u64, m: u32) -> Vec<u64> {
    let mut coeffs = vec![0u64; m as usize + 1];
    coeffs[m as usize] = 1;
    loop {
        if is_irreducible(p, &coeffs) {
            return coeffs;
        }
        // odometer on the low m coefficients, last coordinate fastest keeps
        // low-degree-first lexicographic order with coeff 0 most significant
        let mut i = m as usize;
        loop {
            assert!(i > 0, "no irreducible of degree {m} over F_{p}?");
            i -= 1;
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
        }
    }
}

/// Irreducibility by trial division: a monic f of degree m ≥ 2 is reducible
/// iff it has a monic factor of degree in 1..=m/2.
fn is_irreducible(p: u64, f: &[u64]) -> bool {
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    for d in 1..=m / 2 {
        let mut div = vec![0u64; d + 1];
        div[d] = 1;
        loop {
            if poly_divides(p, &div, f) {
                return false;
            }
            let mut i = d;
            let mut done = false;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                div[i] += 1;
                if div[i] < p {
                    break;
                }
                div[i] = 0;
            }
            if done {
                break;
            }
        }
    }
    true
}

fn poly_divides(p: u64, div: &[u64], f: &[u64]) -> bool {
    let mut rem: Vec<u64> = f.to_vec();
    let dd = div.len() - 1;
    while rem.len() > dd {
        let top = rem.len() - 1;
        let c = rem[top];
        rem.pop();
        if c != 0 {
            for j in 0..dd {
                let sub = (c * div[j]) % p;
                rem[top - dd + j] = (rem[top - dd + j] + p * p - sub) % p;
            }
        }
    }
    rem.iter().all(|&c| c == 0)
}

impl FieldSpec {
    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn m(&self) -> u32 {
        self.0.m
    }

    /// Field size q = p^m.
    pub fn q(&self) -> u64 {
        self.0.p.pow(self.0.m)
    }

    /// Defining modulus, low degree first.
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FFElement {
        FFElement {
            field: self.clone(),
            coeffs: vec![0; self.0.m as usize],
        }
    }

    pub fn one(&self) -> FFElement {
        self.from_index(1)
    }

    /// Element whose base-p digit expansion is `index` (digit j = coefficient
    /// of x^j); the canonical enumeration runs over index 0..q.
    pub fn from_index(&self, index: u64) -> FFElement {
        assert!(index < self.q());
        let mut coeffs = vec![0u64; self.0.m as usize];
        let mut rest = index;
        for c in coeffs.iter_mut() {
            *c = rest % self.0.p;
            rest /= self.0.p;
        }
        FFElement {
            field: self.clone(),
            coeffs,
        }
    }

    /// Constant (prime-field) element from an integer.
    pub fn from_int(&self, n: i64) -> FFElement {
        let p = self.0.p as i64;
        let r = n.rem_euclid(p) as u64;
        self.from_index(r)
    }

    /// All elements in canonical enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = FFElement> + '_ {
        (0..self.q()).map(move |i| self.from_index(i))
    }
}

/// An element of a finite field, reduced coefficients in [0, p).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FFElement {
    field: FieldSpec,
    coeffs: Vec<u64>,
}

impl fmt::Debug for FFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.index(), self.field.q())
    }
}

impl FFElement {
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Canonical enumeration index, base-p digits.
    pub fn index(&self) -> u64 {
        let p = self.field.p();
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = acc * p + c;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &FFElement) -> FFElement {
        debug_assert_eq!(self.field, other.field);
        let p = self.field.p();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a + b) % p)
            .collect();
        FFElement {
            field: self.field.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> FFElement {
        let p = self.field.p();
        let coeffs = self.coeffs.iter().map(|&a| (p - a) % p).collect();
        FFElement {
            field: self.field.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &FFElement) -> FFElement {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &FFElement) -> FFElement {
        debug_assert_eq!(self.field, other.field);
        let p = self.field.p();
        let m = self.field.m() as usize;
        let modulus = self.field.modulus();
        let mut raw = vec![0u64; 2 * m];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                raw[i + j] = (raw[i + j] + a * b) % p;
            }
        }
        // reduce by the monic modulus
        for i in (m..2 * m).rev() {
            let c = raw[i];
            if c != 0 {
                raw[i] = 0;
                for j in 0..m {
                    let sub = (c * modulus[j]) % p;
                    raw[i - m + j] = (raw[i - m + j] + p - sub) % p;
                }
            }
        }
        raw.truncate(m);
        FFElement {
            field: self.field.clone(),
            coeffs: raw,
        }
    }

    pub fn pow(&self, mut e: u64) -> FFElement {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> FFElement {
        assert!(!self.is_zero(), "inverse of zero");
        self.pow(self.field.q() - 2)
    }

    /// Multiplicative order; panics on zero.
    pub fn mult_order(&self) -> u64 {
        assert!(!self.is_zero());
        let group = self.field.q() - 1;
        let mut ord = group;
        for f in factorize(group) {
            while ord.is_multiple_of(f) && self.pow(ord / f).is_one() {
                ord /= f;
            }
        }
        ord
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// Absolute Frobenius x ↦ x^p.
    pub fn frobenius(&self) -> FFElement {
        self.pow(self.field.p())
    }
}

/// Prime factors of n, each listed once.
pub fn factorize(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Deterministic primitive root: the first element of multiplicative order
/// q − 1 in the canonical enumeration.
pub fn ff_primitive_root(field: &FieldSpec) -> FFElement {
    let q = field.q();
    for i in 1..q {
        let x = field.from_index(i);
        if x.mult_order() == q - 1 {
            return x;
        }
    }
    unreachable!("F_q^x is cyclic");
}

/// All solutions of x^n = 1, in canonical enumeration order.
pub fn ff_nth_roots_of_unity(field: &FieldSpec, n: u64) -> Result<Vec<FFElement>, FfError> {
    if n.is_multiple_of(field.p()) {
        return Err(FfError::PDividesN);
    }
    let q = field.q();
    let d = crate::cyclotomic::gcd(n, q - 1);
    let g = ff_primitive_root(field);
    let step = g.pow((q - 1) / d);
    let mut roots = Vec::with_capacity(d as usize);
    let mut acc = field.one();
    for _ in 0..d {
        roots.push(acc.clone());
        acc = acc.mul(&step);
    }
    roots.sort_by_key(|x| x.index());
    Ok(roots)
}

/// Least e ≥ 0 with base^e = x, by exhaustive stepping through ⟨base⟩.
pub fn ff_dlog(base: &FFElement, x: &FFElement) -> Result<u64, FfError> {
    if base.is_zero() || x.is_zero() {
        return Err(FfError::NotInSubgroup);
    }
    let ord = base.mult_order();
    let mut acc = base.field.one();
    for e in 0..ord {
        if acc == *x {
            return Ok(e);
        }
        acc = acc.mul(base);
    }
    Err(FfError::NotInSubgroup)
}

/// The canonical primitive d-th root of unity g^{(q−1)/d}, g the canonical
/// primitive root. Requires d | q − 1.
pub fn canonical_root_of_unity(field: &FieldSpec, d: u64) -> FFElement {
    let q = field.q();
    assert!(d >= 1 && (q - 1).is_multiple_of(d), "need d | q-1");
    ff_primitive_root(field).pow((q - 1) / d)
}

/// Embedding of a base field into an extension with the same characteristic,
/// pinned by sending the base generator to the first root of the base
/// modulus in the extension's canonical enumeration.
pub struct Embedding {
    base: FieldSpec,
    ext: FieldSpec,
    /// Powers root^0 .. root^{base.m − 1}.
    root_powers: Vec<FFElement>,
}

impl Embedding {
    pub fn new(base: &FieldSpec, ext: &FieldSpec) -> Self {
        assert_eq!(base.p(), ext.p());
        assert_eq!(ext.m() % base.m(), 0, "no subfield embedding");
        let root = (0..ext.q())
            .map(|i| ext.from_index(i))
            .find(|x| eval_base_modulus(base, x).is_zero())
            .expect("base modulus has a root in the extension");
        let mut root_powers = Vec::with_capacity(base.m() as usize);
        let mut acc = ext.one();
        for _ in 0..base.m() {
            root_powers.push(acc.clone());
            acc = acc.mul(&root);
        }
        Embedding {
            base: base.clone(),
            ext: ext.clone(),
            root_powers,
        }
    }

    pub fn map(&self, x: &FFElement) -> FFElement {
        debug_assert_eq!(*x.field(), self.base);
        let mut acc = self.ext.zero();
        for (c, rp) in x.coeffs().iter().zip(&self.root_powers) {
            if *c != 0 {
                acc = acc.add(&rp.mul(&self.ext.from_int(*c as i64)));
            }
        }
        acc
    }

    pub fn ext(&self) -> &FieldSpec {
        &self.ext
    }
}

fn eval_base_modulus(base: &FieldSpec, x: &FFElement) -> FFElement {
    let ext = x.field();
    let mut acc = ext.zero();
    for &c in base.modulus().iter().rev() {
        acc = acc.mul(x).add(&ext.from_int(c as i64));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn make_field_examples() {
        let f7 = ff_make_field(7, 1).unwrap();
        assert_eq!(f7.modulus(), &[0, 1]); // x - 0
                                           // oracle: enumerate monic quadratics over Z/3 low-degree-first and
                                           // take the first with no root (degree 2: root-free = irreducible)
        let mut expected = None;
        'outer: for c0 in 0..3u64 {
            for c1 in 0..3u64 {
                let has_root = (0..3).any(|x| (x * x + c1 * x + c0) % 3 == 0);
                if !has_root {
                    expected = Some(vec![c0, c1, 1]);
                    break 'outer;
                }
            }
        }
        let f9 = ff_make_field(3, 2).unwrap();
        assert_eq!(f9.modulus(), expected.unwrap().as_slice());
        assert_eq!(f9.modulus(), &[1, 0, 1]); // x^2 + 1

        assert_eq!(ff_make_field(4, 1), Err(FfError::NonPrime(4)));
        assert!(matches!(ff_make_field(2, 21), Err(FfError::TooLarge(_))));
        // determinism across calls
        assert_eq!(ff_make_field(3, 2).unwrap().modulus(), f9.modulus());
    }

    #[test]
    fn classic_moduli() {
        assert_eq!(ff_make_field(2, 2).unwrap().modulus(), &[1, 1, 1]);
        // low-degree-first lexicographic order picks x^3 + x^2 + 1 over
        // the conventional x^3 + x + 1
        assert_eq!(ff_make_field(2, 3).unwrap().modulus(), &[1, 0, 1, 1]);
    }

    #[test]
    fn primitive_roots() {
        // oracle: exhaustive order check over all candidates
        for (p, m, expected) in [(7u64, 1u32, 3u64), (2, 1, 1), (5, 1, 2)] {
            let f = ff_make_field(p, m).unwrap();
            let by_scan = (1..f.q())
                .map(|i| f.from_index(i))
                .find(|x| {
                    let ord = (1..f.q()).find(|&e| x.pow(e).is_one()).unwrap();
                    ord == f.q() - 1
                })
                .unwrap();
            let g = ff_primitive_root(&f);
            assert_eq!(g, by_scan);
            assert_eq!(g.index(), expected);
            assert_eq!(ff_primitive_root(&f), g);
        }
    }

    #[test]
    fn roots_of_unity() {
        let f5 = ff_make_field(5, 1).unwrap();
        let r = ff_nth_roots_of_unity(&f5, 2).unwrap();
        assert_eq!(r.iter().map(|x| x.index()).collect::<Vec<_>>(), [1, 4]);
        let f7 = ff_make_field(7, 1).unwrap();
        let r = ff_nth_roots_of_unity(&f7, 3).unwrap();
        assert_eq!(r.iter().map(|x| x.index()).collect::<Vec<_>>(), [1, 2, 4]);
        assert_eq!(ff_nth_roots_of_unity(&f5, 5), Err(FfError::PDividesN));
    }

    #[test]
    fn root_count_matches_gcd() {
        for (p, m) in [(5u64, 1u32), (7, 1), (3, 2), (2, 3)] {
            let f = ff_make_field(p, m).unwrap();
            for n in 1..=50u64 {
                if n % p == 0 {
                    continue;
                }
                let brute = f
                    .elements()
                    .filter(|x| !x.is_zero() && x.pow(n).is_one())
                    .count() as u64;
                assert_eq!(brute, crate::cyclotomic::gcd(n, f.q() - 1));
                assert_eq!(ff_nth_roots_of_unity(&f, n).unwrap().len() as u64, brute);
            }
        }
    }

    #[test]
    fn dlog_examples() {
        let f7 = ff_make_field(7, 1).unwrap();
        let g = f7.from_index(3);
        assert_eq!(ff_dlog(&g, &f7.from_index(6)), Ok(3));
        assert_eq!(ff_dlog(&g, &f7.one()), Ok(0));
        assert_eq!(ff_dlog(&g, &f7.zero()), Err(FfError::NotInSubgroup));
        // 2 has order 3 in F_7^x; 3 is not a power of 2
        let h = f7.from_index(2);
        assert_eq!(ff_dlog(&h, &f7.from_index(3)), Err(FfError::NotInSubgroup));
    }

    #[test]
    fn field_axioms_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for (p, m) in [(5u64, 1u32), (3, 2), (2, 4), (7, 2)] {
            let f = ff_make_field(p, m).unwrap();
            for _ in 0..200 {
                let a = f.from_index(rng.gen_range(0..f.q()));
                let b = f.from_index(rng.gen_range(0..f.q()));
                let c = f.from_index(rng.gen_range(0..f.q()));
                assert_eq!(a.add(&b), b.add(&a));
                assert_eq!(a.mul(&b), b.mul(&a));
                assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
                if !a.is_zero() {
                    assert!(a.mul(&a.inv()).is_one());
                }
            }
        }
    }

    #[test]
    fn frobenius_additive_fixes_prime_field() {
        let f = ff_make_field(3, 3).unwrap();
        let fixed: Vec<u64> = f
            .elements()
            .filter(|x| x.frobenius() == *x)
            .map(|x| x.index())
            .collect();
        assert_eq!(fixed, vec![0, 1, 2]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = f.from_index(rng.gen_range(0..f.q()));
            let b = f.from_index(rng.gen_range(0..f.q()));
            assert_eq!(a.add(&b).frobenius(), a.frobenius().add(&b.frobenius()));
        }
    }

    #[test]
    fn embedding_is_a_ring_map() {
        let base = ff_make_field(3, 2).unwrap();
        let ext = ff_make_field(3, 4).unwrap();
        let emb = Embedding::new(&base, &ext);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = base.from_index(rng.gen_range(0..base.q()));
            let b = base.from_index(rng.gen_range(0..base.q()));
            assert_eq!(emb.map(&a.mul(&b)), emb.map(&a).mul(&emb.map(&b)));
            assert_eq!(emb.map(&a.add(&b)), emb.map(&a).add(&emb.map(&b)));
        }
        assert!(emb.map(&base.one()).is_one());
    }
}
