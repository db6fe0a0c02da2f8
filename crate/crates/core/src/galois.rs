//! Finite abelian groups and their characters, the explicit model of
//! H¹(F, Γ) ≅ Γ ⊕ Hom(μ(F), Γ) for F = F_q((t)), the skew pairing on it,
//! torsor twisting of Γ-varieties over F_q, and the Burnside-type groupoid
//! point-count identity.
//!
//! Everything is exact: pairings land in Q/Z, counts are integers, averages
//! are rationals.

use crate::cyclotomic::{gcd, lcm, Cyclotomic};
use crate::ff::{canonical_root_of_unity, Embedding, FieldSpec};
use crate::localfield::{LocalFieldSpec, SeriesError, TruncatedLaurentSeries};
use crate::numeric::{Rat, QZ};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Enumeration cap for brute-force model point sets.
pub const MODEL_ENUM_CAP: u64 = 600_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GaloisError {
    #[error(
        "the residue field is missing the required roots of unity (exponent does not divide q-1)"
    )]
    RootsOfUnityMissing,
    #[error("group order is divisible by the residue characteristic")]
    BadCharacteristic,
    #[error("model too large for exhaustive enumeration")]
    ModelTooLarge,
    #[error("owner mismatch between group-valued arguments")]
    OwnerMismatch,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A finite abelian group in invariant-factor form d₁ | d₂ | … | d_r.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinAbGroup {
    factors: Vec<u64>,
}

/// Element of a [`FinAbGroup`]: one residue per invariant factor.
pub type GroupElem = Vec<u64>;

impl fmt::Debug for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FinAbGroup {
    /// Build from invariant factors; each ≥ 2 and dᵢ | dᵢ₊₁.
    pub fn new(factors: Vec<u64>) -> Self {
        for w in factors.windows(2) {
            assert!(w[1] % w[0] == 0, "invariant factors must divide in turn");
        }
        assert!(factors.iter().all(|&d| d >= 2));
        FinAbGroup { factors }
    }

    pub fn trivial() -> Self {
        FinAbGroup {
            factors: Vec::new(),
        }
    }

    pub fn cyclic(d: u64) -> Self {
        if d == 1 {
            Self::trivial()
        } else {
            Self::new(vec![d])
        }
    }

    /// Normalize an arbitrary product of cyclic groups to invariant factors.
    pub fn from_cyclic_orders(orders: &[u64]) -> Self {
        let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for &n in orders {
            let mut n = n;
            let mut p = 2;
            while p * p <= n {
                if n % p == 0 {
                    let mut e = 0;
                    while n % p == 0 {
                        n /= p;
                        e += 1;
                    }
                    by_prime.entry(p).or_default().push(e);
                }
                p += 1;
            }
            if n > 1 {
                by_prime.entry(n).or_default().push(1);
            }
        }
        let rank = by_prime.values().map(|v| v.len()).max().unwrap_or(0);
        let mut factors = vec![1u64; rank];
        for (p, mut exps) in by_prime {
            exps.sort_unstable_by(|a, b| b.cmp(a));
            for (i, e) in exps.into_iter().enumerate() {
                factors[i] *= p.pow(e);
            }
        }
        factors.retain(|&d| d > 1);
        factors.reverse();
        FinAbGroup { factors }
    }

    /// Parse the config syntax `"Z/2 x Z/4"`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(Self::trivial());
        }
        let mut orders = Vec::new();
        for part in s.split(['x', 'X']) {
            let part = part.trim();
            let n: u64 = part
                .strip_prefix("Z/")
                .ok_or_else(|| format!("bad cyclic factor {part:?}"))?
                .parse()
                .map_err(|_| format!("bad cyclic order in {part:?}"))?;
            if n == 0 {
                return Err("cyclic order must be positive".into());
            }
            orders.push(n);
        }
        Ok(Self::from_cyclic_orders(&orders))
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn zero(&self) -> GroupElem {
        vec![0; self.factors.len()]
    }

    pub fn is_zero_elem(&self, a: &GroupElem) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn add(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        a.iter()
            .zip(b)
            .zip(&self.factors)
            .map(|((x, y), d)| (x + y) % d)
            .collect()
    }

    pub fn neg(&self, a: &GroupElem) -> GroupElem {
        a.iter()
            .zip(&self.factors)
            .map(|(x, d)| (d - x) % d)
            .collect()
    }

    pub fn scale(&self, k: u64, a: &GroupElem) -> GroupElem {
        a.iter()
            .zip(&self.factors)
            .map(|(x, d)| (x % d * (k % d)) % d)
            .collect()
    }

    pub fn elem_order(&self, a: &GroupElem) -> u64 {
        a.iter()
            .zip(&self.factors)
            .map(|(x, d)| d / gcd(*x, *d))
            .fold(1, lcm)
    }

    /// All elements in lexicographic order (first coordinate most significant).
    pub fn elements(&self) -> Vec<GroupElem> {
        let mut out = Vec::with_capacity(self.order() as usize);
        let mut cur = self.zero();
        loop {
            out.push(cur.clone());
            let mut i = self.factors.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.factors[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    /// The i-th standard generator.
    pub fn generator(&self, i: usize) -> GroupElem {
        let mut g = self.zero();
        g[i] = 1;
        g
    }

    /// Character with the given exponent tuple.
    pub fn character(&self, exps: GroupElem) -> Character {
        assert_eq!(exps.len(), self.factors.len());
        let exps = exps.iter().zip(&self.factors).map(|(e, d)| e % d).collect();
        Character {
            owner: self.clone(),
            exps,
        }
    }

    pub fn trivial_character(&self) -> Character {
        Character {
            owner: self.clone(),
            exps: self.zero(),
        }
    }
}

/// A character Γ → Q/Z, determined by exponents against the invariant factors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Character {
    owner: FinAbGroup,
    exps: GroupElem,
}

impl Character {
    pub fn owner(&self) -> &FinAbGroup {
        &self.owner
    }

    pub fn exps(&self) -> &GroupElem {
        &self.exps
    }

    /// Evaluation in Q/Z: Σ aᵢ eᵢ / dᵢ.
    pub fn eval(&self, a: &GroupElem) -> QZ {
        let mut acc = QZ::zero();
        for ((x, e), d) in a.iter().zip(&self.exps).zip(self.owner.factors()) {
            acc = acc.add(&QZ::new((x * e) as i64, *d));
        }
        acc
    }

    /// Evaluation as an exact root of unity in Z\[ζ_order\]; order must be a
    /// multiple of the group exponent.
    pub fn eval_root(&self, a: &GroupElem, order: u64) -> Cyclotomic {
        let v = self.eval(a);
        let rep = v.rep();
        let den: u64 = rep.denom().try_into().expect("denominator fits u64");
        let num: u64 = rep.numer().try_into().expect("numerator fits u64");
        assert!(
            order.is_multiple_of(den),
            "character order must divide {order}"
        );
        Cyclotomic::root(order, num * (order / den))
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Character) -> Character {
        assert_eq!(self.owner, other.owner);
        Character {
            owner: self.owner.clone(),
            exps: self.owner.add(&self.exps, &other.exps),
        }
    }

    /// Precompose with a homomorphism given by generator images.
    pub fn pullback(&self, source: &FinAbGroup, gen_images: &[GroupElem]) -> Character {
        assert_eq!(gen_images.len(), source.rank());
        let mut exps = Vec::with_capacity(source.rank());
        for (i, img) in gen_images.iter().enumerate() {
            let v = self.eval(img);
            let rep = v.rep();
            let den: u64 = rep.denom().try_into().unwrap();
            let num: u64 = rep.numer().try_into().unwrap();
            let d = source.factors()[i];
            assert!(
                d.is_multiple_of(den),
                "homomorphism does not respect generator orders"
            );
            exps.push(num * (d / den) % d);
        }
        Character {
            owner: source.clone(),
            exps,
        }
    }
}

/// An element of H¹(F, Γ) as (unramified part, ramified part); the ramified
/// part identifies Hom(μ(F), Γ) with Γ through the canonical generator of
/// μ(F) ≅ F_q^×, which needs exponent(Γ) | q − 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TorsorClass {
    owner: FinAbGroup,
    pub unr: GroupElem,
    pub ram: GroupElem,
}

impl TorsorClass {
    pub fn new(owner: &FinAbGroup, unr: GroupElem, ram: GroupElem) -> Self {
        TorsorClass {
            owner: owner.clone(),
            unr,
            ram,
        }
    }

    pub fn owner(&self) -> &FinAbGroup {
        &self.owner
    }

    pub fn add(&self, other: &TorsorClass) -> TorsorClass {
        assert_eq!(self.owner, other.owner);
        TorsorClass {
            owner: self.owner.clone(),
            unr: self.owner.add(&self.unr, &other.unr),
            ram: self.owner.add(&self.ram, &other.ram),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.owner.is_zero_elem(&self.unr) && self.owner.is_zero_elem(&self.ram)
    }
}

fn check_admissible(group: &FinAbGroup, field: &LocalFieldSpec) -> Result<(), GaloisError> {
    let q = field.residue().q();
    let p = field.residue().p();
    if group.order().is_multiple_of(p) {
        return Err(GaloisError::BadCharacteristic);
    }
    if group.exponent() > 1 && !(q - 1).is_multiple_of(group.exponent()) {
        return Err(GaloisError::RootsOfUnityMissing);
    }
    Ok(())
}

/// All |Γ|² classes of H¹(F, Γ) in canonical order: unramified part
/// lexicographic, then ramified part.
pub fn h1_enumerate(
    group: &FinAbGroup,
    field: &LocalFieldSpec,
) -> Result<Vec<TorsorClass>, GaloisError> {
    check_admissible(group, field)?;
    let els = group.elements();
    let mut out = Vec::with_capacity(els.len() * els.len());
    for unr in &els {
        for ram in &els {
            out.push(TorsorClass::new(group, unr.clone(), ram.clone()));
        }
    }
    Ok(out)
}

/// The skew pairing ⟨(x,f),(y,g)⟩ = f(y) − g(x) on H¹(F, Γ), reading ramified
/// parts as characters through the fixed identification Γ ≅ Γ* (canonical
/// generators, canonical ξ).
pub fn h1_pairing(a: &TorsorClass, b: &TorsorClass) -> Result<QZ, GaloisError> {
    if a.owner != b.owner {
        return Err(GaloisError::OwnerMismatch);
    }
    let f = a.owner.character(a.ram.clone());
    let g = b.owner.character(b.ram.clone());
    Ok(f.eval(&b.unr).sub(&g.eval(&a.unr)))
}

/// Kummer class of x ∈ F^× in H¹(F, Z/d): unramified part the dlog class of
/// the Teichmüller unit, ramified part v(x) mod d. Requires d | q − 1.
pub fn kummer_class(x: &TruncatedLaurentSeries, d: u64) -> Result<TorsorClass, GaloisError> {
    let q = x.field().q();
    if d > 1 && !(q - 1).is_multiple_of(d) {
        return Err(GaloisError::RootsOfUnityMissing);
    }
    let (v_mod, teich_class) = x.power_class(d)?;
    let group = FinAbGroup::cyclic(d);
    if d == 1 {
        return Ok(TorsorClass::new(&group, vec![], vec![]));
    }
    Ok(TorsorClass::new(&group, vec![teich_class], vec![v_mod]))
}

// --- Γ-varieties over F_q and their twists ----------------------------------

/// A toy Γ-variety over F_q: a diagonal linear action on affine space, or an
/// explicit finite point model with commuting Γ- and Frobenius-permutations.
#[derive(Clone, Debug)]
pub enum GammaVarietyAction {
    Linear(LinearDiagonalAction),
    PointSet(PointSetAction),
}

/// Diagonal action on A^n over F_q: generator i scales coordinate j by
/// ζ_{dᵢ}^{weights\[i\]\[j\]}, with the canonical roots of unity.
#[derive(Clone, Debug)]
pub struct LinearDiagonalAction {
    group: FinAbGroup,
    field: FieldSpec,
    weights: Vec<Vec<u64>>,
    dim: usize,
}

impl LinearDiagonalAction {
    pub fn new(
        group: FinAbGroup,
        field: FieldSpec,
        weights: Vec<Vec<u64>>,
        dim: usize,
    ) -> Result<Self, GaloisError> {
        let q = field.q();
        if group.exponent() > 1 && !(q - 1).is_multiple_of(group.exponent()) {
            return Err(GaloisError::RootsOfUnityMissing);
        }
        assert_eq!(weights.len(), group.rank());
        assert!(weights.iter().all(|w| w.len() == dim));
        let weights = weights
            .iter()
            .zip(group.factors())
            .map(|(row, d)| row.iter().map(|w| w % d).collect())
            .collect();
        Ok(LinearDiagonalAction {
            group,
            field,
            weights,
            dim,
        })
    }

    /// Cyclic convenience: Z/d acting by diag(ζ^{e₁}, …, ζ^{e_n}).
    pub fn cyclic(d: u64, weights: &[u64], field: FieldSpec) -> Result<Self, GaloisError> {
        let rows = if d == 1 {
            Vec::new()
        } else {
            vec![weights.to_vec()]
        };
        Self::new(FinAbGroup::cyclic(d), field, rows, weights.len())
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exponent a with eigenvalue ζ_D^a of the element on the coordinate,
    /// D the group exponent.
    pub fn eigen_exponent(&self, elem: &GroupElem, coord: usize) -> u64 {
        let big_d = self.group.exponent();
        let mut acc = 0u64;
        for ((c, row), d) in elem.iter().zip(&self.weights).zip(self.group.factors()) {
            acc = (acc + c * (big_d / d) % big_d * (row[coord] % d)) % big_d;
        }
        acc
    }

    /// Coordinates fixed by the element.
    pub fn fixed_coords(&self, elem: &GroupElem) -> Vec<usize> {
        (0..self.dim())
            .filter(|&j| self.eigen_exponent(elem, j) == 0)
            .collect()
    }

    /// The induced action on the fixed subspace of `elem`.
    pub fn restrict_to_fixed(&self, elem: &GroupElem) -> LinearDiagonalAction {
        let coords = self.fixed_coords(elem);
        let weights: Vec<Vec<u64>> = self
            .weights
            .iter()
            .map(|row| coords.iter().map(|&j| row[j]).collect())
            .collect();
        LinearDiagonalAction {
            group: self.group.clone(),
            field: self.field.clone(),
            weights,
            dim: coords.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PointSetAction {
    group: FinAbGroup,
    size: usize,
    gens: Vec<Vec<usize>>,
    frob: Vec<usize>,
}

impl PointSetAction {
    pub fn new(
        group: FinAbGroup,
        gens: Vec<Vec<usize>>,
        frob: Vec<usize>,
    ) -> Result<Self, GaloisError> {
        let size = frob.len();
        assert_eq!(gens.len(), group.rank());
        for g in &gens {
            assert_eq!(g.len(), size);
            assert!(is_permutation(g));
        }
        assert!(is_permutation(&frob));
        for g in &gens {
            for i in 0..size {
                if g[frob[i]] != frob[g[i]] {
                    return Err(GaloisError::OwnerMismatch);
                }
            }
        }
        for a in &gens {
            for b in &gens {
                if compose(a, b) != compose(b, a) {
                    return Err(GaloisError::OwnerMismatch);
                }
            }
        }
        for (g, d) in gens.iter().zip(group.factors()) {
            let mut acc: Vec<usize> = (0..size).collect();
            for _ in 0..*d {
                acc = compose(g, &acc);
            }
            assert!(
                acc.iter().enumerate().all(|(i, &x)| i == x),
                "generator order must divide the factor"
            );
        }
        Ok(PointSetAction {
            group,
            size,
            gens,
            frob,
        })
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn elem_perm(&self, elem: &GroupElem) -> Vec<usize> {
        let mut acc: Vec<usize> = (0..self.size).collect();
        for (c, g) in elem.iter().zip(&self.gens) {
            for _ in 0..*c {
                acc = compose(g, &acc);
            }
        }
        acc
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| {
        if i < p.len() && !seen[i] {
            seen[i] = true;
            true
        } else {
            false
        }
    })
}

/// (a ∘ b)(i) = a[b\[i\]].
fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

impl GammaVarietyAction {
    pub fn group(&self) -> &FinAbGroup {
        match self {
            GammaVarietyAction::Linear(a) => a.group(),
            GammaVarietyAction::PointSet(a) => a.group(),
        }
    }
}

/// #M_T(F_{q^m}) for the unramified twist T ↔ τ: the number of fixed points
/// of (τ ∘ Frobenius)^m on M(F̄_q). For diagonal linear models this is an
/// exact per-coordinate solution count of ζ^a x^{q^m} = x carried out in the
/// ambient cyclic groups; for point models a permutation fixed-point count.
pub fn twist_pointcount(
    action: &GammaVarietyAction,
    tau: &GroupElem,
    m: u32,
) -> Result<u128, GaloisError> {
    assert!(m >= 1);
    match action {
        GammaVarietyAction::PointSet(ps) => {
            let tau_perm = ps.elem_perm(tau);
            let phi = compose(&tau_perm, &ps.frob);
            let mut acc: Vec<usize> = (0..ps.size).collect();
            for _ in 0..m {
                acc = compose(&phi, &acc);
            }
            Ok(acc.iter().enumerate().filter(|(i, &x)| *i == x).count() as u128)
        }
        GammaVarietyAction::Linear(lin) => {
            let big_d = lin.group.exponent().max(1);
            let q = lin.field.q();
            let mut total: u128 = 1;
            for j in 0..lin.dim() {
                let a = if lin.group.rank() == 0 {
                    0
                } else {
                    lin.eigen_exponent(tau, j)
                };
                // ζ ∈ F_q, so the m-fold composite has eigenvalue ζ^{a·m}
                let b = (a as u128 * m as u128 % big_d as u128) as u64;
                total *= count_twisted_coordinate(q, m, big_d, b);
            }
            Ok(total)
        }
    }
}

/// Solutions of ζ_D^b · x^{q^m} = x over F̄_q, counted inside the cyclic group
/// that contains them all: x = 0 together with the solutions of
/// x^{q^m − 1} = ζ_D^{−b} in F_{q^{m·s}}^×, s the order of the right side.
fn count_twisted_coordinate(q: u64, m: u32, big_d: u64, b: u64) -> u128 {
    let qm = BigUint::from(q).pow(m);
    if b.is_multiple_of(big_d) {
        let c: u128 = qm.try_into().expect("q^m fits u128");
        return c;
    }
    let s = big_d / gcd(big_d, b);
    let big_m = BigUint::from(q).pow(m * s as u32) - BigUint::one();
    let a = &qm - BigUint::one();
    let g = gcd_big(&a, &big_m);
    // solvable iff ord(c) = s divides M / g
    let cofactor = &big_m / &g;
    if (&cofactor % BigUint::from(s)).is_zero() {
        let nonzero: u128 = g.try_into().expect("count fits u128");
        nonzero + 1
    } else {
        1
    }
}

fn gcd_big(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// One isomorphism class of F_q-points of the quotient groupoid \[M/Γ\].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidPoint {
    /// Unramified twist sector the point lives in.
    pub twist: GroupElem,
    /// Orbit size under Γ.
    pub orbit_size: u64,
    /// Automorphism group order (the stabilizer).
    pub aut_order: u64,
}

/// Exhaustive enumeration of the groupoid of F_q-points of \[M/Γ\]: objects are
/// pairs (τ, m̄) with m̄ fixed by τ∘Frobenius, morphisms the Γ-translations.
pub fn groupoid_points(action: &GammaVarietyAction) -> Result<Vec<GroupoidPoint>, GaloisError> {
    match action {
        GammaVarietyAction::PointSet(ps) => {
            let mut out = Vec::new();
            for tau in ps.group.elements() {
                let tau_perm = ps.elem_perm(&tau);
                let phi = compose(&tau_perm, &ps.frob);
                let fixed: Vec<usize> = (0..ps.size).filter(|&i| phi[i] == i).collect();
                let all_perms: Vec<Vec<usize>> = ps
                    .group
                    .elements()
                    .iter()
                    .map(|g| ps.elem_perm(g))
                    .collect();
                let mut seen = vec![false; ps.size];
                for &i in &fixed {
                    if seen[i] {
                        continue;
                    }
                    let mut orbit = Vec::new();
                    for perm in &all_perms {
                        let j = perm[i];
                        if !orbit.contains(&j) {
                            orbit.push(j);
                        }
                    }
                    for &j in &orbit {
                        seen[j] = true;
                    }
                    out.push(GroupoidPoint {
                        twist: tau.clone(),
                        orbit_size: orbit.len() as u64,
                        aut_order: ps.group.order() / orbit.len() as u64,
                    });
                }
            }
            Ok(out)
        }
        GammaVarietyAction::Linear(lin) => {
            let tables = LinearModelTables::build(lin)?;
            let mut out = Vec::new();
            for tau in lin.group.elements() {
                let fixed = tables.twisted_fixed_points(lin, &tau);
                let mut seen = std::collections::HashSet::new();
                for pt in &fixed {
                    if seen.contains(pt) {
                        continue;
                    }
                    let mut orbit = Vec::new();
                    for g in lin.group.elements() {
                        let img = tables.apply_group(lin, &g, pt);
                        if !orbit.contains(&img) {
                            orbit.push(img);
                        }
                    }
                    for o in &orbit {
                        seen.insert(o.clone());
                    }
                    out.push(GroupoidPoint {
                        twist: tau.clone(),
                        orbit_size: orbit.len() as u64,
                        aut_order: lin.group.order() / orbit.len() as u64,
                    });
                }
            }
            Ok(out)
        }
    }
}

/// Index tables over F_{q^D} for brute-force work on a linear model.
struct LinearModelTables {
    ext: FieldSpec,
    /// index ↦ index of x^q
    frob: Vec<u32>,
    /// eigenvalue table: mult-by-ζ_D^a maps, index a
    zeta_mult: Vec<Vec<u32>>,
}

impl LinearModelTables {
    #[allow(clippy::needless_range_loop)]
    fn build(lin: &LinearDiagonalAction) -> Result<Self, GaloisError> {
        let big_d = lin.group.exponent().max(1);
        let base = &lin.field;
        let q = base.q();
        let ext_m = base.m() * big_d as u32;
        let ext_size = BigUint::from(base.p()).pow(ext_m);
        let total = ext_size.pow(lin.dim().max(1) as u32);
        if total > BigUint::from(MODEL_ENUM_CAP) {
            return Err(GaloisError::ModelTooLarge);
        }
        let ext =
            crate::ff::ff_make_field(base.p(), ext_m).map_err(|_| GaloisError::ModelTooLarge)?;
        let emb = Embedding::new(base, &ext);
        let zeta = if big_d == 1 {
            base.one()
        } else {
            canonical_root_of_unity(base, big_d)
        };
        let zeta_ext = emb.map(&zeta);
        let n = ext.q() as usize;
        let mut frob = vec![0u32; n];
        for i in 0..n {
            frob[i] = ext.from_index(i as u64).pow(q).index() as u32;
        }
        let mut zeta_mult = Vec::with_capacity(big_d as usize);
        let mut zp = ext.one();
        for _ in 0..big_d {
            let mut tbl = vec![0u32; n];
            for i in 0..n {
                tbl[i] = ext.from_index(i as u64).mul(&zp).index() as u32;
            }
            zeta_mult.push(tbl);
            zp = zp.mul(&zeta_ext);
        }
        Ok(LinearModelTables {
            ext,
            frob,
            zeta_mult,
        })
    }

    /// All points of (F_{q^D})^n fixed by τ ∘ Frobenius.
    fn twisted_fixed_points(&self, lin: &LinearDiagonalAction, tau: &GroupElem) -> Vec<Vec<u32>> {
        let dim = lin.dim();
        let eigen: Vec<usize> = (0..dim)
            .map(|j| {
                if lin.group.rank() == 0 {
                    0
                } else {
                    lin.eigen_exponent(tau, j) as usize
                }
            })
            .collect();
        // per-coordinate fixed sets, then cartesian product
        let per_coord: Vec<Vec<u32>> = (0..dim)
            .map(|j| {
                (0..self.ext.q() as usize)
                    .filter(|&i| self.zeta_mult[eigen[j]][self.frob[i] as usize] == i as u32)
                    .map(|i| i as u32)
                    .collect()
            })
            .collect();
        let mut points = vec![Vec::new()];
        for coord_set in &per_coord {
            let mut next = Vec::with_capacity(points.len() * coord_set.len());
            for p in &points {
                for &c in coord_set {
                    let mut np = p.clone();
                    np.push(c);
                    next.push(np);
                }
            }
            points = next;
        }
        if dim == 0 {
            points = vec![Vec::new()];
        }
        points
    }

    fn apply_group(&self, lin: &LinearDiagonalAction, g: &GroupElem, pt: &[u32]) -> Vec<u32> {
        pt.iter()
            .enumerate()
            .map(|(j, &c)| {
                let a = if lin.group.rank() == 0 {
                    0
                } else {
                    lin.eigen_exponent(g, j) as usize
                };
                self.zeta_mult[a][c as usize]
            })
            .collect()
    }
}

/// Outcome of the two point-count routes for \[M/Γ\](F_q).
#[derive(Clone, Debug)]
pub struct BurnsideReport {
    /// Σ 1/|Aut| over isomorphism classes, by direct groupoid enumeration.
    pub groupoid_count: Rat,
    /// (1/|Γ|) Σ_T #M_T(F_q) over unramified twists.
    pub twist_average: Rat,
    /// Per-twist counts in canonical element order.
    pub per_twist: Vec<(GroupElem, u128)>,
    pub equal: bool,
}

/// Check the averaging identity #\[M/Γ\](F_q) = (1/|Γ|) Σ_T #M_T(F_q) by
/// computing both sides independently.
pub fn burnside_check(action: &GammaVarietyAction) -> Result<BurnsideReport, GaloisError> {
    let group = action.group().clone();
    let mut per_twist = Vec::new();
    let mut sum = Rat::zero();
    for tau in group.elements() {
        let n = twist_pointcount(action, &tau, 1)?;
        sum += Rat::from_integer(n.into());
        per_twist.push((tau, n));
    }
    let twist_average = sum / Rat::from_integer(group.order().into());
    let pts = groupoid_points(action)?;
    let mut groupoid_count = Rat::zero();
    for p in &pts {
        groupoid_count += Rat::new(1.into(), p.aut_order.into());
    }
    let equal = groupoid_count == twist_average;
    Ok(BurnsideReport {
        groupoid_count,
        twist_average,
        per_twist,
        equal,
    })
}

/// Brute-force count of Fix((τ∘Fr)^m) for a linear model, enumerating each
/// coordinate inside the smallest field containing its solutions. Returns
/// None when that field exceeds the enumeration cap.
pub fn twist_pointcount_brute(
    action: &GammaVarietyAction,
    tau: &GroupElem,
    m: u32,
) -> Result<Option<u128>, GaloisError> {
    match action {
        GammaVarietyAction::PointSet(ps) => {
            // step the composite one application at a time
            let tau_perm = ps.elem_perm(tau);
            let mut count = 0u128;
            for i in 0..ps.size {
                let mut x = i;
                for _ in 0..m {
                    x = tau_perm[ps.frob[x]];
                }
                if x == i {
                    count += 1;
                }
            }
            Ok(Some(count))
        }
        GammaVarietyAction::Linear(lin) => {
            let big_d = lin.group.exponent().max(1);
            let base = &lin.field;
            let q = base.q();
            let mut total: u128 = 1;
            for j in 0..lin.dim() {
                let a = if lin.group.rank() == 0 {
                    0
                } else {
                    lin.eigen_exponent(tau, j)
                };
                let b = (a as u128 * m as u128 % big_d as u128) as u64;
                let s = if b == 0 { 1 } else { big_d / gcd(big_d, b) };
                let deg = base.m() * m * s as u32;
                let size = BigUint::from(base.p()).pow(deg);
                if size > BigUint::from(MODEL_ENUM_CAP) {
                    return Ok(None);
                }
                let ext = crate::ff::ff_make_field(base.p(), deg)
                    .map_err(|_| GaloisError::ModelTooLarge)?;
                let emb = Embedding::new(base, &ext);
                let zeta_b = if b == 0 {
                    base.one()
                } else {
                    canonical_root_of_unity(base, big_d).pow(b)
                };
                let zb = emb.map(&zeta_b);
                let mut count = 0u128;
                for i in 0..ext.q() {
                    let x = ext.from_index(i);
                    let mut y = x.clone();
                    for _ in 0..m {
                        y = y.pow(q);
                    }
                    if zb.mul(&y) == x {
                        count += 1;
                    }
                }
                total *= count;
            }
            Ok(Some(total))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::ff_make_field;
    use crate::localfield::parse_series;
    use crate::numeric::ratio;

    fn local(p: u64, m: u32) -> LocalFieldSpec {
        LocalFieldSpec::new(ff_make_field(p, m).unwrap(), 8)
    }

    #[test]
    fn group_normalization() {
        let g = FinAbGroup::from_cyclic_orders(&[2, 3]);
        assert_eq!(g.factors(), &[6]);
        let g = FinAbGroup::from_cyclic_orders(&[2, 4]);
        assert_eq!(g.factors(), &[2, 4]);
        let g = FinAbGroup::from_cyclic_orders(&[6, 4]);
        assert_eq!(g.factors(), &[2, 12]);
        assert_eq!(FinAbGroup::parse("Z/2 x Z/4").unwrap().factors(), &[2, 4]);
        assert_eq!(FinAbGroup::parse("1").unwrap().order(), 1);
        assert!(FinAbGroup::parse("S/3").is_err());
    }

    #[test]
    fn element_orders_and_enumeration() {
        let g = FinAbGroup::new(vec![2, 4]);
        assert_eq!(g.order(), 8);
        assert_eq!(g.exponent(), 4);
        let els = g.elements();
        assert_eq!(els.len(), 8);
        assert_eq!(els[0], vec![0, 0]);
        assert_eq!(els[1], vec![0, 1]);
        assert_eq!(els[4], vec![1, 0]);
        assert_eq!(g.elem_order(&vec![1, 2]), 2);
        assert_eq!(g.elem_order(&vec![0, 3]), 4);
    }

    #[test]
    fn h1_enumeration_counts() {
        let z2 = FinAbGroup::cyclic(2);
        let f3t = local(3, 1);
        let classes = h1_enumerate(&z2, &f3t).unwrap();
        assert_eq!(classes.len(), 4);
        // canonical order: unr lexicographic then ram
        assert_eq!(
            (classes[0].unr.clone(), classes[0].ram.clone()),
            (vec![0], vec![0])
        );
        assert_eq!(
            (classes[1].unr.clone(), classes[1].ram.clone()),
            (vec![0], vec![1])
        );
        assert_eq!(
            (classes[2].unr.clone(), classes[2].ram.clone()),
            (vec![1], vec![0])
        );

        // Z/3 needs cube roots of unity in F_5, and 3 does not divide 4
        let z3 = FinAbGroup::cyclic(3);
        let f5t = local(5, 1);
        assert_eq!(
            h1_enumerate(&z3, &f5t).err(),
            Some(GaloisError::RootsOfUnityMissing)
        );
        // Z/2 over F_4((t)) fails both admissibility clauses: 2 divides the
        // residue characteristic, and 2 does not divide q - 1 = 3
        assert!(h1_enumerate(&z2, &local(2, 2)).is_err());

        let triv = FinAbGroup::trivial();
        assert_eq!(h1_enumerate(&triv, &f3t).unwrap().len(), 1);
        // characteristic dividing the order
        assert_eq!(
            h1_enumerate(&FinAbGroup::cyclic(3), &local(3, 1)).err(),
            Some(GaloisError::BadCharacteristic)
        );
    }

    #[test]
    fn pairing_example_and_structure() {
        let z2 = FinAbGroup::cyclic(2);
        let a = TorsorClass::new(&z2, vec![1], vec![0]);
        let b = TorsorClass::new(&z2, vec![0], vec![1]);
        assert_eq!(h1_pairing(&a, &b).unwrap(), QZ::new(1, 2));

        let f3t = local(3, 1);
        for cls in h1_enumerate(&z2, &f3t).unwrap() {
            assert!(h1_pairing(&cls, &cls).unwrap().is_zero());
        }

        // 4x4 character-value matrix over Z/2 has nonzero determinant
        let classes = h1_enumerate(&z2, &f3t).unwrap();
        let m: Vec<Vec<i64>> = classes
            .iter()
            .map(|a| {
                classes
                    .iter()
                    .map(|b| {
                        let v = h1_pairing(a, b).unwrap();
                        if v.is_zero() {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect()
            })
            .collect();
        let det = m[0][0]
            * (m[1][1] * (m[2][2] * m[3][3] - m[2][3] * m[3][2])
                - m[1][2] * (m[2][1] * m[3][3] - m[2][3] * m[3][1])
                + m[1][3] * (m[2][1] * m[3][2] - m[2][2] * m[3][1]))
            - m[0][1]
                * (m[1][0] * (m[2][2] * m[3][3] - m[2][3] * m[3][2])
                    - m[1][2] * (m[2][0] * m[3][3] - m[2][3] * m[3][0])
                    + m[1][3] * (m[2][0] * m[3][2] - m[2][2] * m[3][0]))
            + m[0][2]
                * (m[1][0] * (m[2][1] * m[3][3] - m[2][3] * m[3][1])
                    - m[1][1] * (m[2][0] * m[3][3] - m[2][3] * m[3][0])
                    + m[1][3] * (m[2][0] * m[3][1] - m[2][1] * m[3][0]))
            - m[0][3]
                * (m[1][0] * (m[2][1] * m[3][2] - m[2][2] * m[3][1])
                    - m[1][1] * (m[2][0] * m[3][2] - m[2][2] * m[3][0])
                    + m[1][2] * (m[2][0] * m[3][1] - m[2][1] * m[3][0]));
        assert_ne!(det, 0);
    }

    #[test]
    fn pairing_axioms_small_groups() {
        let catalog = [
            vec![2u64],
            vec![3],
            vec![4],
            vec![2, 2],
            vec![5],
            vec![6],
            vec![7],
            vec![8],
            vec![2, 4],
            vec![2, 2, 2],
        ];
        for factors in catalog {
            let g = FinAbGroup::new(factors.clone());
            let els = g.elements();
            let mut classes = Vec::new();
            for u in &els {
                for r in &els {
                    classes.push(TorsorClass::new(&g, u.clone(), r.clone()));
                }
            }
            for a in &classes {
                for b in &classes {
                    let ab = h1_pairing(a, b).unwrap();
                    let ba = h1_pairing(b, a).unwrap();
                    assert_eq!(ab, ba.neg(), "skew symmetry on {factors:?}");
                    for c in classes.iter().take(9) {
                        let lhs = h1_pairing(&a.add(c), b).unwrap();
                        let rhs = h1_pairing(a, b).unwrap().add(&h1_pairing(c, b).unwrap());
                        assert_eq!(lhs, rhs, "bi-additivity on {factors:?}");
                    }
                }
                // non-degeneracy: a nonzero class pairs nontrivially with something
                if !a.is_trivial() {
                    assert!(
                        classes.iter().any(|b| !h1_pairing(a, b).unwrap().is_zero()),
                        "degenerate class on {factors:?}"
                    );
                }
            }
            // unramified x unramified and ramified x ramified annihilate
            for u1 in &els {
                for u2 in &els {
                    let a = TorsorClass::new(&g, u1.clone(), g.zero());
                    let b = TorsorClass::new(&g, u2.clone(), g.zero());
                    assert!(h1_pairing(&a, &b).unwrap().is_zero());
                    let a = TorsorClass::new(&g, g.zero(), u1.clone());
                    let b = TorsorClass::new(&g, g.zero(), u2.clone());
                    assert!(h1_pairing(&a, &b).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn kummer_examples() {
        let f3 = ff_make_field(3, 1).unwrap();
        let t = parse_series(&f3, "1*t^1 + O(t^8)").unwrap();
        let c = kummer_class(&t, 2).unwrap();
        assert_eq!((c.unr.clone(), c.ram.clone()), (vec![0], vec![1]));
        let two = parse_series(&f3, "2*t^0 + O(t^8)").unwrap();
        let c = kummer_class(&two, 2).unwrap();
        assert_eq!((c.unr.clone(), c.ram.clone()), (vec![1], vec![0]));
        let sq = parse_series(&f3, "1*t^0 + 1*t^1 + O(t^8)").unwrap();
        let c = kummer_class(&sq, 2).unwrap();
        assert!(c.is_trivial());
        // 3 does not divide 5 - 1
        let f5 = ff_make_field(5, 1).unwrap();
        let x = parse_series(&f5, "1*t^0 + O(t^8)").unwrap();
        assert_eq!(
            kummer_class(&x, 3).err(),
            Some(GaloisError::RootsOfUnityMissing)
        );
    }

    #[test]
    fn kummer_is_homomorphism() {
        use rand::{Rng, SeedableRng};
        let f5 = ff_make_field(5, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let v = rng.gen_range(0i64..3);
                let mut coeffs = vec![f5.from_index(rng.gen_range(1..5))];
                for _ in 0..5 {
                    coeffs.push(f5.from_index(rng.gen_range(0..5)));
                }
                TruncatedLaurentSeries::new(&f5, v, coeffs, v + 6)
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let ka = kummer_class(&a, 4).unwrap();
            let kb = kummer_class(&b, 4).unwrap();
            let kab = kummer_class(&a.mul(&b).unwrap(), 4).unwrap();
            assert_eq!(kab, ka.add(&kb));
        }
    }

    fn sign_action_a1(q_p: u64) -> GammaVarietyAction {
        let f = ff_make_field(q_p, 1).unwrap();
        GammaVarietyAction::Linear(LinearDiagonalAction::cyclic(2, &[1], f).unwrap())
    }

    #[test]
    fn twist_counts_linear() {
        // A^1 over F_5 with Z/2 acting by -1: the nontrivial twist has
        // q points (x = 0 plus the roots of x^4 = -1)
        let act = sign_action_a1(5);
        assert_eq!(twist_pointcount(&act, &vec![1], 1).unwrap(), 5);
        assert_eq!(twist_pointcount(&act, &vec![0], 1).unwrap(), 5);
        assert_eq!(twist_pointcount(&act, &vec![1], 2).unwrap(), 25);
        // brute forces agree
        for m in 1..=4 {
            for tau in [vec![0u64], vec![1]] {
                let alg = twist_pointcount(&act, &tau, m).unwrap();
                let brute = twist_pointcount_brute(&act, &tau, m).unwrap().unwrap();
                assert_eq!(alg, brute, "m={m} tau={tau:?}");
            }
        }
    }

    #[test]
    fn twist_counts_pointset() {
        // free swap on two points, trivial Frobenius
        let z2 = FinAbGroup::cyclic(2);
        let swap = PointSetAction::new(z2, vec![vec![1, 0]], vec![0, 1]).unwrap();
        let act = GammaVarietyAction::PointSet(swap);
        assert_eq!(twist_pointcount(&act, &vec![1], 1).unwrap(), 0);
        assert_eq!(twist_pointcount(&act, &vec![0], 1).unwrap(), 2);
        let rep = burnside_check(&act).unwrap();
        assert!(rep.equal);
        assert_eq!(rep.groupoid_count, ratio(1, 1));
    }

    #[test]
    fn burnside_linear_example() {
        let act = sign_action_a1(5);
        let rep = burnside_check(&act).unwrap();
        assert!(rep.equal);
        assert_eq!(rep.groupoid_count, ratio(5, 1));
        assert_eq!(rep.twist_average, ratio(5, 1));

        // trivial group: plain point count
        let f7 = ff_make_field(7, 1).unwrap();
        let triv = LinearDiagonalAction::cyclic(1, &[0], f7).unwrap();
        let rep = burnside_check(&GammaVarietyAction::Linear(triv)).unwrap();
        assert_eq!(rep.groupoid_count, ratio(7, 1));
        assert!(rep.equal);
    }

    #[test]
    fn burnside_across_toy_models() {
        let f5 = ff_make_field(5, 1).unwrap();
        let f7 = ff_make_field(7, 1).unwrap();
        let models: Vec<GammaVarietyAction> = vec![
            sign_action_a1(3),
            sign_action_a1(5),
            GammaVarietyAction::Linear(
                LinearDiagonalAction::cyclic(2, &[1, 1], f5.clone()).unwrap(),
            ),
            GammaVarietyAction::Linear(
                LinearDiagonalAction::cyclic(2, &[1, 2], f5.clone()).unwrap(),
            ),
            GammaVarietyAction::Linear(LinearDiagonalAction::cyclic(3, &[1, 2], f7).unwrap()),
            GammaVarietyAction::Linear(LinearDiagonalAction::cyclic(4, &[1], f5).unwrap()),
            GammaVarietyAction::PointSet(
                PointSetAction::new(FinAbGroup::cyclic(2), vec![vec![1, 0, 2]], vec![0, 1, 2])
                    .unwrap(),
            ),
            GammaVarietyAction::PointSet(
                PointSetAction::new(FinAbGroup::cyclic(2), vec![vec![1, 0]], vec![1, 0]).unwrap(),
            ),
            GammaVarietyAction::PointSet(
                PointSetAction::new(
                    FinAbGroup::new(vec![2, 2]),
                    vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]],
                    vec![0, 1, 2, 3],
                )
                .unwrap(),
            ),
        ];
        for (i, act) in models.iter().enumerate() {
            let rep = burnside_check(act).unwrap();
            assert!(
                rep.equal,
                "model {i}: {:?} vs {:?}",
                rep.groupoid_count, rep.twist_average
            );
        }
    }

    #[test]
    fn zeta_consistency_small_models() {
        let models: Vec<GammaVarietyAction> = vec![
            sign_action_a1(3),
            sign_action_a1(5),
            GammaVarietyAction::PointSet(
                PointSetAction::new(FinAbGroup::cyclic(2), vec![vec![1, 0]], vec![1, 0]).unwrap(),
            ),
        ];
        for act in &models {
            for tau in act.group().elements() {
                for m in 1..=4 {
                    let alg = twist_pointcount(act, &tau, m).unwrap();
                    if let Some(brute) = twist_pointcount_brute(act, &tau, m).unwrap() {
                        assert_eq!(alg, brute);
                    }
                }
            }
        }
    }

    #[test]
    fn character_evaluation() {
        let g = FinAbGroup::new(vec![2, 4]);
        let chi = g.character(vec![1, 1]);
        assert_eq!(chi.eval(&vec![1, 0]), QZ::new(1, 2));
        assert_eq!(chi.eval(&vec![0, 1]), QZ::new(1, 4));
        assert_eq!(chi.eval(&vec![1, 2]), QZ::zero());
        let z = chi.eval_root(&vec![0, 1], 4);
        assert_eq!(z, Cyclotomic::root(4, 1));
    }
}
