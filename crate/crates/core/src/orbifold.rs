//! Cyclic quotient-singularity actions on affine space, fermionic shifts and
//! weights, the finite-precision specialization map, exact finite-level
//! orbifold volumes over F_q((t)), and Weil volumes of smooth models.
//!
//! Volume values are exact elements of Q(q^{1/d}), represented as [`QExp`]
//! and compared after reduction at the concrete prime power. The finite-level
//! route never quotes a closed form: it counts residue representatives mod
//! t^k annulus by annulus, checks that the visible annulus measures decay
//! geometrically, and sums the invisible tail by that observed ratio.

use crate::ff::{FFElement, FieldSpec};
use crate::galois::{
    kummer_class, twist_pointcount, GaloisError, GammaVarietyAction, LinearDiagonalAction,
    TorsorClass,
};
use crate::localfield::{SeriesError, TruncatedLaurentSeries};
use crate::numeric::{rat, ratio, Rat};
use crate::qexp::QExp;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrbifoldError {
    #[error("d does not divide q - 1: required roots of unity missing")]
    RootsOfUnityMissing,
    #[error("precision too low: {0}")]
    PrecisionTooLow(String),
    #[error("reduction is singular at an F_q-point")]
    SingularReduction,
    #[error("generic point is zero to precision")]
    ZeroToPrecision,
    #[error("model too large for exhaustive enumeration")]
    ModelTooLarge,
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Z/d acting on A^n by diag(ζ^{e₁}, …, ζ^{e_n}), ζ the canonical primitive
/// d-th root of unity in F_q; weights use the 1 ≤ eᵢ ≤ d convention.
#[derive(Clone, Debug)]
pub struct LinearCyclicAction {
    d: u64,
    weights: Vec<u64>,
    field: FieldSpec,
}

impl LinearCyclicAction {
    pub fn new(d: u64, weights: Vec<u64>, field: FieldSpec) -> Result<Self, OrbifoldError> {
        assert!(d >= 1);
        assert!(!weights.is_empty());
        let q = field.q();
        if d > 1 && !(q - 1).is_multiple_of(d) {
            return Err(OrbifoldError::RootsOfUnityMissing);
        }
        let weights = weights
            .iter()
            .map(|&e| {
                let r = e % d.max(1);
                if r == 0 {
                    d
                } else {
                    r
                }
            })
            .collect();
        Ok(LinearCyclicAction { d, weights, field })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.q()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.d == 1 || self.weights.iter().all(|&e| e == self.d)
    }

    /// The same action as a diagonal Γ-variety.
    pub fn as_diagonal(&self) -> LinearDiagonalAction {
        LinearDiagonalAction::cyclic(self.d, &self.weights, self.field.clone())
            .expect("validated at construction")
    }

    /// Weight e'ᵢ of γ^j on coordinate i in the 1 ≤ e' ≤ d convention, for
    /// the primitive root reindexed by ξ ↦ ξ^c.
    pub fn sector_weight(&self, j: u64, c: u64, coord: usize) -> u64 {
        let d = self.d;
        if d == 1 {
            return 1;
        }
        let c_inv = crate::cyclotomic::mod_inverse(c % d, d);
        let raw = (c_inv as u128 * (j as u128 * self.weights[coord] as u128 % d as u128)
            % d as u128) as u64;
        if raw == 0 {
            d
        } else {
            raw
        }
    }
}

/// Shift data of one group element γ^j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftRecord {
    pub j: u64,
    pub fixed_dim: usize,
    /// Fermionic shift, computed with the 0 ≤ wᵢ < r convention.
    pub f_shift: Rat,
    /// Weight, computed with the 1 ≤ eᵢ ≤ d convention.
    pub weight: Rat,
}

/// One record per j ∈ Z/d. `xi_exponent` reindexes the canonical primitive
/// root ζ ↦ ζ^{xi_exponent} and must be coprime to d.
pub fn shifts(action: &LinearCyclicAction, xi_exponent: u64) -> Vec<ShiftRecord> {
    let d = action.d;
    assert!(
        crate::cyclotomic::gcd(xi_exponent, d) == 1,
        "reindex must be coprime to d"
    );
    let mut out = Vec::with_capacity(d as usize);
    for j in 0..d {
        let mut f_num = 0u64;
        let mut w_num = 0u64;
        let mut fixed = 0usize;
        for i in 0..action.dim() {
            let e_prime = action.sector_weight(j, xi_exponent, i);
            w_num += e_prime;
            if (j * action.weights[i]).is_multiple_of(d.max(1)) {
                fixed += 1;
            } else {
                f_num += e_prime; // e' < d exactly on moving coordinates
            }
        }
        out.push(ShiftRecord {
            j,
            fixed_dim: fixed,
            f_shift: ratio(f_num as i64, d.max(1) as i64),
            weight: ratio(w_num as i64, d.max(1) as i64),
        });
    }
    out
}

/// Stratum point of the inertia groupoid that a specialization lands on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StratumPoint {
    /// Origin component of the γ-sector.
    Origin,
    /// Untwisted point of the free locus, with its residue coordinate.
    FreeLocus(FFElement),
}

/// Result of specializing one integral point of A¹/(Z/d).
#[derive(Clone, Debug)]
pub struct Specialization {
    pub class: TorsorClass,
    /// Power of the sector generator singled out by the inertia action,
    /// normalized through the canonical ξ (identity reciprocity twist).
    pub inertia_power: u64,
    pub stratum: StratumPoint,
}

/// Specialization map for the one-dimensional model: u ∈ O_F with nonzero
/// generic fibre goes to its Kummer class, the inertia generator power, and
/// the residue stratum point.
pub fn specialize_1d(u: &TruncatedLaurentSeries, d: u64) -> Result<Specialization, OrbifoldError> {
    let q = u.field().q();
    if d > 1 && !(q - 1).is_multiple_of(d) {
        return Err(OrbifoldError::RootsOfUnityMissing);
    }
    if u.is_zero() {
        return Err(OrbifoldError::ZeroToPrecision);
    }
    let v = u.valuation().unwrap();
    assert!(v >= 0, "integral points only");
    let class = kummer_class(u, d)?;
    let inertia_power = class.ram.first().copied().unwrap_or(0);
    let stratum = if v > 0 {
        StratumPoint::Origin
    } else {
        StratumPoint::FreeLocus(u.coeff(0))
    };
    Ok(Specialization {
        class,
        inertia_power,
        stratum,
    })
}

/// Finite-level volume value together with its independent closed form.
#[derive(Clone, Debug)]
pub struct VolumeResult {
    /// Annulus-by-annulus weighted representative count with exact tail.
    pub finite_level: QExp,
    /// (1/d) q^{-e/d}, the closed form.
    pub closed_form: QExp,
    /// Number of annuli visible below the working precision.
    pub visible_annuli: usize,
    pub precision: i64,
}

impl VolumeResult {
    pub fn agrees(&self, p: u64, m: u32) -> bool {
        self.finite_level.value_eq(&self.closed_form, p, m)
    }
}

/// Exact finite-level orbifold volume of the set {z^d t^e} ⊂ O_F against the
/// weight |x|^{(1−d)/d}: residue representatives mod t^k are grouped into
/// annuli of constant valuation e, e+d, …; each annulus contributes
/// (#representatives) · q^{−k} · q^{v(d−1)/d} exactly, and the tail beyond
/// the precision is summed by the geometric ratio observed on the visible
/// annuli. Needs k ≥ e + 2d so that at least two annuli are visible.
pub fn orb_fiber_volume_1d(
    d: u64,
    e: u64,
    field: &FieldSpec,
    k: i64,
) -> Result<VolumeResult, OrbifoldError> {
    let value_at = |k: i64| -> Result<(QExp, usize), OrbifoldError> {
        finite_level_block_volume(d, e, field, k)
    };
    if k < (e + 2 * d) as i64 {
        return Err(OrbifoldError::PrecisionTooLow(format!(
            "need k >= e + 2d = {}, got {k}",
            e + 2 * d
        )));
    }
    let (finite_level, visible_annuli) = value_at(k)?;
    let (refined, _) = value_at(k + 1)?;
    let p = field.p();
    let m = field.m();
    if !finite_level.value_eq(&refined, p, m) {
        return Err(OrbifoldError::PrecisionTooLow(format!(
            "value changed between k = {k} and k + 1"
        )));
    }
    let closed_form = QExp::term(ratio(-(e as i64), d as i64), ratio(1, d as i64));
    Ok(VolumeResult {
        finite_level,
        closed_form,
        visible_annuli,
        precision: k,
    })
}

/// Visible annulus sum, exact geometric tail, and annulus count for one block.
fn finite_level_block_parts(
    d: u64,
    e: u64,
    field: &FieldSpec,
    k: i64,
) -> Result<(QExp, QExp, usize), OrbifoldError> {
    let q = field.q();
    if d > 1 && !(q - 1).is_multiple_of(d) {
        return Err(OrbifoldError::RootsOfUnityMissing);
    }
    // leading coefficients available to elements of the set: the d-th powers
    // in F_q^×, counted by enumeration
    let mut powers = std::collections::BTreeSet::new();
    for i in 1..q {
        powers.insert(field.from_index(i).pow(d).index());
    }
    let lead_count = powers.len() as u64;

    // annuli of valuation v = e + d·j strictly below the precision; each has
    // lead_count · q^{k−v−1} representatives mod t^k, every one of weight
    // q^{v(d−1)/d} · q^{−k}
    let mut measures: Vec<QExp> = Vec::new();
    let mut v = e as i64;
    while v < k {
        let reps = Rat::from_integer(BigInt::from(lead_count))
            * crate::numeric::rat_pow(&rat(q as i64), &BigInt::from(k - v - 1));
        let exponent = ratio(v * (d as i64 - 1), d as i64) - rat(k);
        measures.push(QExp::term(exponent, reps));
        v += d as i64;
    }
    if measures.len() < 2 {
        return Err(OrbifoldError::PrecisionTooLow(format!(
            "only {} annuli visible below t^{k}",
            measures.len()
        )));
    }
    // the visible annulus measures must decay by exactly 1/q
    let ratio_q = QExp::constant(ratio(1, q as i64));
    for w in measures.windows(2) {
        if !w[1].value_eq(&w[0].mul(&ratio_q), field.p(), field.m()) {
            return Err(OrbifoldError::PrecisionTooLow(
                "annulus measures are not geometric".into(),
            ));
        }
    }
    // exact geometric tail: last · (1/q)/(1 − 1/q)
    let mut visible = QExp::zero();
    for m in &measures {
        visible = visible.add(m);
    }
    let tail = measures.last().unwrap().scale(&(ratio(1, q as i64 - 1)));
    Ok((visible, tail, measures.len()))
}

fn finite_level_block_volume(
    d: u64,
    e: u64,
    field: &FieldSpec,
    k: i64,
) -> Result<(QExp, usize), OrbifoldError> {
    let (visible, tail, n) = finite_level_block_parts(d, e, field, k)?;
    Ok((visible.add(&tail), n))
}

/// Volume of one fibre of the specialization map over a stratum point,
/// via the product of one-dimensional blocks and the automorphism order.
#[derive(Clone, Debug)]
pub struct FiberVolume {
    pub finite_level: QExp,
    /// q^{−w}/|Aut|, the closed form.
    pub closed_form: QExp,
    pub weight: Rat,
    pub aut_order: u64,
    pub precision: i64,
}

/// Target of a fibre-volume computation: the torsor class fixes the sector
/// through its ramified part, the stratum point fixes |Aut|.
pub fn orb_fiber_volume(
    action: &LinearCyclicAction,
    class: &TorsorClass,
    stratum: &StratumPoint,
    k: i64,
) -> Result<FiberVolume, OrbifoldError> {
    let d = action.d;
    let j = class.ram.first().copied().unwrap_or(0) % d.max(1);
    let record = &shifts(action, 1)[j as usize];
    let aut_order = match stratum {
        StratumPoint::Origin => d,
        StratumPoint::FreeLocus(_) => 1,
    };
    let mut finite = QExp::one();
    for i in 0..action.dim() {
        let e_prime = action.sector_weight(j, 1, i);
        let block = orb_fiber_volume_1d(d, e_prime, &action.field, k)?;
        // the block volume carries the covering factor 1/d; the product
        // reduction uses the bare weight factor q^{−e'/d}
        finite = finite.mul(&block.finite_level.scale(&rat(d as i64)));
    }
    finite = finite.scale(&ratio(1, aut_order as i64));
    let closed_form = QExp::term(-record.weight.clone(), ratio(1, aut_order as i64));
    Ok(FiberVolume {
        finite_level: finite,
        closed_form,
        weight: record.weight.clone(),
        aut_order,
        precision: k,
    })
}

/// Per-sector contribution to the total volume.
#[derive(Clone, Debug)]
pub struct SectorVolume {
    pub j: u64,
    pub weight: Rat,
    pub fixed_dim: usize,
    /// Groupoid count of the sector stratum \[V^{γ^j}/Γ\](F_q).
    pub stratum_count: Rat,
    pub volume: QExp,
}

/// Total orbifold volume of (A^n/Γ)(O_F): sectors contribute
/// q^{−w(γ^j)} · #\[V^{γ^j}/Γ\](F_q), the stratum counts coming from the
/// twist-averaging identity evaluated exactly.
#[derive(Clone, Debug)]
pub struct TotalVolume {
    pub total: QExp,
    pub sectors: Vec<SectorVolume>,
    pub precision: i64,
}

pub fn orb_total_volume(action: &LinearCyclicAction, k: i64) -> Result<TotalVolume, OrbifoldError> {
    let records = shifts(action, 1);
    let diagonal = action.as_diagonal();
    let group = diagonal.group().clone();
    let mut sectors = Vec::new();
    let mut total = QExp::zero();
    for rec in &records {
        let elem = if group.rank() == 0 {
            group.zero()
        } else {
            vec![rec.j]
        };
        // groupoid count of the sector stratum, by exact twist averaging
        let restricted = diagonal.restrict_to_fixed(&elem);
        let sub = GammaVarietyAction::Linear(restricted);
        let mut sum = Rat::zero();
        for tau in group.elements() {
            let n = twist_pointcount(&sub, &tau, 1)?;
            sum += Rat::from_integer(n.into());
        }
        let stratum_count = sum / Rat::from_integer(group.order().into());
        // finite-level fibre weight q^{-w(γ^j)}: product of the enumerated
        // one-dimensional blocks, each stripped of its covering factor 1/d
        let mut fibre_weight = QExp::one();
        for i in 0..action.dim() {
            let e_prime = action.sector_weight(rec.j, 1, i);
            let (block, _) = finite_level_block_volume(action.d, e_prime, &action.field, k)?;
            fibre_weight = fibre_weight.mul(&block.scale(&rat(action.d as i64)));
        }
        let volume = fibre_weight.scale(&stratum_count);
        total = total.add(&volume);
        sectors.push(SectorVolume {
            j: rec.j,
            weight: rec.weight.clone(),
            fixed_dim: rec.fixed_dim,
            stratum_count,
            volume,
        });
    }
    Ok(TotalVolume {
        total,
        sectors,
        precision: k,
    })
}

// --- Weil volumes of smooth affine models ------------------------------------

/// Multivariate polynomial with integer coefficients, exponent vectors per
/// term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, i64)>,
}

impl MultiPoly {
    pub fn new(nvars: usize, terms: Vec<(Vec<u32>, i64)>) -> Self {
        assert!(terms.iter().all(|(e, _)| e.len() == nvars));
        MultiPoly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, i64)] {
        &self.terms
    }

    pub fn eval_ff(&self, point: &[FFElement], field: &FieldSpec) -> FFElement {
        let mut acc = field.zero();
        for (exps, c) in &self.terms {
            let mut term = field.from_int(*c);
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term = term.mul(&x.pow(e as u64));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Formal partial derivative.
    pub fn partial(&self, var: usize) -> MultiPoly {
        let mut terms = Vec::new();
        for (exps, c) in &self.terms {
            if exps[var] == 0 {
                continue;
            }
            let mut e = exps.clone();
            let k = e[var] as i64;
            e[var] -= 1;
            terms.push((e, c * k));
        }
        MultiPoly {
            nvars: self.nvars,
            terms,
        }
    }
}

/// An affine model cut out by polynomials, claimed smooth of dimension
/// nvars − #polys over O_F.
#[derive(Clone, Debug)]
pub struct SmoothModel {
    pub name: String,
    pub nvars: usize,
    pub polys: Vec<MultiPoly>,
}

impl SmoothModel {
    pub fn new(name: &str, nvars: usize, polys: Vec<MultiPoly>) -> Self {
        assert!(polys.iter().all(|f| f.nvars == nvars));
        assert!(polys.len() <= nvars);
        SmoothModel {
            name: name.into(),
            nvars,
            polys,
        }
    }

    pub fn dim(&self) -> usize {
        self.nvars - self.polys.len()
    }
}

/// Per-level lift counts and the Weil volume value they certify.
#[derive(Clone, Debug)]
pub struct WeilReport {
    pub counts: Vec<u128>,
    pub residue_count: u128,
    pub dim: usize,
    /// #X(O/t^k)/q^{k·dim}, equal at every level.
    pub value: Rat,
}

/// #X(O/t^j)/q^{j·dim} for j = 1..=k by staged exhaustive lifting; errors if
/// the value is not constant across levels or the special fibre is singular.
pub fn weil_volume(
    model: &SmoothModel,
    field: &FieldSpec,
    k: i64,
) -> Result<WeilReport, OrbifoldError> {
    assert!(k >= 1);
    let q = field.q();
    let size = BigInt::from(q).pow(model.nvars as u32);
    if size > BigInt::from(crate::galois::MODEL_ENUM_CAP) {
        return Err(OrbifoldError::ModelTooLarge);
    }
    // residue points by brute force
    let mut base_points: Vec<Vec<FFElement>> = Vec::new();
    let mut cursor = vec![0u64; model.nvars];
    loop {
        let pt: Vec<FFElement> = cursor.iter().map(|&i| field.from_index(i)).collect();
        if model.polys.iter().all(|f| f.eval_ff(&pt, field).is_zero()) {
            base_points.push(pt);
        }
        let mut i = model.nvars;
        let mut done = true;
        while i > 0 {
            i -= 1;
            cursor[i] += 1;
            if cursor[i] < q {
                done = false;
                break;
            }
            cursor[i] = 0;
        }
        if done {
            break;
        }
    }
    // Jacobian criterion at every residue point
    for pt in &base_points {
        let jac: Vec<Vec<FFElement>> = model
            .polys
            .iter()
            .map(|f| {
                (0..model.nvars)
                    .map(|v| f.partial(v).eval_ff(pt, field))
                    .collect()
            })
            .collect();
        if ff_rank(&jac) < model.polys.len() {
            return Err(OrbifoldError::SingularReduction);
        }
    }

    let counts = if field.m() == 1 {
        staged_counts_prime(model, field, k, &base_points)
    } else {
        staged_counts_general(model, field, k, &base_points)
    };

    let dim = model.dim();
    let q_rat = rat(q as i64);
    let mut value: Option<Rat> = None;
    for (j, &n) in counts.iter().enumerate() {
        let level = (j + 1) as i64;
        let denom = crate::numeric::rat_pow(&q_rat, &BigInt::from(level * dim as i64));
        let v = Rat::from_integer(n.into()) / denom;
        match &value {
            None => value = Some(v),
            Some(prev) => {
                if *prev != v {
                    return Err(OrbifoldError::PrecisionTooLow(format!(
                        "level {level} volume {v} differs from {prev}"
                    )));
                }
            }
        }
    }
    Ok(WeilReport {
        residue_count: counts[0],
        counts,
        dim,
        value: value.unwrap_or_else(Rat::one),
    })
}

/// Staged lifting with general field elements.
fn staged_counts_general(
    model: &SmoothModel,
    field: &FieldSpec,
    k: i64,
    base_points: &[Vec<FFElement>],
) -> Vec<u128> {
    let q = field.q();
    let mut counts: Vec<u128> = vec![base_points.len() as u128];
    let mut level_points: Vec<Vec<Vec<FFElement>>> = base_points
        .iter()
        .map(|pt| pt.iter().map(|c| vec![c.clone()]).collect())
        .collect();
    for level in 1..k {
        let mut next = Vec::new();
        let mut digits = vec![0u64; model.nvars];
        for pt in &level_points {
            digits.iter_mut().for_each(|d| *d = 0);
            loop {
                let candidate: Vec<Vec<FFElement>> = pt
                    .iter()
                    .zip(&digits)
                    .map(|(series, &d)| {
                        let mut s = series.clone();
                        s.push(field.from_index(d));
                        s
                    })
                    .collect();
                if model
                    .polys
                    .iter()
                    .all(|f| eval_truncated(f, &candidate, field, (level + 1) as usize))
                {
                    next.push(candidate);
                }
                let mut i = model.nvars;
                let mut done = true;
                while i > 0 {
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < q {
                        done = false;
                        break;
                    }
                    digits[i] = 0;
                }
                if done {
                    break;
                }
            }
        }
        counts.push(next.len() as u128);
        level_points = next;
    }
    counts
}

/// Staged lifting specialized to prime residue fields: truncated series are
/// flat u64 coefficient arrays mod p.
#[allow(clippy::type_complexity)]
fn staged_counts_prime(
    model: &SmoothModel,
    field: &FieldSpec,
    k: i64,
    base_points: &[Vec<FFElement>],
) -> Vec<u128> {
    let p = field.p();
    let polys: Vec<(Vec<(Vec<u32>, u64)>, usize)> = model
        .polys
        .iter()
        .map(|f| {
            let terms = f
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.rem_euclid(p as i64) as u64))
                .collect();
            (terms, f.nvars)
        })
        .collect();
    let kk = k as usize;
    let nvars = model.nvars;
    let eval_vanishes = |point: &[u64], prec: usize| -> bool {
        // point is nvars contiguous series of length kk
        let mut scratch_a = vec![0u64; prec];
        let mut scratch_b = vec![0u64; prec];
        for (terms, _) in &polys {
            let mut acc = vec![0u64; prec];
            for (exps, c) in terms {
                scratch_a.iter_mut().for_each(|x| *x = 0);
                scratch_a[0] = *c;
                for (v, &e) in exps.iter().enumerate() {
                    let series = &point[v * kk..v * kk + prec];
                    for _ in 0..e {
                        scratch_b.iter_mut().for_each(|x| *x = 0);
                        for i in 0..prec {
                            let a = scratch_a[i];
                            if a == 0 {
                                continue;
                            }
                            for (j, &s) in series.iter().enumerate().take(prec - i) {
                                scratch_b[i + j] = (scratch_b[i + j] + a * s) % p;
                            }
                        }
                        std::mem::swap(&mut scratch_a, &mut scratch_b);
                    }
                }
                for i in 0..prec {
                    acc[i] = (acc[i] + scratch_a[i]) % p;
                }
            }
            if acc.iter().any(|&x| x != 0) {
                return false;
            }
        }
        true
    };

    let mut counts: Vec<u128> = vec![base_points.len() as u128];
    // flat storage: each point is nvars·kk digits, levels beyond the current
    // one still zero
    let mut level_points: Vec<Vec<u64>> = base_points
        .iter()
        .map(|pt| {
            let mut flat = vec![0u64; nvars * kk];
            for (v, c) in pt.iter().enumerate() {
                flat[v * kk] = c.index();
            }
            flat
        })
        .collect();
    for level in 1..k as usize {
        let mut next = Vec::new();
        let mut digits = vec![0u64; nvars];
        for pt in &level_points {
            digits.iter_mut().for_each(|d| *d = 0);
            loop {
                let mut candidate = pt.clone();
                for (v, &d) in digits.iter().enumerate() {
                    candidate[v * kk + level] = d;
                }
                if eval_vanishes(&candidate, level + 1) {
                    next.push(candidate);
                }
                let mut i = nvars;
                let mut done = true;
                while i > 0 {
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < p {
                        done = false;
                        break;
                    }
                    digits[i] = 0;
                }
                if done {
                    break;
                }
            }
        }
        counts.push(next.len() as u128);
        level_points = next;
    }
    counts
}

/// Evaluate f at a tuple of truncated power series (coefficient vectors of
/// length `prec`) and test vanishing mod t^prec.
fn eval_truncated(f: &MultiPoly, point: &[Vec<FFElement>], field: &FieldSpec, prec: usize) -> bool {
    let zero = vec![field.zero(); prec];
    let mut acc = zero.clone();
    for (exps, c) in &f.terms {
        let mut term = vec![field.zero(); prec];
        term[0] = field.from_int(*c);
        for (series, &e) in point.iter().zip(exps) {
            for _ in 0..e {
                term = trunc_mul(&term, series, field, prec);
            }
        }
        for i in 0..prec {
            acc[i] = acc[i].add(&term[i]);
        }
    }
    acc.iter().all(|c| c.is_zero())
}

fn trunc_mul(a: &[FFElement], b: &[FFElement], field: &FieldSpec, prec: usize) -> Vec<FFElement> {
    let mut out = vec![field.zero(); prec];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j < prec {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    out
}

/// Rank of a matrix over F_q by Gaussian elimination.
#[allow(clippy::needless_range_loop)]
fn ff_rank(rows: &[Vec<FFElement>]) -> usize {
    let mut m: Vec<Vec<FFElement>> = rows.to_vec();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..m.len()).find(|&r| !m[r][col].is_zero());
        if let Some(p) = pivot {
            m.swap(rank, p);
            let inv = m[rank][col].inv();
            for c in col..ncols {
                m[rank][c] = m[rank][c].mul(&inv);
            }
            for r in 0..m.len() {
                if r != rank && !m[r][col].is_zero() {
                    let factor = m[r][col].clone();
                    for c in col..ncols {
                        let s = factor.mul(&m[rank][c]);
                        m[r][c] = m[r][c].sub(&s);
                    }
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
    }
    rank
}

/// The smooth models used by the verification batteries.
pub fn builtin_smooth_models() -> Vec<SmoothModel> {
    let x = |e: Vec<u32>, c: i64| (e, c);
    vec![
        SmoothModel::new("line", 1, vec![]),
        SmoothModel::new("plane", 2, vec![]),
        SmoothModel::new(
            "parabola",
            2,
            vec![MultiPoly::new(2, vec![x(vec![0, 1], 1), x(vec![2, 0], -1)])],
        ),
        SmoothModel::new(
            "circle",
            2,
            vec![MultiPoly::new(
                2,
                vec![x(vec![2, 0], 1), x(vec![0, 2], 1), x(vec![0, 0], -1)],
            )],
        ),
        SmoothModel::new(
            "hyperbola",
            2,
            vec![MultiPoly::new(2, vec![x(vec![1, 1], 1), x(vec![0, 0], -1)])],
        ),
        SmoothModel::new(
            "odd-cubic",
            2,
            vec![MultiPoly::new(
                2,
                vec![x(vec![0, 2], 1), x(vec![3, 0], -1), x(vec![1, 0], -1)],
            )],
        ),
        SmoothModel::new(
            "sphere",
            3,
            vec![MultiPoly::new(
                3,
                vec![
                    x(vec![2, 0, 0], 1),
                    x(vec![0, 2, 0], 1),
                    x(vec![0, 0, 2], 1),
                    x(vec![0, 0, 0], -1),
                ],
            )],
        ),
    ]
}

/// The cuspidal cubic y² = x³, singular at the origin.
pub fn cuspidal_cubic() -> SmoothModel {
    SmoothModel::new(
        "cusp",
        2,
        vec![MultiPoly::new(2, vec![(vec![0, 2], 1), (vec![3, 0], -1)])],
    )
}

/// Built-in quotient actions exercised by the verification batteries; every
/// entry satisfies d | q − 1.
pub fn builtin_actions() -> Vec<LinearCyclicAction> {
    let f = |p, m| crate::ff::ff_make_field(p, m).unwrap();
    vec![
        LinearCyclicAction::new(2, vec![1], f(5, 1)).unwrap(),
        LinearCyclicAction::new(2, vec![1], f(3, 2)).unwrap(),
        LinearCyclicAction::new(2, vec![1, 1], f(5, 1)).unwrap(),
        LinearCyclicAction::new(2, vec![1, 1], f(3, 1)).unwrap(),
        LinearCyclicAction::new(2, vec![1, 2], f(5, 1)).unwrap(),
        LinearCyclicAction::new(3, vec![1], f(7, 1)).unwrap(),
        LinearCyclicAction::new(3, vec![1, 2], f(7, 1)).unwrap(),
        LinearCyclicAction::new(4, vec![1], f(5, 1)).unwrap(),
        LinearCyclicAction::new(4, vec![1, 3], f(13, 1)).unwrap(),
        LinearCyclicAction::new(6, vec![1, 5], f(7, 1)).unwrap(),
        LinearCyclicAction::new(1, vec![1, 1], f(5, 1)).unwrap(),
    ]
}
