//! Stringy point counts and stringy E-polynomials of finite abelian quotient
//! stacks, with gerbe twists carried as per-sector characters.
//!
//! The inertia stack of \[A^n/Γ\] is the disjoint union over γ of the quotients
//! of the fixed subspaces; each sector contributes q^{F(γ)} times its groupoid
//! count, and a gerbe contributes through the character it transgresses to on
//! each sector. Character sums are evaluated in exact cyclotomic arithmetic.

use crate::cyclotomic::Cyclotomic;
use crate::galois::{
    twist_pointcount, Character, FinAbGroup, GaloisError, GammaVarietyAction, GroupElem,
    LinearDiagonalAction,
};
use crate::numeric::{rat, ratio, Rat};
use crate::qexp::QExp;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StringyError {
    #[error("gerbe data does not cover sector {0:?}")]
    MissingSector(GroupElem),
    #[error("character sum is not rational; table inconsistent")]
    IrrationalCharacterSum,
    #[error(transparent)]
    Galois(#[from] GaloisError),
}

/// Σ c·x^u y^v with rational exponent pairs; products of points, affine
/// spaces, and tori stay in this class.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct EPoly {
    terms: BTreeMap<(Rat, Rat), i64>,
}

impl EPoly {
    pub fn zero() -> Self {
        EPoly::default()
    }

    pub fn term(u: Rat, v: Rat, c: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert((u, v), c);
        }
        EPoly { terms }
    }

    /// E of a point.
    pub fn point() -> Self {
        Self::term(rat(0), rat(0), 1)
    }

    /// E of affine k-space, (xy)^k.
    pub fn affine(k: usize) -> Self {
        Self::term(rat(k as i64), rat(k as i64), 1)
    }

    /// E of the multiplicative torus, xy − 1.
    pub fn torus() -> Self {
        Self::term(rat(1), rat(1), 1).add(&Self::term(rat(0), rat(0), -1))
    }

    /// (xy)^s for a rational shift s.
    pub fn xy_power(s: Rat) -> Self {
        Self::term(s.clone(), s, 1)
    }

    pub fn add(&self, other: &EPoly) -> EPoly {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let e = terms.entry(k.clone()).or_insert(0);
            *e += c;
            if *e == 0 {
                terms.remove(k);
            }
        }
        EPoly { terms }
    }

    pub fn mul(&self, other: &EPoly) -> EPoly {
        let mut out = EPoly::zero();
        for ((u1, v1), c1) in &self.terms {
            for ((u2, v2), c2) in &other.terms {
                out = out.add(&EPoly::term(u1 + u2, v1 + v2, c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, c: i64) -> EPoly {
        if c == 0 {
            return EPoly::zero();
        }
        EPoly {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Rat, Rat), &i64)> {
        self.terms.iter()
    }

    /// The count specialization x = y = q^{1/2}: a term x^u y^v goes to
    /// q^{(u+v)/2}, so (xy)^s goes to q^s.
    pub fn specialize_xy(&self) -> QExp {
        let mut out = QExp::zero();
        for ((u, v), c) in &self.terms {
            let e = (u + v) / rat(2);
            out = out.add(&QExp::term(e, rat(*c)));
        }
        out
    }
}

impl fmt::Display for EPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((u, v), c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if u.is_zero() && v.is_zero() {
                write!(f, "{c}")?;
            } else if *c == 1 {
                write!(f, "x^{u}*y^{v}")?;
            } else {
                write!(f, "{c}*x^{u}*y^{v}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for EPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One inertia sector: a group element together with the component of its
/// fixed locus and the data entering the stringy sums.
#[derive(Clone, Debug)]
pub struct StrataRow {
    pub gamma: GroupElem,
    pub component: String,
    pub f_shift: Rat,
    pub fixed_dim: usize,
    /// Groupoid count of \[V^γ/Γ\](F_q).
    pub count: Rat,
    pub epoly: EPoly,
    pub kappa: Option<Character>,
    /// The induced action on this stratum, for twisted counting.
    stratum_action: LinearDiagonalAction,
}

/// Inertia table of a diagonal action.
#[derive(Clone, Debug)]
pub struct StrataTable {
    action: LinearDiagonalAction,
    xi_exponent: u64,
    pub rows: Vec<StrataRow>,
}

impl StrataTable {
    pub fn action(&self) -> &LinearDiagonalAction {
        &self.action
    }

    pub fn xi_exponent(&self) -> u64 {
        self.xi_exponent
    }
}

/// Fermionic shift of an element with respect to ζ_D ↦ ζ_D^{xi_exponent}:
/// eigenvalue exponents are rewritten against the canonical primitive root of
/// the element's order, with the 0 ≤ w < r convention.
fn fermionic_shift(
    action: &LinearDiagonalAction,
    elem: &GroupElem,
    xi_exponent: u64,
) -> (Rat, usize) {
    let group = action.group();
    let big_d = group.exponent().max(1);
    let r = group.elem_order(elem);
    let mut f = Rat::zero();
    let mut fixed = 0usize;
    for j in 0..action.dim() {
        let a = action.eigen_exponent(elem, j);
        if a == 0 {
            fixed += 1;
            continue;
        }
        // eigenvalue ζ_D^a = ξ_r^w with ξ_r = (ζ_D^{xi})^{D/r}
        debug_assert_eq!(a % (big_d / r), 0);
        let c_inv = crate::cyclotomic::mod_inverse(xi_exponent % r, r);
        let w = (c_inv as u128 * (a / (big_d / r)) as u128 % r as u128) as u64;
        f += ratio(w as i64, r as i64);
    }
    (f, fixed)
}

/// Inertia strata of a diagonal action: one row per group element, with the
/// fixed-subspace groupoid count realized by exact twist averaging.
pub fn strata_from_action(
    action: &LinearDiagonalAction,
    xi_exponent: u64,
) -> Result<StrataTable, StringyError> {
    let group = action.group().clone();
    assert!(
        crate::cyclotomic::gcd(xi_exponent, group.exponent().max(1)) == 1,
        "reindex must be coprime to the group exponent"
    );
    let mut rows = Vec::new();
    for (idx, gamma) in group.elements().into_iter().enumerate() {
        let (f_shift, fixed_dim) = fermionic_shift(action, &gamma, xi_exponent);
        let stratum_action = action.restrict_to_fixed(&gamma);
        let count = groupoid_count(&stratum_action)?;
        rows.push(StrataRow {
            gamma,
            component: format!("sector-{idx}"),
            f_shift,
            fixed_dim,
            count,
            epoly: EPoly::affine(fixed_dim),
            kappa: None,
            stratum_action,
        });
    }
    Ok(StrataTable {
        action: action.clone(),
        xi_exponent,
        rows,
    })
}

/// Groupoid count of [V/Γ](F_q) by the exact averaging identity.
fn groupoid_count(stratum: &LinearDiagonalAction) -> Result<Rat, StringyError> {
    let group = stratum.group().clone();
    let act = GammaVarietyAction::Linear(stratum.clone());
    let mut sum = Rat::zero();
    for tau in group.elements() {
        sum += Rat::from_integer(twist_pointcount(&act, &tau, 1)?.into());
    }
    Ok(sum / Rat::from_integer(group.order().into()))
}

/// Transgressed gerbe data: a character per sector, trivial at the identity.
#[derive(Clone, Debug)]
pub struct GerbeData {
    group: FinAbGroup,
    pub order: u64,
    kappas: BTreeMap<GroupElem, Character>,
}

impl GerbeData {
    pub fn new(group: &FinAbGroup, kappas: Vec<(GroupElem, Character)>) -> Self {
        let map: BTreeMap<GroupElem, Character> = kappas.into_iter().collect();
        if let Some(k0) = map.get(&group.zero()) {
            assert!(
                k0.is_trivial(),
                "identity sector must carry the trivial character"
            );
        }
        GerbeData {
            group: group.clone(),
            order: group.exponent().max(1),
            kappas: map,
        }
    }

    /// Gerbe generated by a bilinear form on Γ: κ_γ = B(γ, −). Entry b\[i\]\[j\]
    /// gives B(gᵢ, gⱼ) = b\[i\]\[j\]/dⱼ, subject to dᵢ·b\[i\]\[j\] ≡ 0 mod dⱼ.
    pub fn from_bilinear(group: &FinAbGroup, b: &[Vec<u64>]) -> Self {
        let r = group.rank();
        assert_eq!(b.len(), r);
        for (i, row) in b.iter().enumerate() {
            assert_eq!(row.len(), r);
            for (j, &bij) in row.iter().enumerate() {
                let dj = group.factors()[j];
                assert!(
                    (group.factors()[i] as u128 * bij as u128).is_multiple_of(dj as u128),
                    "form does not respect generator orders"
                );
            }
        }
        let mut kappas = Vec::new();
        for gamma in group.elements() {
            let exps: Vec<u64> = (0..r)
                .map(|j| {
                    let dj = group.factors()[j];
                    gamma
                        .iter()
                        .zip(b)
                        .map(|(gi, row)| (gi * row[j]) % dj)
                        .sum::<u64>()
                        % dj
                })
                .collect();
            kappas.push((gamma.clone(), group.character(exps)));
        }
        Self::new(group, kappas)
    }

    /// All-trivial assignment.
    pub fn trivial(group: &FinAbGroup) -> Self {
        let kappas = group
            .elements()
            .into_iter()
            .map(|g| (g, group.trivial_character()))
            .collect();
        Self::new(group, kappas)
    }

    pub fn kappa(&self, gamma: &GroupElem) -> Result<&Character, StringyError> {
        self.kappas
            .get(gamma)
            .ok_or_else(|| StringyError::MissingSector(gamma.clone()))
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }
}

/// The sector factor under a gerbe: (1/|Γ|) Σ_τ κ_γ(τ) · #(V^γ)_τ(F_q),
/// evaluated exactly in Z\[ζ\] and required to be rational.
fn twisted_sector_count(
    row: &StrataRow,
    kappa: &Character,
    group: &FinAbGroup,
) -> Result<Rat, StringyError> {
    let m = group.exponent().max(1);
    let act = GammaVarietyAction::Linear(row.stratum_action.clone());
    let mut acc = Cyclotomic::zero(m);
    for tau in group.elements() {
        let n = twist_pointcount(&act, &tau, 1)?;
        let w = kappa.eval_root(&tau, m);
        acc = acc.add(&w.scale(n as i128));
    }
    let n = acc
        .as_integer()
        .ok_or(StringyError::IrrationalCharacterSum)?;
    Ok(Rat::new(n.into(), group.order().into()))
}

/// Stringy point count: Σ sectors q^{F(γ)} · (count, or its κ-weighted twist
/// average when a gerbe is present).
pub fn stringy_count(table: &StrataTable, gerbe: Option<&GerbeData>) -> Result<QExp, StringyError> {
    let group = table.action.group().clone();
    let q = table.action.field().q();
    let mut out = QExp::zero();
    for row in &table.rows {
        let weight = match (gerbe, &row.kappa) {
            (Some(g), _) => twisted_sector_count(row, g.kappa(&row.gamma)?, &group)?,
            (None, Some(kappa)) => twisted_sector_count(row, kappa, &group)?,
            (None, None) => row.count.clone(),
        };
        // affine strata count q^{fixed_dim}; fold that back into the exponent
        let q_fix = crate::numeric::rat_pow(
            &crate::numeric::rat(q as i64),
            &num_bigint::BigInt::from(row.fixed_dim as i64),
        );
        let term = if weight == q_fix {
            QExp::term(
                row.f_shift.clone() + crate::numeric::rat(row.fixed_dim as i64),
                crate::numeric::Rat::from_integer(1.into()),
            )
        } else {
            QExp::term(row.f_shift.clone(), weight)
        };
        out = out.add(&term);
    }
    Ok(out)
}

/// Stringy E-polynomial: Σ sectors (xy)^{F(γ)} · E(stratum), rows with a
/// nontrivial sector character killed by the κ-isotypical projection.
pub fn stringy_epoly(
    table: &StrataTable,
    gerbe: Option<&GerbeData>,
) -> Result<EPoly, StringyError> {
    let group = table.action.group().clone();
    let m = group.exponent().max(1);
    let mut out = EPoly::zero();
    for row in &table.rows {
        let kappa = match (gerbe, &row.kappa) {
            (Some(g), _) => Some(g.kappa(&row.gamma)?.clone()),
            (None, Some(k)) => Some(k.clone()),
            (None, None) => None,
        };
        let factor = match kappa {
            None => 1,
            Some(k) => {
                // (1/|Γ|) Σ_τ κ(τ) is 1 for the trivial character, else 0
                let mut acc = Cyclotomic::zero(m);
                for tau in group.elements() {
                    acc = acc.add(&k.eval_root(&tau, m));
                }
                let n = acc
                    .as_integer()
                    .ok_or(StringyError::IrrationalCharacterSum)?;
                assert!(n == 0 || n as u64 == group.order());
                if n == 0 {
                    0
                } else {
                    1
                }
            }
        };
        if factor == 0 {
            continue;
        }
        out = out.add(&EPoly::xy_power(row.f_shift.clone()).mul(&row.epoly));
    }
    Ok(out)
}

/// Regenerate the table for the reindexed primitive root ξ ↦ ξ^c, carrying
/// sector characters along unchanged; both stringy invariants of the result
/// equal those of the input.
pub fn xi_reindex(table: &StrataTable, c: u64) -> Result<StrataTable, StringyError> {
    let group = table.action.group();
    assert!(
        crate::cyclotomic::gcd(c, group.exponent().max(1)) == 1,
        "reindex must be coprime to the group exponent"
    );
    let mut new_table = strata_from_action(&table.action, c)?;
    for (new_row, old_row) in new_table.rows.iter_mut().zip(&table.rows) {
        debug_assert_eq!(new_row.gamma, old_row.gamma);
        new_row.kappa = old_row.kappa.clone();
    }
    Ok(new_table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::ff_make_field;
    use crate::orbifold::{builtin_actions, orb_total_volume};

    fn mu2_on_a2() -> LinearDiagonalAction {
        LinearDiagonalAction::cyclic(2, &[1, 1], ff_make_field(5, 1).unwrap()).unwrap()
    }

    #[test]
    fn strata_examples() {
        let table = strata_from_action(&mu2_on_a2(), 1).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].fixed_dim, 2);
        assert_eq!(table.rows[0].f_shift, rat(0));
        assert_eq!(table.rows[0].count, rat(25));
        assert_eq!(table.rows[1].fixed_dim, 0);
        assert_eq!(table.rows[1].f_shift, rat(1));
        assert_eq!(table.rows[1].count, rat(1));

        // trivial group on A^2: a single row with count q^2
        let triv = LinearDiagonalAction::cyclic(1, &[1, 1], ff_make_field(5, 1).unwrap()).unwrap();
        let table = strata_from_action(&triv, 1).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].count, rat(25));

        // A^1 with the sign action: shifts 0 and 1/2
        let half = LinearDiagonalAction::cyclic(2, &[1], ff_make_field(5, 1).unwrap()).unwrap();
        let table = strata_from_action(&half, 1).unwrap();
        assert_eq!(table.rows[0].count, rat(5));
        assert_eq!(table.rows[1].f_shift, ratio(1, 2));
        assert_eq!(table.rows[1].count, rat(1));
    }

    #[test]
    fn stringy_count_examples() {
        let table = strata_from_action(&mu2_on_a2(), 1).unwrap();
        let count = stringy_count(&table, None).unwrap();
        // q^2 + q = 30 at q = 5
        assert_eq!(count.reduce_at(5, 1).as_rational(), Some(rat(30)));

        // trivial gerbe reproduces the untwisted count
        let z2 = FinAbGroup::cyclic(2);
        let trivial = GerbeData::trivial(&z2);
        let twisted = stringy_count(&table, Some(&trivial)).unwrap();
        assert_eq!(twisted, count);

        // nontrivial character on the γ-sector kills it: q^2 = 25
        let gerbe = GerbeData::from_bilinear(&z2, &[vec![1]]);
        let twisted = stringy_count(&table, Some(&gerbe)).unwrap();
        assert_eq!(twisted.reduce_at(5, 1).as_rational(), Some(rat(25)));
    }

    #[test]
    fn stringy_epoly_examples() {
        let table = strata_from_action(&mu2_on_a2(), 1).unwrap();
        let e = stringy_epoly(&table, None).unwrap();
        // (xy)^2 + xy, the E-polynomial of the resolved surface
        let expected = EPoly::affine(2).add(&EPoly::affine(1));
        assert_eq!(e, expected);

        let z2 = FinAbGroup::cyclic(2);
        let gerbe = GerbeData::from_bilinear(&z2, &[vec![1]]);
        let e = stringy_epoly(&table, Some(&gerbe)).unwrap();
        assert_eq!(e, EPoly::affine(2));

        // specialization consistency with the count
        let count = stringy_count(&table, None).unwrap();
        assert!(e
            .add(&EPoly::affine(1))
            .specialize_xy()
            .value_eq(&count, 5, 1));
    }

    #[test]
    fn xi_reindex_examples() {
        let f7 = ff_make_field(7, 1).unwrap();
        let act = LinearDiagonalAction::cyclic(3, &[1], f7).unwrap();
        let table = strata_from_action(&act, 1).unwrap();
        assert_eq!(table.rows[1].f_shift, ratio(1, 3));
        assert_eq!(table.rows[2].f_shift, ratio(2, 3));
        let re = xi_reindex(&table, 2).unwrap();
        // shifts of γ and γ² swap
        assert_eq!(re.rows[1].f_shift, ratio(2, 3));
        assert_eq!(re.rows[2].f_shift, ratio(1, 3));
        // totals unchanged
        assert_eq!(
            stringy_count(&table, None).unwrap(),
            stringy_count(&re, None).unwrap()
        );
        assert_eq!(
            stringy_epoly(&table, None).unwrap(),
            stringy_epoly(&re, None).unwrap()
        );
        // identity reindex
        let same = xi_reindex(&table, 1).unwrap();
        assert_eq!(
            stringy_count(&table, None).unwrap(),
            stringy_count(&same, None).unwrap()
        );
    }

    #[test]
    #[should_panic(expected = "coprime")]
    fn xi_reindex_requires_coprime() {
        let f7 = ff_make_field(7, 1).unwrap();
        let act = LinearDiagonalAction::cyclic(3, &[1], f7).unwrap();
        let table = strata_from_action(&act, 1).unwrap();
        let _ = xi_reindex(&table, 3);
    }

    #[test]
    fn xi_invariance_all_models() {
        for act in builtin_actions() {
            let diag = act.as_diagonal();
            let table = strata_from_action(&diag, 1).unwrap();
            let count = stringy_count(&table, None).unwrap();
            let epoly = stringy_epoly(&table, None).unwrap();
            let d = act.d().max(1);
            for c in 1..d {
                if crate::cyclotomic::gcd(c, d) != 1 {
                    continue;
                }
                let re = xi_reindex(&table, c).unwrap();
                assert_eq!(stringy_count(&re, None).unwrap(), count, "d={d} c={c}");
                assert_eq!(stringy_epoly(&re, None).unwrap(), epoly, "d={d} c={c}");
            }
        }
    }

    #[test]
    fn specialization_consistency_all_models() {
        for act in builtin_actions() {
            let diag = act.as_diagonal();
            let table = strata_from_action(&diag, 1).unwrap();
            let count = stringy_count(&table, None).unwrap();
            let epoly = stringy_epoly(&table, None).unwrap();
            let (p, m) = (act.field().p(), act.field().m());
            assert!(
                epoly.specialize_xy().value_eq(&count, p, m),
                "model d={} q={}",
                act.d(),
                act.q()
            );
        }
    }

    #[test]
    fn volume_bridge_all_models() {
        for act in builtin_actions() {
            let diag = act.as_diagonal();
            let table = strata_from_action(&diag, 1).unwrap();
            let count = stringy_count(&table, None).unwrap();
            let k = 3 * act.d() as i64 + 2;
            let vol = orb_total_volume(&act, k).unwrap();
            let qn = QExp::power(rat(act.dim() as i64));
            let (p, m) = (act.field().p(), act.field().m());
            assert!(
                vol.total.mul(&qn).value_eq(&count, p, m),
                "volume bridge fails for d={} q={}",
                act.d(),
                act.q()
            );
        }
    }

    #[test]
    fn noncyclic_diagonal_action() {
        // Klein four-group on A^2: each generator flips one coordinate
        let f5 = ff_make_field(5, 1).unwrap();
        let group = FinAbGroup::new(vec![2, 2]);
        let act =
            LinearDiagonalAction::new(group.clone(), f5, vec![vec![1, 0], vec![0, 1]], 2).unwrap();
        let table = strata_from_action(&act, 1).unwrap();
        assert_eq!(table.rows.len(), 4);
        let shifts: Vec<(Rat, usize)> = table
            .rows
            .iter()
            .map(|r| (r.f_shift.clone(), r.fixed_dim))
            .collect();
        assert_eq!(
            shifts,
            vec![(rat(0), 2), (ratio(1, 2), 1), (ratio(1, 2), 1), (rat(1), 0)]
        );
        // q^2 + 2 q^{3/2} + q, exact in Q(sqrt 5)
        let count = stringy_count(&table, None).unwrap();
        let expected = QExp::power(rat(2))
            .add(&QExp::term(ratio(3, 2), rat(2)))
            .add(&QExp::power(rat(1)));
        assert!(count.value_eq(&expected, 5, 1));
        let epoly = stringy_epoly(&table, None).unwrap();
        assert!(epoly.specialize_xy().value_eq(&count, 5, 1));
        // the symmetric off-diagonal form is nontrivial on every nonidentity
        // sector, so only the identity survives
        let gerbe = GerbeData::from_bilinear(&group, &[vec![0, 1], vec![1, 0]]);
        let twisted = stringy_count(&table, Some(&gerbe)).unwrap();
        assert!(twisted.value_eq(&QExp::power(rat(2)), 5, 1));
        // a rank-one form spares exactly the sector in its radical
        let gerbe = GerbeData::from_bilinear(&group, &[vec![0, 0], vec![0, 1]]);
        let twisted = stringy_count(&table, Some(&gerbe)).unwrap();
        let survivors = QExp::power(rat(2)).add(&QExp::term(ratio(3, 2), rat(1)));
        assert!(twisted.value_eq(&survivors, 5, 1));
    }

    #[test]
    fn gerbe_triviality_and_bilinear_killing() {
        let f7 = ff_make_field(7, 1).unwrap();
        let act = LinearDiagonalAction::cyclic(3, &[1, 2], f7).unwrap();
        let table = strata_from_action(&act, 1).unwrap();
        let z3 = FinAbGroup::cyclic(3);
        let count = stringy_count(&table, None).unwrap();
        assert_eq!(
            stringy_count(&table, Some(&GerbeData::trivial(&z3))).unwrap(),
            count
        );
        let gerbe = GerbeData::from_bilinear(&z3, &[vec![1]]);
        let twisted = stringy_count(&table, Some(&gerbe)).unwrap();
        // only the identity sector survives
        assert_eq!(twisted.reduce_at(7, 1).as_rational(), Some(rat(49)));
        // twisted invariants are also reindex-invariant for bilinear gerbes
        for c in [2u64] {
            let re = xi_reindex(&table, c).unwrap();
            assert_eq!(stringy_count(&re, Some(&gerbe)).unwrap(), twisted);
        }
    }
}
