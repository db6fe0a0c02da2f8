//! Finite-abelian-group model of one dual pair of torus fibrations: each
//! fibre is a pair of groups of equal order joined by a homomorphism, with
//! the two torsor classes realized as characters through Pontryagin duality.
//! The fibrewise identity reduces to exact character-sum cancellation, and
//! the global identity is the sum over fibres.

use crate::cyclotomic::Cyclotomic;
use crate::duality::{ec_group, EllipticCurveModel};
use crate::galois::{Character, FinAbGroup, GroupElem};
use crate::numeric::Rat;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MirrorError {
    #[error("character sum failed to be rational")]
    IrrationalSum,
    #[error(transparent)]
    Duality(#[from] crate::duality::DualityError),
}

/// One fibre of the model: groups G, H of equal order, a homomorphism
/// φ: G → H given on generators, torsor characters t₁ on H and t₂ on G, a
/// positive normalization N standing in for q^{dim}, and the root of unity ξ
/// allowed in front of nontrivial character values.
#[derive(Clone, Debug)]
pub struct FiberModel {
    pub g: FinAbGroup,
    pub h: FinAbGroup,
    /// Images in H of the standard generators of G.
    pub phi: Vec<GroupElem>,
    pub t1: Character,
    pub t2: Character,
    pub n: Rat,
    pub xi: Cyclotomic,
}

impl FiberModel {
    pub fn new(
        g: FinAbGroup,
        h: FinAbGroup,
        phi: Vec<GroupElem>,
        t1: Character,
        t2: Character,
        n: Rat,
    ) -> Self {
        assert_eq!(g.order(), h.order(), "dual-pair fibres have equal order");
        assert_eq!(phi.len(), g.rank());
        for (img, d) in phi.iter().zip(g.factors()) {
            assert!(
                h.is_zero_elem(&h.scale(*d, img)),
                "homomorphism must respect generator orders"
            );
        }
        assert_eq!(t1.owner(), &h);
        assert_eq!(t2.owner(), &g);
        assert!(n > Rat::zero());
        FiberModel {
            g,
            h,
            phi,
            t1,
            t2,
            n,
            xi: Cyclotomic::one(1),
        }
    }

    pub fn with_xi(mut self, xi: Cyclotomic) -> Self {
        self.xi = xi;
        self
    }

    pub fn phi_apply(&self, a: &GroupElem) -> GroupElem {
        let mut acc = self.h.zero();
        for (c, img) in a.iter().zip(&self.phi) {
            acc = self.h.add(&acc, &self.h.scale(*c, img));
        }
        acc
    }

    pub fn image_size(&self) -> u64 {
        let image: BTreeSet<GroupElem> = self
            .g
            .elements()
            .iter()
            .map(|a| self.phi_apply(a))
            .collect();
        image.len() as u64
    }

    pub fn kernel_size(&self) -> u64 {
        self.g.order() / self.image_size()
    }
}

/// The four cases of the fibrewise identity, keyed by which fibres have
/// rational points (a fibre is nonempty exactly when its character is
/// trivial).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MirrorCase {
    BothEmpty,
    FirstEmpty,
    SecondEmpty,
    BothNonEmpty,
}

impl MirrorCase {
    pub fn label(&self) -> u8 {
        match self {
            MirrorCase::BothEmpty => 1,
            MirrorCase::FirstEmpty => 2,
            MirrorCase::SecondEmpty => 3,
            MirrorCase::BothNonEmpty => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberIntegrals {
    pub i1: Rat,
    pub i2: Rat,
    pub case: MirrorCase,
    pub equal: bool,
}

/// Σ over the group of the integrand: value 1 on a fibre with trivial
/// character (the constant case), ξ·(character value) otherwise, summed in
/// exact cyclotomic arithmetic.
fn character_sum(
    group: &FinAbGroup,
    t: &Character,
    xi: &Cyclotomic,
    shift: Option<&GroupElem>,
) -> Result<Rat, MirrorError> {
    if t.is_trivial() {
        return Ok(Rat::from_integer(group.order().into()));
    }
    let m = crate::cyclotomic::lcm(group.exponent().max(1), xi.order());
    let xi_m = crate::duality::embed_cyclotomic(xi, m);
    let mut acc = Cyclotomic::zero(m);
    for a in group.elements() {
        let b = match shift {
            None => a,
            Some(s) => group.add(&a, s),
        };
        let v = crate::duality::embed_cyclotomic(&t.eval_root(&b, group.exponent().max(1)), m);
        acc = acc.add(&xi_m.mul(&v));
    }
    let n = acc.as_integer().ok_or(MirrorError::IrrationalSum)?;
    Ok(Rat::from_integer(n.into()))
}

/// The two fibre integrals: I₁ vanishes unless t₁ is trivial, in which case
/// it is (1/N)·Σ_G (integrand against t₂); symmetrically for I₂.
pub fn fiber_integrals(fiber: &FiberModel) -> Result<FiberIntegrals, MirrorError> {
    let case = match (fiber.t1.is_trivial(), fiber.t2.is_trivial()) {
        (false, false) => MirrorCase::BothEmpty,
        (false, true) => MirrorCase::FirstEmpty,
        (true, false) => MirrorCase::SecondEmpty,
        (true, true) => MirrorCase::BothNonEmpty,
    };
    let i1 = if !fiber.t1.is_trivial() {
        Rat::zero()
    } else {
        character_sum(&fiber.g, &fiber.t2, &fiber.xi, None)? / &fiber.n
    };
    let i2 = if !fiber.t2.is_trivial() {
        Rat::zero()
    } else {
        character_sum(&fiber.h, &fiber.t1, &fiber.xi, None)? / &fiber.n
    };
    let equal = i1 == i2;
    Ok(FiberIntegrals {
        i1,
        i2,
        case,
        equal,
    })
}

/// Finite avatar of translation invariance: summing over a shifted coset
/// leaves the vanishing/nonvanishing conclusion unchanged.
pub fn translated_sum(fiber: &FiberModel, shift: &GroupElem) -> Result<(Rat, Rat), MirrorError> {
    let s1 = if fiber.t2.is_trivial() {
        Rat::from_integer(fiber.g.order().into())
    } else {
        character_sum(&fiber.g, &fiber.t2, &fiber.xi, Some(shift))?
    };
    let s0 = character_sum(&fiber.g, &fiber.t2, &fiber.xi, None)?;
    Ok((s0, s1))
}

/// A base of fibres sharing one normalization.
#[derive(Clone, Debug)]
pub struct DualPairModel {
    pub fibers: Vec<FiberModel>,
}

#[derive(Clone, Debug)]
pub struct GlobalReport {
    pub sum1: Rat,
    pub sum2: Rat,
    pub pass: bool,
    pub per_fiber: Vec<FiberIntegrals>,
}

/// Both global integrals, fibre by fibre, and their equality.
pub fn global_identity(model: &DualPairModel) -> Result<GlobalReport, MirrorError> {
    let mut sum1 = Rat::zero();
    let mut sum2 = Rat::zero();
    let mut per_fiber = Vec::with_capacity(model.fibers.len());
    for fiber in &model.fibers {
        let ints = fiber_integrals(fiber)?;
        sum1 += &ints.i1;
        sum2 += &ints.i2;
        per_fiber.push(ints);
    }
    let pass = sum1 == sum2;
    Ok(GlobalReport {
        sum1,
        sum2,
        pass,
        per_fiber,
    })
}

/// Instantiate the schema from an elliptic curve: G = H = E(F_q), φ the
/// multiplication-by-n map, characters assigned per fibre by a seeded
/// generator with t₂ pulled back through φ (so it vanishes on ker φ).
pub fn make_model_from_curve(
    curve: &EllipticCurveModel,
    n: u64,
    base_size: usize,
    seed: u64,
) -> Result<DualPairModel, MirrorError> {
    assert!(!n.is_multiple_of(curve.field().p()), "need gcd(n, p) = 1");
    let g = ec_group(curve)?;
    let h = g.clone();
    let phi: Vec<GroupElem> = (0..g.rank()).map(|i| g.scale(n, &g.generator(i))).collect();
    let norm = Rat::from_integer(curve.field().q().into());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fibers = Vec::with_capacity(base_size);
    for _ in 0..base_size {
        let t1_exps: GroupElem = h.factors().iter().map(|&d| rng.gen_range(0..d)).collect();
        let t2_upstairs: GroupElem = h.factors().iter().map(|&d| rng.gen_range(0..d)).collect();
        let t1 = h.character(t1_exps);
        let t2 = h.character(t2_upstairs).pullback(&g, &phi);
        fibers.push(FiberModel::new(
            g.clone(),
            h.clone(),
            phi.clone(),
            t1,
            t2,
            norm.clone(),
        ));
    }
    Ok(DualPairModel { fibers })
}

/// |ker φ| of the curve model equals |E\[n\](F_q)| = Π gcd(dᵢ, n).
pub fn curve_model_kernel_matches_torsion(
    curve: &EllipticCurveModel,
    n: u64,
) -> Result<bool, MirrorError> {
    let g = ec_group(curve)?;
    let torsion: u64 = g
        .factors()
        .iter()
        .map(|&d| crate::cyclotomic::gcd(d, n))
        .product();
    let phi: Vec<GroupElem> = (0..g.rank()).map(|i| g.scale(n, &g.generator(i))).collect();
    let probe = FiberModel::new(
        g.clone(),
        g.clone(),
        phi,
        g.trivial_character(),
        g.trivial_character(),
        Rat::from_integer(1.into()),
    );
    Ok(probe.kernel_size() == torsion)
}
