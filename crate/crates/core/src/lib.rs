//! Exact-arithmetic toolkit for point counts and p-adic volumes of finite
//! abelian quotient stacks at desk scale: finite fields, truncated Laurent
//! series over F_q((t)), H¹ bookkeeping with its skew pairing, stringy
//! invariants with gerbe twists, orbifold volumes, elliptic-curve duality
//! checks, and a finite dual-pair simulator.
//!
//! Every quantity is exact (rationals, roots of unity in cyclotomic integer
//! rings, formal q-powers), so every identity in the test suite is an
//! equality, not a tolerance.

pub mod cyclotomic;
pub mod duality;
pub mod ff;
pub mod galois;
pub mod localfield;
pub mod mirrorsim;
pub mod numeric;
pub mod orbifold;
pub mod qexp;
pub mod stringy;
pub mod suite;

pub use numeric::Rat;
