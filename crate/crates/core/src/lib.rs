//! Characteristic-function machinery for distributions on `X = R x Z(2) x G`,
//! where `G` is a finite Abelian group of odd order.
//!
//! The crate is organised bottom-up:
//!
//! * [`finite_abelian`]: arithmetic, characters and automorphisms of `Z(n_1) x ... x Z(n_r)`;
//! * [`group_rfg`]: the ambient group `X`, its dual `Y`, the pairing and automorphisms `(a, I, alpha_G)`;
//! * [`measures`]: finite signed mixtures of Gaussian / point atoms on `X`;
//! * [`theta`]: the class Theta on `R x Z(2)` and the group of invertible `Z(2)` factors;
//! * [`heyde`]: the symmetry functional equation, a Monte-Carlo symmetry test and the order-2 relation;
//! * [`structure`]: instance generation, decomposition, factor exchange and rigidity;
//! * [`io`]: JSON schemas shared with the command line front end.
//!
//! All numerical code is generic over [`Real`] (implemented for `f32` and `f64`);
//! the aliases at the crate root fix the scalar to `f64`.

pub mod error;
pub mod finite_abelian;
pub mod group_rfg;
pub mod heyde;
pub mod io;
pub mod measures;
pub mod structure;
pub mod theta;

mod real;

pub use error::{Error, Result};
pub use finite_abelian::{DualCharacter, FiniteAbelianGroup, GroupAutomorphism, GroupElement};
pub use real::Real;

pub use num_complex::Complex;

/// Points of `X` with `f64` real coordinate.
pub type XPoint = group_rfg::XPoint<f64>;
/// Characters of `X` with `f64` real coordinate.
pub type YPoint = group_rfg::YPoint<f64>;
pub type XAutomorphism = group_rfg::XAutomorphism<f64>;
pub type YAutomorphism = group_rfg::YAutomorphism<f64>;
pub type AmbientGroup = group_rfg::AmbientGroup;

pub type RealAtom = measures::RealAtom<f64>;
pub type Term = measures::Term<f64>;
pub type Measure = measures::AtomicSignedMeasure<f64>;
pub type Verdict = measures::Verdict<f64>;

pub type ThetaParams = theta::ThetaParams<f64>;
pub type PiMeasure = theta::PiMeasure<f64>;

pub type SGrid = heyde::SGrid<f64>;
pub type ResidualReport = heyde::ResidualReport<f64>;
pub type McReport = heyde::McReport<f64>;
pub type DeltaRelation = heyde::DeltaRelation<f64>;

pub type InstanceSpec = structure::InstanceSpec<f64>;
pub type Instance = structure::Instance<f64>;
pub type Decomposition = structure::Decomposition<f64>;
pub type Rigidity = structure::Rigidity<f64>;
