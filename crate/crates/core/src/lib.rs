//! Cascaded-system master equations for a two-level emitter interacting with a
//! traveling pulse of quantum light.
//!
//! The input pulse is released by a virtual source cavity, the emitter sits
//! downstream, and an optional virtual pick-up cavity absorbs one chosen
//! output mode. Three equivalent formulations are provided (source cavity
//! only, source plus pick-up, and the rotated frame that follows the pulse),
//! together with reference single-mode Jaynes-Cummings models and an
//! independent time-bin scattering oracle.
//!
//! All numerics are generic over the real scalar type; the aliases at the
//! crate root fix it to `f64` or `f32`.

pub mod algebra;
pub mod error;
pub mod integrator;
pub mod models;
pub mod num;
pub mod oracle;
pub mod pulses;

pub use error::{Error, Result};
pub use num::{Complex, Real};

pub type Operator64 = algebra::Operator<f64>;
pub type Operator32 = algebra::Operator<f32>;
pub type SystemState64 = algebra::SystemState<f64>;
pub type SystemState32 = algebra::SystemState<f32>;
pub type PulseShape64 = pulses::PulseShape<f64>;
pub type PulseShape32 = pulses::PulseShape<f32>;
pub type CouplingPolicy64 = pulses::CouplingPolicy<f64>;
pub type ModelSpec64 = models::ModelSpec<f64>;
pub type ModelSpec32 = models::ModelSpec<f32>;
pub type FieldStateSpec64 = models::FieldStateSpec<f64>;
pub type IntegratorConfig64 = integrator::IntegratorConfig<f64>;
pub type IntegratorConfig32 = integrator::IntegratorConfig<f32>;
pub type Trajectory64 = integrator::Trajectory<f64>;
pub type Trajectory32 = integrator::Trajectory<f32>;
pub type FewPhotonState64 = oracle::FewPhotonState<f64>;
pub type ModeDecomposition64 = oracle::ModeDecomposition<f64>;
