//! Subspace-to-subspace state-transfer control of a random-coupling
//! transverse Ising ring.
//!
//! The numerical modules are generic over [`Real`] (`f32`/`f64`); the
//! aliases below fix the scalar to `f64`, which every tolerance in the crate
//! assumes.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod io;
pub mod optimizers;
pub mod pulses;
pub mod scalar;
pub mod seeding;
pub mod spin_model;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

pub type SpinChainSpec = spin_model::SpinChainSpec<f64>;
pub type Operator = spin_model::Operator<f64>;
pub type Spectrum = spin_model::Spectrum<f64>;
pub type BoundaryStates = spin_model::BoundaryStates<f64>;
pub type Hamiltonian = dynamics::Hamiltonian<f64>;
pub type ControlProblem = dynamics::ControlProblem<f64>;
pub type EvolutionResult = dynamics::EvolutionResult<f64>;
pub type PulseSpec = pulses::PulseSpec<f64>;
pub type PiecewiseConstantPulse = pulses::PiecewiseConstantPulse<f64>;
pub type DressedPulse = pulses::DressedPulse<f64>;
pub type PolynomialParams = pulses::PolynomialParams<f64>;
pub type GaussianParams = pulses::GaussianParams<f64>;
pub type SearchBox = optimizers::SearchBox<f64>;
pub type OptimizationResult = optimizers::OptimizationResult<f64>;
pub type GridSearch = optimizers::GridSearch<f64>;
