//! Composite-boson statistics and non-Hermitian tunneling dynamics.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to one precision. Scenario
//! documents, sweeps and output formats work in `f64`.

pub mod branching;
pub mod coboson;
pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod runner;
pub mod scalar;
pub mod scenario;
pub mod selftest;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

pub type SchmidtSpectrumF64 = coboson::SchmidtSpectrum<f64>;
pub type SchmidtSpectrumF32 = coboson::SchmidtSpectrum<f32>;
pub type CobosonEnsembleF64 = coboson::CobosonEnsemble<f64>;
pub type CobosonEnsembleF32 = coboson::CobosonEnsemble<f32>;
pub type QuantumDotGeometryF64 = coboson::QuantumDotGeometry<f64>;
pub type QuantumDotGeometryF32 = coboson::QuantumDotGeometry<f32>;
pub type TwoSiteSystemF64 = dynamics::TwoSiteSystem<f64>;
pub type TwoSiteSystemF32 = dynamics::TwoSiteSystem<f32>;
pub type SiteNetworkF64 = dynamics::SiteNetwork<f64>;
pub type SiteNetworkF32 = dynamics::SiteNetwork<f32>;
pub type TrajectoryF64 = dynamics::Trajectory<f64>;
pub type TrajectoryF32 = dynamics::Trajectory<f32>;
pub type BranchingResultF64 = branching::BranchingResult<f64>;
pub type BranchingResultF32 = branching::BranchingResult<f32>;
