//! Simulation of the optical spectroscopy of a diamond NV center whose
//! excited-state orbitals are dressed by a gigahertz mechanical drive.
//!
//! All Hamiltonian parameters are ordinary frequencies in GHz (E/h) and all
//! times are in ns. Internally the generators are multiplied by 2π so that
//! phases are in radians.
//!
//! Module map:
//!
//! * [`strain_model`]: static strain, mixing angle, stress-to-drive conversion
//!   and the polarization forward model.
//! * [`hamiltonians`]: the spin-0 three-level and full eight-level generators.
//! * [`lindblad`]: density-matrix evolution and the PLE observable.
//! * [`floquet`]: Bessel functions, the truncated Floquet matrix and sideband
//!   heights.
//! * [`dressed_analytics`]: closed-form multi-phonon Rabi predictions.
//! * [`experiments`]: sweeps, peak extraction, fitting and the application
//!   studies.

pub mod dressed_analytics;
pub mod experiments;
pub mod floquet;
pub mod hamiltonians;
pub mod lindblad;
pub mod strain_model;

mod error;
pub(crate) mod linalg;

pub use error::{Error, Result};

pub use dressed_analytics::{PolaronParams, SplittingBreakdown, SplittingCombination};
pub use floquet::{bessel_j, FloquetMatrix, SidebandWeights};
pub use hamiltonians::{
    DriveAmplitudes, DriveParams, FullLevelParams, HermitianGenerator, LevelModel, OpticalParams,
};
pub use lindblad::{
    DecayChannel, DensityMatrix, EvolutionResult, InitialState, PeriodicGenerator, PulseSequence,
};
pub use strain_model::{MixingAngle, PolarizationCurve, StaticStrain, StressCoupling};

/// Library version, recorded in CLI sidecar metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Planck constant in eV·s.
pub const PLANCK_EV_S: f64 = 4.135667696e-15;

/// Conversion from a frequency in GHz to an angular rate in rad/ns.
pub const GHZ_TO_RAD_PER_NS: f64 = std::f64::consts::TAU;
