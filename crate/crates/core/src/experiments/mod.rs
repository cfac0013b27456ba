//! Sweeps, peak extraction, fitting and the application studies.

pub mod cdd;
pub mod fit;
pub mod map;
pub mod peaks;
pub mod presets;
pub mod rabi;
pub mod resonator;
pub mod spectral;

pub use cdd::{cdd_dispersion, CddOptions, Dispersion, FieldChannel};
pub use fit::{add_noise, fit_drive_params, FitBounds, FitOptions, FitResult};
pub use map::{dressed_map, linspace, SpectrumMap};
pub use peaks::{extract_peaks, locate_peak, Peak, PeakList};
pub use rabi::{rabi_flopping, rabi_period, OpticalPulse, RabiTrace};
pub use resonator::{resonator_response, ring_up_envelope, sideband_count, ResonatorModel};
pub use spectral::dominant_frequency;
