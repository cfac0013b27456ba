//! Parameter sets of the five emitters used in the studies.

use std::f64::consts::PI;

use crate::hamiltonians::{DriveParams, OpticalParams};
use crate::strain_model::StaticStrain;

/// Drive frequency of the lowest-order mode used for NV1 and NV4, GHz.
pub const OMEGA_NV14: f64 = 1.3844;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub strain: StaticStrain,
    pub drive: DriveParams,
    pub optics: OpticalParams,
}

/// Large transverse strain, both deformation channels driven.
pub fn nv1() -> Preset {
    Preset {
        name: "NV1",
        strain: StaticStrain::new(0.0, 5.3, 0.0),
        drive: DriveParams::new(13.0, -5.2, OMEGA_NV14),
        optics: OpticalParams::new(0.0, 0.2, 0.06),
    }
}

/// Small splitting near the single-phonon resonance.
pub fn nv2() -> Preset {
    Preset {
        name: "NV2",
        strain: StaticStrain::from_splitting(1.6, PI / 16.0),
        drive: DriveParams::new(2.5, -1.0, 1.6),
        optics: OpticalParams::new(0.0, 0.2, 0.06),
    }
}

/// NV2 retuned for time-domain Rabi oscillations.
pub fn nv2_rabi() -> Preset {
    Preset {
        name: "NV2-rabi",
        strain: StaticStrain::from_splitting(1.62, PI / 16.0),
        drive: DriveParams::new(0.0, 0.5, 3.24),
        optics: OpticalParams::new(1.62, 0.5, 0.05),
    }
}

pub fn nv3() -> Preset {
    Preset {
        name: "NV3",
        strain: StaticStrain::from_splitting(1.05, PI / 16.0),
        drive: DriveParams::new(2.5, -1.0, OMEGA_NV14),
        optics: OpticalParams::new(0.0, 0.2, 0.06),
    }
}

/// Pure 𝒜 modulation of a widely split pair.
pub fn nv4() -> Preset {
    Preset {
        name: "NV4",
        strain: StaticStrain::new(0.0, 11.5, 0.0),
        drive: DriveParams::new(6.0, 0.0, OMEGA_NV14),
        optics: OpticalParams::new(0.0, 0.2, 0.06),
    }
}

pub fn nv5() -> Preset {
    Preset {
        name: "NV5",
        strain: StaticStrain::from_splitting(4.9, PI / 16.0),
        drive: DriveParams::new(0.0, 2.0, OMEGA_NV14),
        optics: OpticalParams::new(0.0, 0.2, 0.06),
    }
}

/// Looks a preset up by case-insensitive name.
pub fn by_name(name: &str) -> Option<Preset> {
    let all = [nv1(), nv2(), nv2_rabi(), nv3(), nv4(), nv5()];
    all.into_iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splittings() {
        assert!((2.0 * nv1().strain.delta_x() - 10.6).abs() < 1e-12);
        assert!((2.0 * nv2().strain.delta_x() - 3.2).abs() < 1e-12);
        assert!((2.0 * nv4().strain.delta_x() - 23.0).abs() < 1e-12);
        assert!((2.0 * nv5().strain.delta_x() - 9.8).abs() < 1e-12);
        assert!((nv4().optics.s0() - 22.0).abs() < 0.5);
    }

    #[test]
    fn lookup() {
        assert_eq!(by_name("nv2-RABI").unwrap().name, "NV2-rabi");
        assert!(by_name("nv9").is_none());
    }
}
