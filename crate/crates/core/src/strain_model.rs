//! Static strain parametrization of the excited-state orbital doublet.
//!
//! In the {|E_x⟩, |E_y⟩} basis the strain Hamiltonian has the Jahn-Teller
//! form `V_A1 + V_E1 σ_z + V_E2 σ_x`. Its eigenvalues are `±Δx` with
//! `Δx = sqrt(V_E1² + V_E2²)` and its eigenvectors are rotated by the mixing
//! angle θ, `tan 2θ = V_E2 / V_E1`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::hamiltonians::DriveAmplitudes;
use crate::{Error, Result, PLANCK_EV_S};

/// Intrinsic deformation potentials in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticStrain {
    #[serde(default)]
    pub v_a1: f64,
    pub v_e1: f64,
    #[serde(default)]
    pub v_e2: f64,
}

impl StaticStrain {
    pub fn new(v_a1: f64, v_e1: f64, v_e2: f64) -> Self {
        Self { v_a1, v_e1, v_e2 }
    }

    /// Strain with half-splitting `delta_x` and mixing angle `theta`.
    pub fn from_splitting(delta_x: f64, theta: f64) -> Self {
        Self {
            v_a1: 0.0,
            v_e1: delta_x * (2.0 * theta).cos(),
            v_e2: delta_x * (2.0 * theta).sin(),
        }
    }

    /// Half-splitting Δx of the orbital doublet.
    pub fn delta_x(&self) -> f64 {
        self.v_e1.hypot(self.v_e2)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.v_a1, self.v_e1, self.v_e2].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("strain", "deformation potentials must be finite"));
        }
        Ok(())
    }
}

/// Rotation angle of the strained orbital eigenbasis, in [−π/4, π/4].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MixingAngle(pub f64);

impl MixingAngle {
    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Linear stress coupling coefficients in eV/Pa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressCoupling {
    pub a_coeff: f64,
    pub b_coeff: f64,
}

impl Default for StressCoupling {
    fn default() -> Self {
        Self { a_coeff: 1.92e-12, b_coeff: 1.36e-12 }
    }
}

impl StressCoupling {
    pub fn new(a_coeff: f64, b_coeff: f64) -> Result<Self> {
        if !(a_coeff > 0.0 && b_coeff > 0.0) {
            return Err(Error::invalid("coupling", "A and B must be positive"));
        }
        Ok(Self { a_coeff, b_coeff })
    }
}

/// Normalized photoluminescence of the two orbital dipoles versus laser
/// polarization angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizationCurve {
    pub angles: Vec<f64>,
    pub pl_x: Vec<f64>,
    pub pl_y: Vec<f64>,
}

/// Mixing angle θ = ½·atan2(V_E2, V_E1) folded into [−π/4, π/4].
///
/// Folding by π/2 swaps the roles of the two eigenvectors but leaves the
/// rotated-basis Hamiltonian unchanged.
pub fn mixing_angle(strain: &StaticStrain) -> Result<MixingAngle> {
    if strain.v_e1 == 0.0 && strain.v_e2 == 0.0 {
        return Err(Error::DegenerateStrain);
    }
    let mut theta = 0.5 * strain.v_e2.atan2(strain.v_e1);
    if theta > FRAC_PI_4 {
        theta -= FRAC_PI_2;
    } else if theta < -FRAC_PI_4 {
        theta += FRAC_PI_2;
    }
    Ok(MixingAngle(theta))
}

/// Full static splitting 2Δx of the orbital doublet, GHz.
pub fn static_splitting(strain: &StaticStrain) -> f64 {
    2.0 * strain.delta_x()
}

/// Phonon drive amplitudes produced by a [001] uniaxial stress wave of
/// amplitude `sigma0` (Pa).
///
/// `off_axis` is the asymmetry (σ_XX − σ_YY)/σ_ZZ that feeds the E₂ channel.
pub fn stress_to_drive(
    sigma0: f64,
    coupling: &StressCoupling,
    off_axis: f64,
) -> Result<DriveAmplitudes> {
    if !(sigma0 >= 0.0) {
        return Err(Error::invalid("sigma0", "stress amplitude must be non-negative"));
    }
    let to_ghz = 1.0 / PLANCK_EV_S * 1e-9;
    Ok(DriveAmplitudes {
        amp_a1: coupling.a_coeff * sigma0 * to_ghz,
        amp_e1: 2.0 * coupling.b_coeff * sigma0 * to_ghz,
        amp_e2: 3f64.sqrt() * coupling.b_coeff * off_axis * sigma0 * to_ghz,
    })
}

/// Polarization response of the two orthogonal dipoles, each rotated by θ.
///
/// The curves are `S(s0·cos²(φ − φ0 − θ))` and the same shifted by π/2, with
/// the saturation law `S(u) = u / (1 + u)` normalized to unit peak. For
/// `s0 = 0` the unsaturated Malus law is returned.
pub fn polarization_curve(
    theta: MixingAngle,
    phi0: f64,
    s0: f64,
    angles: &[f64],
) -> Result<PolarizationCurve> {
    if !(s0 >= 0.0) {
        return Err(Error::invalid("s0", "saturation parameter must be non-negative"));
    }
    let response = |phi: f64| {
        let c2 = phi.cos().powi(2);
        if s0 == 0.0 {
            c2
        } else {
            let u = s0 * c2;
            (u / (1.0 + u)) * (1.0 + s0) / s0
        }
    };
    let offset = phi0 + theta.0;
    let pl_x = angles.iter().map(|&phi| response(phi - offset).clamp(0.0, 1.0)).collect();
    let pl_y = angles
        .iter()
        .map(|&phi| response(phi - offset - FRAC_PI_2).clamp(0.0, 1.0))
        .collect();
    Ok(PolarizationCurve { angles: angles.to_vec(), pl_x, pl_y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mixing_angle_examples() {
        let a = |e1, e2| mixing_angle(&StaticStrain::new(0.0, e1, e2)).unwrap().0;
        assert_eq!(a(1.0, 0.0), 0.0);
        assert!((a(0.0, 1.0) - PI / 4.0).abs() < 1e-15);
        assert!((a(1.0, 1.0) - PI / 8.0).abs() < 1e-15);
        assert!((a(1.0, 1.0) - 0.392_699_081_698_724_1).abs() < 1e-15);
        assert_eq!(
            mixing_angle(&StaticStrain::new(1.0, 0.0, 0.0)),
            Err(Error::DegenerateStrain)
        );
    }

    #[test]
    fn mixing_angle_fold_keeps_tan_relation() {
        for &(e1, e2) in &[(-1.0, 0.3), (-2.0, -0.5), (0.4, -3.0), (-0.1, 2.0)] {
            let th = mixing_angle(&StaticStrain::new(0.0, e1, e2)).unwrap().0;
            assert!(th.abs() <= PI / 4.0 + 1e-15);
            assert!(((2.0 * th).tan() - e2 / e1).abs() < 1e-12);
        }
    }

    #[test]
    fn splitting_examples() {
        assert!((static_splitting(&StaticStrain::new(0.0, 5.3, 0.0)) - 10.6).abs() < 1e-12);
        assert_eq!(static_splitting(&StaticStrain::default()), 0.0);
        assert!((static_splitting(&StaticStrain::new(0.0, 3.0, 4.0)) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn stress_conversion_matches_quoted_coupling() {
        let c = StressCoupling::default();
        let d = stress_to_drive(30e6, &c, 0.0).unwrap();
        assert!((d.amp_a1 - 13.927).abs() < 1e-2, "{}", d.amp_a1);
        assert_eq!(d.amp_e2, 0.0);
        let unit = stress_to_drive(1.0, &c, 0.0).unwrap();
        let hz = unit.amp_a1 * 1e9;
        assert!((hz - 464.25).abs() < 0.1, "{hz}");
        assert!((hz - 465.0).abs() < 1.0);
        let zero = stress_to_drive(0.0, &c, 0.3).unwrap();
        assert_eq!((zero.amp_a1, zero.amp_e1, zero.amp_e2), (0.0, 0.0, 0.0));
        assert!((d.amp_e1 / d.amp_a1 - 1.4167).abs() < 1e-4);
        assert!(stress_to_drive(-1.0, &c, 0.0).is_err());
        assert!(StressCoupling::new(0.0, 1.0).is_err());
    }

    #[test]
    fn off_axis_stress_feeds_e2() {
        let d = stress_to_drive(1e6, &StressCoupling::default(), 0.5).unwrap();
        let expect = 3f64.sqrt() * 1.36e-12 * 0.5 * 1e6 / PLANCK_EV_S * 1e-9;
        assert!((d.amp_e2 - expect).abs() < 1e-12);
    }

    fn dense_angles(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 * PI / n as f64).collect()
    }

    fn argmax(v: &[f64]) -> usize {
        v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0
    }

    #[test]
    fn polarization_unsaturated_is_malus_law() {
        let angles = dense_angles(90);
        let c = polarization_curve(MixingAngle(0.0), 0.2, 0.0, &angles).unwrap();
        for (phi, pl) in angles.iter().zip(&c.pl_x) {
            assert!((pl - (phi - 0.2).cos().powi(2)).abs() < 1e-15);
        }
        let tiny = polarization_curve(MixingAngle(0.0), 0.2, 1e-9, &angles).unwrap();
        for (a, b) in tiny.pl_x.iter().zip(&c.pl_x) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn polarization_maxima_are_orthogonal_and_rotate_with_theta() {
        let n = 7200;
        let angles = dense_angles(n);
        let step = PI / n as f64;
        let c0 = polarization_curve(MixingAngle(0.0), 0.0, 3.0, &angles).unwrap();
        let gap = (argmax(&c0.pl_y) as f64 - argmax(&c0.pl_x) as f64) * step;
        assert!((gap - PI / 2.0).abs() < 1e-12);

        let c8 = polarization_curve(MixingAngle(PI / 8.0), 0.0, 3.0, &angles).unwrap();
        let shift_x = (argmax(&c8.pl_x) as f64 - argmax(&c0.pl_x) as f64) * step;
        let shift_y = (argmax(&c8.pl_y) as f64 - argmax(&c0.pl_y) as f64) * step;
        assert!((shift_x - PI / 8.0).abs() <= step);
        assert!((shift_y - PI / 8.0).abs() <= step);
        assert!(c8.pl_x.iter().chain(&c8.pl_y).all(|v| (0.0..=1.0).contains(v)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn splitting_symmetries(e1 in -50.0f64..50.0, e2 in -50.0f64..50.0) {
                let s = static_splitting(&StaticStrain::new(0.0, e1, e2));
                prop_assert!((s - static_splitting(&StaticStrain::new(0.0, e2, e1))).abs() < 1e-12);
                prop_assert!((s - static_splitting(&StaticStrain::new(0.0, -e1, e2))).abs() < 1e-12);
                prop_assert!((s - static_splitting(&StaticStrain::new(0.0, e1, -e2))).abs() < 1e-12);
            }

            #[test]
            fn mixing_angle_scale_invariant(e1 in -10.0f64..10.0, e2 in -10.0f64..10.0, k in 1e-3f64..1e3) {
                prop_assume!(e1.abs() + e2.abs() > 1e-6);
                let a = mixing_angle(&StaticStrain::new(0.0, e1, e2)).unwrap().0;
                let b = mixing_angle(&StaticStrain::new(0.0, k * e1, k * e2)).unwrap().0;
                prop_assert!((a - b).abs() < 1e-12);
            }

            #[test]
            fn stress_is_linear(sigma in 0.0f64..1e8, off in -1.0f64..1.0) {
                let c = StressCoupling::default();
                let one = stress_to_drive(sigma, &c, off).unwrap();
                let two = stress_to_drive(2.0 * sigma, &c, off).unwrap();
                prop_assert!((two.amp_a1 - 2.0 * one.amp_a1).abs() <= 1e-12 * two.amp_a1.abs().max(1.0));
                prop_assert!((two.amp_e1 - 2.0 * one.amp_e1).abs() <= 1e-12 * two.amp_e1.abs().max(1.0));
                prop_assert!((two.amp_e2 - 2.0 * one.amp_e2).abs() <= 1e-12 * two.amp_e2.abs().max(1.0));
            }

            #[test]
            fn polarization_in_unit_interval(theta in -0.78f64..0.78, phi0 in -3.0f64..3.0, s0 in 0.0f64..100.0) {
                let angles: Vec<f64> = (0..64).map(|i| i as f64 * 0.1).collect();
                let c = polarization_curve(MixingAngle(theta), phi0, s0, &angles).unwrap();
                prop_assert!(c.pl_x.iter().chain(&c.pl_y).all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }
}
