//! Time-dependent Hamiltonians of the driven NV center.
//!
//! Matrices are stored in GHz. Every generator has the form
//! `H(t) = H_static + cos(2π·ω_m·t + phase)·H_drive`, which [`split_spin0`]
//! and [`split_full8`] expose directly for the propagators.
//!
//! Basis orderings:
//!
//! * spin-0: `(|x⟩, |y⟩, |g⟩)`
//! * full: `(|A1⟩, |A2⟩, |Ex⟩, |Ey⟩, |E1⟩, |E2⟩, |g,|ms|=1⟩, |g,ms=0⟩)`

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::strain_model::StaticStrain;
use crate::{Error, Result};

/// Laser parameters, GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalParams {
    /// Laser detuning Δ.
    pub delta: f64,
    /// Optical Rabi frequency Ω.
    pub omega: f64,
    /// Optical decay rate Γ.
    pub gamma: f64,
}

impl OpticalParams {
    pub fn new(delta: f64, omega: f64, gamma: f64) -> Self {
        Self { delta, omega, gamma }
    }

    /// Saturation parameter `2Ω²/Γ²`.
    pub fn s0(&self) -> f64 {
        2.0 * self.omega * self.omega / (self.gamma * self.gamma)
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() {
            return Err(Error::invalid("optics.delta", "must be finite"));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("optics.omega", "must be finite and non-negative"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("optics.gamma", "must be finite and positive"));
        }
        Ok(())
    }
}

/// Modulation amplitudes (𝒜, ℰ1, ℰ2) without frequency information.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriveAmplitudes {
    pub amp_a1: f64,
    pub amp_e1: f64,
    pub amp_e2: f64,
}

/// Coherent phonon drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    #[serde(default)]
    pub amp_a1: f64,
    #[serde(default)]
    pub amp_e1: f64,
    #[serde(default)]
    pub amp_e2: f64,
    pub omega_m: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DriveParams {
    pub fn new(amp_a1: f64, amp_e1: f64, omega_m: f64) -> Self {
        Self { amp_a1, amp_e1, amp_e2: 0.0, omega_m, phase: 0.0 }
    }

    /// No modulation at frequency `omega_m`.
    pub fn undriven(omega_m: f64) -> Self {
        Self::new(0.0, 0.0, omega_m)
    }

    pub fn from_amplitudes(amps: DriveAmplitudes, omega_m: f64) -> Self {
        Self { amp_a1: amps.amp_a1, amp_e1: amps.amp_e1, amp_e2: amps.amp_e2, omega_m, phase: 0.0 }
    }

    pub fn amplitudes(&self) -> DriveAmplitudes {
        DriveAmplitudes { amp_a1: self.amp_a1, amp_e1: self.amp_e1, amp_e2: self.amp_e2 }
    }

    /// All three amplitudes multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self { amp_a1: k * self.amp_a1, amp_e1: k * self.amp_e1, amp_e2: k * self.amp_e2, ..*self }
    }

    /// `cos(2π·ω_m·t + phase)`.
    pub fn modulation(&self, t: f64) -> f64 {
        (TAU * self.omega_m * t + self.phase).cos()
    }

    /// Drive period in ns.
    pub fn period(&self) -> f64 {
        1.0 / self.omega_m
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > 0.0 && self.omega_m.is_finite()) {
            return Err(Error::invalid("drive.omega_m", "must be finite and positive"));
        }
        for (name, v) in [
            ("drive.amp_a1", self.amp_a1),
            ("drive.amp_e1", self.amp_e1),
            ("drive.amp_e2", self.amp_e2),
            ("drive.phase", self.phase),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Fine-structure constants of the full spin-triplet model, GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FullLevelParams {
    pub lambda_z: f64,
    pub d_es: f64,
    pub delta_prime: f64,
    pub lambda_xy: f64,
    pub d_gs: f64,
    pub v_parallel: f64,
    pub omega_mw: f64,
}

impl Default for FullLevelParams {
    fn default() -> Self {
        Self {
            lambda_z: 5.3,
            d_es: 1.42,
            delta_prime: 1.55,
            lambda_xy: 0.2,
            d_gs: 2.877,
            v_parallel: 0.0,
            omega_mw: 0.0,
        }
    }
}

/// Which level scheme to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelModel {
    #[default]
    Spin0,
    Full8,
}

impl LevelModel {
    pub fn dim(self) -> usize {
        match self {
            LevelModel::Spin0 => 3,
            LevelModel::Full8 => 8,
        }
    }

    /// Indices of the `|Ex⟩, |Ey⟩` pair.
    pub fn orbital_pair(self) -> (usize, usize) {
        match self {
            LevelModel::Spin0 => (SPIN0_X, SPIN0_Y),
            LevelModel::Full8 => (FULL_EX, FULL_EY),
        }
    }
}

pub const SPIN0_X: usize = 0;
pub const SPIN0_Y: usize = 1;
pub const SPIN0_G: usize = 2;

pub const FULL_A1: usize = 0;
pub const FULL_A2: usize = 1;
pub const FULL_EX: usize = 2;
pub const FULL_EY: usize = 3;
pub const FULL_E1: usize = 4;
pub const FULL_E2: usize = 5;
pub const FULL_G1: usize = 6;
pub const FULL_G0: usize = 7;

/// A Hermitian matrix in GHz.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianGenerator {
    matrix: CMatrix,
}

impl HermitianGenerator {
    /// Wraps a square matrix. No symmetrization is performed.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Self { matrix: m.map(|v| Complex64::new(v, 0.0)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// `max |H − H†|`.
    pub fn hermiticity_error(&self) -> f64 {
        crate::linalg::max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    /// Real eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// `self + k·other`.
    pub fn add_scaled(&self, other: &HermitianGenerator, k: f64) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { matrix: &self.matrix + other.matrix.scale(k) })
    }

    /// Adds a 2×2 addend (such as [`electric_shift`]) onto the orbital pair
    /// of `model`.
    pub fn with_orbital_addend(&self, addend: &HermitianGenerator, model: LevelModel) -> Result<Self> {
        if addend.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: addend.dim() });
        }
        if self.dim() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: self.dim() });
        }
        let (x, y) = model.orbital_pair();
        let mut m = self.matrix.clone();
        let idx = [x, y];
        for a in 0..2 {
            for b in 0..2 {
                m[(idx[a], idx[b])] += addend.matrix[(a, b)];
            }
        }
        Ok(Self { matrix: m })
    }

    /// `(H + H†)/2`.
    pub fn symmetrized(&self) -> Self {
        Self { matrix: (&self.matrix + self.matrix.adjoint()).scale(0.5) }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Static and drive parts of the spin-0 Hamiltonian.
pub fn split_spin0(
    strain: &StaticStrain,
    drive: &DriveParams,
    optics: &OpticalParams,
) -> (HermitianGenerator, HermitianGenerator) {
    let mut h0 = DMatrix::<f64>::zeros(3, 3);
    h0[(SPIN0_X, SPIN0_X)] = -optics.delta + strain.v_e1;
    h0[(SPIN0_Y, SPIN0_Y)] = -optics.delta - strain.v_e1;
    h0[(SPIN0_X, SPIN0_Y)] = strain.v_e2;
    h0[(SPIN0_Y, SPIN0_X)] = strain.v_e2;
    let half = optics.omega / 2.0;
    for k in [SPIN0_X, SPIN0_Y] {
        h0[(k, SPIN0_G)] = half;
        h0[(SPIN0_G, k)] = half;
    }

    let mut h1 = DMatrix::<f64>::zeros(3, 3);
    h1[(SPIN0_X, SPIN0_X)] = drive.amp_a1 + drive.amp_e1;
    h1[(SPIN0_Y, SPIN0_Y)] = drive.amp_a1 - drive.amp_e1;
    h1[(SPIN0_X, SPIN0_Y)] = drive.amp_e2;
    h1[(SPIN0_Y, SPIN0_X)] = drive.amp_e2;

    (HermitianGenerator::from_real(&h0), HermitianGenerator::from_real(&h1))
}

/// Rotating-frame Hamiltonian of the `(|x⟩, |y⟩, |g⟩)` system at time `t`.
pub fn build_spin0(
    t: f64,
    strain: &StaticStrain,
    drive: &DriveParams,
    optics: &OpticalParams,
) -> HermitianGenerator {
    let (h0, h1) = split_spin0(strain, drive, optics);
    let m = h0.matrix + h1.matrix.scale(drive.modulation(t));
    HermitianGenerator { matrix: m }
}

/// Static and drive parts of the eight-level Hamiltonian.
///
/// The ground `|ms|=1` and `ms=0` diagonals carry `Δ + D₀ + V_∥` and `Δ`.
/// Use [`full8_detuning`] to express a spin-0 detuning in this frame.
pub fn split_full8(
    strain: &StaticStrain,
    drive: &DriveParams,
    optics: &OpticalParams,
    levels: &FullLevelParams,
) -> (HermitianGenerator, HermitianGenerator) {
    let FullLevelParams { lambda_z, d_es, delta_prime, lambda_xy, d_gs, v_parallel, omega_mw } =
        *levels;
    let (e1, e2) = (strain.v_e1, strain.v_e2);
    let mut h = CMatrix::zeros(8, 8);
    let mut set = |i: usize, j: usize, v: Complex64| {
        h[(i, j)] = v;
    };

    set(FULL_A1, FULL_A1, c(lambda_z + d_es / 3.0 - delta_prime));
    set(FULL_A2, FULL_A2, c(lambda_z + d_es / 3.0 + delta_prime));
    set(FULL_EX, FULL_EX, c(-2.0 * d_es / 3.0 + e1));
    set(FULL_EY, FULL_EY, c(-2.0 * d_es / 3.0 - e1));
    set(FULL_E1, FULL_E1, c(-lambda_z + d_es / 3.0));
    set(FULL_E2, FULL_E2, c(-lambda_z + d_es / 3.0));
    set(FULL_G1, FULL_G1, c(optics.delta + d_gs + v_parallel));
    set(FULL_G0, FULL_G0, c(optics.delta));

    let sym = |h: &mut CMatrix, i: usize, j: usize, v: Complex64| {
        h[(i, j)] = v;
        h[(j, i)] = v.conj();
    };
    sym(&mut h, FULL_A1, FULL_E1, c(e1));
    sym(&mut h, FULL_A1, FULL_E2, c(e2));
    sym(&mut h, FULL_A2, FULL_E1, c(e2));
    sym(&mut h, FULL_A2, FULL_E2, c(-e1));
    sym(&mut h, FULL_EX, FULL_EY, c(e2));
    sym(&mut h, FULL_EX, FULL_E2, Complex64::new(0.0, lambda_xy));
    sym(&mut h, FULL_EY, FULL_E1, c(lambda_xy));
    let half = c(optics.omega / 2.0);
    for k in [FULL_A1, FULL_A2, FULL_E1, FULL_E2] {
        sym(&mut h, k, FULL_G1, half);
    }
    for k in [FULL_EX, FULL_EY] {
        sym(&mut h, k, FULL_G0, half);
    }
    sym(&mut h, FULL_G1, FULL_G0, c(omega_mw / 2.0));

    let (a, de1, de2) = (drive.amp_a1, drive.amp_e1, drive.amp_e2);
    let mut d = CMatrix::zeros(8, 8);
    for k in [FULL_A1, FULL_A2, FULL_E1, FULL_E2] {
        d[(k, k)] = c(a);
    }
    d[(FULL_EX, FULL_EX)] = c(a + de1);
    d[(FULL_EY, FULL_EY)] = c(a - de1);
    sym(&mut d, FULL_A1, FULL_E1, c(de1));
    sym(&mut d, FULL_A2, FULL_E2, c(-de1));
    sym(&mut d, FULL_A1, FULL_E2, c(de2));
    sym(&mut d, FULL_A2, FULL_E1, c(de2));
    sym(&mut d, FULL_EX, FULL_EY, c(de2));

    let h0 = HermitianGenerator { matrix: h }.symmetrized();
    let h1 = HermitianGenerator { matrix: d }.symmetrized();
    (h0, h1)
}

/// Eight-level Hamiltonian at time `t`.
pub fn build_full8(
    t: f64,
    strain: &StaticStrain,
    drive: &DriveParams,
    optics: &OpticalParams,
    levels: &FullLevelParams,
) -> HermitianGenerator {
    let (h0, h1) = split_full8(strain, drive, optics, levels);
    HermitianGenerator { matrix: h0.matrix + h1.matrix.scale(drive.modulation(t)) }
}

/// Ground-state detuning of the eight-level frame that puts the
/// `|g,0⟩ → |Ex⟩` line where the spin-0 model has it.
pub fn full8_detuning(spin0_delta: f64, levels: &FullLevelParams) -> f64 {
    spin0_delta - 2.0 * levels.d_es / 3.0
}

/// Transverse field addend `ε_x·σ_z + ε_y·σ_x` on the orbital pair.
pub fn electric_shift(eps_x: f64, eps_y: f64) -> HermitianGenerator {
    HermitianGenerator::from_real(&DMatrix::from_row_slice(2, 2, &[eps_x, eps_y, eps_y, -eps_x]))
}

/// Static and drive parts for `model`.
pub fn split_model(
    model: LevelModel,
    strain: &StaticStrain,
    drive: &DriveParams,
    optics: &OpticalParams,
    levels: &FullLevelParams,
) -> (HermitianGenerator, HermitianGenerator) {
    match model {
        LevelModel::Spin0 => split_spin0(strain, drive, optics),
        LevelModel::Full8 => split_full8(strain, drive, optics, levels),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn undriven_nv1_eigenvalues() {
        let s = StaticStrain::new(0.0, 5.3, 0.0);
        let h = build_spin0(0.3, &s, &DriveParams::undriven(1.0), &OpticalParams::new(0.0, 0.0, 0.1));
        let ev = h.eigenvalues();
        assert!(close(ev[0], -5.3, 1e-12) && close(ev[1], 0.0, 1e-12) && close(ev[2], 5.3, 1e-12));
    }

    #[test]
    fn all_zero_is_zero_matrix() {
        let h = build_spin0(
            1.7,
            &StaticStrain::default(),
            &DriveParams::undriven(1.0),
            &OpticalParams::new(0.0, 0.0, 1.0),
        );
        assert!(h.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn hand_substituted_entries() {
        let s = StaticStrain::new(0.0, 1.0, 0.2);
        let d = DriveParams::new(1.0, 0.5, 1.0);
        let o = OpticalParams::new(0.3, 0.1, 1.0);
        let h = build_spin0(0.0, &s, &d, &o);
        let expect = [[2.2, 0.2, 0.05], [0.2, -0.8, 0.05], [0.05, 0.05, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((h.get(i, j) - c(expect[i][j])).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn e2_drive_enters_off_diagonal() {
        let mut d = DriveParams::new(0.0, 0.0, 1.0);
        d.amp_e2 = 0.7;
        let h = build_spin0(0.0, &StaticStrain::new(0.0, 0.0, 0.1), &d, &OpticalParams::new(0.0, 0.0, 1.0));
        assert!(close(h.get(0, 1).re, 0.8, 1e-15));
        assert!(close(h.get(1, 0).re, 0.8, 1e-15));
    }

    #[test]
    fn full8_a_block_eigenvalues() {
        let lv = FullLevelParams::default();
        let h = build_full8(
            0.0,
            &StaticStrain::default(),
            &DriveParams::undriven(1.0),
            &OpticalParams::new(0.0, 0.0, 1.0),
            &lv,
        );
        let ev = h.eigenvalues();
        for target in [lv.lambda_z + lv.d_es / 3.0 - lv.delta_prime, lv.lambda_z + lv.d_es / 3.0 + lv.delta_prime] {
            assert!(ev.iter().any(|e| close(*e, target, 1e-9)), "{target} not in {ev:?}");
        }
    }

    #[test]
    fn full8_diagonal_when_uncoupled() {
        let lv = FullLevelParams { lambda_xy: 0.0, ..Default::default() };
        let o = OpticalParams::new(0.4, 0.0, 1.0);
        let h = build_full8(0.0, &StaticStrain::default(), &DriveParams::undriven(1.0), &o, &lv);
        let diag = [
            5.3 + 1.42 / 3.0 - 1.55,
            5.3 + 1.42 / 3.0 + 1.55,
            -2.0 * 1.42 / 3.0,
            -2.0 * 1.42 / 3.0,
            -5.3 + 1.42 / 3.0,
            -5.3 + 1.42 / 3.0,
            0.4 + 2.877,
            0.4,
        ];
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { diag[i] } else { 0.0 };
                assert!((h.get(i, j) - c(want)).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn full8_projection_matches_spin0() {
        let lv = FullLevelParams::default();
        let s = StaticStrain::new(0.0, 1.05, 0.3);
        let mut d = DriveParams::new(0.9, -0.4, 1.3844);
        d.amp_e2 = 0.2;
        let delta = 0.37;
        let o = OpticalParams::new(delta, 0.2, 0.06);
        let o8 = o.with_delta(full8_detuning(delta, &lv));
        for &t in &[0.0, 0.13, 0.71, 2.2] {
            let h3 = build_spin0(t, &s, &d, &o);
            let h8 = build_full8(t, &s, &d, &o8, &lv);
            let idx = [FULL_EX, FULL_EY, FULL_G0];
            let shift = o8.delta;
            for a in 0..3 {
                for b in 0..3 {
                    let mut v = h8.get(idx[a], idx[b]);
                    if a == b {
                        v -= c(shift);
                    }
                    assert!((v - h3.get(a, b)).norm() < 1e-12, "t={t} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn electric_shift_examples() {
        assert!(electric_shift(0.0, 0.0).matrix().iter().all(|z| z.norm() == 0.0));
        let ev = electric_shift(1.0, 0.0).eigenvalues();
        assert!(close(ev[1] - ev[0], 2.0, 1e-12));
        let ev = electric_shift(0.3, 0.4).eigenvalues();
        assert!(close(ev[1] - ev[0], 1.0, 1e-12));
    }

    #[test]
    fn orbital_addend_lands_on_pair() {
        let h = HermitianGenerator::zeros(8);
        let out = h.with_orbital_addend(&electric_shift(0.3, 0.4), LevelModel::Full8).unwrap();
        assert!(close(out.get(FULL_EX, FULL_EX).re, 0.3, 1e-15));
        assert!(close(out.get(FULL_EY, FULL_EY).re, -0.3, 1e-15));
        assert!(close(out.get(FULL_EX, FULL_EY).re, 0.4, 1e-15));
        assert!(h.with_orbital_addend(&HermitianGenerator::zeros(3), LevelModel::Full8).is_err());
    }

    #[test]
    fn validation_names_keys() {
        let mut d = DriveParams::undriven(1.0);
        d.omega_m = 0.0;
        match d.validate() {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "drive.omega_m"),
            other => panic!("{other:?}"),
        }
        assert!(OpticalParams::new(0.0, 1.0, 0.0).validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = (StaticStrain, DriveParams, OpticalParams)> {
            (
                (-10.0f64..10.0, -10.0f64..10.0),
                (-15.0f64..15.0, -8.0f64..8.0, -2.0f64..2.0, 0.5f64..3.0, -3.0f64..3.0),
                (-20.0f64..20.0, 0.0f64..2.0, 0.01f64..1.0),
            )
                .prop_map(|((e1, e2), (a, de1, de2, w, ph), (dl, om, g))| {
                    let s = StaticStrain::new(0.0, e1, e2);
                    let d = DriveParams { amp_a1: a, amp_e1: de1, amp_e2: de2, omega_m: w, phase: ph };
                    (s, d, OpticalParams::new(dl, om, g))
                })
        }

        proptest! {
            #[test]
            fn hermitian_and_periodic((s, d, o) in params(), t in 0.0f64..10.0) {
                let lv = FullLevelParams::default();
                let h3 = build_spin0(t, &s, &d, &o);
                let h8 = build_full8(t, &s, &d, &o, &lv);
                prop_assert!(h3.hermiticity_error() <= 1e-12);
                prop_assert!(h8.hermiticity_error() <= 1e-12);
                let tp = t + d.period();
                let p3 = build_spin0(tp, &s, &d, &o);
                prop_assert!(crate::linalg::max_abs_diff(h3.matrix(), p3.matrix()) <= 1e-12);
            }

            #[test]
            fn linear_in_drive((s, d, o) in params(), t in 0.0f64..10.0) {
                let lv = FullLevelParams::default();
                let zero = d.scaled(0.0);
                let two = d.scaled(2.0);
                let h0 = build_full8(t, &s, &zero, &o, &lv);
                let h1 = build_full8(t, &s, &d, &o, &lv);
                let h2 = build_full8(t, &s, &two, &o, &lv);
                let lhs = h2.matrix() - h1.matrix();
                let rhs = h1.matrix() - h0.matrix();
                prop_assert!(crate::linalg::max_abs_diff(&lhs, &rhs) <= 1e-12);
            }
        }
    }
}
