//! Closed-form multi-phonon predictions in the displaced-oscillator basis.
//!
//! In the strain eigenbasis the E₁ drive splits into a diagonal modulation
//! `ℰ1 cos2θ` and a transverse part `ℰ1 sin2θ`. Removing the diagonal part
//! by a polaron transform leaves an `(n+1)`-phonon coupling weighted by
//! `J_n(2ℰ1 cos2θ/ω_m)`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::floquet::bessel_j;
use crate::hamiltonians::{DriveParams, HermitianGenerator};
use crate::strain_model::{mixing_angle, MixingAngle, StaticStrain};
use crate::{Error, Result};

/// Parameters of the rotated two-level orbital problem, GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaronParams {
    pub theta: MixingAngle,
    pub delta_x: f64,
    pub amp_a1: f64,
    pub amp_e1: f64,
    pub omega_m: f64,
}

impl PolaronParams {
    pub fn new(theta: f64, delta_x: f64, amp_a1: f64, amp_e1: f64, omega_m: f64) -> Result<Self> {
        if !(delta_x >= 0.0) {
            return Err(Error::invalid("delta_x", "must be non-negative"));
        }
        if !(omega_m > 0.0) {
            return Err(Error::invalid("omega_m", "must be positive"));
        }
        Ok(Self { theta: MixingAngle(theta), delta_x, amp_a1, amp_e1, omega_m })
    }

    pub fn from_strain(strain: &StaticStrain, drive: &DriveParams) -> Result<Self> {
        let theta = mixing_angle(strain)?;
        Self::new(theta.0, strain.delta_x(), drive.amp_a1, drive.amp_e1, drive.omega_m)
    }

    pub fn with_e1(self, amp_e1: f64) -> Self {
        Self { amp_e1, ..self }
    }

    /// Transverse coupling `ℰ1·sin2θ`.
    pub fn transverse(&self) -> f64 {
        self.amp_e1 * (2.0 * self.theta.0).sin()
    }

    /// Modulation index `2ℰ1·cos2θ/ω_m`.
    pub fn modulation_index(&self) -> f64 {
        2.0 * self.amp_e1 * (2.0 * self.theta.0).cos() / self.omega_m
    }

    /// `ω_m > |ℰ1 sin2θ|`, where the polaron picture holds.
    pub fn regime_valid(&self) -> bool {
        self.omega_m > self.transverse().abs()
    }

    fn warn_if_invalid(&self) {
        if !self.regime_valid() {
            log::warn!(
                "omega_m = {} GHz does not exceed |E1 sin2θ| = {} GHz; polaron estimate unreliable",
                self.omega_m,
                self.transverse().abs()
            );
        }
    }
}

/// `(n+1)`-phonon coupling `ℰ1·sin2θ·J_n(2ℰ1·cos2θ/ω_m)`, sign kept.
pub fn phonon_rabi(n: u32, p: &PolaronParams) -> Result<f64> {
    Ok(p.transverse() * bessel_j(n as i32, p.modulation_index())?)
}

/// Splitting of the `(n+1)`-phonon avoided crossing kept beyond the
/// rotating-wave step: `|ℰ1 sin2θ·(J_n(z) + J_{n+2}(z))|`.
pub fn multiphonon_splitting(n: u32, p: &PolaronParams) -> Result<f64> {
    let z = p.modulation_index();
    let n = n as i32;
    Ok((p.transverse() * (bessel_j(n, z)? + bessel_j(n + 2, z)?)).abs())
}

/// Per-order contribution `S(n+1) = sqrt(d² + (2g_n)²) − |d|` with
/// `d = 2Δx − (n+1)ω_m` and `g_n` from [`phonon_rabi`].
pub fn splitting_contribution(n: u32, p: &PolaronParams) -> Result<f64> {
    let d = 2.0 * p.delta_x - (n as f64 + 1.0) * p.omega_m;
    let c = 2.0 * phonon_rabi(n, p)?;
    Ok(d.hypot(c) - d.abs())
}

/// How per-order contributions are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingCombination {
    /// `sqrt(Σ S)`. Heuristic: the sum carries GHz, so the result has units
    /// of GHz^½ read as GHz.
    #[default]
    SqrtSum,
    /// `sqrt(Σ S²)`.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingBreakdown {
    /// `(n+1, S(n+1))` for `n+1 = 1..=max_order`.
    pub per_order: Vec<(u32, f64)>,
    pub total: f64,
    pub combination: SplittingCombination,
}

impl SplittingBreakdown {
    pub fn contribution(&self, phonons: u32) -> Option<f64> {
        self.per_order.iter().find(|(k, _)| *k == phonons).map(|(_, s)| *s)
    }

    /// Share of `Σ S` carried by orders with at most `phonons` phonons.
    pub fn low_order_fraction(&self, phonons: u32) -> f64 {
        let all: f64 = self.per_order.iter().map(|(_, s)| s).sum();
        if all == 0.0 {
            return 0.0;
        }
        self.per_order.iter().filter(|(k, _)| *k <= phonons).map(|(_, s)| s).sum::<f64>() / all
    }
}

pub fn total_splitting(p: &PolaronParams, max_order: u32) -> Result<SplittingBreakdown> {
    total_splitting_with(p, max_order, SplittingCombination::SqrtSum)
}

pub fn total_splitting_with(
    p: &PolaronParams,
    max_order: u32,
    combination: SplittingCombination,
) -> Result<SplittingBreakdown> {
    if max_order < 1 {
        return Err(Error::invalid("max_order", "must be at least 1"));
    }
    p.warn_if_invalid();
    let per_order = (0..max_order)
        .map(|n| Ok((n + 1, splitting_contribution(n, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let total = match combination {
        SplittingCombination::SqrtSum => per_order.iter().map(|(_, s)| s).sum::<f64>().sqrt(),
        SplittingCombination::Quadrature => per_order.iter().map(|(_, s)| s * s).sum::<f64>().sqrt(),
    };
    Ok(SplittingBreakdown { per_order, total, combination })
}

/// Rotating-frame 2×2 Hamiltonian at time `t` (ns).
pub fn rwa_matrix(p: &PolaronParams, t: f64) -> HermitianGenerator {
    let c = (TAU * p.omega_m * t).cos();
    let cos2 = (2.0 * p.theta.0).cos();
    let off = -p.transverse();
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            -p.omega_m + p.delta_x + (p.amp_a1 + p.amp_e1 * cos2) * c,
            off,
            off,
            -p.delta_x + (p.amp_a1 - p.amp_e1 * cos2) * c,
        ],
    );
    HermitianGenerator::from_real(&m)
}
