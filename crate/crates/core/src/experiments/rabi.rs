use serde::Serialize;

use super::spectral::dominant_frequency;
use crate::dressed_analytics::PolaronParams;
use crate::hamiltonians::{
    split_spin0, DriveParams, HermitianGenerator, OpticalParams, SPIN0_G, SPIN0_X, SPIN0_Y,
};
use crate::lindblad::{decay_channels, dt_max, evolve, DensityMatrix};
use crate::strain_model::StaticStrain;
use crate::{Error, FullLevelParams, LevelModel, Result};

/// Resonant optical pulse on the upper orbital line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalPulse {
    /// Optical Rabi frequency Ω, GHz.
    pub omega: f64,
    /// Pulse length in ns; defaults to `1/(2Ω)`.
    pub duration: Option<f64>,
}

impl OpticalPulse {
    pub fn duration(&self) -> f64 {
        self.duration.unwrap_or(0.5 / self.omega)
    }
}

/// Orbital populations in the strain eigenbasis.
#[derive(Debug, Clone, Serialize)]
pub struct RabiTrace {
    pub times: Vec<f64>,
    /// Upper strain eigenstate.
    pub p_x: Vec<f64>,
    /// Lower strain eigenstate.
    pub p_y: Vec<f64>,
    pub pulse_end: f64,
    #[serde(skip)]
    pub max_trace_error: f64,
}

impl RabiTrace {
    /// `P_x / (P_x + P_y)` for samples after the pulse, with their spacing.
    pub fn fraction_after_pulse(&self) -> (Vec<f64>, f64) {
        let start = self.times.iter().position(|&t| t >= self.pulse_end - 1e-12).unwrap_or(self.times.len());
        let f = self.p_x[start..].iter().zip(&self.p_y[start..]).map(|(x, y)| x / (x + y)).collect();
        let dt = match self.times.get(start..start + 2) {
            Some([a, b]) => b - a,
            _ => 0.0,
        };
        (f, dt)
    }
}

/// Optical pulse with the drive off, then free evolution under the
/// mechanical drive with the laser off.
///
/// The laser is tuned to the upper strain eigenstate; `gamma` is taken from
/// `optics` and its detuning and Rabi frequency are ignored.
pub fn rabi_flopping(
    p: &PolaronParams,
    optics: &OpticalParams,
    pulse: &OpticalPulse,
    t_span: f64,
    samples: usize,
) -> Result<RabiTrace> {
    if !(pulse.omega > 0.0) {
        return Err(Error::invalid("pulse.omega", "must be positive"));
    }
    let t_pulse = pulse.duration();
    if !(t_span > t_pulse) {
        return Err(Error::invalid("t_span", "must exceed the pulse length"));
    }
    let theta = p.theta.0;
    let strain = StaticStrain::from_splitting(p.delta_x, theta);
    let drive = DriveParams::new(p.amp_a1, p.amp_e1, p.omega_m);
    let on = OpticalParams { delta: p.delta_x, omega: pulse.omega, gamma: optics.gamma };
    let off = OpticalParams { omega: 0.0, ..on };
    let (h_pulse, _) = split_spin0(&strain, &DriveParams::undriven(p.omega_m), &on);
    let (h_free, h_drive) = split_spin0(&strain, &drive, &off);

    let gen = |t: f64| -> HermitianGenerator {
        if t < t_pulse {
            h_pulse.clone()
        } else {
            h_free.add_scaled(&h_drive, drive.modulation(t - t_pulse)).expect("same dimension")
        }
    };
    let dt = dt_max(LevelModel::Spin0, &strain, &drive, &on, &FullLevelParams::default());
    let rho0 = DensityMatrix::pure(3, SPIN0_G)?;
    let channels = decay_channels(LevelModel::Spin0, optics.gamma);

    // Split at the pulse edge so that no step straddles the switch.
    let first = evolve(&rho0, &gen, &channels, (0.0, t_pulse), dt, 1)?;
    let second = evolve(&first.final_state, &gen, &channels, (t_pulse, t_span), dt, samples.max(2))?;

    let (c, s) = (theta.cos(), theta.sin());
    let project = |rho: &DensityMatrix| -> (f64, f64) {
        let m = rho.matrix();
        let (xx, yy, xy) = (m[(SPIN0_X, SPIN0_X)].re, m[(SPIN0_Y, SPIN0_Y)].re, m[(SPIN0_X, SPIN0_Y)].re);
        (c * c * xx + s * s * yy + 2.0 * c * s * xy, s * s * xx + c * c * yy - 2.0 * c * s * xy)
    };
    let mut times = vec![0.0];
    let (x0, y0) = project(&rho0);
    let (mut p_x, mut p_y) = (vec![x0], vec![y0]);
    for (t, rho) in second.times.iter().zip(&second.states) {
        let (x, y) = project(rho);
        times.push(*t);
        p_x.push(x);
        p_y.push(y);
    }
    Ok(RabiTrace {
        times,
        p_x,
        p_y,
        pulse_end: t_pulse,
        max_trace_error: first.max_trace_error.max(second.max_trace_error),
    })
}

/// Period of the orbital population exchange after the pulse, ns.
pub fn rabi_period(trace: &RabiTrace) -> Result<f64> {
    let (f, dt) = trace.fraction_after_pulse();
    Ok(1.0 / dominant_frequency(&f, dt)?)
}
