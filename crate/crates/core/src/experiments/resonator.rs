use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::floquet::sideband_heights;
use crate::{Error, Result};

/// Comb of resonator modes with a common quality factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorModel {
    /// Lowest and highest mode frequency, GHz.
    pub f_lo: f64,
    pub f_hi: f64,
    /// Free spectral range, GHz.
    pub fsr: f64,
    pub q: f64,
}

impl Default for ResonatorModel {
    fn default() -> Self {
        Self { f_lo: 1.0, f_hi: 3.0, fsr: 0.0167, q: 1500.0 }
    }
}

impl ResonatorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.fsr > 0.0) {
            return Err(Error::invalid("resonator.fsr", "must be positive"));
        }
        if !(self.q > 0.0) {
            return Err(Error::invalid("resonator.q", "must be positive"));
        }
        if !(self.f_lo > 0.0 && self.f_hi >= self.f_lo) {
            return Err(Error::invalid("resonator.f_lo", "need 0 < f_lo <= f_hi"));
        }
        Ok(())
    }

    /// Mode frequencies `f_lo + k·fsr ≤ f_hi`.
    pub fn modes(&self) -> Vec<f64> {
        let count = ((self.f_hi - self.f_lo) / self.fsr + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.f_lo + k as f64 * self.fsr).collect()
    }

    /// Full width at half maximum of the mode at `f`.
    pub fn linewidth(&self, f: f64) -> f64 {
        f / self.q
    }

    fn lorentzian_sum(&self, modes: &[f64], f: f64) -> f64 {
        modes
            .iter()
            .map(|&fk| {
                let x = 2.0 * (f - fk) / self.linewidth(fk);
                1.0 / (1.0 + x * x)
            })
            .sum()
    }
}

/// Relative drive amplitude at `omega`: the Lorentzian comb normalized to
/// its value on the nearest mode and clamped to `[0, 1]`.
pub fn resonator_response(omega: f64, model: &ResonatorModel) -> Result<f64> {
    model.validate()?;
    let modes = model.modes();
    let nearest = modes
        .iter()
        .cloned()
        .min_by(|a, b| (a - omega).abs().total_cmp(&(b - omega).abs()))
        .expect("at least one mode");
    let r = model.lorentzian_sum(&modes, omega) / model.lorentzian_sum(&modes, nearest);
    Ok(r.clamp(0.0, 1.0))
}

/// Amplitude envelope `1 − exp(−π f t / Q)` after switching on a drive at `f`.
pub fn ring_up_envelope(t: f64, f: f64, q: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    1.0 - (-PI * f * t / q).exp()
}

/// Number of sideband orders whose saturated height exceeds `frac` of the
/// largest, for a drive of nominal amplitude `amp` filtered by the resonator.
pub fn sideband_count(omega: f64, amp: f64, s0: f64, frac: f64, model: &ResonatorModel) -> Result<usize> {
    let a = amp * resonator_response(omega, model)?;
    let max_order = (a.abs() / omega).ceil() as usize + 10;
    let w = sideband_heights(a, omega, s0, max_order)?;
    let top = w.saturated_heights.iter().cloned().fold(0.0, f64::max);
    Ok(w.saturated_heights.iter().filter(|&&h| h >= frac * top && h > 0.0).count())
}
