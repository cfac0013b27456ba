use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::peaks::{extract_peaks, locate_peak};
use crate::lindblad::{ple_point, ple_spectrum, with_workers, PleSetup};
use crate::strain_model::StaticStrain;
use crate::{Error, Result};

/// Transverse electric field component added to the static strain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldChannel {
    EpsX,
    EpsY,
}

impl FieldChannel {
    fn apply(self, strain: &StaticStrain, eps: f64) -> StaticStrain {
        match self {
            FieldChannel::EpsX => StaticStrain { v_e1: strain.v_e1 + eps, ..*strain },
            FieldChannel::EpsY => StaticStrain { v_e2: strain.v_e2 + eps, ..*strain },
        }
    }

    /// `|d(Δx)/dε|` of the bare upper line at zero field.
    pub fn bare_slope(self, strain: &StaticStrain) -> f64 {
        let dx = strain.delta_x();
        if dx == 0.0 {
            return 1.0;
        }
        match self {
            FieldChannel::EpsX => (strain.v_e1 / dx).abs(),
            FieldChannel::EpsY => (strain.v_e2 / dx).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CddOptions {
    /// Half width of the zero-field scan around the upper line, GHz.
    pub window: f64,
    /// Points in the zero-field scan.
    pub grid: usize,
    /// Position tolerance of the golden-section refinement, GHz.
    pub tol: f64,
    pub min_height_frac: f64,
    pub workers: usize,
}

impl Default for CddOptions {
    fn default() -> Self {
        Self { window: 0.5, grid: 201, tol: 1e-6, min_height_frac: 0.2, workers: 0 }
    }
}

/// Tracked PLE peak positions against field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dispersion {
    pub channel: FieldChannel,
    pub eps: Vec<f64>,
    /// `lines[k][i]`: position of line `k` at `eps[i]`.
    pub lines: Vec<Vec<f64>>,
    /// `dω/dε` of each line at zero field.
    pub slopes: Vec<f64>,
    /// Same slope for the undriven upper line.
    pub undriven_slope: f64,
}

impl Dispersion {
    /// Largest `|dω/dε|` among the tracked lines.
    pub fn max_abs_slope(&self) -> f64 {
        self.slopes.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// Positions of the dressed lines near the upper orbital transition as a
/// transverse field is swept.
///
/// Lines are found in a zero-field scan of ±`window` around `+Δx` and then
/// followed by golden-section search within half the distance to their
/// nearest neighbour. The slope is the finite difference between the two
/// field values closest to zero on either side.
pub fn cdd_dispersion(
    eps_axis: &[f64],
    channel: FieldChannel,
    setup: &PleSetup,
    options: &CddOptions,
) -> Result<Dispersion> {
    let below = eps_axis.iter().cloned().filter(|&e| e < 0.0).fold(f64::NEG_INFINITY, f64::max);
    let above = eps_axis.iter().cloned().filter(|&e| e > 0.0).fold(f64::INFINITY, f64::min);
    if !below.is_finite() || !above.is_finite() {
        return Err(Error::invalid("eps", "field axis must straddle zero"));
    }
    let center = setup.strain.delta_x();
    let grid = super::map::linspace(center - options.window, center + options.window, options.grid.max(3));
    let row = ple_spectrum(&grid, setup, options.workers)?;
    let found = extract_peaks(&grid, &row, options.min_height_frac)?;
    if found.is_empty() {
        return Err(Error::EmptySpectrum(0));
    }
    let starts: Vec<f64> = found.iter().map(|p| p.position).collect();
    let step = grid[1] - grid[0];
    let reach: Vec<f64> = starts
        .iter()
        .map(|&x| {
            let gap = starts.iter().filter(|&&y| y != x).map(|y| (y - x).abs()).fold(f64::INFINITY, f64::min);
            (0.5 * gap).min(options.window).max(2.0 * step)
        })
        .collect();

    let jobs: Vec<(usize, f64)> = (0..starts.len()).flat_map(|k| eps_axis.iter().map(move |&e| (k, e))).collect();
    let positions: Vec<f64> = with_workers(options.workers, || {
        jobs.par_iter()
            .map(|&(k, e)| {
                let shifted = PleSetup { strain: channel.apply(&setup.strain, e), ..setup.clone() };
                let p = locate_peak(
                    |d| ple_point(d, &shifted),
                    starts[k] - reach[k],
                    starts[k] + reach[k],
                    options.tol,
                )?;
                Ok(p.position)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let n = eps_axis.len();
    let lines: Vec<Vec<f64>> = positions.chunks(n).map(|c| c.to_vec()).collect();
    let i_lo = eps_axis.iter().position(|&e| e == below).expect("present");
    let i_hi = eps_axis.iter().position(|&e| e == above).expect("present");
    let slopes = lines.iter().map(|l| (l[i_hi] - l[i_lo]) / (above - below)).collect();
    Ok(Dispersion {
        channel,
        eps: eps_axis.to_vec(),
        lines,
        slopes,
        undriven_slope: channel.bare_slope(&setup.strain),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::PulseSequence;
    use crate::{DriveParams, OpticalParams};

    fn setup(e1: f64) -> PleSetup {
        PleSetup::spin0(
            StaticStrain::new(0.0, 1.0, 0.0),
            DriveParams::new(0.0, e1, 2.0),
            OpticalParams::new(0.0, 0.05, 0.05),
        )
        .with_sequence(PulseSequence::short())
    }

    #[test]
    fn undriven_slope_matches_bare_line() {
        let opts = CddOptions { window: 0.3, grid: 61, tol: 1e-7, ..Default::default() };
        let d = cdd_dispersion(&[-0.01, 0.0, 0.01], FieldChannel::EpsX, &setup(0.0), &opts).unwrap();
        assert_eq!(d.lines.len(), 1);
        assert!((d.slopes[0] - 1.0).abs() < 1e-3, "{:?}", d.slopes);
        assert_eq!(d.undriven_slope, 1.0);
    }

    #[test]
    fn orthogonal_field_is_even() {
        let opts = CddOptions { window: 0.3, grid: 61, tol: 1e-7, ..Default::default() };
        let d = cdd_dispersion(&[-0.2, -0.1, 0.1, 0.2], FieldChannel::EpsY, &setup(0.0), &opts).unwrap();
        let l = &d.lines[0];
        // The laser drives |x⟩ and |y⟩ in phase, which breaks y → −y at the 1e-4 level.
        assert!((l[0] - l[3]).abs() < 1e-3 && (l[1] - l[2]).abs() < 1e-3, "{l:?}");
        assert!((l[0] - 0.2f64.hypot(1.0)).abs() < 1e-3);
    }

    #[test]
    fn axis_must_straddle_zero() {
        assert!(cdd_dispersion(&[0.0, 0.1], FieldChannel::EpsX, &setup(0.0), &CddOptions::default()).is_err());
    }
}
