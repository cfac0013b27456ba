use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::map::{dressed_map, SpectrumMap};
use crate::hamiltonians::DriveParams;
use crate::lindblad::PleSetup;
use crate::{Error, Result};

/// Box constraints on (𝒜, ℰ1), GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitBounds {
    pub amp_a1: (f64, f64),
    pub amp_e1: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        Self { amp_a1: (-30.0, 30.0), amp_e1: (-30.0, 30.0) }
    }
}

impl FitBounds {
    fn clamp(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0].clamp(self.amp_a1.0, self.amp_a1.1), x[1].clamp(self.amp_e1.0, self.amp_e1.1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_evals: usize,
    /// Simplex diameter at which the search stops, GHz.
    pub xtol: f64,
    /// Objective value treated as an exact match.
    pub ftol_abs: f64,
    /// Edge of the initial simplex, GHz.
    pub initial_step: f64,
    /// When set, a fit whose residual exceeds this is not converged.
    pub max_residual: Option<f64>,
    pub workers: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_evals: 400, xtol: 1e-3, ftol_abs: 1e-14, initial_step: 0.5, max_residual: None, workers: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub amp_a1: f64,
    pub amp_e1: f64,
    /// Sum of squared differences of the unit-peak rows.
    pub residual: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Final simplex diameter, GHz.
    pub simplex_size: f64,
}

fn normalized(row: &[f64]) -> Vec<f64> {
    let top = row.iter().cloned().fold(0.0, f64::max);
    if top > 0.0 {
        row.iter().map(|v| v / top).collect()
    } else {
        row.to_vec()
    }
}

/// Residual of the map simulated at (𝒜, ℰ1) against `target`.
pub fn map_residual(target: &SpectrumMap, setup: &PleSetup, amp_a1: f64, amp_e1: f64, workers: usize) -> Result<f64> {
    let base = PleSetup { drive: DriveParams { amp_a1, amp_e1, ..setup.drive }, ..setup.clone() };
    let sim = dressed_map(&target.detunings, &target.scalings, &base, workers)?;
    let mut ssq = 0.0;
    for (a, b) in sim.pl.iter().zip(&target.pl) {
        for (x, y) in normalized(a).iter().zip(normalized(b)) {
            ssq += (x - y).powi(2);
        }
    }
    Ok(ssq)
}

/// Nelder–Mead fit of (𝒜, ℰ1) to a measured map.
///
/// Rows of `target` are compared after scaling each to unit peak, so only
/// line shapes and relative heights matter. `setup.drive` supplies ω_m,
/// ℰ2 and the phase; its amplitudes are ignored in favour of `initial`.
pub fn fit_drive_params(
    target: &SpectrumMap,
    setup: &PleSetup,
    initial: (f64, f64),
    bounds: &FitBounds,
    options: &FitOptions,
) -> Result<FitResult> {
    target.validate()?;
    if target.pl.is_empty() {
        return Err(Error::EmptySpectrum(0));
    }
    let evals = std::cell::Cell::new(0usize);
    let f = |x: [f64; 2]| -> Result<f64> {
        evals.set(evals.get() + 1);
        map_residual(target, setup, x[0], x[1], options.workers)
    };

    let x0 = bounds.clamp([initial.0, initial.1]);
    let mut simplex: Vec<([f64; 2], f64)> = Vec::with_capacity(3);
    simplex.push((x0, f(x0)?));
    for k in 0..2 {
        let mut x = x0;
        x[k] += options.initial_step;
        let mut x = bounds.clamp(x);
        if x == x0 {
            x[k] -= options.initial_step;
            x = bounds.clamp(x);
        }
        simplex.push((x, f(x)?));
    }

    let diameter = |s: &[([f64; 2], f64)]| -> f64 {
        let mut d = 0.0f64;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                d = d.max((s[i].0[0] - s[j].0[0]).hypot(s[i].0[1] - s[j].0[1]));
            }
        }
        d
    };
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    let mut iterations = 0;
    let mut stopped = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= options.ftol_abs || diameter(&simplex) < options.xtol {
            stopped = true;
            break;
        }
        if evals.get() >= options.max_evals {
            break;
        }
        iterations += 1;
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let worst = simplex[2];
        let xr = bounds.clamp(lerp(worst.0, centroid, 2.0));
        let fr = f(xr)?;
        if fr < simplex[0].1 {
            let xe = bounds.clamp(lerp(worst.0, centroid, 3.0));
            let fe = f(xe)?;
            simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = bounds.clamp(lerp(worst.0, centroid, 1.5));
                (xc, f(xc)?)
            } else {
                let xc = lerp(worst.0, centroid, 0.5);
                (xc, f(xc)?)
            };
            if fc < worst.1.min(fr) {
                simplex[2] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let x = lerp(best, v.0, 0.5);
                    *v = (x, f(x)?);
                }
            }
        }
    }

    let size = diameter(&simplex);
    let (best, residual) = simplex[0];
    let within = options.max_residual.is_none_or(|m| residual <= m);
    if !stopped {
        log::warn!("fit stopped after {} evaluations with simplex size {size:.3e} GHz", evals.get());
    }
    Ok(FitResult {
        amp_a1: best[0],
        amp_e1: best[1],
        residual,
        iterations,
        evaluations: evals.get(),
        converged: stopped && within,
        simplex_size: size,
    })
}

/// Copy of `map` with Gaussian noise of standard deviation
/// `frac × max(row)` added to each row. Deterministic for a given seed.
pub fn add_noise(map: &SpectrumMap, frac: f64, seed: u64) -> Result<SpectrumMap> {
    if !(frac >= 0.0) {
        return Err(Error::invalid("noise", "must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = map.clone();
    for row in out.pl.iter_mut() {
        let top = row.iter().cloned().fold(0.0, f64::max);
        if top <= 0.0 || frac == 0.0 {
            continue;
        }
        let dist = Normal::new(0.0, frac * top).map_err(|e| Error::invalid("noise", e.to_string()))?;
        for v in row.iter_mut() {
            *v += dist.sample(&mut rng);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::map::linspace;
    use crate::lindblad::PulseSequence;
    use crate::{OpticalParams, StaticStrain};

    fn setup() -> PleSetup {
        PleSetup::spin0(
            StaticStrain::new(0.0, 1.0, 0.0),
            DriveParams::new(1.2, -0.4, 1.0),
            OpticalParams::new(0.0, 0.1, 0.1),
        )
        .with_sequence(PulseSequence { ring_up: 1.0, collect: 60.0, dt: None })
    }

    fn target() -> SpectrumMap {
        dressed_map(&linspace(-3.0, 3.0, 41), &[0.5, 1.0], &setup(), 0).unwrap()
    }

    #[test]
    fn truth_start_stops_immediately() {
        let t = target();
        let r = fit_drive_params(&t, &setup(), (1.2, -0.4), &FitBounds::default(), &FitOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn recovers_offset_start() {
        let t = target();
        let opts = FitOptions { initial_step: 0.3, ..Default::default() };
        let r = fit_drive_params(&t, &setup(), (0.9, -0.2), &FitBounds::default(), &opts).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.amp_a1 - 1.2).abs() < 0.02 && (r.amp_e1 + 0.4).abs() < 0.02, "{r:?}");
    }

    #[test]
    fn evaluation_cap_reports_not_converged() {
        let t = target();
        let opts = FitOptions { max_evals: 4, ..Default::default() };
        let r = fit_drive_params(&t, &setup(), (0.5, 0.3), &FitBounds::default(), &opts).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn noise_is_seeded() {
        let t = target();
        let a = add_noise(&t, 0.05, 7).unwrap();
        let b = add_noise(&t, 0.05, 7).unwrap();
        let c = add_noise(&t, 0.05, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(add_noise(&t, 0.0, 1).unwrap(), t);
    }
}
