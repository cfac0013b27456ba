use std::f64::consts::PI;

use nvsim_core::dressed_analytics::{phonon_rabi, PolaronParams};
use nvsim_core::experiments::resonator::{resonator_response, sideband_count};
use nvsim_core::experiments::{
    add_noise, cdd_dispersion, dressed_map, extract_peaks, fit_drive_params, rabi_flopping, rabi_period, CddOptions,
    FitBounds, FitOptions, OpticalPulse,
};
use nvsim_core::floquet::{build_floquet, central_quasienergies, required_truncation, sideband_heights};
use nvsim_core::lindblad::ple_spectrum;
use nvsim_core::strain_model::{mixing_angle, polarization_curve};
use nvsim_core::Result;
use serde_json::{json, Value};

use crate::config::{RunConfig, Scenario};

/// Tabular result of one scenario.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Scenario-specific summary written to the sidecar.
    pub summary: Value,
    /// `Some(false)` when an iterative search did not converge.
    pub converged: Option<bool>,
}

impl Table {
    fn new(header: &[&str], rows: Vec<Vec<f64>>, summary: Value) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows, summary, converged: None }
    }
}

pub fn run(scenario: Scenario, cfg: &RunConfig, workers: usize) -> Result<Table> {
    match scenario {
        Scenario::Ple => ple(cfg, workers),
        Scenario::Map => map(cfg, workers),
        Scenario::Floquet => floquet(cfg),
        Scenario::Rabi => rabi(cfg),
        Scenario::Cdd => cdd(cfg, workers),
        Scenario::Fit => fit(cfg, workers),
        Scenario::Polarization => polarization(cfg),
        Scenario::Resonator => resonator(cfg),
    }
}

fn ple(cfg: &RunConfig, workers: usize) -> Result<Table> {
    let det = cfg.grid.detuning.values();
    let pl = ple_spectrum(&det, &cfg.setup(), workers)?;
    let peaks = extract_peaks(&det, &pl, 0.05).unwrap_or_default();
    let rows = det.iter().zip(&pl).map(|(d, p)| vec![*d, *p]).collect();
    Ok(Table::new(&["detuning_ghz", "pl"], rows, json!({ "peaks": peaks })))
}

fn map(cfg: &RunConfig, workers: usize) -> Result<Table> {
    let m = dressed_map(&cfg.grid.detuning.values(), &cfg.grid.scaling.values(), &cfg.setup(), workers)?;
    let mut header = vec!["scale".to_string(), "amp_a1_ghz".to_string(), "amp_e1_ghz".to_string()];
    header.extend(m.detunings.iter().map(|d| format!("pl_at_{d}_ghz")));
    let rows = m
        .scalings
        .iter()
        .zip(&m.pl)
        .map(|(s, row)| {
            let mut r = vec![*s, s * cfg.drive.amp_a1, s * cfg.drive.amp_e1];
            r.extend_from_slice(row);
            r
        })
        .collect();
    Ok(Table { header, rows, summary: json!({ "amplitude_label": m.amplitude_label }), converged: None })
}

/// Central dressed doublet of the upper line versus laser detuning.
fn floquet(cfg: &RunConfig) -> Result<Table> {
    let (amp, w, omega) = (cfg.drive.amp_a1, cfg.drive.omega_m, cfg.optics.omega);
    let n = cfg.floquet.trunc_n.unwrap_or_else(|| required_truncation(amp, w));
    let dx = cfg.strain.delta_x();
    let mut rows = Vec::new();
    for d in cfg.grid.detuning.values() {
        let fm = build_floquet(d - dx, omega, amp, w, n)?;
        let (lo, hi) = central_quasienergies(&fm);
        rows.push(vec![d, lo, hi, hi - lo]);
    }
    let max_order = cfg.floquet.max_order.unwrap_or(n);
    let sb = sideband_heights(amp, w, cfg.optics.s0(), max_order)?;
    Ok(Table::new(
        &["detuning_ghz", "q_lo_ghz", "q_hi_ghz", "gap_ghz"],
        rows,
        json!({ "trunc_n": n, "sidebands": sb }),
    ))
}

fn rabi(cfg: &RunConfig) -> Result<Table> {
    let p = PolaronParams::from_strain(&cfg.strain, &cfg.drive)?;
    let pulse = OpticalPulse { omega: cfg.rabi.pulse_omega.unwrap_or(cfg.optics.omega), duration: cfg.rabi.duration };
    let trace = rabi_flopping(&p, &cfg.optics, &pulse, cfg.rabi.t_span, cfg.rabi.samples)?;
    let period = rabi_period(&trace)?;
    let predicted = 1.0 / (2.0 * phonon_rabi(0, &p)?.abs());
    let rows = (0..trace.times.len()).map(|i| vec![trace.times[i], trace.p_x[i], trace.p_y[i]]).collect();
    Ok(Table::new(
        &["time_ns", "p_x", "p_y"],
        rows,
        json!({ "pulse_end_ns": trace.pulse_end, "period_ns": period, "single_phonon_period_ns": predicted }),
    ))
}

fn cdd(cfg: &RunConfig, workers: usize) -> Result<Table> {
    let c = &cfg.cdd;
    let options =
        CddOptions { window: c.window, grid: c.grid, tol: c.tol, min_height_frac: c.min_height_frac, workers };
    let disp = cdd_dispersion(&c.eps.values(), c.channel, &cfg.setup(), &options)?;
    let mut header = vec!["eps_ghz".to_string()];
    header.extend((0..disp.lines.len()).map(|k| format!("line_{k}_ghz")));
    let rows = disp
        .eps
        .iter()
        .enumerate()
        .map(|(i, e)| std::iter::once(*e).chain(disp.lines.iter().map(|l| l[i])).collect())
        .collect();
    let ratio = disp.max_abs_slope() / disp.undriven_slope;
    Ok(Table {
        header,
        rows,
        summary: json!({
            "slopes": disp.slopes,
            "undriven_slope": disp.undriven_slope,
            "max_slope_ratio": ratio,
        }),
        converged: None,
    })
}

fn fit(cfg: &RunConfig, workers: usize) -> Result<Table> {
    let f = &cfg.fit;
    let truth_setup = {
        let mut s = cfg.setup();
        s.drive.amp_a1 = f.truth[0];
        s.drive.amp_e1 = f.truth[1];
        s
    };
    let clean = dressed_map(&cfg.grid.detuning.values(), &cfg.grid.scaling.values(), &truth_setup, workers)?;
    let target = add_noise(&clean, f.noise, f.seed)?;
    let bounds = FitBounds { amp_a1: (f.bounds_a1[0], f.bounds_a1[1]), amp_e1: (f.bounds_e1[0], f.bounds_e1[1]) };
    let options = FitOptions {
        max_evals: f.max_evals,
        xtol: f.xtol,
        ftol_abs: f.ftol_abs,
        initial_step: f.initial_step,
        max_residual: f.max_residual,
        workers,
    };
    let r = fit_drive_params(&target, &cfg.setup(), (f.initial[0], f.initial[1]), &bounds, &options)?;
    let rows = vec![
        vec![0.0, f.truth[0], r.amp_a1, f.initial[0]],
        vec![1.0, f.truth[1], r.amp_e1, f.initial[1]],
    ];
    let converged = r.converged;
    let mut t = Table::new(
        &["parameter", "truth_ghz", "fit_ghz", "initial_ghz"],
        rows,
        json!({ "parameters": ["amp_a1", "amp_e1"], "result": r }),
    );
    t.converged = Some(converged);
    Ok(t)
}

fn polarization(cfg: &RunConfig) -> Result<Table> {
    let theta = mixing_angle(&cfg.strain)?;
    let p = &cfg.polarization;
    let angles: Vec<f64> = if p.points == 1 {
        vec![0.0]
    } else {
        (0..p.points).map(|i| PI * i as f64 / (p.points - 1) as f64).collect()
    };
    let curve = polarization_curve(theta, p.phi0, p.s0.unwrap_or(cfg.optics.s0()), &angles)?;
    let rows = (0..angles.len()).map(|i| vec![curve.angles[i], curve.pl_x[i], curve.pl_y[i]]).collect();
    Ok(Table::new(&["angle_rad", "pl_x", "pl_y"], rows, json!({ "theta_rad": theta.0 })))
}

fn resonator(cfg: &RunConfig) -> Result<Table> {
    let r = &cfg.resonator;
    let s0 = cfg.optics.s0();
    let mut rows = Vec::new();
    for f in r.frequency.values() {
        let resp = resonator_response(f, &r.model)?;
        let n = sideband_count(f, cfg.drive.amp_a1, s0, r.min_height_frac, &r.model)?;
        rows.push(vec![f, resp, n as f64]);
    }
    Ok(Table::new(
        &["frequency_ghz", "response", "sidebands"],
        rows,
        json!({ "modes": r.model.modes().len() }),
    ))
}
