//! Lindblad evolution of the optically driven level system.
//!
//! Two integrators share the same fixed-step RK4 scheme:
//!
//! * [`evolve`] steps a complex density matrix under any time-dependent
//!   generator and records samples along the way.
//! * [`ple_point`] works on the real vectorization of ρ. It builds the
//!   one-period RK4 propagator of the periodic generator once and reuses it
//!   for every period of the collection window. Because RK4 is linear in the
//!   state and the step divides the period, this reproduces direct stepping
//!   up to round-off.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hamiltonians::{
    full8_detuning, split_model, DriveParams, FullLevelParams, HermitianGenerator, LevelModel,
    OpticalParams, FULL_A1, FULL_A2, FULL_E1, FULL_E2, FULL_EX, FULL_EY, FULL_G0, FULL_G1,
    SPIN0_G, SPIN0_X, SPIN0_Y,
};
use crate::linalg::{hermitian_eigenvalues, max_abs_diff, CMatrix};
use crate::strain_model::StaticStrain;
use crate::{Error, Result};

const STATE_TOL: f64 = 1e-9;
const STEP_TOL: f64 = 1e-6;

/// Density matrix of the level system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity to 1e-9.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let rho = Self { matrix };
        rho.check(STATE_TOL)?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|index⟩⟨index|`.
    pub fn pure(dim: usize, index: usize) -> Result<Self> {
        Self::mixture(dim, &[(index, 1.0)])
    }

    /// Diagonal mixture `Σ w_k |k⟩⟨k|`.
    pub fn mixture(dim: usize, weights: &[(usize, f64)]) -> Result<Self> {
        let mut m = CMatrix::zeros(dim, dim);
        for &(k, w) in weights {
            if k >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: k + 1 });
            }
            m[(k, k)] += Complex64::new(w, 0.0);
        }
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn population(&self, i: usize) -> f64 {
        self.matrix[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    pub fn trace_error(&self) -> f64 {
        (self.matrix.trace() - Complex64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix).first().copied().unwrap_or(0.0)
    }

    fn check(&self, tol: f64) -> Result<()> {
        if self.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("rho", "non-finite entry"));
        }
        if self.hermiticity_error() > tol {
            return Err(Error::invalid("rho", "not Hermitian"));
        }
        if self.trace_error() > tol {
            return Err(Error::invalid("rho", "trace is not 1"));
        }
        if self.min_eigenvalue() < -tol {
            return Err(Error::invalid("rho", "not positive semidefinite"));
        }
        Ok(())
    }
}

/// Spontaneous decay `|excited⟩ → |ground⟩` at `rate` GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayChannel {
    pub excited: usize,
    pub ground: usize,
    pub rate: f64,
}

/// Optical decay channels of `model`, all at rate `gamma`.
///
/// In the full model `Ex, Ey` decay to `ms = 0` and the other four excited
/// states to `|ms| = 1`.
pub fn decay_channels(model: LevelModel, gamma: f64) -> Vec<DecayChannel> {
    let ch = |excited, ground| DecayChannel { excited, ground, rate: gamma };
    match model {
        LevelModel::Spin0 => vec![ch(SPIN0_X, SPIN0_G), ch(SPIN0_Y, SPIN0_G)],
        LevelModel::Full8 => vec![
            ch(FULL_A1, FULL_G1),
            ch(FULL_A2, FULL_G1),
            ch(FULL_EX, FULL_G0),
            ch(FULL_EY, FULL_G0),
            ch(FULL_E1, FULL_G1),
            ch(FULL_E2, FULL_G1),
        ],
    }
}

/// Initial ground-state preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// `|g⟩⟨g|`, or `|g,0⟩⟨g,0|` in the full model.
    #[default]
    PureGround,
    /// `½|g,1⟩⟨g,1| + ½|g,0⟩⟨g,0|`; full model only.
    MixedSpin,
}

impl InitialState {
    pub fn density(self, model: LevelModel) -> Result<DensityMatrix> {
        match (self, model) {
            (InitialState::PureGround, LevelModel::Spin0) => DensityMatrix::pure(3, SPIN0_G),
            (InitialState::PureGround, LevelModel::Full8) => DensityMatrix::pure(8, FULL_G0),
            (InitialState::MixedSpin, LevelModel::Full8) => {
                DensityMatrix::mixture(8, &[(FULL_G1, 0.5), (FULL_G0, 0.5)])
            }
            (InitialState::MixedSpin, LevelModel::Spin0) => {
                Err(Error::invalid("init", "mixed-spin needs the full8 model"))
            }
        }
    }
}

/// Laser-off ring-up followed by the collection window, ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSequence {
    pub ring_up: f64,
    pub collect: f64,
    /// Integration step; `None` uses half the stability bound.
    pub dt: Option<f64>,
}

impl Default for PulseSequence {
    fn default() -> Self {
        Self { ring_up: 2000.0, collect: 5000.0, dt: None }
    }
}

impl PulseSequence {
    /// Shortened window for quick runs.
    pub fn short() -> Self {
        Self { ring_up: 2000.0, collect: 200.0, dt: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ring_up > 0.0 && self.ring_up.is_finite()) {
            return Err(Error::invalid("sequence.ring_up", "must be positive"));
        }
        if !(self.collect > 0.0 && self.collect.is_finite()) {
            return Err(Error::invalid("sequence.collect", "must be positive"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::invalid("sequence.dt", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Sampled trajectory from [`evolve`].
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Diagonal of ρ at each sample.
    pub populations: Vec<Vec<f64>>,
    pub states: Vec<DensityMatrix>,
    /// `Σ_k Γ_k ∫ ρ_{e_k e_k} dt` over the whole span.
    pub pl: f64,
    pub final_state: DensityMatrix,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

/// `H(t) = H_static + cos(2π·ω_m·t + phase)·H_drive`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGenerator {
    pub h_static: HermitianGenerator,
    pub h_drive: HermitianGenerator,
    pub omega_m: f64,
    pub phase: f64,
}

impl PeriodicGenerator {
    /// Generator of `model`. `optics.delta` is always the spin-0 detuning;
    /// the full model receives it through [`full8_detuning`].
    pub fn for_model(
        model: LevelModel,
        strain: &StaticStrain,
        drive: &DriveParams,
        optics: &OpticalParams,
        levels: &FullLevelParams,
    ) -> Self {
        let optics = match model {
            LevelModel::Spin0 => *optics,
            LevelModel::Full8 => optics.with_delta(full8_detuning(optics.delta, levels)),
        };
        let (h_static, h_drive) = split_model(model, strain, drive, &optics, levels);
        Self { h_static, h_drive, omega_m: drive.omega_m, phase: drive.phase }
    }

    pub fn dim(&self) -> usize {
        self.h_static.dim()
    }

    pub fn at(&self, t: f64) -> HermitianGenerator {
        HermitianGenerator::from_matrix(
            self.h_static.matrix() + self.h_drive.matrix().scale(self.modulation(t)),
        )
        .expect("square by construction")
    }

    fn modulation(&self, t: f64) -> f64 {
        (TAU * self.omega_m * t + self.phase).cos()
    }
}

/// A Hamiltonian that can be evaluated at any time.
pub trait TimeGenerator {
    /// Writes `H(t)` row-major into `out` (`n·n` entries).
    fn fill(&self, t: f64, out: &mut [Complex64]);
}

impl<F> TimeGenerator for F
where
    F: Fn(f64) -> HermitianGenerator,
{
    fn fill(&self, t: f64, out: &mut [Complex64]) {
        write_row_major(self(t).matrix(), out);
    }
}

impl TimeGenerator for PeriodicGenerator {
    fn fill(&self, t: f64, out: &mut [Complex64]) {
        let c = self.modulation(t);
        let n = self.dim();
        let (a, b) = (self.h_static.matrix(), self.h_drive.matrix());
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = a[(i, j)] + b[(i, j)] * c;
            }
        }
    }
}

fn write_row_major(m: &CMatrix, out: &mut [Complex64]) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[(i, j)];
        }
    }
}

fn to_row_major(m: &CMatrix) -> Vec<Complex64> {
    let mut v = vec![Complex64::default(); m.len()];
    write_row_major(m, &mut v);
    v
}

fn from_row_major(n: usize, v: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

fn check_channels(n: usize, channels: &[DecayChannel]) -> Result<()> {
    for ch in channels {
        for idx in [ch.excited, ch.ground] {
            if idx >= n {
                return Err(Error::DimensionMismatch { expected: n, found: idx + 1 });
            }
        }
        if !(ch.rate >= 0.0 && ch.rate.is_finite()) {
            return Err(Error::invalid("gamma", "decay rate must be non-negative"));
        }
    }
    Ok(())
}

/// Row-major right-hand side. `h` in GHz; result in 1/ns.
fn rhs_flat(n: usize, h: &[Complex64], rho: &[Complex64], channels: &[DecayChannel], out: &mut [Complex64]) {
    let minus_i_tau = Complex64::new(0.0, -TAU);
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::default();
            for k in 0..n {
                s += h[i * n + k] * rho[k * n + j] - rho[i * n + k] * h[k * n + j];
            }
            out[i * n + j] = minus_i_tau * s;
        }
    }
    for ch in channels {
        let g = TAU * ch.rate;
        let (e, gr) = (ch.excited, ch.ground);
        out[gr * n + gr] += rho[e * n + e] * g;
        for j in 0..n {
            out[e * n + j] -= rho[e * n + j] * (0.5 * g);
            out[j * n + e] -= rho[j * n + e] * (0.5 * g);
        }
    }
}

/// `−i2π[H, ρ] + Σ_k 2πΓ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})` with
/// `L_k = |g_k⟩⟨e_k|`.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    h: &HermitianGenerator,
    channels: &[DecayChannel],
) -> Result<DMatrix<Complex64>> {
    let n = rho.dim();
    if h.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h.dim() });
    }
    check_channels(n, channels)?;
    let mut out = vec![Complex64::default(); n * n];
    rhs_flat(n, &to_row_major(h.matrix()), &to_row_major(rho.matrix()), channels, &mut out);
    Ok(from_row_major(n, &out))
}

fn pl_weights(n: usize, channels: &[DecayChannel]) -> Vec<f64> {
    let mut w = vec![0.0; n];
    for ch in channels {
        w[ch.excited] += ch.rate;
    }
    w
}

fn weighted_diag(n: usize, w: &[f64], m: &[Complex64]) -> f64 {
    (0..n).map(|i| w[i] * m[i * n + i].re).sum()
}

fn step_health(n: usize, rho: &[Complex64]) -> (f64, bool) {
    let mut tr = 0.0;
    let mut ok = true;
    for i in 0..n {
        let p = rho[i * n + i].re;
        tr += p;
        if !(-STEP_TOL..=1.0 + STEP_TOL).contains(&p) {
            ok = false;
        }
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        ok = false;
    }
    let err = (tr - 1.0).abs();
    (err, ok && err <= STEP_TOL)
}

/// Fixed-step RK4 from `t_span.0` to `t_span.1`.
///
/// The step is the largest value not above `dt` that divides the span into
/// a whole number of steps per sample. `samples + 1` evenly spaced states
/// are stored, including both ends.
pub fn evolve<G: TimeGenerator + ?Sized>(
    rho0: &DensityMatrix,
    h_of_t: &G,
    channels: &[DecayChannel],
    t_span: (f64, f64),
    dt: f64,
    samples: usize,
) -> Result<EvolutionResult> {
    let n = rho0.dim();
    check_channels(n, channels)?;
    let (t0, t1) = t_span;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if !(t1 > t0) {
        return Err(Error::invalid("t_span", "end must follow start"));
    }
    let samples = samples.max(1);
    let per_sample = ((t1 - t0) / (dt * samples as f64)).ceil().max(1.0) as usize;
    let steps = per_sample * samples;
    let h = (t1 - t0) / steps as f64;
    let record_at: Vec<usize> = (0..=samples).map(|k| k * per_sample).collect();

    let nn = n * n;
    let zero = Complex64::default();
    let mut rho = to_row_major(rho0.matrix());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; nn], vec![zero; nn], vec![zero; nn], vec![zero; nn]);
    let mut tmp = vec![zero; nn];
    let (mut h_now, mut h_mid, mut h_end) = (vec![zero; nn], vec![zero; nn], vec![zero; nn]);
    let w = pl_weights(n, channels);

    let mut out = EvolutionResult {
        times: Vec::with_capacity(record_at.len()),
        populations: Vec::with_capacity(record_at.len()),
        states: Vec::with_capacity(record_at.len()),
        pl: 0.0,
        final_state: rho0.clone(),
        max_trace_error: 0.0,
        max_hermiticity_error: 0.0,
        min_eigenvalue: f64::INFINITY,
    };
    let record = |out: &mut EvolutionResult, t: f64, rho: &[Complex64]| {
        let state = DensityMatrix::from_matrix_unchecked(from_row_major(n, rho));
        out.max_trace_error = out.max_trace_error.max(state.trace_error());
        out.max_hermiticity_error = out.max_hermiticity_error.max(state.hermiticity_error());
        out.min_eigenvalue = out.min_eigenvalue.min(state.min_eigenvalue());
        out.times.push(t);
        out.populations.push(state.populations());
        out.states.push(state);
    };

    let mut next_record = 0;
    if record_at[0] == 0 {
        record(&mut out, t0, &rho);
        next_record = 1;
    }

    h_of_t.fill(t0, &mut h_now);
    rhs_flat(n, &h_now, &rho, channels, &mut k1);
    let fprime_start = weighted_diag(n, &w, &k1);
    let mut integral = 0.0;

    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let t_next = t0 + (s + 1) as f64 * h;
        h_of_t.fill(t + 0.5 * h, &mut h_mid);
        for i in 0..nn {
            tmp[i] = rho[i] + k1[i] * (0.5 * h);
        }
        rhs_flat(n, &h_mid, &tmp, channels, &mut k2);
        for i in 0..nn {
            tmp[i] = rho[i] + k2[i] * (0.5 * h);
        }
        rhs_flat(n, &h_mid, &tmp, channels, &mut k3);
        h_of_t.fill(t_next, &mut h_end);
        for i in 0..nn {
            tmp[i] = rho[i] + k3[i] * h;
        }
        rhs_flat(n, &h_end, &tmp, channels, &mut k4);

        let f_before = weighted_diag(n, &w, &rho);
        for i in 0..nn {
            rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        integral += 0.5 * h * (f_before + weighted_diag(n, &w, &rho));

        let (trace_error, healthy) = step_health(n, &rho);
        if !healthy {
            return Err(Error::StepTooLarge { dt: h, t: t_next, trace_error });
        }

        std::mem::swap(&mut h_now, &mut h_end);
        rhs_flat(n, &h_now, &rho, channels, &mut k1);

        if next_record < record_at.len() && record_at[next_record] == s + 1 {
            record(&mut out, t_next, &rho);
            next_record += 1;
        }
    }
    integral += h * h / 12.0 * (fprime_start - weighted_diag(n, &w, &k1));

    out.pl = integral;
    out.final_state = DensityMatrix::from_matrix_unchecked(from_row_major(n, &rho));
    Ok(out)
}

/// Largest rate in the problem, GHz.
///
/// `max(ω_m, |Δ|, 2Δx, Ω, Γ, |𝒜|, |ℰ1|, |ℰ2|)`, extended by the largest
/// static diagonal entry for the full model.
pub fn max_frequency(
    model: LevelModel,
    strain: &StaticStrain,
    drive: &DriveParams,
    optics: &OpticalParams,
    levels: &FullLevelParams,
) -> f64 {
    let mut f = [
        drive.omega_m,
        optics.delta.abs(),
        2.0 * strain.delta_x(),
        optics.omega,
        optics.gamma,
        drive.amp_a1.abs(),
        drive.amp_e1.abs(),
        drive.amp_e2.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if model == LevelModel::Full8 {
        let g = PeriodicGenerator::for_model(model, strain, drive, optics, levels);
        for i in 0..8 {
            f = f.max(g.h_static.get(i, i).re.abs());
        }
    }
    f
}

/// Stability bound `1/(50·f_max)`, ns.
pub fn dt_max(
    model: LevelModel,
    strain: &StaticStrain,
    drive: &DriveParams,
    optics: &OpticalParams,
    levels: &FullLevelParams,
) -> f64 {
    1.0 / (50.0 * max_frequency(model, strain, drive, optics, levels))
}

/// `y += a·x`.
fn axpy(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

/// Real-vectorized propagation of a periodic generator.
struct RealPropagator {
    n: usize,
    l_static: DMatrix<f64>,
    l_drive: DMatrix<f64>,
    omega_m: f64,
}

fn herm_basis(n: usize, b: usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::default(); n * n];
    let (i, j) = (b / n, b % n);
    if i == j {
        m[i * n + i] = Complex64::new(1.0, 0.0);
    } else if i < j {
        m[i * n + j] = Complex64::new(1.0, 0.0);
        m[j * n + i] = Complex64::new(1.0, 0.0);
    } else {
        m[j * n + i] = Complex64::new(0.0, 1.0);
        m[i * n + j] = Complex64::new(0.0, -1.0);
    }
    m
}

fn realify(n: usize, m: &[Complex64], out: &mut [f64]) {
    for i in 0..n {
        out[i * n + i] = m[i * n + i].re;
        for j in i + 1..n {
            out[i * n + j] = m[i * n + j].re;
            out[j * n + i] = m[i * n + j].im;
        }
    }
}

fn real_vector(rho: &DensityMatrix) -> DVector<f64> {
    let n = rho.dim();
    let mut v = DVector::zeros(n * n);
    realify(n, &to_row_major(rho.matrix()), v.as_mut_slice());
    v
}

/// Output of one-period propagation.
struct PeriodData {
    map: DMatrix<f64>,
    functional: Option<DVector<f64>>,
    partial_map: DMatrix<f64>,
    partial_functional: Option<DVector<f64>>,
}

impl RealPropagator {
    fn new(gen: &PeriodicGenerator, channels: &[DecayChannel]) -> Self {
        let n = gen.dim();
        let nn = n * n;
        let hs = to_row_major(gen.h_static.matrix());
        let hd = to_row_major(gen.h_drive.matrix());
        let mut l_static = DMatrix::zeros(nn, nn);
        let mut l_drive = DMatrix::zeros(nn, nn);
        let mut out = vec![Complex64::default(); nn];
        let mut col = vec![0.0; nn];
        for b in 0..nn {
            let basis = herm_basis(n, b);
            rhs_flat(n, &hs, &basis, channels, &mut out);
            realify(n, &out, &mut col);
            l_static.column_mut(b).copy_from_slice(&col);
            rhs_flat(n, &hd, &basis, &[], &mut out);
            realify(n, &out, &mut col);
            l_drive.column_mut(b).copy_from_slice(&col);
        }
        Self { n, l_static, l_drive, omega_m: gen.omega_m }
    }

    fn generator_at(&self, phase: f64, t: f64, out: &mut DMatrix<f64>) {
        out.copy_from(&self.l_static);
        axpy(out, (TAU * self.omega_m * t + phase).cos(), &self.l_drive);
    }

    fn is_stationary(&self, v: &DVector<f64>) -> bool {
        let scale = self.l_static.amax().max(self.l_drive.amax()).max(1.0);
        (&self.l_static * v).amax() <= 1e-14 * scale && (&self.l_drive * v).amax() <= 1e-14 * scale
    }

    /// RK4 over one period in `m` steps, recording the partial result after
    /// `r` steps. `e` is the observable whose time integral is wanted.
    fn period(&self, phase: f64, m: usize, r: usize, e: Option<&DVector<f64>>) -> PeriodData {
        let nn = self.n * self.n;
        let h = 1.0 / self.omega_m / m as f64;
        let mut y = DMatrix::<f64>::identity(nn, nn);
        let (mut l_now, mut l_mid, mut l_end) =
            (DMatrix::zeros(nn, nn), DMatrix::zeros(nn, nn), DMatrix::zeros(nn, nn));
        let (mut k1, mut k2, mut k3, mut k4) =
            (DMatrix::zeros(nn, nn), DMatrix::zeros(nn, nn), DMatrix::zeros(nn, nn), DMatrix::zeros(nn, nn));
        let mut tmp = DMatrix::zeros(nn, nn);

        self.generator_at(phase, 0.0, &mut l_now);
        let et = e.map(|e| e.transpose());
        let d_start = et.as_ref().map(|et| et * &l_now);
        let mut sum = et.as_ref().map(|et| et.clone());
        let first = sum.clone();
        let functional_at = |sum: &nalgebra::RowDVector<f64>,
                             last: &nalgebra::RowDVector<f64>,
                             d_end: &nalgebra::RowDVector<f64>| {
            let first = first.as_ref().expect("observable present");
            let d_start = d_start.as_ref().expect("observable present");
            let trap = (sum - first * 0.5 - last * 0.5) * h;
            (trap + (d_start - d_end) * (h * h / 12.0)).transpose()
        };

        let mut partial_map = if r == 0 { Some(y.clone()) } else { None };
        let mut partial_functional = match (r, et.as_ref()) {
            (0, Some(et)) => Some(DVector::zeros(et.len())),
            _ => None,
        };

        for s in 0..m {
            let t = s as f64 * h;
            self.generator_at(phase, t + 0.5 * h, &mut l_mid);
            self.generator_at(phase, t + h, &mut l_end);

            k1.gemm(1.0, &l_now, &y, 0.0);
            tmp.copy_from(&y);
            axpy(&mut tmp, 0.5 * h, &k1);
            k2.gemm(1.0, &l_mid, &tmp, 0.0);
            tmp.copy_from(&y);
            axpy(&mut tmp, 0.5 * h, &k2);
            k3.gemm(1.0, &l_mid, &tmp, 0.0);
            tmp.copy_from(&y);
            axpy(&mut tmp, h, &k3);
            k4.gemm(1.0, &l_end, &tmp, 0.0);

            k2 += &k3;
            axpy(&mut k1, 2.0, &k2);
            k1 += &k4;
            axpy(&mut y, h / 6.0, &k1);
            std::mem::swap(&mut l_now, &mut l_end);

            if let (Some(et), Some(sum)) = (et.as_ref(), sum.as_mut()) {
                let f = et * &y;
                *sum += &f;
                if s + 1 == r || s + 1 == m {
                    let d_end = et * &l_now * &y;
                    let val = functional_at(sum, &f, &d_end);
                    if s + 1 == r {
                        partial_functional = Some(val.clone());
                    }
                    if s + 1 == m {
                        if r == m {
                            partial_functional = Some(val.clone());
                        }
                        return PeriodData {
                            map: y.clone(),
                            functional: Some(val),
                            partial_map: partial_map.unwrap_or_else(|| y.clone()),
                            partial_functional,
                        };
                    }
                }
            }
            if s + 1 == r {
                partial_map = Some(y.clone());
            }
        }
        PeriodData {
            partial_map: partial_map.unwrap_or_else(|| y.clone()),
            map: y,
            functional: None,
            partial_functional: None,
        }
    }

    /// Propagates `v` for `duration` starting at drive phase `phase`.
    ///
    /// Returns the final vector, `∫ e·v dt` when `e` is given, and the
    /// simulated duration (the remainder is rounded to whole steps).
    fn run(
        &self,
        v: DVector<f64>,
        duration: f64,
        dt: f64,
        phase: f64,
        e: Option<&DVector<f64>>,
    ) -> Result<(DVector<f64>, f64, f64)> {
        let period = 1.0 / self.omega_m;
        let m = (period / dt).ceil().max(1.0) as usize;
        let h = period / m as f64;
        let total = (duration / h).round() as usize;
        let (k, r) = (total / m, total % m);
        let data = self.period(phase, m, r, e);
        let mut v = v;
        let mut integral = 0.0;
        for p in 0..k {
            if let Some(a) = data.functional.as_ref() {
                integral += a.dot(&v);
            }
            v = &data.map * &v;
            self.check(&v, h, (p + 1) as f64 * period)?;
        }
        if r > 0 {
            if let Some(a) = data.partial_functional.as_ref() {
                integral += a.dot(&v);
            }
            v = &data.partial_map * &v;
            self.check(&v, h, total as f64 * h)?;
        }
        Ok((v, integral, total as f64 * h))
    }

    fn check(&self, v: &DVector<f64>, dt: f64, t: f64) -> Result<()> {
        let n = self.n;
        let mut tr = 0.0;
        let mut ok = v.iter().all(|x| x.is_finite());
        for i in 0..n {
            let p = v[i * n + i];
            tr += p;
            if !(-STEP_TOL..=1.0 + STEP_TOL).contains(&p) {
                ok = false;
            }
        }
        let trace_error = (tr - 1.0).abs();
        if !ok || trace_error > STEP_TOL {
            return Err(Error::StepTooLarge { dt, t, trace_error });
        }
        Ok(())
    }
}

/// Everything that defines a PLE measurement except the detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct PleSetup {
    pub strain: StaticStrain,
    pub drive: DriveParams,
    pub optics: OpticalParams,
    pub levels: FullLevelParams,
    pub sequence: PulseSequence,
    pub model: LevelModel,
    pub init: InitialState,
}

impl PleSetup {
    pub fn spin0(strain: StaticStrain, drive: DriveParams, optics: OpticalParams) -> Self {
        Self {
            strain,
            drive,
            optics,
            levels: FullLevelParams::default(),
            sequence: PulseSequence::default(),
            model: LevelModel::Spin0,
            init: InitialState::PureGround,
        }
    }

    pub fn with_sequence(self, sequence: PulseSequence) -> Self {
        Self { sequence, ..self }
    }

    /// Step used at detuning `delta`. The default is half of [`dt_max`],
    /// where halving again changes PL by less than 1e−5 relative.
    pub fn step(&self, delta: f64) -> f64 {
        let bound = dt_max(
            self.model,
            &self.strain,
            &self.drive,
            &self.optics.with_delta(delta),
            &self.levels,
        );
        self.sequence.dt.unwrap_or(0.5 * bound)
    }

    pub fn validate(&self) -> Result<()> {
        self.strain.validate()?;
        self.drive.validate()?;
        self.optics.validate()?;
        self.sequence.validate()?;
        self.init.density(self.model)?;
        Ok(())
    }
}

/// PL collected at one detuning.
pub fn ple_point(delta: f64, setup: &PleSetup) -> Result<f64> {
    let optics = setup.optics.with_delta(delta);
    let dt = setup.step(delta);
    let channels = decay_channels(setup.model, optics.gamma);
    let mut v = real_vector(&setup.init.density(setup.model)?);

    let dark = optics.with_delta(delta);
    let dark = OpticalParams { omega: 0.0, ..dark };
    let off = PeriodicGenerator::for_model(setup.model, &setup.strain, &setup.drive, &dark, &setup.levels);
    let off = RealPropagator::new(&off, &channels);
    let mut elapsed = setup.sequence.ring_up;
    if !off.is_stationary(&v) {
        let (v1, _, t) = off.run(v, setup.sequence.ring_up, dt, setup.drive.phase, None)?;
        v = v1;
        elapsed = t;
    }

    let on = PeriodicGenerator::for_model(setup.model, &setup.strain, &setup.drive, &optics, &setup.levels);
    let on = RealPropagator::new(&on, &channels);
    let n = on.n;
    let mut e = DVector::zeros(n * n);
    for (i, w) in pl_weights(n, &channels).into_iter().enumerate() {
        e[i * n + i] = w;
    }
    let phase = setup.drive.phase + TAU * setup.drive.omega_m * elapsed;
    let (_, pl, _) = on.run(v, setup.sequence.collect, dt, phase, Some(&e))?;
    Ok(pl)
}

/// Runs `f` on a pool of `workers` threads (`0` picks the rayon default).
pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// PL at every detuning, points evaluated in parallel.
pub fn ple_spectrum(detunings: &[f64], setup: &PleSetup, workers: usize) -> Result<Vec<f64>> {
    if detunings.is_empty() {
        return Err(Error::invalid("detunings", "empty detuning list"));
    }
    setup.validate()?;
    with_workers(workers, || detunings.par_iter().map(|&d| ple_point(d, setup)).collect())
}
