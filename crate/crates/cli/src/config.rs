use std::fmt;
use std::path::Path;

use nvsim_core::experiments::presets;
use nvsim_core::experiments::resonator::ResonatorModel;
use nvsim_core::experiments::{linspace, FieldChannel};
use nvsim_core::lindblad::PleSetup;
use nvsim_core::{
    DriveParams, FullLevelParams, InitialState, LevelModel, OpticalParams, PulseSequence, StaticStrain,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Ple,
    Map,
    Floquet,
    Rabi,
    Cdd,
    Fit,
    Polarization,
    Resonator,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Ple => "ple",
            Scenario::Map => "map",
            Scenario::Floquet => "floquet",
            Scenario::Rabi => "rabi",
            Scenario::Cdd => "cdd",
            Scenario::Fit => "fit",
            Scenario::Polarization => "polarization",
            Scenario::Resonator => "resonator",
        }
    }
}

/// A configuration problem tied to a dotted key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { key: key.into(), reason: reason.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.reason)
        } else {
            write!(f, "`{}`: {}", self.key, self.reason)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Evenly spaced axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub const fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.points)
    }

    fn check(&self, key: &str) -> Result<(), ConfigError> {
        if self.points == 0 {
            return Err(ConfigError::new(format!("{key}.points"), "grid must be nonempty"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(ConfigError::new(key, "bounds must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    /// Laser detunings, GHz.
    pub detuning: Axis,
    /// Multipliers applied to the drive amplitudes in maps and fits.
    pub scaling: Axis,
}

impl Default for Grid {
    fn default() -> Self {
        Self { detuning: Axis::new(-8.0, 8.0, 401), scaling: Axis::new(1.0, 1.0, 1) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetConfig {
    /// Ladder truncation; `None` uses the smallest accepted value.
    pub trunc_n: Option<usize>,
    pub max_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiConfig {
    /// Pulse Rabi frequency; `None` uses `optics.omega`.
    pub pulse_omega: Option<f64>,
    /// Pulse length; `None` gives `1/(2Ω)`.
    pub duration: Option<f64>,
    pub t_span: f64,
    pub samples: usize,
}

impl Default for RabiConfig {
    fn default() -> Self {
        Self { pulse_omega: None, duration: None, t_span: 40.0, samples: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CddConfig {
    pub channel: FieldChannel,
    pub eps: Axis,
    pub window: f64,
    pub grid: usize,
    pub tol: f64,
    pub min_height_frac: f64,
}

impl Default for CddConfig {
    fn default() -> Self {
        Self {
            channel: FieldChannel::EpsX,
            eps: Axis::new(-0.02, 0.02, 5),
            window: 0.5,
            grid: 201,
            tol: 1e-6,
            min_height_frac: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Drive amplitudes (𝒜, ℰ1) used to synthesize the target map.
    pub truth: [f64; 2],
    pub initial: [f64; 2],
    pub noise: f64,
    pub seed: u64,
    pub bounds_a1: [f64; 2],
    pub bounds_e1: [f64; 2],
    pub max_evals: usize,
    pub xtol: f64,
    pub ftol_abs: f64,
    pub initial_step: f64,
    pub max_residual: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            truth: [0.0, 0.0],
            initial: [0.0, 0.0],
            noise: 0.0,
            seed: 0,
            bounds_a1: [-30.0, 30.0],
            bounds_e1: [-30.0, 30.0],
            max_evals: 400,
            xtol: 1e-3,
            ftol_abs: 1e-14,
            initial_step: 0.5,
            max_residual: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolarizationConfig {
    /// Dipole reference angle, rad.
    pub phi0: f64,
    /// Saturation parameter; `None` uses the optical s0.
    pub s0: Option<f64>,
    pub points: usize,
}

impl Default for PolarizationConfig {
    fn default() -> Self {
        Self { phi0: 0.0, s0: None, points: 181 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonatorConfig {
    pub model: ResonatorModel,
    /// Drive frequencies probed, GHz.
    pub frequency: Axis,
    /// Sidebands counted above this fraction of the tallest.
    pub min_height_frac: f64,
}

impl Default for ResonatorConfig {
    fn default() -> Self {
        Self { model: ResonatorModel::default(), frequency: Axis::new(1.0, 3.0, 2001), min_height_frac: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrainBlock {
    v_a1: Option<f64>,
    v_e1: Option<f64>,
    v_e2: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveBlock {
    amp_a1: Option<f64>,
    amp_e1: Option<f64>,
    amp_e2: Option<f64>,
    omega_m: Option<f64>,
    phase: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpticsBlock {
    delta: Option<f64>,
    omega: Option<f64>,
    gamma: Option<f64>,
}

/// The file as written, before presets and defaults are applied.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    scenario: Option<Scenario>,
    preset: Option<String>,
    workers: Option<usize>,
    model: Option<LevelModel>,
    init: Option<InitialState>,
    strain: Option<StrainBlock>,
    drive: Option<DriveBlock>,
    optics: Option<OpticsBlock>,
    levels: Option<FullLevelParams>,
    sequence: Option<PulseSequence>,
    grid: Option<Grid>,
    floquet: Option<FloquetConfig>,
    rabi: Option<RabiConfig>,
    cdd: Option<CddConfig>,
    fit: Option<FitConfig>,
    polarization: Option<PolarizationConfig>,
    resonator: Option<ResonatorConfig>,
    /// Run metadata carried by sidecar files; ignored on input.
    #[allow(dead_code)]
    meta: Option<Value>,
}

/// Fully resolved run configuration. Serializes to a valid config file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub name: String,
    pub scenario: Option<Scenario>,
    pub workers: usize,
    pub model: LevelModel,
    pub init: InitialState,
    pub strain: StaticStrain,
    pub drive: DriveParams,
    pub optics: OpticalParams,
    pub levels: FullLevelParams,
    pub sequence: PulseSequence,
    pub grid: Grid,
    pub floquet: FloquetConfig,
    pub rabi: RabiConfig,
    pub cdd: CddConfig,
    pub fit: FitConfig,
    pub polarization: PolarizationConfig,
    pub resonator: ResonatorConfig,
}

impl RunConfig {
    pub fn setup(&self) -> PleSetup {
        PleSetup {
            strain: self.strain,
            drive: self.drive,
            optics: self.optics,
            levels: self.levels,
            sequence: self.sequence,
            model: self.model,
            init: self.init,
        }
    }

    /// Checks everything `scenario` will read.
    pub fn validate(&self, scenario: Scenario) -> Result<(), ConfigError> {
        if let Some(s) = self.scenario {
            if s != scenario {
                return Err(ConfigError::new(
                    "scenario",
                    format!("file is for `{}` but `{}` was requested", s.as_str(), scenario.as_str()),
                ));
            }
        }
        self.setup().validate().map_err(core_key)?;
        self.grid.detuning.check("grid.detuning")?;
        match scenario {
            Scenario::Map | Scenario::Fit => self.grid.scaling.check("grid.scaling")?,
            Scenario::Cdd => {
                self.cdd.eps.check("cdd.eps")?;
                if self.cdd.grid < 3 {
                    return Err(ConfigError::new("cdd.grid", "need at least 3 points"));
                }
                if !(self.cdd.window > 0.0) {
                    return Err(ConfigError::new("cdd.window", "must be positive"));
                }
            }
            Scenario::Rabi => {
                if self.rabi.samples < 8 {
                    return Err(ConfigError::new("rabi.samples", "need at least 8 samples"));
                }
                if !(self.rabi.t_span > 0.0) {
                    return Err(ConfigError::new("rabi.t_span", "must be positive"));
                }
            }
            Scenario::Polarization => {
                if self.polarization.points == 0 {
                    return Err(ConfigError::new("polarization.points", "grid must be nonempty"));
                }
            }
            Scenario::Resonator => {
                self.resonator.frequency.check("resonator.frequency")?;
                self.resonator.model.validate().map_err(|e| prefixed("resonator.model", e))?;
            }
            Scenario::Ple | Scenario::Floquet => {}
        }
        if scenario == Scenario::Fit {
            let f = &self.fit;
            for (key, (lo, hi)) in [("fit.bounds_a1", f.bounds_a1), ("fit.bounds_e1", f.bounds_e1)]
                .map(|(k, b)| (k, (b[0], b[1])))
            {
                if !(lo < hi) {
                    return Err(ConfigError::new(key, "lower bound must be below upper bound"));
                }
            }
            if f.max_evals == 0 {
                return Err(ConfigError::new("fit.max_evals", "must be positive"));
            }
            if !(f.noise >= 0.0) {
                return Err(ConfigError::new("fit.noise", "must be non-negative"));
            }
        }
        Ok(())
    }
}

fn core_key(e: nvsim_core::Error) -> ConfigError {
    match e {
        nvsim_core::Error::InvalidParameter { name, reason } => ConfigError::new(name, reason),
        other => ConfigError::new("", other.to_string()),
    }
}

fn prefixed(prefix: &str, e: nvsim_core::Error) -> ConfigError {
    match e {
        nvsim_core::Error::InvalidParameter { name, reason } => {
            let leaf = name.rsplit('.').next().unwrap_or(name);
            ConfigError::new(format!("{prefix}.{leaf}"), reason)
        }
        other => ConfigError::new(prefix, other.to_string()),
    }
}

/// Reads a TOML or JSON config (chosen by extension) into a JSON tree.
pub fn read_tree(path: &Path) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))
    } else {
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
        serde_json::to_value(table).map_err(|e| ConfigError::new("", e.to_string()))
    }
}

/// Applies a `key=value` override. The value is parsed as a TOML literal,
/// falling back to a bare string.
pub fn apply_override(tree: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::new(spec, "override must have the form key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(ConfigError::new(key, "malformed key"));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => serde_json::to_value(t.remove("v").expect("parsed key"))
            .map_err(|e| ConfigError::new(key, e.to_string()))?,
        Err(_) => Value::String(raw.to_string()),
    };
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| ConfigError::new(parts[..i].join("."), "is not a table"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("key has at least one part")
}

/// Resolves a config tree. `default_name` names the outputs when the file
/// has no `name`.
pub fn resolve(tree: Value, default_name: &str) -> Result<RunConfig, ConfigError> {
    let mut full = section_defaults();
    merge(&mut full, tree);
    let raw: RawConfig = serde_path_to_error::deserialize(full).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." { String::new() } else { path };
        ConfigError::new(key, e.into_inner().to_string())
    })?;

    let preset = match &raw.preset {
        Some(name) => Some(
            presets::by_name(name).ok_or_else(|| ConfigError::new("preset", format!("unknown preset `{name}`")))?,
        ),
        None => None,
    };
    let base_strain = preset.as_ref().map(|p| p.strain);
    let base_drive = preset.as_ref().map(|p| p.drive);
    let base_optics = preset.as_ref().map(|p| p.optics);

    let s = raw.strain.unwrap_or_default();
    let pick = |v: Option<f64>, base: Option<f64>, key: &str| -> Result<f64, ConfigError> {
        v.or(base).ok_or_else(|| ConfigError::new(key, "missing"))
    };
    let strain = StaticStrain {
        v_a1: s.v_a1.or(base_strain.map(|b| b.v_a1)).unwrap_or(0.0),
        v_e1: pick(s.v_e1, base_strain.map(|b| b.v_e1), "strain.v_e1")?,
        v_e2: s.v_e2.or(base_strain.map(|b| b.v_e2)).unwrap_or(0.0),
    };
    let d = raw.drive.unwrap_or_default();
    let drive = DriveParams {
        amp_a1: d.amp_a1.or(base_drive.map(|b| b.amp_a1)).unwrap_or(0.0),
        amp_e1: d.amp_e1.or(base_drive.map(|b| b.amp_e1)).unwrap_or(0.0),
        amp_e2: d.amp_e2.or(base_drive.map(|b| b.amp_e2)).unwrap_or(0.0),
        omega_m: pick(d.omega_m, base_drive.map(|b| b.omega_m), "drive.omega_m")?,
        phase: d.phase.or(base_drive.map(|b| b.phase)).unwrap_or(0.0),
    };
    let o = raw.optics.unwrap_or_default();
    let optics = OpticalParams {
        delta: o.delta.or(base_optics.map(|b| b.delta)).unwrap_or(0.0),
        omega: pick(o.omega, base_optics.map(|b| b.omega), "optics.omega")?,
        gamma: pick(o.gamma, base_optics.map(|b| b.gamma), "optics.gamma")?,
    };

    Ok(RunConfig {
        name: raw.name.unwrap_or_else(|| default_name.to_string()),
        scenario: raw.scenario,
        workers: raw.workers.unwrap_or(0),
        model: raw.model.unwrap_or_default(),
        init: raw.init.unwrap_or_default(),
        strain,
        drive,
        optics,
        levels: raw.levels.unwrap_or_default(),
        sequence: raw.sequence.unwrap_or_default(),
        grid: raw.grid.unwrap_or_default(),
        floquet: raw.floquet.unwrap_or_default(),
        rabi: raw.rabi.unwrap_or_default(),
        cdd: raw.cdd.unwrap_or_default(),
        fit: raw.fit.unwrap_or_default(),
        polarization: raw.polarization.unwrap_or_default(),
        resonator: raw.resonator.unwrap_or_default(),
    })
}

/// Blocks that are complete without user input, so that a file may set
/// any subset of their keys.
fn section_defaults() -> Value {
    serde_json::json!({
        "levels": FullLevelParams::default(),
        "sequence": PulseSequence::default(),
        "grid": Grid::default(),
        "floquet": FloquetConfig::default(),
        "rabi": RabiConfig::default(),
        "cdd": CddConfig::default(),
        "fit": FitConfig::default(),
        "polarization": PolarizationConfig::default(),
        "resonator": ResonatorConfig::default(),
    })
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Reads, overrides and resolves a config file.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut tree = read_tree(path)?;
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    resolve(tree, stem)
}
