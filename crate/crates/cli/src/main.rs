//! `nvsim`: configuration-driven front end for the NV phonon-dressing
//! simulator.

mod config;
mod output;
mod scenarios;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nvsim_core::floquet::required_truncation;
use nvsim_core::lindblad::dt_max;
use nvsim_core::strain_model::mixing_angle;

use config::{ConfigError, RunConfig, Scenario};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "nvsim", version, about = "Phonon-dressed NV photoluminescence simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// PLE spectrum over the detuning grid.
    Ple(RunArgs),
    /// PLE map: one spectrum per drive scaling.
    Map(RunArgs),
    /// Floquet dressed doublet and sideband weights.
    Floquet(RunArgs),
    /// Phonon-driven orbital Rabi flopping after an optical pulse.
    Rabi(RunArgs),
    /// Line dispersion against a transverse field.
    Cdd(RunArgs),
    /// Recover drive amplitudes from a synthetic map.
    Fit(RunArgs),
    /// Polarization response of the two orbital dipoles.
    Polarization(RunArgs),
    /// Resonator transfer and visible sideband count.
    Resonator(RunArgs),
    /// Resolve a config and print derived quantities without computing.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config, or a JSON sidecar from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `drive.omega_m=1.6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write a matplotlib script for the CSV.
    #[arg(long)]
    plot: bool,
    /// Exit with status 4 when a fit does not converge.
    #[arg(long)]
    strict: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "NVSIM_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Scenario to check the config against; defaults to the file's own.
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(args) => validate(&args),
        Command::Ple(a) => run(Scenario::Ple, &a),
        Command::Map(a) => run(Scenario::Map, &a),
        Command::Floquet(a) => run(Scenario::Floquet, &a),
        Command::Rabi(a) => run(Scenario::Rabi, &a),
        Command::Cdd(a) => run(Scenario::Cdd, &a),
        Command::Fit(a) => run(Scenario::Fit, &a),
        Command::Polarization(a) => run(Scenario::Polarization, &a),
        Command::Resonator(a) => run(Scenario::Resonator, &a),
    }
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn load(common: &CommonArgs) -> Result<RunConfig, ConfigError> {
    config::load(&common.config, &common.overrides)
}

fn run(scenario: Scenario, args: &RunArgs) -> ExitCode {
    let cfg = match load(&args.common).and_then(|c| c.validate(scenario).map(|_| c)) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    if let Some(w) = stability_warning(&cfg) {
        log::warn!("{w}");
    }
    let workers = args.workers.unwrap_or(cfg.workers);
    let start = Instant::now();
    let table = match scenarios::run(scenario, &cfg, workers) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("numerical failure: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    let wall = start.elapsed().as_secs_f64();
    let written = match output::write_all(&args.out, scenario, &cfg, &table, wall, args.plot) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(if e.to_string().starts_with("non-finite") { EXIT_NUMERICAL } else { EXIT_IO });
        }
    };
    println!("wrote {}", written.csv.display());
    println!("wrote {}", written.sidecar.display());
    if let Some(p) = &written.plot {
        println!("wrote {}", p.display());
    }
    log::info!("summary: {}", output::summary_line(&table.summary));
    if table.converged == Some(false) {
        eprintln!("fit did not converge");
        if args.strict {
            return ExitCode::from(EXIT_NOT_CONVERGED);
        }
    }
    ExitCode::SUCCESS
}

/// Largest step allowed over the detuning grid, ns.
fn grid_dt_max(cfg: &RunConfig) -> f64 {
    let d = cfg.grid.detuning;
    let delta = d.start.abs().max(d.stop.abs());
    dt_max(cfg.model, &cfg.strain, &cfg.drive, &cfg.optics.with_delta(delta), &cfg.levels)
}

fn stability_warning(cfg: &RunConfig) -> Option<String> {
    let bound = grid_dt_max(cfg);
    match cfg.sequence.dt {
        Some(dt) if dt > bound => Some(format!(
            "sequence.dt = {dt} ns exceeds the stability bound dt_max = {bound:.6e} ns"
        )),
        _ => None,
    }
}

fn validate(args: &ValidateArgs) -> ExitCode {
    let cfg = match load(&args.common) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    let scenario = args.scenario.or(cfg.scenario).unwrap_or(Scenario::Ple);
    if let Err(e) = cfg.validate(scenario) {
        return config_failure(&e);
    }
    print!("{}", report(&cfg, &args.common.config));
    if let Some(w) = stability_warning(&cfg) {
        println!("warning: {w}");
    }
    ExitCode::SUCCESS
}

fn report(cfg: &RunConfig, path: &Path) -> String {
    let mut s = format!("# resolved from {}\n", path.display());
    s += &toml::to_string(cfg).unwrap_or_else(|e| format!("# cannot render config: {e}\n"));
    s += "\n[derived]\n";
    match mixing_angle(&cfg.strain) {
        Ok(t) => s += &format!("theta_rad = {}\n", t.0),
        Err(_) => s += "theta_rad = \"undefined (V_E1 = V_E2 = 0)\"\n",
    }
    s += &format!("splitting_ghz = {}\n", 2.0 * cfg.strain.delta_x());
    s += &format!("s0 = {}\n", cfg.optics.s0());
    s += &format!("dt_max_ns = {:e}\n", grid_dt_max(cfg));
    let n = cfg.floquet.trunc_n.unwrap_or_else(|| required_truncation(cfg.drive.amp_a1, cfg.drive.omega_m));
    s += &format!("floquet_trunc_n = {n}\n");
    s
}
