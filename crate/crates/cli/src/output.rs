use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use crate::config::{RunConfig, Scenario};
use crate::scenarios::Table;

pub struct Artifacts {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub plot: Option<PathBuf>,
}

pub fn write_all(
    dir: &Path,
    scenario: Scenario,
    cfg: &RunConfig,
    table: &Table,
    wall_time: f64,
    plot: bool,
) -> Result<Artifacts> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = format!("{}_{}", cfg.name, scenario.as_str());
    let csv = dir.join(format!("{stem}.csv"));
    write_csv(&csv, scenario, table)?;

    let sidecar = dir.join(format!("{stem}.json"));
    let mut resolved = cfg.clone();
    resolved.scenario = Some(scenario);
    let mut doc = serde_json::to_value(&resolved)?;
    doc["meta"] = json!({
        "version": nvsim_core::VERSION,
        "scenario": scenario.as_str(),
        "wall_time_s": wall_time,
        "csv": csv.file_name().and_then(|s| s.to_str()),
        "converged": table.converged,
        "summary": table.summary,
    });
    std::fs::write(&sidecar, serde_json::to_string_pretty(&doc)? + "\n")
        .with_context(|| format!("writing {}", sidecar.display()))?;

    let plot = if plot {
        let path = dir.join(format!("{stem}_plot.py"));
        std::fs::write(&path, plot_script(scenario, &csv)).with_context(|| format!("writing {}", path.display()))?;
        Some(path)
    } else {
        None
    };
    Ok(Artifacts { csv, sidecar, plot })
}

fn write_csv(path: &Path, scenario: Scenario, table: &Table) -> Result<()> {
    if let Some((i, j)) = first_non_finite(&table.rows) {
        anyhow::bail!("non-finite value in row {i}, column `{}`", table.header[j]);
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# nvsim {} {}", nvsim_core::VERSION, scenario.as_str())?;
    if scenario == Scenario::Map {
        writeln!(out, "# rows: drive scaling; columns after amp_e1_ghz: pl at each laser detuning")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn first_non_finite(rows: &[Vec<f64>]) -> Option<(usize, usize)> {
    rows.iter()
        .enumerate()
        .find_map(|(i, r)| r.iter().position(|v| !v.is_finite()).map(|j| (i, j)))
}

/// Standalone matplotlib script that reads the CSV next to it.
pub fn plot_script(scenario: Scenario, csv: &Path) -> String {
    let name = csv.file_name().and_then(|s| s.to_str()).unwrap_or("data.csv");
    let body = if scenario == Scenario::Map {
        r#"det = [float(h[len("pl_at_"):-len("_ghz")]) for h in header[3:]]
amp = data[:, 2] if abs(data[:, 2]).max() > 0 else data[:, 0]
plt.pcolormesh(det, amp, data[:, 3:], shading="auto")
plt.xlabel("detuning (GHz)")
plt.ylabel(header[2] if abs(data[:, 2]).max() > 0 else header[0])
plt.colorbar(label="PL")"#
    } else {
        r#"for k in range(1, data.shape[1]):
    plt.plot(data[:, 0], data[:, k], label=header[k])
plt.xlabel(header[0])
plt.legend()"#
    };
    format!(
        r##"import csv
import os

import matplotlib.pyplot as plt
import numpy as np

path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "{name}")
with open(path) as f:
    rows = [r for r in csv.reader(line for line in f if not line.startswith("#"))]
header, data = rows[0], np.array(rows[1:], dtype=float)
{body}
plt.tight_layout()
plt.savefig(path[:-4] + ".png", dpi=150)
"##
    )
}

pub fn summary_line(value: &Value) -> String {
    serde_json::to_string(value).unwrap_or_default()
}
