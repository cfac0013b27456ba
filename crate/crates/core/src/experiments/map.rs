use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lindblad::{ple_point, with_workers, PleSetup};
use crate::{Error, Result};

/// PLE rows at a series of drive scalings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMap {
    /// Laser detunings, GHz.
    pub detunings: Vec<f64>,
    /// Drive scale factor of each row.
    pub scalings: Vec<f64>,
    /// Row axis in physical units, labelled by `amplitude_label`.
    pub amplitudes: Vec<f64>,
    pub amplitude_label: String,
    /// `pl[row][column]`.
    pub pl: Vec<Vec<f64>>,
}

impl SpectrumMap {
    pub fn rows(&self) -> usize {
        self.pl.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.pl[i]
    }

    /// Checks that every row matches the detuning axis.
    pub fn validate(&self) -> Result<()> {
        if self.scalings.len() != self.pl.len() || self.amplitudes.len() != self.pl.len() {
            return Err(Error::DimensionMismatch { expected: self.pl.len(), found: self.scalings.len() });
        }
        for row in &self.pl {
            if row.len() != self.detunings.len() {
                return Err(Error::DimensionMismatch { expected: self.detunings.len(), found: row.len() });
            }
        }
        Ok(())
    }
}

/// Row axis for `setup`: the 𝒜 amplitude when nonzero, else ℰ1, else the bare scaling.
fn amplitude_axis(setup: &PleSetup, scalings: &[f64]) -> (Vec<f64>, String) {
    let d = &setup.drive;
    let (reference, label) = if d.amp_a1 != 0.0 {
        (d.amp_a1, "amp_a1_ghz")
    } else if d.amp_e1 != 0.0 {
        (d.amp_e1, "amp_e1_ghz")
    } else {
        (1.0, "scale")
    };
    (scalings.iter().map(|s| s * reference).collect(), label.to_string())
}

/// PLE spectra with the drive amplitudes of `setup` multiplied by each
/// entry of `scalings`. All points run in parallel.
pub fn dressed_map(
    detunings: &[f64],
    scalings: &[f64],
    setup: &PleSetup,
    workers: usize,
) -> Result<SpectrumMap> {
    if detunings.is_empty() || scalings.is_empty() {
        return Err(Error::invalid("map", "empty detuning or amplitude axis"));
    }
    setup.validate()?;
    let rows: Vec<PleSetup> = scalings
        .iter()
        .map(|&s| PleSetup { drive: setup.drive.scaled(s), ..setup.clone() })
        .collect();
    let cols = detunings.len();
    let flat: Vec<f64> = with_workers(workers, || {
        (0..rows.len() * cols)
            .into_par_iter()
            .map(|k| ple_point(detunings[k % cols], &rows[k / cols]))
            .collect::<Result<Vec<f64>>>()
    })?;
    let (amplitudes, amplitude_label) = amplitude_axis(setup, scalings);
    Ok(SpectrumMap {
        detunings: detunings.to_vec(),
        scalings: scalings.to_vec(),
        amplitudes,
        amplitude_label,
        pl: flat.chunks(cols).map(|c| c.to_vec()).collect(),
    })
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{ple_spectrum, PulseSequence};
    use crate::{DriveParams, OpticalParams, StaticStrain};

    fn setup() -> PleSetup {
        PleSetup::spin0(
            StaticStrain::new(0.0, 1.0, 0.0),
            DriveParams::new(0.8, 0.0, 1.0),
            OpticalParams::new(0.0, 0.1, 0.1),
        )
        .with_sequence(PulseSequence::short())
    }

    #[test]
    fn rows_match_single_spectra() {
        let det = linspace(-2.0, 2.0, 9);
        let map = dressed_map(&det, &[0.0, 1.0], &setup(), 2).unwrap();
        map.validate().unwrap();
        assert_eq!(map.amplitude_label, "amp_a1_ghz");
        assert_eq!(map.amplitudes, vec![0.0, 0.8]);
        let single = ple_spectrum(&det, &setup(), 1).unwrap();
        assert_eq!(map.row(1), &single[..]);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let det = linspace(-1.5, 1.5, 7);
        let a = dressed_map(&det, &[0.5, 1.0], &setup(), 1).unwrap();
        let b = dressed_map(&det, &[0.5, 1.0], &setup(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_axes_rejected() {
        assert!(dressed_map(&[], &[1.0], &setup(), 1).is_err());
        assert!(dressed_map(&[0.0], &[], &setup(), 1).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }
}
