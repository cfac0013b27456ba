use serde::Serialize;

use super::spectral::golden_max;
use crate::{Error, Result};

/// A spectral maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
    /// True when the position came from parabolic interpolation.
    pub refined: bool,
}

pub type PeakList = Vec<Peak>;

/// Local maxima of `row` above `min_height_frac × max(row)`.
///
/// A sample is a maximum when it exceeds its left neighbour and is not
/// below its right neighbour, so plateaus report their lowest-detuning
/// point. Positions are refined by the parabola through the three samples
/// around each maximum.
pub fn extract_peaks(detunings: &[f64], row: &[f64], min_height_frac: f64) -> Result<PeakList> {
    let n = row.len();
    if n < 3 {
        return Err(Error::EmptySpectrum(n));
    }
    if detunings.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: detunings.len() });
    }
    let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Ok(Vec::new());
    }
    let threshold = min_height_frac * top;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let (l, c, r) = (row[i - 1], row[i], row[i + 1]);
        if !(c > l && c >= r && c > threshold) {
            continue;
        }
        if c == r {
            peaks.push(Peak { position: detunings[i], height: c, refined: false });
            continue;
        }
        let peak = match parabola_vertex(
            (detunings[i - 1], l),
            (detunings[i], c),
            (detunings[i + 1], r),
        ) {
            Some((x, y)) => Peak { position: x, height: y, refined: true },
            None => Peak { position: detunings[i], height: c, refined: false },
        };
        peaks.push(peak);
    }
    Ok(peaks)
}

fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<(f64, f64)> {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a < 0.0) {
        return None;
    }
    let b = d01 - a * (x0 + x1);
    let x = -b / (2.0 * a);
    if !(x >= x0 && x <= x2) {
        return None;
    }
    Some((x, y0 + (x - x0) * (d01 + a * (x - x1))))
}

/// Maximizes `f` on `[lo, hi]` to within `tol` by golden-section search.
pub fn locate_peak(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<Peak> {
    let err = std::cell::RefCell::new(None);
    let (x, y) = golden_max(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(Peak { position: x, height: y, refined: true })
}
