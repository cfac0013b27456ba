//! Bessel sidebands and the truncated Floquet picture of a frequency
//! modulated two-level transition.
//!
//! The two-level problem is `{|g⟩, |x⟩}` with the excited level modulated as
//! `−Δ + 𝐀 cos(ω_m t)`. Its Floquet matrix couples the photon ladders
//! `|g, m⟩` and `|x, n⟩` through `(Ω/2)·J_{n−m}(𝐀/ω_m)`.

mod bessel;

pub use bessel::{bessel_j, bessel_j_upto};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::{Error, Result};

/// Truncated Floquet matrix with ladders `m, n ∈ [−N, N]`.
///
/// Ordering: `|g, +N⟩ … |g, −N⟩, |x, +N⟩ … |x, −N⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMatrix {
    pub trunc_n: usize,
    pub matrix: DMatrix<f64>,
    pub delta: f64,
    pub omega: f64,
    pub amp: f64,
    pub omega_m: f64,
}

impl FloquetMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Fourier order and branch (`false` for g, `true` for x) of row `i`.
    pub fn label(&self, i: usize) -> (i64, bool) {
        let len = 2 * self.trunc_n + 1;
        let order = self.trunc_n as i64 - (i % len) as i64;
        (order, i >= len)
    }
}

/// Smallest truncation accepted for amplitude `amp`.
pub fn required_truncation(amp: f64, omega_m: f64) -> usize {
    (amp.abs() / omega_m).ceil() as usize + 5
}

pub fn build_floquet(
    delta: f64,
    omega: f64,
    amp: f64,
    omega_m: f64,
    trunc_n: usize,
) -> Result<FloquetMatrix> {
    if !(omega_m > 0.0) {
        return Err(Error::invalid("omega_m", "must be positive"));
    }
    let required = required_truncation(amp, omega_m);
    if trunc_n < required.max(1) {
        return Err(Error::TruncationTooSmall { trunc_n, required });
    }
    let len = 2 * trunc_n + 1;
    let z = amp / omega_m;
    let j = bessel_j_upto(2 * trunc_n, z.abs())?;
    let bes = |k: i64| -> f64 {
        let v = j[k.unsigned_abs() as usize];
        let odd = k.rem_euclid(2) == 1;
        if odd && ((k < 0) != (z < 0.0)) {
            -v
        } else {
            v
        }
    };
    let mut m = DMatrix::zeros(2 * len, 2 * len);
    let nn = trunc_n as i64;
    for a in 0..len {
        let order_g = nn - a as i64;
        m[(a, a)] = order_g as f64 * omega_m;
        for b in 0..len {
            let order_x = nn - b as i64;
            let c = 0.5 * omega * bes(order_x - order_g);
            m[(a, len + b)] = c;
            m[(len + b, a)] = c;
        }
    }
    for b in 0..len {
        let order_x = nn - b as i64;
        m[(len + b, len + b)] = -delta + order_x as f64 * omega_m;
    }
    Ok(FloquetMatrix { trunc_n, matrix: m, delta, omega, amp, omega_m })
}

/// Folds `q` into `[−ω_m/2, ω_m/2)`.
pub fn fold(q: f64, omega_m: f64) -> f64 {
    let r = (q + 0.5 * omega_m).rem_euclid(omega_m) - 0.5 * omega_m;
    if r >= 0.5 * omega_m {
        r - omega_m
    } else {
        r
    }
}

/// Folded quasienergies, ascending.
pub fn quasienergies(fm: &FloquetMatrix) -> Vec<f64> {
    let mut q: Vec<f64> = crate::linalg::symmetric_eigenvalues(&fm.matrix)
        .into_iter()
        .map(|e| fold(e, fm.omega_m))
        .collect();
    q.sort_by(|a, b| a.total_cmp(b));
    q
}

/// Unfolded eigenvalues of the dressed doublet nearest the centre of the
/// ladder, ascending.
///
/// The first state is the eigenvector whose Fourier-order centroid lies
/// closest to zero. Its partner is the eigenvector with the largest overlap
/// of probability distributions. Both are the copies least affected by
/// truncation.
pub fn central_quasienergies(fm: &FloquetMatrix) -> (f64, f64) {
    let eig = fm.matrix.clone().symmetric_eigen();
    let size = fm.size();
    let prob = |k: usize| -> Vec<f64> { eig.eigenvectors.column(k).iter().map(|v| v * v).collect() };
    let centroid = |p: &[f64]| -> f64 { (0..size).map(|i| p[i] * fm.label(i).0 as f64).sum() };
    let first = (0..size)
        .min_by(|&a, &b| centroid(&prob(a)).abs().total_cmp(&centroid(&prob(b)).abs()))
        .expect("nonempty matrix");
    let p0 = prob(first);
    let partner = (0..size)
        .filter(|&k| k != first)
        .max_by(|&a, &b| {
            let oa: f64 = prob(a).iter().zip(&p0).map(|(x, y)| x * y).sum();
            let ob: f64 = prob(b).iter().zip(&p0).map(|(x, y)| x * y).sum();
            oa.total_cmp(&ob)
        })
        .expect("at least two states");
    let (a, b) = (eig.eigenvalues[first], eig.eigenvalues[partner]);
    (a.min(b), a.max(b))
}

/// Bessel weights and saturated heights of the sideband orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandWeights {
    pub orders: Vec<i32>,
    pub weights: Vec<f64>,
    pub saturated_heights: Vec<f64>,
}

impl SidebandWeights {
    pub fn height(&self, order: i32) -> Option<f64> {
        self.orders.iter().position(|&o| o == order).map(|i| self.saturated_heights[i])
    }
}

/// `J_n²(𝐀/ω_m)` and `s0·J_n²/(1 + s0·J_n²)` for `|n| ≤ max_order`.
pub fn sideband_heights(amp: f64, omega_m: f64, s0: f64, max_order: usize) -> Result<SidebandWeights> {
    if !(s0 >= 0.0) {
        return Err(Error::invalid("s0", "must be non-negative"));
    }
    if !(omega_m > 0.0) {
        return Err(Error::invalid("omega_m", "must be positive"));
    }
    let j = bessel_j_upto(max_order, (amp / omega_m).abs())?;
    let mut orders = Vec::with_capacity(2 * max_order + 1);
    let mut weights = Vec::with_capacity(2 * max_order + 1);
    let mut heights = Vec::with_capacity(2 * max_order + 1);
    let m = max_order as i32;
    for n in -m..=m {
        let w = j[n.unsigned_abs() as usize].powi(2);
        orders.push(n);
        weights.push(w);
        heights.push(s0 * w / (1.0 + s0 * w));
    }
    Ok(SidebandWeights { orders, weights, saturated_heights: heights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_ladders() {
        let fm = build_floquet(0.37, 0.0, 0.0, 1.0, 6).unwrap();
        let ev = crate::linalg::symmetric_eigenvalues(&fm.matrix);
        let mut want: Vec<f64> = (-6..=6)
            .map(|m| m as f64)
            .chain((-6..=6).map(|n| -0.37 + n as f64))
            .collect();
        want.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let q = quasienergies(&fm);
        assert!(q.iter().all(|&v| (v.abs() < 1e-12) || ((v + 0.37).abs() < 1e-12)));
    }

    #[test]
    fn dressed_doublet() {
        let fm = build_floquet(0.0, 0.2, 0.0, 1.0, 6).unwrap();
        let (a, b) = central_quasienergies(&fm);
        assert!((b - a - 0.2).abs() < 1e-12);
    }

    #[test]
    fn coherent_destruction_at_bessel_zero() {
        let omega = 0.05;
        let fm = build_floquet(0.0, omega, 2.404_825_557_695_773, 1.0, 8).unwrap();
        let (a, b) = central_quasienergies(&fm);
        assert!((b - a).abs() < 1e-3 * omega, "gap {}", b - a);
    }

    #[test]
    fn weak_drive_gap_is_bessel_weighted() {
        let (w, amp) = (1.0, 1.7);
        let omega = w / 60.0;
        for n in 1..=3 {
            let fm = build_floquet(n as f64 * w, omega, amp, w, 10).unwrap();
            let (a, b) = central_quasienergies(&fm);
            let gap = b - a;
            let want = omega * bessel_j(n, amp / w).unwrap().abs();
            assert!((gap - want).abs() < 0.01 * want, "n={n}: {gap} vs {want}");
        }
    }

    #[test]
    fn truncation_guard() {
        assert_eq!(
            build_floquet(0.0, 0.1, 13.0, 1.3844, 10).unwrap_err(),
            Error::TruncationTooSmall { trunc_n: 10, required: 15 }
        );
        assert!(build_floquet(0.0, 0.1, 13.0, 1.3844, 15).is_ok());
    }

    #[test]
    fn central_quasienergies_stable_under_truncation() {
        for &(amp, omega, delta) in &[(0.0, 0.2, 0.4), (2.5, 0.2, 0.4), (6.0, 0.3, 1.1), (13.0, 0.2, -2.0)] {
            let n = required_truncation(amp, 1.3844);
            let small = build_floquet(delta, omega, amp, 1.3844, n).unwrap();
            let big = build_floquet(delta, omega, amp, 1.3844, n + 5).unwrap();
            let (a0, a1) = central_quasienergies(&small);
            let (b0, b1) = central_quasienergies(&big);
            for (x, y) in [(a0, b0), (a1, b1)] {
                assert!((fold(x, 1.3844) - fold(y, 1.3844)).abs() < 1e-8, "amp {amp}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn fold_is_idempotent_and_periodic() {
        for &q in &[-3.1, -0.5, 0.0, 0.49, 0.5, 7.25] {
            let f = fold(q, 1.0);
            assert!((-0.5..0.5).contains(&f));
            assert_eq!(fold(f, 1.0), f);
            assert!((fold(q + 1.0, 1.0) - f).abs() < 1e-12);
        }
    }

    #[test]
    fn sideband_examples() {
        let w = sideband_heights(0.0, 1.3844, 22.0, 5).unwrap();
        for (o, h) in w.orders.iter().zip(&w.saturated_heights) {
            let want = if *o == 0 { 22.0 / 23.0 } else { 0.0 };
            assert!((h - want).abs() < 1e-15);
        }
        let w = sideband_heights(13.0, 1.3844, 22.0, 12).unwrap();
        for n in 0..=12 {
            assert_eq!(w.height(n), w.height(-n));
        }
        let max = w.saturated_heights.iter().cloned().fold(0.0, f64::max);
        assert!(w.height(9).unwrap() >= 0.1 * max);
        assert!(w.height(-9).unwrap() >= 0.1 * max);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn weights_complete(amp in 0.0f64..30.0, w in 0.5f64..3.0) {
                let n = (amp / w).ceil() as usize + 20;
                let s = sideband_heights(amp, w, 1.0, n).unwrap();
                let total: f64 = s.weights.iter().sum();
                prop_assert!(total >= 1.0 - 1e-10);
                prop_assert!(total <= 1.0 + 1e-10);
                prop_assert!(s.saturated_heights.iter().all(|h| (0.0..1.0).contains(h)));
            }

            #[test]
            fn floquet_symmetric(d in -5.0f64..5.0, om in 0.0f64..1.0, amp in -8.0f64..8.0, w in 0.5f64..2.0) {
                let n = required_truncation(amp, w);
                let fm = build_floquet(d, om, amp, w, n).unwrap();
                prop_assert_eq!(&fm.matrix, &fm.matrix.transpose());
            }
        }
    }
}
