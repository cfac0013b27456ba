use std::f64::consts::TAU;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::{Error, Result};

/// Frequency (1/unit of `dt`) of the strongest oscillation in `signal`.
///
/// The mean is removed and a Hann window applied. The FFT bin with the
/// largest magnitude is refined by maximizing the windowed DTFT with a
/// golden-section search between the neighbouring bins.
pub fn dominant_frequency(signal: &[f64], dt: f64) -> Result<f64> {
    let n = signal.len();
    if n < 8 {
        return Err(Error::EmptySpectrum(n));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "sample spacing must be positive"));
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let window: Vec<f64> = (0..n).map(|k| 0.5 - 0.5 * (TAU * k as f64 / (n - 1) as f64).cos()).collect();
    let x: Vec<f64> = signal.iter().zip(&window).map(|(s, w)| (s - mean) * w).collect();

    let padded = (4 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(padded, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let (k, _) = buf[1..padded / 2]
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.norm_sqr()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty half spectrum");

    let bin = 1.0 / (padded as f64 * dt);
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            let ph = TAU * f * j as f64 * dt;
            re += v * ph.cos();
            im -= v * ph.sin();
        }
        re * re + im * im
    };
    let lo = (k as f64 - 1.0) * bin;
    let hi = (k as f64 + 1.0) * bin;
    Ok(golden_max(power, lo, hi, bin * 1e-9).0)
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
