use crate::{Error, Result};

const RESCALE_AT: f64 = 1e250;
const SERIES_BELOW: f64 = 1e-2;

/// Bessel function of the first kind `J_n(x)` for integer `n`.
///
/// Uses Miller's downward recurrence normalized by `J_0 + 2ΣJ_2k = 1`.
/// Negative orders and arguments follow from `J_{-n} = (-1)^n J_n` and
/// `J_n(-x) = (-1)^n J_n(x)`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    let na = n.unsigned_abs() as usize;
    let ax = x.abs();
    let v = *bessel_j_upto(na, ax)?.last().expect("nonempty");
    let odd = na % 2 == 1;
    let flip = odd && ((n < 0) != (x < 0.0));
    Ok(if flip { -v } else { v })
}

/// `[J_0(x), …, J_nmax(x)]`.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() || x.abs() >= 700.0 {
        return Err(Error::OutOfRange { x });
    }
    if x < 0.0 {
        let mut v = bessel_j_upto(nmax, -x)?;
        for (k, val) in v.iter_mut().enumerate() {
            if k % 2 == 1 {
                *val = -*val;
            }
        }
        return Ok(v);
    }
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    if x < SERIES_BELOW {
        return Ok((0..=nmax).map(|n| small_series(n, x)).collect());
    }

    let top = (nmax as f64).max(x);
    let mut start = (top + 16.0 + (60.0 * top).sqrt()).ceil() as usize;
    start += start % 2;

    let mut out = vec![0.0; nmax + 1];
    let mut above = 0.0;
    let mut here = 1e-30;
    let mut norm = 0.0;
    for k in (0..=start).rev() {
        if k <= nmax {
            out[k] = here;
        }
        if k == 0 {
            norm += here;
        } else if k % 2 == 0 {
            norm += 2.0 * here;
        }
        if k == 0 {
            break;
        }
        let below = 2.0 * k as f64 / x * here - above;
        above = here;
        here = below;
        if here.abs() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            here *= s;
            above *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    Ok(out)
}

fn small_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    for k in 1..8 {
        term *= -half * half / (k as f64 * (n + k) as f64);
        sum += term;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert!((bessel_j(1, 1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(0, 2.404_825_557_695_773).unwrap()).abs() < 1e-14);
        assert!((bessel_j(0, 1.0).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-15);
    }

    #[test]
    fn sum_rule() {
        let s: f64 = (-30..=30).map(|n| bessel_j(n, 5.0).unwrap().powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parity() {
        for n in 0..6 {
            let a = bessel_j(n, 2.7).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(bessel_j(-n, 2.7).unwrap(), sign * a);
            assert_eq!(bessel_j(n, -2.7).unwrap(), sign * a);
            assert_eq!(bessel_j(-n, -2.7).unwrap(), a);
        }
    }

    #[test]
    fn small_arguments_agree_across_branch() {
        for n in 0..5 {
            let below = bessel_j(n, SERIES_BELOW * 0.999_999).unwrap();
            let above = bessel_j(n, SERIES_BELOW * 1.000_001).unwrap();
            assert!((below - above).abs() < 1e-8);
        }
        assert!((bessel_j(2, 1e-200).unwrap()).abs() < 1e-300);
    }

    #[test]
    fn range_guard() {
        assert_eq!(bessel_j(0, 700.0), Err(Error::OutOfRange { x: 700.0 }));
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_j(5, 699.0).unwrap().abs() < 0.1);
    }
}
