//! Small numeric helpers on top of `libm`.

use crate::{Error, Result};

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// `ln Σ exp(v)`; `-inf` for an empty input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for v in values {
        if v == f64::NEG_INFINITY {
            continue;
        }
        if v > max {
            acc = acc * exp(max - v) + 1.0;
            max = v;
        } else {
            acc += exp(v - max);
        }
    }
    if max == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        max + ln(acc)
    }
}

/// Ordinary least squares fit `y ≈ slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(Error::DegenerateFit { points: n, needed: 2 });
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit { points: 1, needed: 2 });
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Wald-free Wilson score interval half-width for `successes` out of `trials` at z = 1.96.
pub fn wilson_half_width(successes: usize, trials: usize) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let z = 1.96_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    z * sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let v = [0.1, -2.0, 3.5];
        let direct = ln(v.iter().map(|x| exp(*x)).sum::<f64>());
        assert!((log_sum_exp(v) - direct).abs() < 1e-12);
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
        // no overflow for huge exponents
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + ln(2.0))).abs() < 1e-9);
    }

    #[test]
    fn least_squares_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: alloc::vec::Vec<f64> = xs.iter().map(|x| 0.5 * x - 1.0).collect();
        let (s, b) = least_squares(&xs, &ys).unwrap();
        assert!((s - 0.5).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
        assert!(least_squares(&xs[..1], &ys[..1]).is_err());
    }
}
