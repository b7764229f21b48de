//! Least-squares fits used for exponents and decay rates.

use libm::{log, sqrt};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: f64,
    pub points: usize,
}

/// Ordinary least squares `y = intercept + slope·x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::GridTooSmall {
            required: 2,
            got: n.min(ys.len()),
        });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::Solver("degenerate abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let slope_stderr = if n > 2 {
        sqrt(sse / (nf - 2.0) / sxx)
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
        points: n,
    })
}

/// Fit of `log|C(k)| = a + p·log k - k/ξ`.
///
/// The power prefactor absorbs the algebraic correction in front of the
/// exponential decay, which otherwise biases a plain linear slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `1/ξ`.
    pub rate: f64,
    pub power: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn decay_fit(ks: &[f64], log_values: &[f64]) -> Result<DecayFit> {
    let n = ks.len();
    if n != log_values.len() || n < 4 {
        return Err(Error::GridTooSmall {
            required: 4,
            got: n.min(log_values.len()),
        });
    }
    let nf = n as f64;
    // centered regressors u = log k, v = k
    let mu = ks.iter().map(|&k| log(k)).sum::<f64>() / nf;
    let mv = ks.iter().sum::<f64>() / nf;
    let my = log_values.iter().sum::<f64>() / nf;
    let (mut suu, mut suv, mut svv, mut suy, mut svy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (&k, &y) in ks.iter().zip(log_values) {
        let (du, dv, dy) = (log(k) - mu, k - mv, y - my);
        suu += du * du;
        suv += du * dv;
        svv += dv * dv;
        suy += du * dy;
        svy += dv * dy;
        syy += dy * dy;
    }
    let det = suu * svv - suv * suv;
    if !(det > 1e-12 * suu * svv) {
        return Err(Error::Solver("collinear decay regressors"));
    }
    let p = (svv * suy - suv * svy) / det;
    let q = (suu * svy - suv * suy) / det;
    let intercept = my - p * mu - q * mv;
    let sse = (syy - p * suy - q * svy).max(0.0);
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(DecayFit {
        rate: -q,
        power: p,
        intercept,
        r_squared,
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_line_is_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-14);
        assert!((f.intercept - 3.0).abs() < 1e-13);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn decay_model_is_recovered() {
        let ks: Vec<f64> = (50..=400).step_by(10).map(|k| k as f64).collect();
        let ys: Vec<f64> = ks.iter().map(|&k| 0.7 - 1.5 * log(k) - k / 30.0).collect();
        let f = decay_fit(&ks, &ys).unwrap();
        assert!((f.rate - 1.0 / 30.0).abs() < 1e-12);
        assert!((f.power + 1.5).abs() < 1e-10);
        assert!((f.intercept - 0.7).abs() < 1e-9);
    }
}
