//! Log-log least squares for power laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_POINTS: usize = 5;

/// `norm ~ constant * (1 + |x|)^exponent` over `[window_lo, window_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub constant: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope * x`, returning
/// `(slope, intercept, r_squared)`.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 {
        1.0 - ss_res / syy
    } else if ss_res <= f64::EPSILON {
        1.0
    } else {
        0.0
    };
    (slope, intercept, r2.clamp(0.0, 1.0))
}

/// Fits `log(norm)` against `log(1 + |x|)` over the samples whose coordinate
/// lies in `window` (inclusive).
pub fn fit_power_law(samples: &[(f64, f64)], window: (f64, f64)) -> Result<ExponentFit> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Err(Error::InvalidInput(format!(
            "empty fit window [{lo}, {hi}]"
        )));
    }
    let inside: Vec<(f64, f64)> = samples
        .iter()
        .cloned()
        .filter(|&(x, y)| x >= lo && x <= hi && y > 0.0 && y.is_finite())
        .collect();
    if inside.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            need: MIN_FIT_POINTS,
            got: inside.len(),
        });
    }
    let xs: Vec<f64> = inside.iter().map(|&(x, _)| (1.0 + x.abs()).ln()).collect();
    let ys: Vec<f64> = inside.iter().map(|&(_, y)| y.ln()).collect();
    let (slope, intercept, r2) = linear_regression(&xs, &ys);
    Ok(ExponentFit {
        exponent: slope,
        constant: intercept.exp(),
        window_lo: lo,
        window_hi: hi,
        r_squared: r2,
    })
}
