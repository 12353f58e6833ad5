//! Log-log least-squares fit of the deviation series.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::DeviationSample;

pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub window: (f64, f64),
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub predicted_slope: Option<f64>,
}

impl RateFit {
    pub fn slope_error(&self) -> Option<f64> {
        self.predicted_slope.map(|p| (self.slope - p).abs())
    }
}

/// Ordinary least squares of `ln(deviation)` against `ln(t)` over the
/// samples with `t` in `window`.
pub fn fit_power_law(samples: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let (lo, hi) = window;
    if !(lo >= 1.0 && hi > lo) {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] must satisfy 1 <= lo < hi"
        )));
    }
    let tol = 1e-9 * hi;
    let picked: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo - tol && t <= hi + tol)
        .collect();
    if picked.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} samples in [{lo}, {hi}], need at least {MIN_FIT_POINTS}",
            picked.len()
        )));
    }
    if let Some(&(t, d)) = picked.iter().find(|&&(_, d)| !(d > 0.0)) {
        return Err(Error::Fit(format!("nonpositive deviation {d} at t = {t}")));
    }
    let n = picked.len() as f64;
    let xs: Vec<f64> = picked.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = picked.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(RateFit {
        window,
        points: picked.len(),
        slope,
        intercept,
        r_squared,
        predicted_slope: None,
    })
}

/// Fit the `sup_x (u - u_h)` series of a run and attach the predicted slope.
pub fn fit_rate(series: &[DeviationSample], window: (f64, f64), predicted: f64) -> Result<RateFit> {
    let samples: Vec<(f64, f64)> = series.iter().map(|s| (s.t, s.sup_deviation)).collect();
    let mut fit = fit_power_law(&samples, window)?;
    fit.predicted_slope = Some(predicted);
    Ok(fit)
}
