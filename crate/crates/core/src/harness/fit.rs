use serde::{Deserialize, Serialize};

use super::DephasingCurve;
use crate::error::{Error, Result};
use crate::stats::linear_fit;

/// Minimum number of grid points inside a fit window.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub stderr: f64,
    /// Intercept of `ln(−2 ln D)` against `ln t`.
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares slope of `ln(−2 ln D)` against `ln t` over grid points in `[t_lo, t_hi]`.
pub fn fit_powerlaw(curve: &DephasingCurve, window: (f64, f64)) -> Result<PowerLawFit> {
    let (lo, hi) = window;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (t, d) in curve.times.iter().zip(&curve.d) {
        if *t < lo || *t > hi {
            continue;
        }
        if !(*t > 0.0 && *d > 0.0 && *d < 1.0) {
            return Err(Error::precondition(format!(
                "D must lie strictly inside (0, 1) in the fit window; D({t:e}) = {d}"
            )));
        }
        x.push(t.ln());
        y.push((-2.0 * d.ln()).ln());
    }
    if x.len() < MIN_FIT_POINTS {
        return Err(Error::precondition(format!(
            "fit window [{lo:e}, {hi:e}] holds {} grid points, need {MIN_FIT_POINTS}",
            x.len()
        )));
    }
    let fit = linear_fit(&x, &y).ok_or_else(|| Error::precondition("degenerate fit window"))?;
    Ok(PowerLawFit {
        exponent: fit.slope,
        stderr: fit.slope_stderr,
        intercept: fit.intercept,
        points: x.len(),
    })
}
