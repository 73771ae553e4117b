//! Time-dependent diffusion width `W(t)` of a broad thermal-TLS ensemble.
//!
//! `W(t) = c μ_av ∫_0^∞ dy/cosh²y ∫_0^1 (1 − e^{−x² t/T1(y)})/x dx` with
//! `T1(y) = T1_min/(y³ coth y)`, where `y = E/2T` and `x = Δ0/E`. The constant `c` is fixed so
//! that `W(t) = (μ_av/T1_min) t` for `t ≪ T1_min`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthParams {
    pub t1_min: f64,
    pub mu_av: f64,
}

/// `∫_0^∞ y³ coth y / cosh² y dy = π⁴/64`.
pub const SLOPE_MOMENT: f64 = std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    * std::f64::consts::PI
    / 64.0;

const Y_CUTOFF: f64 = 40.0;

fn rate_factor(y: f64) -> f64 {
    // y³ coth y, with the y → 0 limit y².
    if y < 1e-4 {
        y * y * (1.0 + y * y / 3.0)
    } else {
        y * y * y / y.tanh()
    }
}

/// `∫_0^1 (1 − e^{−a x²})/x dx`, through `x = e^{−v}`.
fn inner(a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    if a < 1e-6 {
        return Ok(0.5 * a - a * a / 8.0);
    }
    let f = |v: f64| -(-a * (-2.0 * v).exp()).exp_m1();
    let knee = 0.5 * a.ln().max(0.0);
    let cfg = QuadConfig::rel(1e-10);
    let head = integrate(f, 0.0, knee, cfg)?.value;
    let tail = integrate(f, knee, knee + 25.0, cfg)?.value;
    Ok(head + tail)
}

pub fn width_function(t: f64, wp: &WidthParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::precondition(format!("width needs t >= 0, got {t}")));
    }
    if !(wp.t1_min > 0.0) {
        return Err(Error::precondition("t1_min must be positive"));
    }
    if t == 0.0 || wp.mu_av == 0.0 {
        return Ok(0.0);
    }
    let s = t / wp.t1_min;
    let failure = std::cell::Cell::new(None);
    let integrand = |y: f64| {
        let sech = 1.0 / y.cosh();
        match inner(s * rate_factor(y)) {
            Ok(v) => sech * sech * v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let outer = integrate(integrand, 0.0, Y_CUTOFF, QuadConfig::rel(1e-6));
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(2.0 / SLOPE_MOMENT * wp.mu_av * outer?.value)
}
