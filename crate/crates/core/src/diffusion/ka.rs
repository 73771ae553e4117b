//! Fast Lorentzian engine: a Cauchy Ornstein-Uhlenbeck process for the total shift `z = x + y`.
//!
//! Over a step `h` the shift relaxes as `z ← λz + μ_av(1 − λ)·C` with `λ = e^{−κh/2}` and `C` a
//! standard Cauchy variate. The stationary law is Lorentzian of half-width `μ_av`, and for
//! `κt ≪ 1` the marginal of `y(t)` is Lorentzian of width `μ_av κ t`, as for the telegraph bath.

use std::f64::consts::PI;

use rand::Rng;

use super::{check_grid, sample_static_shift, ShiftPath, ShiftTrajectory, ThermalBathParams};
use crate::error::{Error, Result};

/// Largest step allowed for a given bath: `0.1/(m ρ)`.
pub fn max_ka_step(bath: &ThermalBathParams) -> f64 {
    0.1 / (bath.m_rate() * bath.rho())
}

fn check_step(dt: f64, bath: &ThermalBathParams) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::precondition(format!("ka step must be positive, got {dt}")));
    }
    let limit = max_ka_step(bath);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::precondition(format!(
            "ka step {dt:.3e} s exceeds the Lorentzian-increment limit 0.1/(m rho) = {limit:.3e} s"
        )));
    }
    Ok(())
}

fn standard_cauchy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (PI * (rng.random::<f64>() - 0.5)).tan()
}

/// Advances the dynamic shift `y` of a TLS with static shift `x` by `dt`.
pub fn ka_step<R: Rng + ?Sized>(x: f64, y: f64, dt: f64, bath: &ThermalBathParams, rng: &mut R) -> Result<f64> {
    check_step(dt, bath)?;
    Ok(advance(x + y, dt, bath, rng) - x)
}

fn advance<R: Rng + ?Sized>(z: f64, dt: f64, bath: &ThermalBathParams, rng: &mut R) -> f64 {
    let keep = (-0.5 * bath.kappa * dt).exp();
    keep * z + bath.mu_av * (1.0 - keep) * standard_cauchy(rng)
}

/// Path over `[0, horizon]` in steps of `dt`; each step's jump is placed at its midpoint.
pub fn ka_path<R: Rng + ?Sized>(bath: &ThermalBathParams, horizon: f64, dt: f64, rng: &mut R) -> Result<ShiftPath> {
    bath.validate()?;
    if bath.is_static() {
        return Ok(ShiftPath::frozen(0.0));
    }
    let x = sample_static_shift(bath, rng);
    if bath.kappa == 0.0 {
        return Ok(ShiftPath::frozen(x));
    }
    check_step(dt, bath)?;
    let steps = (horizon / dt).ceil() as usize;
    let mut path = ShiftPath::frozen(x);
    path.jump_times.reserve(steps);
    path.y_after.reserve(steps);
    let mut z = x;
    let mut t = 0.0;
    while t < horizon {
        let h = dt.min(horizon - t);
        z = advance(z, h, bath, rng);
        path.jump_times.push(t + 0.5 * h);
        path.y_after.push(z - x);
        t += h;
    }
    Ok(path)
}

/// Path sampled on `times`.
pub fn ka_realization<R: Rng + ?Sized>(
    bath: &ThermalBathParams,
    times: &[f64],
    dt: f64,
    rng: &mut R,
) -> Result<ShiftTrajectory> {
    check_grid(times)?;
    let horizon = *times.last().expect("grid is non-empty");
    Ok(ka_path(bath, horizon, dt, rng)?.sample(times))
}
