//! Microscopic bath of dipolar telegraph fluctuators.
//!
//! Fluctuator `i` sits at radius `r_i` with coupling `±v/r_i³`. With `v = μ_max r_min³` the
//! inverse coupling `w = r³/v` is uniform on `[ρ, ρ + L]`, and a large bath of such
//! fluctuators sums to a Lorentzian of half-width `Nπ/(2L)`. Choosing `L = Nπ/(2μ_av)` gives
//! span `μ_av`; the nearest allowed fluctuator gives `μ_max`.
//!
//! Each fluctuator leaves its current state at rate `κ/2`, so sign correlations decay as
//! `e^{−κt}` and the short-time width of `y` is `μ_av κ t`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::{check_grid, max_step, ShiftPath, ShiftTrajectory, ThermalBathParams, MIN_FLUCTUATORS};
use crate::error::{Error, Result};

/// Largest tolerated mean number of flips per observation step.
pub const MAX_FLIPS_PER_STEP: f64 = 1e3;

/// Fluctuator couplings `u_i = v/r_i³` for one bath configuration.
pub fn sample_couplings<R: Rng + ?Sized>(bath: &ThermalBathParams, rng: &mut R) -> Vec<f64> {
    let n = bath.n_fluctuators;
    let len = n as f64 * PI / (2.0 * bath.mu_av);
    let rho = bath.rho();
    (0..n).map(|_| 1.0 / (rho + len * rng.random::<f64>())).collect()
}

/// Event-driven telegraph path over `[0, horizon]` with freshly sampled couplings.
pub fn telegraph_path<R: Rng + ?Sized>(
    bath: &ThermalBathParams,
    horizon: f64,
    max_step: f64,
    rng: &mut R,
) -> Result<ShiftPath> {
    check_bath(bath, max_step)?;
    if bath.is_static() {
        return Ok(ShiftPath::frozen(0.0));
    }
    let u = sample_couplings(bath, rng);
    telegraph_path_with(&u, bath, horizon, max_step, rng)
}

fn check_bath(bath: &ThermalBathParams, max_step: f64) -> Result<()> {
    bath.validate()?;
    if bath.is_static() {
        return Ok(());
    }
    if bath.n_fluctuators < MIN_FLUCTUATORS {
        return Err(Error::config(format!(
            "telegraph bath needs at least {MIN_FLUCTUATORS} fluctuators, got {}",
            bath.n_fluctuators
        )));
    }
    let total_rate = bath.n_fluctuators as f64 * bath.kappa / 2.0;
    if total_rate * max_step > MAX_FLIPS_PER_STEP {
        return Err(Error::numeric(format!(
            "{:.3e} expected flips per grid step exceeds the limit of {MAX_FLIPS_PER_STEP}",
            total_rate * max_step
        )));
    }
    Ok(())
}

/// Telegraph path for given couplings `u` (one per fluctuator): fresh signs, then flips.
pub fn telegraph_path_with<R: Rng + ?Sized>(
    u: &[f64],
    bath: &ThermalBathParams,
    horizon: f64,
    max_step: f64,
    rng: &mut R,
) -> Result<ShiftPath> {
    check_bath(bath, max_step)?;
    if bath.is_static() || u.is_empty() {
        return Ok(ShiftPath::frozen(0.0));
    }
    let mut sign: Vec<f64> = (0..u.len())
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let x: f64 = sign.iter().zip(u).map(|(s, u)| s * u).sum();

    let mut path = ShiftPath::frozen(x);
    let total_rate = u.len() as f64 * bath.kappa / 2.0;
    if total_rate == 0.0 {
        return Ok(path);
    }
    let expected = (total_rate * horizon).ceil() as usize;
    path.jump_times.reserve(expected + expected / 8 + 8);
    path.y_after.reserve(expected + expected / 8 + 8);
    let wait = Exp::new(total_rate).map_err(|e| Error::numeric(format!("flip rate {total_rate}: {e}")))?;
    let mut t = 0.0;
    let mut y = 0.0;
    loop {
        t += wait.sample(rng);
        if t > horizon {
            break;
        }
        let i = rng.random_range(0..u.len());
        y -= 2.0 * sign[i] * u[i];
        sign[i] = -sign[i];
        path.jump_times.push(t);
        path.y_after.push(y);
    }
    Ok(path)
}

/// Telegraph realization sampled on `times`.
pub fn telegraph_realization<R: Rng + ?Sized>(
    bath: &ThermalBathParams,
    times: &[f64],
    rng: &mut R,
) -> Result<ShiftTrajectory> {
    check_grid(times)?;
    let horizon = *times.last().expect("grid is non-empty");
    Ok(telegraph_path(bath, horizon, max_step(times), rng)?.sample(times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::density::truncated_lorentzian_cdf;
    use crate::rng::stream;
    use crate::stats::{ks_one_sample, ks_two_sample};
    use proptest::prelude::*;

    fn bath(n: usize) -> ThermalBathParams {
        ThermalBathParams {
            kappa: 1.0,
            mu_av: 1.0,
            mu_max: 10.0,
            n_fluctuators: n,
        }
    }

    fn y_samples(b: &ThermalBathParams, t: f64, n: u64, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(n as usize);
        let mut ys = Vec::with_capacity(n as usize);
        for r in 0..n {
            let mut rng = stream(seed, r, 0);
            let p = telegraph_path(b, t, t.min(1.0), &mut rng).unwrap();
            xs.push(p.x);
            ys.push(p.y_at(t));
        }
        (xs, ys)
    }

    #[test]
    fn frozen_and_silent_baths() {
        let mut b = bath(64);
        b.kappa = 0.0;
        let traj = telegraph_realization(&b, &[0.0, 1.0, 2.0], &mut stream(1, 0, 0)).unwrap();
        assert_eq!(traj.y, vec![0.0; 3]);
        assert!(traj.x != 0.0);
        let mut b = bath(64);
        b.mu_av = 0.0;
        let traj = telegraph_realization(&b, &[0.0, 1.0], &mut stream(1, 0, 0)).unwrap();
        assert_eq!((traj.x, traj.y.clone()), (0.0, vec![0.0; 2]));
    }

    #[test]
    fn rejects_pathological_configs() {
        let b = bath(4);
        assert!(matches!(telegraph_path(&b, 1.0, 1.0, &mut stream(1, 0, 0)), Err(Error::Config(_))));
        let b = bath(1024);
        let err = telegraph_path(&b, 10.0, 10.0, &mut stream(1, 0, 0)).unwrap_err();
        assert!(err.is_numeric());
        assert!(telegraph_realization(&bath(64), &[0.0, 2.0, 1.0], &mut stream(1, 0, 0)).is_err());
    }

    #[test]
    fn couplings_bounded_by_mu_max() {
        let b = bath(512);
        let u = sample_couplings(&b, &mut stream(2, 0, 0));
        assert!(u.iter().all(|&u| u > 0.0 && u <= b.mu_max));
    }

    #[test]
    fn short_time_marginal_is_lorentzian() {
        let b = bath(1024);
        let t = 0.05;
        let (_, mut ys) = y_samples(&b, t, 20_000, 3);
        let w = b.m_rate() * t;
        let ks = ks_one_sample(&mut ys, |y| 0.5 + (y / w).atan() / PI);
        assert!(ks.statistic < 0.02, "{ks:?}");
    }

    #[test]
    fn long_time_marginal_is_stationary() {
        let b = bath(256);
        let t = 10.0;
        let (mut xs, ys) = y_samples(&b, t, 20_000, 4);
        let mut zs: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x + y).collect();
        let ks = ks_one_sample(&mut zs, |z| truncated_lorentzian_cdf(z, b.mu_av, b.mu_max));
        assert!(ks.statistic < 0.02, "{ks:?}");
        let ks = ks_one_sample(&mut xs, |z| truncated_lorentzian_cdf(z, b.mu_av, b.mu_max));
        assert!(ks.statistic < 0.02, "{ks:?}");
    }

    #[test]
    fn stationary_marginal_is_time_independent() {
        let b = bath(256);
        let (xa, ya) = y_samples(&b, 10.0, 10_000, 5);
        let (xb, yb) = y_samples(&b, 20.0, 10_000, 6);
        let mut za: Vec<f64> = xa.iter().zip(&ya).map(|(x, y)| x + y).collect();
        let mut zb: Vec<f64> = xb.iter().zip(&yb).map(|(x, y)| x + y).collect();
        let ks = ks_two_sample(&mut za, &mut zb);
        assert!(ks.p_value > 0.01, "{ks:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn path_starts_at_zero(seed in any::<u64>(), kappa in 0.0f64..5.0, horizon in 0.01f64..3.0) {
            let b = ThermalBathParams { kappa, ..bath(32) };
            let times: Vec<f64> = (0..20).map(|k| horizon * k as f64 / 19.0).collect();
            let traj = telegraph_realization(&b, &times, &mut stream(seed, 0, 0)).unwrap();
            prop_assert_eq!(traj.y[0], 0.0);
            prop_assert!(traj.x.abs() <= 32.0 * b.mu_max);
        }

        #[test]
        fn jumps_are_ordered_and_bounded(seed in any::<u64>()) {
            let b = bath(32);
            let p = telegraph_path(&b, 5.0, 5.0, &mut stream(seed, 1, 2)).unwrap();
            prop_assert!(p.jump_times.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(p.jump_times.iter().all(|&t| t > 0.0 && t <= 5.0));
            // |y| can never exceed twice the total coupling.
            let cap = 2.0 * 32.0 * b.mu_max;
            prop_assert!(p.y_after.iter().all(|y| y.abs() <= cap));
        }
    }
}
