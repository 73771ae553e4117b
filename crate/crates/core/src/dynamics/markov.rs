//! Time-local (Markov) solution `a(t) = exp(−Σ_n ∫_0^t C_n)`.
//!
//! `C_n` depends on time only through `ε_n(t)`, and diffusion paths are piecewise constant, so
//! the integral is accumulated exactly piece by piece.

use num_complex::Complex64;

use super::{rate_at_detuning, AmplitudeRecord, SolverConfig};
use crate::bessel::Sideband;
use crate::diffusion::{check_grid, max_step, EngineConfig, ShiftPath, ThermalBathParams};
use crate::ensemble::{QubitParams, TlsParams};
use crate::error::{Error, Result};
use crate::rng::{stream, MAX_TLS_SLOT};

/// Weak coupling `g ≤ γ` for every TLS, and `Ω > γ, g` when the qubit is modulated.
pub fn check_markov_preconditions(ensemble: &[TlsParams], qubit: &QubitParams) -> Result<()> {
    for (i, t) in ensemble.iter().enumerate() {
        if !(t.gamma > 0.0) {
            return Err(Error::precondition(format!("TLS {i}: linewidth must be positive")));
        }
        if t.g > t.gamma {
            return Err(Error::precondition(format!(
                "TLS {i}: coupling g = {:.4e} exceeds linewidth gamma = {:.4e}",
                t.g, t.gamma
            )));
        }
        if qubit.is_modulated() && !(qubit.omega_mod > t.gamma && qubit.omega_mod > t.g) {
            return Err(Error::precondition(format!(
                "TLS {i}: modulation frequency {:.4e} must exceed gamma and g",
                qubit.omega_mod
            )));
        }
    }
    if ensemble.len() > MAX_TLS_SLOT as usize {
        return Err(Error::precondition(format!("ensemble of {} TLSs is too large", ensemble.len())));
    }
    Ok(())
}

/// Subtracts `∫_0^{t_k} C` of one TLS from `phi[k]` for every grid time.
pub fn accumulate_tls(
    phi: &mut [Complex64],
    tls: &TlsParams,
    path: &ShiftPath,
    qubit: &QubitParams,
    weights: &[Sideband],
    times: &[f64],
) {
    let horizon = *times.last().expect("grid is non-empty");
    let base = qubit.e0 - tls.eps0 - path.x;
    let rate = |y: f64| rate_at_detuning(tls.g, tls.gamma, base - y, qubit.omega_mod, weights);
    let mut k = 0;
    let mut acc = Complex64::new(0.0, 0.0);
    for (start, end, y) in path.pieces(horizon) {
        let c = rate(y);
        while k < times.len() && times[k] <= end {
            phi[k] -= acc + c * (times[k] - start);
            k += 1;
        }
        acc += c * (end - start);
    }
    for p in &mut phi[k..] {
        *p -= acc;
    }
}

/// `ln a(t_k) = −Σ_n ∫_0^{t_k} C_n` for fixed paths.
pub fn log_amplitude(
    ensemble: &[TlsParams],
    paths: &[ShiftPath],
    qubit: &QubitParams,
    weights: &[Sideband],
    times: &[f64],
) -> Result<Vec<Complex64>> {
    check_grid(times)?;
    if paths.len() != ensemble.len() {
        return Err(Error::precondition(format!(
            "{} paths for {} TLSs",
            paths.len(),
            ensemble.len()
        )));
    }
    let mut phi = vec![Complex64::new(0.0, 0.0); times.len()];
    for (tls, path) in ensemble.iter().zip(paths) {
        accumulate_tls(&mut phi, tls, path, qubit, weights, times);
    }
    Ok(phi)
}

/// Draws one diffusion realization per TLS and returns `ln a(t)` on `times`.
///
/// TLS `n` of run `run` draws from stream `(seed, run, n)`. With `geometry`, telegraph baths
/// keep the given couplings and only their signs and flips are drawn.
#[allow(clippy::too_many_arguments)]
pub(crate) fn markov_run(
    ensemble: &[TlsParams],
    qubit: &QubitParams,
    engine: &EngineConfig,
    kappa: f64,
    times: &[f64],
    weights: &[Sideband],
    seed: u64,
    run: u64,
    geometry: Option<&[Vec<f64>]>,
) -> Result<Vec<Complex64>> {
    let horizon = *times.last().expect("grid is non-empty");
    let widest = max_step(times);
    let mut phi = vec![Complex64::new(0.0, 0.0); times.len()];
    for (n, tls) in ensemble.iter().enumerate() {
        let bath = ThermalBathParams::for_tls(tls, kappa, engine.n_fluctuators);
        let mut rng = stream(seed, run, n as u32);
        let path = match geometry {
            Some(g) => engine.realize_with(&g[n], &bath, horizon, widest, &mut rng)?,
            None => engine.realize(&bath, horizon, widest, &mut rng)?,
        };
        accumulate_tls(&mut phi, tls, &path, qubit, weights, times);
    }
    Ok(phi)
}

/// One Markov realization of `a(t)`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_markov(
    ensemble: &[TlsParams],
    qubit: &QubitParams,
    engine: &EngineConfig,
    kappa: f64,
    times: &[f64],
    solver: &SolverConfig,
    seed: u64,
    run: u64,
) -> Result<AmplitudeRecord> {
    check_grid(times)?;
    solver.validate()?;
    check_markov_preconditions(ensemble, qubit)?;
    let weights = solver.sidebands(qubit);
    let phi = markov_run(ensemble, qubit, engine, kappa, times, &weights, seed, run, None)?;
    Ok(AmplitudeRecord {
        times: times.to_vec(),
        a: phi.into_iter().map(Complex64::exp).collect(),
        seed,
        run,
        engine: Some(engine.kind),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_weights;
    use crate::diffusion::EngineKind;
    use crate::dynamics::SolverMode;
    use proptest::prelude::*;

    fn solver(m_max: usize) -> SolverConfig {
        SolverConfig {
            dt: 1e-3,
            m_max,
            mode: SolverMode::Markov,
            bessel_tol: 1e-12,
        }
    }

    fn grid(stop: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| stop * k as f64 / (n - 1) as f64).collect()
    }

    fn tls(g: f64, gamma: f64, eps0: f64, mu: f64) -> TlsParams {
        TlsParams {
            eps0,
            g,
            gamma,
            mu_av: mu,
            mu_max: 10.0 * mu,
        }
    }

    #[test]
    fn empty_ensemble_is_identity() {
        let rec = evolve_markov(
            &[],
            &QubitParams::unmodulated(1.0),
            &EngineConfig::telegraph(64),
            1.0,
            &grid(1.0, 5),
            &solver(0),
            1,
            0,
        )
        .unwrap();
        assert!(rec.a.iter().all(|a| *a == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn static_resonant_decay() {
        let (g, gamma) = (0.1, 1.0);
        let q = QubitParams::unmodulated(50.0);
        let times = grid(400.0, 41);
        let rec = evolve_markov(
            &[tls(g, gamma, 50.0, 0.0)],
            &q,
            &EngineConfig::telegraph(64),
            1.0,
            &times,
            &solver(0),
            1,
            0,
        )
        .unwrap();
        for (t, a) in times.iter().zip(&rec.a) {
            let want = (-g * g * t / (4.0 * gamma)).exp();
            assert!((a.norm() / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn piecewise_integral_is_exact() {
        let q = QubitParams::unmodulated(10.0);
        let w = bessel_weights(0.0, 1e-12);
        let t = tls(0.5, 1.0, 10.0, 1.0);
        let path = ShiftPath {
            x: 0.3,
            jump_times: vec![0.25, 0.7],
            y_after: vec![1.0, -2.0],
        };
        let times = [0.0, 0.5, 1.0];
        let phi = log_amplitude(&[t], &[path], &q, &w, &times).unwrap();
        let c = |eps: f64| super::super::coefficient_c(&t, &q, eps, &w);
        let want_half = c(10.3) * 0.25 + c(11.3) * 0.25;
        let want_one = want_half + c(11.3) * 0.2 + c(8.3) * 0.3;
        assert_eq!(phi[0], Complex64::new(0.0, 0.0));
        assert!((phi[1] + want_half).norm() < 1e-15);
        assert!((phi[2] + want_one).norm() < 1e-15);
    }

    #[test]
    fn preconditions_name_the_tls() {
        let q = QubitParams::unmodulated(1.0);
        let err = check_markov_preconditions(&[tls(0.1, 1.0, 1.0, 0.0), tls(2.0, 1.0, 1.0, 0.0)], &q).unwrap_err();
        assert!(err.to_string().contains("TLS 1"), "{err}");
        let slow = QubitParams {
            e0: 1.0,
            a_mod: 1.0,
            omega_mod: 0.5,
        };
        assert!(check_markov_preconditions(&[tls(0.1, 1.0, 1.0, 0.0)], &slow).is_err());
    }

    #[test]
    fn quasi_static_dephasing_is_quadratic() {
        // Frozen shifts: -2 ln D grows as t² while it is small.
        let ens: Vec<TlsParams> = (0..41)
            .map(|i| tls(0.2, 1.0, 100.0 + 0.5 * (i as f64 - 20.0), 2.0))
            .collect();
        let q = QubitParams::unmodulated(100.0);
        let mut times = vec![0.0];
        times.extend((0..=24).map(|k| 1.2f64.powi(k)));
        let runs = 4000;
        let mut sum = vec![Complex64::new(0.0, 0.0); times.len()];
        let mut sq = vec![0.0; times.len()];
        for r in 0..runs {
            let rec =
                evolve_markov(&ens, &q, &EngineConfig::telegraph(64), 0.0, &times, &solver(0), 9, r).unwrap();
            for k in 0..times.len() {
                sum[k] += rec.a[k];
                sq[k] += rec.a[k].norm_sqr();
            }
        }
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for k in 1..times.len() {
            let d = sum[k].norm() / runs as f64 / (sq[k] / runs as f64).sqrt();
            let v = -2.0 * d.ln();
            if (0.01..=1.0).contains(&v) {
                xs.push(times[k].ln());
                ys.push(v.ln());
            }
        }
        assert!(xs.len() >= 5, "{} points", xs.len());
        let fit = crate::stats::linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.15, "{fit:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn bounded_and_deterministic(seed in any::<u64>(), kind in prop_oneof![Just(EngineKind::Telegraph), Just(EngineKind::Ka)]) {
            let ens = vec![tls(0.3, 1.0, 9.0, 0.5), tls(0.9, 1.0, 10.5, 0.5)];
            let q = QubitParams::unmodulated(10.0);
            let engine = EngineConfig { kind, n_fluctuators: 32, ka_dt: 0.05 };
            let times = grid(5.0, 11);
            let a = evolve_markov(&ens, &q, &engine, 1.0, &times, &solver(0), seed, 3).unwrap();
            let b = evolve_markov(&ens, &q, &engine, 1.0, &times, &solver(0), seed, 3).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.a[0], Complex64::new(1.0, 0.0));
            prop_assert!(a.a.iter().all(|z| z.norm() <= 1.0));
        }

        #[test]
        fn unmodulated_output_ignores_m_max(seed in any::<u64>(), m_max in 0usize..40) {
            let ens = vec![tls(0.3, 1.0, 9.5, 0.5)];
            let q = QubitParams::unmodulated(10.0);
            let times = grid(3.0, 7);
            let e = EngineConfig::telegraph(32);
            let a = evolve_markov(&ens, &q, &e, 1.0, &times, &solver(0), seed, 0).unwrap();
            let b = evolve_markov(&ens, &q, &e, 1.0, &times, &solver(m_max), seed, 0).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
