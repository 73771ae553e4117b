//! Static-shift sampling and the diffusion densities used as oracles.

use std::f64::consts::PI;

use rand::Rng;

use super::ThermalBathParams;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Draws `x` from a Lorentzian of half-width `μ_av`, truncated to `|x| ≤ μ_max`.
pub fn sample_static_shift<R: Rng + ?Sized>(bath: &ThermalBathParams, rng: &mut R) -> f64 {
    if bath.mu_av == 0.0 {
        return 0.0;
    }
    let edge = (bath.mu_max / bath.mu_av).atan();
    let u = 2.0 * rng.random::<f64>() - 1.0;
    (bath.mu_av * (u * edge).tan()).clamp(-bath.mu_max, bath.mu_max)
}

/// CDF of the truncated Lorentzian sampled by [`sample_static_shift`].
pub fn truncated_lorentzian_cdf(x: f64, mu_av: f64, mu_max: f64) -> f64 {
    if x <= -mu_max {
        return 0.0;
    }
    if x >= mu_max {
        return 1.0;
    }
    let edge = (mu_max / mu_av).atan();
    0.5 + 0.5 * (x / mu_av).atan() / edge
}

/// Short-time propagator: a Lorentzian in `y` of width `W(t) = μ_av κ t`.
pub fn propagator_density(y: f64, t: f64, bath: &ThermalBathParams) -> Result<f64> {
    if !(t > 0.0) || bath.kappa * t > 0.1 {
        return Err(Error::precondition(format!(
            "propagator density needs 0 < t << 1/kappa (got kappa*t = {})",
            bath.kappa * t
        )));
    }
    let w = bath.m_rate() * t;
    if w == 0.0 {
        return Err(Error::precondition("propagator width vanishes (mu_av or kappa is zero)"));
    }
    Ok(w / (PI * (w * w + y * y)))
}

/// Stationary density `(1/π) ∫_0^∞ cos(xτ) exp(−μ_av(√(τ²+ρ²) − ρ)) dτ` by quadrature.
pub fn stationary_density(x: f64, bath: &ThermalBathParams) -> Result<f64> {
    let mu = bath.mu_av;
    if !(mu > 0.0) {
        return Err(Error::precondition("stationary density needs mu_av > 0"));
    }
    let rho = bath.rho();
    let f = |tau: f64| (x * tau).cos() * (-mu * ((tau * tau + rho * rho).sqrt() - rho)).exp();
    // Past mu(tau - rho) = 50 the integrand is below e^-50.
    let end = rho + 50.0 / mu;
    let peak = 1.0 / (PI * mu);
    let cfg = QuadConfig::rel(1e-10).with_abs(1e-12 * peak);
    // Split at a few oscillation periods so that no single interval sees many cycles.
    let pieces = 1 + ((x.abs() * end) / (4.0 * PI)).ceil() as usize;
    let mut total = 0.0;
    for k in 0..pieces {
        let a = end * k as f64 / pieces as f64;
        let b = end * (k + 1) as f64 / pieces as f64;
        total += integrate(f, a, b, cfg)?.value;
    }
    Ok(total / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::quadrature::integrate_to_infinity;
    use proptest::prelude::*;

    fn bath(ratio: f64) -> ThermalBathParams {
        ThermalBathParams {
            kappa: 1.0,
            mu_av: 1.0,
            mu_max: ratio,
            n_fluctuators: 256,
        }
    }

    // K1 from its integral representation, independent of the density quadrature above.
    fn bessel_k1(z: f64) -> f64 {
        integrate_to_infinity(|u| (-z * u.cosh()).exp() * u.cosh(), 0.0, QuadConfig::rel(1e-12))
            .unwrap()
            .value
    }

    fn closed_form_stationary(x: f64, mu: f64, rho: f64) -> f64 {
        let s = (x * x + mu * mu).sqrt();
        mu * rho * (mu * rho).exp() / PI * bessel_k1(rho * s) / s
    }

    #[test]
    fn k1_reference() {
        assert!((bessel_k1(0.5) / 1.6564411200033007 - 1.0).abs() < 1e-9);
        assert!((bessel_k1(0.01) / 99.97389411829623 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stationary_density_matches_bessel_form() {
        for ratio in [2.0, 10.0, 100.0] {
            let b = bath(ratio);
            for x in [0.0, 0.3, 1.0, 5.0, 20.0] {
                let got = stationary_density(x, &b).unwrap();
                let want = closed_form_stationary(x, 1.0, 1.0 / ratio);
                assert!((got / want - 1.0).abs() < 1e-6, "ratio {ratio}, x {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn stationary_peak_is_lorentzian() {
        let got = stationary_density(0.0, &bath(100.0)).unwrap();
        assert!((got * PI - 1.0).abs() < 0.02, "{got}");
    }

    #[test]
    fn stationary_tails_fall_below_lorentzian() {
        let b = bath(10.0);
        let lorentz = |x: f64| 1.0 / (PI * (1.0 + x * x));
        assert!(stationary_density(10.0, &b).unwrap() < lorentz(10.0));
        assert!(stationary_density(30.0, &b).unwrap() < 0.5 * lorentz(30.0));
    }

    #[test]
    fn truncated_sampler_median_and_bounds() {
        let b = bath(100.0);
        let mut rng = stream(5, 0, 0);
        let n = 1_000_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sample_static_shift(&b, &mut rng)).collect();
        assert!(xs.iter().all(|x| x.abs() <= b.mu_max));
        let mean = xs.iter().sum::<f64>() / n as f64;
        // Truncated Lorentzian variance: mu (mu_max - mu atan(ratio)) / atan(ratio).
        let var = (100.0 - (100f64).atan()) / (100f64).atan();
        assert!(mean.abs() < 3.0 * (var / n as f64).sqrt(), "mean {mean}");
        let mut abs: Vec<f64> = xs.iter_mut().map(|x| x.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let median = abs[n / 2];
        let exact = (0.5 * (100f64).atan()).tan();
        assert!((exact - 0.99004).abs() < 1e-5);
        assert!((exact - 1.0).abs() < 0.01);
        assert!((median / exact - 1.0).abs() < 0.005, "median {median}");
    }

    #[test]
    fn propagator_basics() {
        let b = bath(100.0);
        let t = 0.01;
        let w = b.m_rate() * t;
        assert!((propagator_density(0.0, t, &b).unwrap() - 1.0 / (PI * w)).abs() < 1e-12);
        let mass = integrate(|y| propagator_density(y, t, &b).unwrap(), -1e3 * w, 1e3 * w, QuadConfig::rel(1e-10))
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-3);
        assert!(propagator_density(0.0, 1.0, &b).is_err());
        assert!(propagator_density(0.0, 0.0, &b).is_err());
    }

    proptest! {
        #[test]
        fn densities_are_even(x in 0.0f64..50.0, y in 0.0f64..5.0) {
            let b = bath(20.0);
            prop_assert_eq!(stationary_density(x, &b).unwrap(), stationary_density(-x, &b).unwrap());
            prop_assert_eq!(propagator_density(y, 0.05, &b).unwrap(), propagator_density(-y, 0.05, &b).unwrap());
        }

        #[test]
        fn truncated_cdf_is_monotone(a in -200.0f64..200.0, d in 0.0f64..10.0) {
            let f = |x| truncated_lorentzian_cdf(x, 1.0, 100.0);
            prop_assert!(f(a + d) >= f(a));
            prop_assert!((0.0..=1.0).contains(&f(a)));
        }
    }
}
