//! Qubit and TLS parameters, and sampling of quantum-TLS ensembles.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Qubit splitting and harmonic modulation `E(t) = E0 + A cos Ωt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub e0: f64,
    pub a_mod: f64,
    pub omega_mod: f64,
}

impl QubitParams {
    pub fn unmodulated(e0: f64) -> Self {
        Self {
            e0,
            a_mod: 0.0,
            omega_mod: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e0 > 0.0 && self.e0.is_finite()) {
            return Err(Error::config(format!("qubit e0 must be positive, got {}", self.e0)));
        }
        if !(self.a_mod >= 0.0 && self.a_mod.is_finite()) {
            return Err(Error::config(format!("modulation amplitude must be >= 0, got {}", self.a_mod)));
        }
        if self.a_mod > 0.0 && !(self.omega_mod > 0.0 && self.omega_mod.is_finite()) {
            return Err(Error::config("modulation frequency must be positive when the amplitude is nonzero"));
        }
        Ok(())
    }

    /// Modulation index `A/Ω` (zero when unmodulated).
    pub fn mod_index(&self) -> f64 {
        if self.a_mod == 0.0 {
            0.0
        } else {
            self.a_mod / self.omega_mod
        }
    }

    pub fn is_modulated(&self) -> bool {
        self.a_mod > 0.0
    }
}

/// Ensemble-level parameters of the quantum-TLS population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub delta_typ: f64,
    pub g_max: f64,
    pub g_min: f64,
    pub band_halfwidth: f64,
    pub gamma: f64,
    pub mu_av: f64,
    pub mu_max: f64,
    /// Thermal-TLS switching rate `1/T_{1,T}`.
    pub r_thermal: f64,
}

/// Default ratio `g_min / g_max`.
pub const DEFAULT_G_MIN_RATIO: f64 = 1e-3;

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta_typ", self.delta_typ),
            ("g_max", self.g_max),
            ("g_min", self.g_min),
            ("gamma", self.gamma),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("band_halfwidth", self.band_halfwidth),
            ("mu_av", self.mu_av),
            ("mu_max", self.mu_max),
            ("r_thermal", self.r_thermal),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.g_min >= self.g_max {
            return Err(Error::config(format!(
                "g_min ({}) must be below g_max ({})",
                self.g_min, self.g_max
            )));
        }
        if self.g_max > self.gamma {
            return Err(Error::config(format!(
                "g_max ({}) exceeds gamma ({}); the weak-coupling model does not apply",
                self.g_max, self.gamma
            )));
        }
        if self.mu_av > self.mu_max {
            return Err(Error::config(format!(
                "mu_av ({}) exceeds mu_max ({})",
                self.mu_av, self.mu_max
            )));
        }
        Ok(())
    }

    pub fn t1_thermal(&self) -> f64 {
        1.0 / self.r_thermal
    }

    /// `I = ∫_{g_min}^{g_max} √(1 − g²/g_max²)/g dg`, by quadrature in `ln g`.
    pub fn coupling_integral(&self) -> Result<f64> {
        let s0 = self.g_min / self.g_max;
        let est = integrate(
            |v: f64| (1.0 - (2.0 * v).exp()).max(0.0).sqrt(),
            s0.ln(),
            0.0,
            QuadConfig::rel(1e-12),
        )?;
        Ok(est.value)
    }

    /// Mean number of TLSs in the band.
    pub fn mean_count(&self) -> Result<f64> {
        Ok(2.0 * self.band_halfwidth / self.delta_typ * self.coupling_integral()?)
    }

    /// TLS parameters under the typical-value policy.
    pub fn tls(&self, eps0: f64, g: f64) -> TlsParams {
        TlsParams {
            eps0,
            g,
            gamma: self.gamma,
            mu_av: self.mu_av,
            mu_max: self.mu_max,
        }
    }
}

/// One quantum TLS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    pub eps0: f64,
    pub g: f64,
    pub gamma: f64,
    pub mu_av: f64,
    pub mu_max: f64,
}

impl TlsParams {
    /// `Δ = E0 − ε0`.
    pub fn detuning(&self, qubit: &QubitParams) -> f64 {
        qubit.e0 - self.eps0
    }
}

const MAX_REJECTIONS: usize = 1_000_000;

/// Draws a coupling from `p(g) ∝ √(1 − g²/g_max²)/g` on `[g_min, g_max]`.
pub fn sample_coupling<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<f64> {
    let log_span = (spec.g_max / spec.g_min).ln();
    for _ in 0..MAX_REJECTIONS {
        let g = spec.g_min * (log_span * rng.random::<f64>()).exp();
        let s = g / spec.g_max;
        let accept = (1.0 - s * s).max(0.0).sqrt();
        if rng.random::<f64>() < accept {
            return Ok(g.clamp(spec.g_min, spec.g_max));
        }
    }
    Err(Error::numeric("coupling rejection sampler exceeded its iteration cap"))
}

/// Samples a device: Poisson-many TLSs uniform in `[E0 − B, E0 + B]`.
pub fn build_ensemble<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    qubit: &QubitParams,
    rng: &mut R,
) -> Result<Vec<TlsParams>> {
    spec.validate()?;
    qubit.validate()?;
    if spec.band_halfwidth < spec.mu_max {
        return Err(Error::config(format!(
            "band half-width ({}) must cover mu_max ({})",
            spec.band_halfwidth, spec.mu_max
        )));
    }
    let mean = spec.mean_count()?;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::numeric(format!("poisson mean {mean}: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    let b = spec.band_halfwidth;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let eps0 = qubit.e0 + b * (2.0 * rng.random::<f64>() - 1.0);
        let g = sample_coupling(spec, rng)?;
        out.push(spec.tls(eps0, g));
    }
    Ok(out)
}

/// Golden-rule qubit relaxation rate `g_max²/δ`.
pub fn golden_rule_rate(spec: &EnsembleSpec) -> f64 {
    spec.g_max * spec.g_max / spec.delta_typ
}
