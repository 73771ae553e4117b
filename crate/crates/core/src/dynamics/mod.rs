//! Qubit amplitude evolution: the time-local Markov product solution and the full
//! single-excitation equations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_weights, Sideband};
use crate::diffusion::EngineKind;
use crate::ensemble::{EnsembleSpec, QubitParams, TlsParams};
use crate::error::{Error, Result};

pub mod full;
pub mod markov;
mod ode;

pub use full::{evolve_full, solve_full, FullSolution, FullSolverConfig, MAX_FULL_TLS};
pub use markov::{accumulate_tls, check_markov_preconditions, evolve_markov, log_amplitude};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Markov,
    Full,
}

impl std::str::FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markov" => Ok(SolverMode::Markov),
            "full" => Ok(SolverMode::Full),
            other => Err(Error::config(format!("unknown solver mode `{other}` (expected markov or full)"))),
        }
    }
}

impl std::fmt::Display for SolverMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverMode::Markov => "markov",
            SolverMode::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Step of time-stepped diffusion engines (s).
    pub dt: f64,
    /// Largest sideband order kept.
    pub m_max: usize,
    pub mode: SolverMode,
    pub bessel_tol: f64,
}

pub const DEFAULT_BESSEL_TOL: f64 = 1e-12;

impl SolverConfig {
    /// Defaults for a given device: `dt = min(0.05/γ, 0.05·T_{1,T}, 0.02/(m_max Ω + B))`.
    pub fn for_device(spec: &EnsembleSpec, qubit: &QubitParams) -> Self {
        let x = qubit.mod_index();
        let m_max = x.ceil() as usize + 20;
        let mut dt = 0.05 / spec.gamma;
        if spec.r_thermal > 0.0 {
            dt = dt.min(0.05 / spec.r_thermal);
        }
        if qubit.is_modulated() {
            dt = dt.min(0.02 / (m_max as f64 * qubit.omega_mod + spec.band_halfwidth));
        }
        Self {
            dt,
            m_max,
            mode: SolverMode::Markov,
            bessel_tol: DEFAULT_BESSEL_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("solver dt must be positive, got {}", self.dt)));
        }
        if !(self.bessel_tol > 0.0 && self.bessel_tol < 1.0) {
            return Err(Error::config(format!("bessel_tol must lie in (0, 1), got {}", self.bessel_tol)));
        }
        Ok(())
    }

    /// Sideband weights for `qubit`, truncated by tolerance and by `m_max`.
    pub fn sidebands(&self, qubit: &QubitParams) -> Vec<Sideband> {
        let cap = self.m_max as i32;
        bessel_weights(qubit.mod_index(), self.bessel_tol)
            .into_iter()
            .filter(|s| s.m.abs() <= cap)
            .collect()
    }
}

/// Amplitude `a(t)` of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRecord {
    pub times: Vec<f64>,
    pub a: Vec<Complex64>,
    pub seed: u64,
    pub run: u64,
    pub engine: Option<EngineKind>,
}

/// `(g²/4) Σ_m J_m² / (γ − i(E0 + mΩ − ε))`.
pub fn coefficient_c(tls: &TlsParams, qubit: &QubitParams, eps_t: f64, weights: &[Sideband]) -> Complex64 {
    rate_at_detuning(tls.g, tls.gamma, qubit.e0 - eps_t, qubit.omega_mod, weights)
}

/// Same rate, parametrised by the instantaneous detuning `E0 − ε(t)`.
#[inline]
pub fn rate_at_detuning(g: f64, gamma: f64, detuning: f64, omega: f64, weights: &[Sideband]) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for w in weights {
        let d = detuning + w.m as f64 * omega;
        // J²/(γ − i d) = J²(γ + i d)/(γ² + d²)
        let s = w.j * w.j / (gamma * gamma + d * d);
        sum.re += s * gamma;
        sum.im += s * d;
    }
    sum * (0.25 * g * g)
}
