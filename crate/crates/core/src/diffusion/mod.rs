//! Spectral-diffusion realizations `ε(t) = ε0 + x + y(t)` and the associated densities.
//!
//! Two engines produce piecewise-constant shift paths: the microscopic telegraph bath
//! ([`telegraph`]) and a fast Lorentzian Ornstein-Uhlenbeck engine ([`ka`]).

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleSpec, TlsParams};
use crate::error::{Error, Result};

pub mod density;
pub mod ka;
pub mod telegraph;
pub mod width;

pub use density::{propagator_density, sample_static_shift, stationary_density, truncated_lorentzian_cdf};
pub use ka::{ka_path, ka_realization, ka_step};
pub use telegraph::{telegraph_path, telegraph_path_with, telegraph_realization};
pub use width::{width_function, WidthParams};

/// Default number of telegraph fluctuators per quantum TLS.
pub const DEFAULT_FLUCTUATORS: usize = 256;

/// Smallest fluctuator count accepted by the microscopic engine.
pub const MIN_FLUCTUATORS: usize = 8;

/// Thermal-bath parameters seen by one quantum TLS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalBathParams {
    /// Switching rate `1/T_{1,T}`.
    pub kappa: f64,
    pub mu_av: f64,
    pub mu_max: f64,
    pub n_fluctuators: usize,
}

impl ThermalBathParams {
    pub fn for_tls(tls: &TlsParams, kappa: f64, n_fluctuators: usize) -> Self {
        Self {
            kappa,
            mu_av: tls.mu_av,
            mu_max: tls.mu_max,
            n_fluctuators,
        }
    }

    pub fn from_spec(spec: &EnsembleSpec, n_fluctuators: usize) -> Self {
        Self {
            kappa: spec.r_thermal,
            mu_av: spec.mu_av,
            mu_max: spec.mu_max,
            n_fluctuators,
        }
    }

    /// `ρ = 1/μ_max`.
    pub fn rho(&self) -> f64 {
        1.0 / self.mu_max
    }

    /// Diffusion rate `m = μ_av·κ`.
    pub fn m_rate(&self) -> f64 {
        self.mu_av * self.kappa
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::config(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.mu_av >= 0.0 && self.mu_av <= self.mu_max && self.mu_max.is_finite()) {
            return Err(Error::config(format!(
                "need 0 <= mu_av <= mu_max, got mu_av = {}, mu_max = {}",
                self.mu_av, self.mu_max
            )));
        }
        Ok(())
    }

    /// True when the bath produces no diffusion.
    pub fn is_static(&self) -> bool {
        self.mu_av == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Telegraph,
    Ka,
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EngineKind::Telegraph => "telegraph",
            EngineKind::Ka => "ka",
        })
    }
}

impl std::str::FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "telegraph" => Ok(EngineKind::Telegraph),
            "ka" => Ok(EngineKind::Ka),
            other => Err(Error::config(format!("unknown engine `{other}` (expected telegraph or ka)"))),
        }
    }
}

/// Engine choice plus its knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub kind: EngineKind,
    pub n_fluctuators: usize,
    /// Step of the Ornstein-Uhlenbeck engine (s).
    pub ka_dt: f64,
}

impl EngineConfig {
    pub fn telegraph(n_fluctuators: usize) -> Self {
        Self {
            kind: EngineKind::Telegraph,
            n_fluctuators,
            ka_dt: f64::INFINITY,
        }
    }

    pub fn ka(ka_dt: f64) -> Self {
        Self {
            kind: EngineKind::Ka,
            n_fluctuators: DEFAULT_FLUCTUATORS,
            ka_dt,
        }
    }

    /// One realization over `[0, horizon]`. `max_step` is the widest gap of the observation grid.
    pub fn realize<R: Rng + ?Sized>(
        &self,
        bath: &ThermalBathParams,
        horizon: f64,
        max_step: f64,
        rng: &mut R,
    ) -> Result<ShiftPath> {
        match self.kind {
            EngineKind::Telegraph => telegraph_path(bath, horizon, max_step, rng),
            EngineKind::Ka => ka_path(bath, horizon, self.ka_dt, rng),
        }
    }

    /// As [`realize`](Self::realize), with telegraph couplings fixed to `couplings`. The KA
    /// engine has no geometry and ignores them.
    pub fn realize_with<R: Rng + ?Sized>(
        &self,
        couplings: &[f64],
        bath: &ThermalBathParams,
        horizon: f64,
        max_step: f64,
        rng: &mut R,
    ) -> Result<ShiftPath> {
        match self.kind {
            EngineKind::Telegraph => telegraph_path_with(couplings, bath, horizon, max_step, rng),
            EngineKind::Ka => ka_path(bath, horizon, self.ka_dt, rng),
        }
    }
}

/// Piecewise-constant shift path: static shift `x` plus a right-continuous jump process `y`
/// with `y(t) = 0` before the first jump.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShiftPath {
    pub x: f64,
    pub jump_times: Vec<f64>,
    /// Value of `y` from the matching jump time on.
    pub y_after: Vec<f64>,
}

impl ShiftPath {
    pub fn frozen(x: f64) -> Self {
        Self {
            x,
            ..Self::default()
        }
    }

    pub fn y_at(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            0.0
        } else {
            self.y_after[k - 1]
        }
    }

    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }

    pub fn sample(&self, times: &[f64]) -> ShiftTrajectory {
        ShiftTrajectory {
            times: times.to_vec(),
            x: self.x,
            y: times.iter().map(|&t| self.y_at(t)).collect(),
        }
    }

    /// Constant pieces `(start, end, y)` covering `[0, horizon]`.
    pub fn pieces(&self, horizon: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.jump_times.len();
        (0..=n).filter_map(move |k| {
            let start = if k == 0 { 0.0 } else { self.jump_times[k - 1] };
            let end = if k == n { horizon } else { self.jump_times[k].min(horizon) };
            let y = if k == 0 { 0.0 } else { self.y_after[k - 1] };
            (start < end).then_some((start, end, y))
        })
    }
}

/// A path sampled on an observation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTrajectory {
    pub times: Vec<f64>,
    pub x: f64,
    pub y: Vec<f64>,
}

impl ShiftTrajectory {
    /// Writes `t_us, x_MHz, y_MHz` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        use crate::units::{rad_s_to_mhz, s_to_us};
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(out, "t_us,x_MHz,y_MHz").map_err(io)?;
        for (t, y) in self.times.iter().zip(&self.y) {
            writeln!(out, "{},{},{}", s_to_us(*t), rad_s_to_mhz(self.x), rad_s_to_mhz(*y)).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::precondition("time grid must start at 0"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::precondition("time grid must be finite and strictly increasing"));
    }
    Ok(())
}

pub(crate) fn max_step(times: &[f64]) -> f64 {
    times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}
