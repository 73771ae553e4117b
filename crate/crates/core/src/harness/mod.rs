//! Monte Carlo experiments: run scheduling, estimators, fits and run records.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::telegraph::sample_couplings;
use crate::diffusion::{EngineConfig, EngineKind, ThermalBathParams};
use crate::dynamics::markov::markov_run;
use crate::dynamics::{check_markov_preconditions, solve_full, FullSolverConfig, SolverConfig, SolverMode};
use crate::ensemble::{build_ensemble, EnsembleSpec, QubitParams, TlsParams};
use crate::error::{Error, Result};
use crate::rng::{stream, DEVICE_RUN, ENSEMBLE_SLOT};

mod estimator;
mod fit;
mod persist;

pub use estimator::estimate;
pub use fit::{fit_powerlaw, PowerLawFit};
pub use persist::{load_run, persist_run, write_curve_csv, RunRecord, Timing, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Linear,
    Log,
}

impl std::str::FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(GridKind::Linear),
            "log" => Ok(GridKind::Log),
            other => Err(Error::config(format!("unknown grid kind `{other}` (expected linear or log)"))),
        }
    }
}

impl std::fmt::Display for GridKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GridKind::Linear => "linear",
            GridKind::Log => "log",
        })
    }
}

/// Observation grid starting at 0. A log grid is `0` followed by `points − 1` log-spaced times
/// from `log_min` to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub stop: f64,
    pub points: usize,
    pub kind: GridKind,
    pub log_min: Option<f64>,
}

impl GridSpec {
    pub fn linear(stop: f64, points: usize) -> Self {
        Self {
            stop,
            points,
            kind: GridKind::Linear,
            log_min: None,
        }
    }

    pub fn log(log_min: f64, stop: f64, points: usize) -> Self {
        Self {
            stop,
            points,
            kind: GridKind::Log,
            log_min: Some(log_min),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stop > 0.0 && self.stop.is_finite()) {
            return Err(Error::config(format!("grid stop must be positive, got {}", self.stop)));
        }
        match self.kind {
            GridKind::Linear if self.points < 2 => Err(Error::config("a linear grid needs at least 2 points")),
            GridKind::Log if self.points < 3 => Err(Error::config("a log grid needs at least 3 points")),
            GridKind::Log => match self.log_min {
                Some(m) if m > 0.0 && m < self.stop => Ok(()),
                Some(m) => Err(Error::config(format!("log_min must lie in (0, stop), got {m}"))),
                None => Err(Error::config("a log grid needs log_min")),
            },
            GridKind::Linear => Ok(()),
        }
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.points;
        Ok(match self.kind {
            GridKind::Linear => (0..n).map(|k| self.stop * k as f64 / (n - 1) as f64).collect(),
            GridKind::Log => {
                let lo = self.log_min.expect("validated").ln();
                let span = self.stop.ln() - lo;
                let mut t = vec![0.0];
                t.extend((0..n - 1).map(|k| (lo + span * k as f64 / (n - 2) as f64).exp()));
                t[n - 1] = self.stop;
                t
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_runs: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub engine: EngineKind,
    pub n_fluctuators: usize,
    pub solver: SolverConfig,
    pub ensemble: EnsembleSpec,
    pub qubit: QubitParams,
    pub resample_ensemble_per_run: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs < 2 {
            return Err(Error::config(format!("n_runs must be at least 2, got {}", self.n_runs)));
        }
        if self.n_runs as u64 >= DEVICE_RUN {
            return Err(Error::config("n_runs is too large"));
        }
        self.grid.validate()?;
        self.solver.validate()?;
        self.ensemble.validate()?;
        self.qubit.validate()?;
        ThermalBathParams::from_spec(&self.ensemble, self.n_fluctuators).validate()
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            kind: self.engine,
            n_fluctuators: self.n_fluctuators,
            ka_dt: self.solver.dt,
        }
    }

    /// The fixed device ensemble used when ensembles are not resampled.
    pub fn device_ensemble(&self) -> Result<Vec<TlsParams>> {
        build_ensemble(&self.ensemble, &self.qubit, &mut stream(self.seed, DEVICE_RUN, ENSEMBLE_SLOT))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingCurve {
    pub times: Vec<f64>,
    /// `|⟨a⟩|`.
    pub m_abs: Vec<f64>,
    /// `√⟨|a|²⟩`.
    pub r_rms: Vec<f64>,
    pub d: Vec<f64>,
    pub d_err: Vec<f64>,
    pub n_runs: usize,
}

impl DephasingCurve {
    /// `−2 ln D` at every grid point.
    pub fn neg2lnd(&self) -> Vec<f64> {
        self.d.iter().map(|d| -2.0 * d.ln()).collect()
    }
}

/// `ln a(t)` of every run, in run order.
pub fn simulate_runs(cfg: &RunConfig, threads: Option<usize>) -> Result<Vec<Vec<Complex64>>> {
    cfg.validate()?;
    let times = cfg.grid.times()?;
    let device = if cfg.resample_ensemble_per_run {
        None
    } else {
        let d = cfg.device_ensemble()?;
        check_ensemble(cfg, &d)?;
        Some(d)
    };
    let geometry = device.as_deref().and_then(|d| device_geometry(cfg, d));
    let geometry = geometry.as_deref();
    let weights = cfg.solver.sidebands(&cfg.qubit);
    let engine = cfg.engine_config();
    let one = |run: usize| -> Result<Vec<Complex64>> {
        let r = run as u64;
        let owned;
        let ensemble = match &device {
            Some(d) => d.as_slice(),
            None => {
                owned = build_ensemble(&cfg.ensemble, &cfg.qubit, &mut stream(cfg.seed, r, ENSEMBLE_SLOT))?;
                check_ensemble(cfg, &owned)?;
                owned.as_slice()
            }
        };
        match cfg.solver.mode {
            SolverMode::Markov => markov_run(
                ensemble,
                &cfg.qubit,
                &engine,
                cfg.ensemble.r_thermal,
                &times,
                &weights,
                cfg.seed,
                r,
                geometry,
            ),
            SolverMode::Full => full_run(cfg, ensemble, &engine, &times, r, geometry),
        }
    };
    let per_run: Vec<Result<Vec<Complex64>>> = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(|| (0..cfg.n_runs).into_par_iter().map(one).collect()),
        None => (0..cfg.n_runs).into_par_iter().map(one).collect(),
    };
    per_run
        .into_iter()
        .enumerate()
        .map(|(run, r)| r.map_err(|e| Error::Run { run, source: Box::new(e) }))
        .collect()
}

/// Telegraph couplings of the device's thermal baths, fixed across runs. TLS `n` draws them
/// from stream `(seed, DEVICE_RUN, n)`.
fn device_geometry(cfg: &RunConfig, ensemble: &[TlsParams]) -> Option<Vec<Vec<f64>>> {
    if cfg.engine != EngineKind::Telegraph {
        return None;
    }
    Some(
        ensemble
            .iter()
            .enumerate()
            .map(|(n, tls)| {
                let bath = ThermalBathParams::for_tls(tls, cfg.ensemble.r_thermal, cfg.n_fluctuators);
                if bath.is_static() {
                    Vec::new()
                } else {
                    sample_couplings(&bath, &mut stream(cfg.seed, DEVICE_RUN, n as u32))
                }
            })
            .collect(),
    )
}

fn check_ensemble(cfg: &RunConfig, ensemble: &[TlsParams]) -> Result<()> {
    match cfg.solver.mode {
        SolverMode::Markov => check_markov_preconditions(ensemble, &cfg.qubit),
        SolverMode::Full => Ok(()),
    }
}

fn full_run(
    cfg: &RunConfig,
    ensemble: &[TlsParams],
    engine: &EngineConfig,
    times: &[f64],
    run: u64,
    geometry: Option<&[Vec<f64>]>,
) -> Result<Vec<Complex64>> {
    let horizon = *times.last().expect("grid is non-empty");
    let widest = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let paths = ensemble
        .iter()
        .enumerate()
        .map(|(n, tls)| {
            let bath = ThermalBathParams::for_tls(tls, cfg.ensemble.r_thermal, engine.n_fluctuators);
            let mut rng = stream(cfg.seed, run, n as u32);
            match geometry {
                Some(g) => engine.realize_with(&g[n], &bath, horizon, widest, &mut rng),
                None => engine.realize(&bath, horizon, widest, &mut rng),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let sol = solve_full(ensemble, &cfg.qubit, &paths, times, &FullSolverConfig::default())?;
    Ok(sol.a.into_iter().map(Complex64::ln).collect())
}

/// Runs the experiment on the global thread pool.
pub fn run_experiment(cfg: &RunConfig) -> Result<DephasingCurve> {
    run_experiment_with(cfg, None).map(|(c, _)| c)
}

/// Runs the experiment on `threads` workers (the global pool if `None`) and reports timing.
pub fn run_experiment_with(cfg: &RunConfig, threads: Option<usize>) -> Result<(DephasingCurve, Timing)> {
    let start = Instant::now();
    let logs = simulate_runs(cfg, threads)?;
    let curve = estimate(&cfg.grid.times()?, &logs)?;
    let timing = Timing {
        wall_seconds: start.elapsed().as_secs_f64(),
        threads: threads.unwrap_or_else(rayon::current_num_threads),
    };
    Ok((curve, timing))
}
