//! Sectioned `key = value` configuration files.
//!
//! Frequencies are ordinary frequencies in MHz and times are in μs. They are converted to
//! rad/s and s here, once, when core parameter types are built.

use std::path::Path;

use dephasim_core::analytics::LawParams;
use dephasim_core::ensemble::DEFAULT_G_MIN_RATIO;
use dephasim_core::harness::GridKind;
use dephasim_core::units::{mhz_to_rad_s, us_to_s};
use dephasim_core::{EngineKind, EnsembleSpec, GridSpec, QubitParams, RunConfig, SolverConfig, SolverMode, TlsParams};
use ini::Ini;

use crate::error::{CliError, CliResult};

/// A value that can appear on the right of `key = value`.
trait Field: Sized {
    fn parse(raw: &str) -> Result<Self, String>;
    fn render(&self) -> String;
}

impl Field for f64 {
    fn parse(raw: &str) -> Result<Self, String> {
        raw.parse::<f64>().map_err(|e| e.to_string())
    }
    fn render(&self) -> String {
        // Shortest representation that parses back to the same value.
        format!("{self:?}")
    }
}

macro_rules! plain_field {
    ($($ty:ty),*) => {$(
        impl Field for $ty {
            fn parse(raw: &str) -> Result<Self, String> {
                raw.parse::<$ty>().map_err(|e| e.to_string())
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

plain_field!(usize, u64, bool, EngineKind, SolverMode, GridKind);

impl Field for Vec<f64> {
    fn parse(raw: &str) -> Result<Self, String> {
        raw.split(',').map(|s| <f64 as Field>::parse(s.trim())).collect()
    }
    fn render(&self) -> String {
        self.iter().map(Field::render).collect::<Vec<_>>().join(", ")
    }
}

macro_rules! section {
    ($(#[$doc:meta])* $name:ident, $title:literal { $($(#[$fdoc:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Default, PartialEq)]
        pub struct $name {
            $($(#[$fdoc])* pub $field: Option<$ty>,)*
        }

        impl $name {
            pub const TITLE: &'static str = $title;

            fn set(&mut self, key: &str, raw: &str) -> CliResult<()> {
                match key {
                    $(stringify!($field) => {
                        if self.$field.is_some() {
                            return Err(CliError::config(format!("duplicate key `{key}` in [{}]", Self::TITLE)));
                        }
                        let v = <$ty as Field>::parse(raw).map_err(|e| {
                            CliError::config(format!("bad value `{raw}` for `{key}` in [{}]: {e}", Self::TITLE))
                        })?;
                        self.$field = Some(v);
                    })*
                    _ => {
                        return Err(CliError::config(format!(
                            "unknown key `{key}` in [{}] (expected one of: {})",
                            Self::TITLE,
                            [$(stringify!($field)),*].join(", ")
                        )))
                    }
                }
                Ok(())
            }

            fn entries(&self) -> Vec<(&'static str, String)> {
                let mut out = Vec::new();
                $(if let Some(v) = &self.$field {
                    out.push((stringify!($field), Field::render(v)));
                })*
                out
            }
        }
    };
}

section!(
    /// Qubit splitting and harmonic modulation (MHz).
    QubitSection, "qubit" {
        e0: f64,
        a_mod: f64,
        f_mod: f64,
    }
);

section!(
    /// Quantum-TLS population (MHz unless noted).
    EnsembleSection, "ensemble" {
        delta_typ: f64,
        g_max: f64,
        /// Alternative to `g_max`: qubit golden-rule lifetime in μs, `g_max = √(δ/T1q)`.
        t1_qubit: f64,
        g_min_ratio: f64,
        band_halfwidth: f64,
        gamma: f64,
        mu_av: f64,
        mu_max: f64,
        /// Explicit TLS detunings `E0 − ε` (MHz), used by `validate` instead of sampling.
        tls_detunings: Vec<f64>,
        /// Coupling of the explicit TLSs (MHz), `g_max` by default.
        tls_g: f64,
    }
);

section!(
    /// Thermal bath driving the spectral diffusion.
    BathSection, "bath" {
        /// `T_{1,T}` in μs.
        t1_thermal: f64,
        n_fluctuators: usize,
        engine: EngineKind,
    }
);

section!(
    SolverSection, "solver" {
        mode: SolverMode,
        /// Step of the time-stepped engine (μs).
        dt: f64,
        m_max: usize,
        bessel_tol: f64,
    }
);

section!(
    /// Monte Carlo runs and the observation grid (μs).
    RunSection, "run" {
        runs: usize,
        seed: u64,
        t_stop: f64,
        points: usize,
        grid: GridKind,
        t_min: f64,
        resample: bool,
    }
);

section!(
    /// Temperature sweep (K).
    SweepSection, "sweep" {
        t_min: f64,
        t_max: f64,
        points: usize,
        /// Temperature at which `μ_av = γ`; the geometric midpoint of the grid by default.
        t_star: f64,
        /// `T_{1,T}` at `t_star` (μs).
        t1_thermal_star: f64,
    }
);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliConfig {
    pub qubit: Option<QubitSection>,
    pub ensemble: Option<EnsembleSection>,
    pub bath: Option<BathSection>,
    pub solver: Option<SolverSection>,
    pub run: Option<RunSection>,
    pub sweep: Option<SweepSection>,
}

fn need<T: Clone>(value: &Option<T>, section: &str, key: &str) -> CliResult<T> {
    value
        .clone()
        .ok_or_else(|| CliError::config(format!("missing required key `{key}` in [{section}]")))
}

fn section<'a, S>(s: &'a Option<S>, title: &str, key: &str) -> CliResult<&'a S> {
    s.as_ref()
        .ok_or_else(|| CliError::config(format!("missing section [{title}] (required key `{key}`)")))
}

pub const DEFAULT_RUNS: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_T1_AT_STAR_US: f64 = 1000.0;

impl CliConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        let mut cfg = CliConfig::default();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(CliError::config(format!("key `{key}` appears before any section")));
                }
                continue;
            };
            macro_rules! fill {
                ($slot:ident, $ty:ty) => {{
                    let s = cfg.$slot.get_or_insert_with(<$ty>::default);
                    for (k, v) in props.iter() {
                        s.set(k.trim(), v.trim())?;
                    }
                }};
            }
            match name.trim() {
                "qubit" => fill!(qubit, QubitSection),
                "ensemble" => fill!(ensemble, EnsembleSection),
                "bath" => fill!(bath, BathSection),
                "solver" => fill!(solver, SolverSection),
                "run" => fill!(run, RunSection),
                "sweep" => fill!(sweep, SweepSection),
                other => {
                    return Err(CliError::config(format!(
                        "unknown section [{other}] (expected qubit, ensemble, bath, solver, run or sweep)"
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text form; parsing it gives back an identical config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut emit = |title: &str, entries: Vec<(&str, String)>| {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("[{title}]\n"));
            for (k, v) in entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
        };
        if let Some(s) = &self.qubit {
            emit(QubitSection::TITLE, s.entries());
        }
        if let Some(s) = &self.ensemble {
            emit(EnsembleSection::TITLE, s.entries());
        }
        if let Some(s) = &self.bath {
            emit(BathSection::TITLE, s.entries());
        }
        if let Some(s) = &self.solver {
            emit(SolverSection::TITLE, s.entries());
        }
        if let Some(s) = &self.run {
            emit(RunSection::TITLE, s.entries());
        }
        if let Some(s) = &self.sweep {
            emit(SweepSection::TITLE, s.entries());
        }
        out
    }

    pub fn qubit_params(&self) -> CliResult<QubitParams> {
        let q = section(&self.qubit, "qubit", "e0")?;
        let qubit = QubitParams {
            e0: mhz_to_rad_s(need(&q.e0, "qubit", "e0")?),
            a_mod: mhz_to_rad_s(q.a_mod.unwrap_or(0.0)),
            omega_mod: mhz_to_rad_s(q.f_mod.unwrap_or(0.0)),
        };
        qubit.validate()?;
        Ok(qubit)
    }

    /// Modulation index `A/Ω`, zero without a [qubit] section.
    pub fn mod_index(&self) -> CliResult<f64> {
        match &self.qubit {
            Some(_) => Ok(self.qubit_params()?.mod_index()),
            None => Ok(0.0),
        }
    }

    fn g_max(&self, e: &EnsembleSection, delta: f64) -> CliResult<f64> {
        match (e.g_max, e.t1_qubit) {
            (Some(g), None) => Ok(mhz_to_rad_s(g)),
            (None, Some(t1q)) => {
                if !(t1q > 0.0) {
                    return Err(CliError::config(format!("t1_qubit must be positive, got {t1q}")));
                }
                Ok((delta / us_to_s(t1q)).sqrt())
            }
            (Some(_), Some(_)) => Err(CliError::config("give either `g_max` or `t1_qubit` in [ensemble], not both")),
            (None, None) => Err(CliError::config("missing required key `g_max` (or `t1_qubit`) in [ensemble]")),
        }
    }

    pub fn t1_thermal(&self) -> CliResult<f64> {
        let b = section(&self.bath, "bath", "t1_thermal")?;
        Ok(us_to_s(need(&b.t1_thermal, "bath", "t1_thermal")?))
    }

    pub fn ensemble_spec(&self) -> CliResult<EnsembleSpec> {
        self.ensemble_spec_at(self.t1_thermal()?)
    }

    /// As [`ensemble_spec`](Self::ensemble_spec) with `T_{1,T}` (s) given rather than read.
    pub fn ensemble_spec_at(&self, t1_thermal: f64) -> CliResult<EnsembleSpec> {
        let e = section(&self.ensemble, "ensemble", "delta_typ")?;
        let mhz = |v: &Option<f64>, key: &str| need(v, "ensemble", key).map(mhz_to_rad_s);
        let delta_typ = mhz(&e.delta_typ, "delta_typ")?;
        let g_max = self.g_max(e, delta_typ)?;
        let mu_max = mhz(&e.mu_max, "mu_max")?;
        let spec = EnsembleSpec {
            delta_typ,
            g_max,
            g_min: e.g_min_ratio.unwrap_or(DEFAULT_G_MIN_RATIO) * g_max,
            band_halfwidth: e.band_halfwidth.map(mhz_to_rad_s).unwrap_or(mu_max),
            gamma: mhz(&e.gamma, "gamma")?,
            mu_av: mhz(&e.mu_av, "mu_av")?,
            mu_max,
            r_thermal: 1.0 / t1_thermal,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn law_params(&self) -> CliResult<LawParams> {
        let p = LawParams::from_spec(&self.ensemble_spec()?);
        p.validate()?;
        Ok(p)
    }

    /// Explicit TLSs from `tls_detunings`, if given.
    pub fn explicit_tls(&self) -> CliResult<Option<Vec<TlsParams>>> {
        let Some(dets) = self.ensemble.as_ref().and_then(|e| e.tls_detunings.clone()) else {
            return Ok(None);
        };
        let spec = self.ensemble_spec()?;
        let qubit = self.qubit_params()?;
        let g = self
            .ensemble
            .as_ref()
            .and_then(|e| e.tls_g)
            .map(mhz_to_rad_s)
            .unwrap_or(spec.g_max);
        Ok(Some(dets.iter().map(|&d| spec.tls(qubit.e0 - mhz_to_rad_s(d), g)).collect()))
    }

    pub fn grid(&self) -> CliResult<GridSpec> {
        let r = section(&self.run, "run", "t_stop")?;
        let stop = us_to_s(need(&r.t_stop, "run", "t_stop")?);
        let points = need(&r.points, "run", "points")?;
        let grid = match r.grid.unwrap_or(GridKind::Linear) {
            GridKind::Linear => GridSpec::linear(stop, points),
            GridKind::Log => GridSpec::log(us_to_s(need(&r.t_min, "run", "t_min")?), stop, points),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn runs(&self) -> usize {
        self.run.as_ref().and_then(|r| r.runs).unwrap_or(DEFAULT_RUNS)
    }

    pub fn seed(&self) -> u64 {
        self.run.as_ref().and_then(|r| r.seed).unwrap_or(DEFAULT_SEED)
    }

    pub fn n_fluctuators(&self) -> usize {
        self.bath
            .as_ref()
            .and_then(|b| b.n_fluctuators)
            .unwrap_or(dephasim_core::diffusion::DEFAULT_FLUCTUATORS)
    }

    pub fn engine(&self) -> EngineKind {
        self.bath.as_ref().and_then(|b| b.engine).unwrap_or(EngineKind::Telegraph)
    }

    pub fn solver_config(&self, spec: &EnsembleSpec, qubit: &QubitParams) -> CliResult<SolverConfig> {
        let mut solver = SolverConfig::for_device(spec, qubit);
        if let Some(s) = &self.solver {
            if let Some(mode) = s.mode {
                solver.mode = mode;
            }
            if let Some(dt) = s.dt {
                solver.dt = us_to_s(dt);
            }
            if let Some(m) = s.m_max {
                solver.m_max = m;
            }
            if let Some(tol) = s.bessel_tol {
                solver.bessel_tol = tol;
            }
        }
        solver.validate()?;
        Ok(solver)
    }

    /// Harness configuration, with command-line overrides for seed and run count.
    pub fn run_config(&self, seed: Option<u64>, runs: Option<usize>) -> CliResult<RunConfig> {
        if self.ensemble.as_ref().is_some_and(|e| e.tls_detunings.is_some()) {
            return Err(CliError::config("`tls_detunings` is only accepted by `validate`"));
        }
        let qubit = self.qubit_params()?;
        let ensemble = self.ensemble_spec()?;
        let cfg = RunConfig {
            n_runs: runs.unwrap_or_else(|| self.runs()),
            seed: seed.unwrap_or_else(|| self.seed()),
            grid: self.grid()?,
            engine: self.engine(),
            n_fluctuators: self.n_fluctuators(),
            solver: self.solver_config(&ensemble, &qubit)?,
            ensemble,
            qubit,
            resample_ensemble_per_run: self.run.as_ref().and_then(|r| r.resample).unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sweep temperatures (K, log-spaced), `T*` and `T_{1,T}(T*)` in seconds.
    pub fn sweep_grid(&self) -> CliResult<(Vec<f64>, f64, f64)> {
        let s = section(&self.sweep, "sweep", "t_min")?;
        let lo = need(&s.t_min, "sweep", "t_min")?;
        let hi = need(&s.t_max, "sweep", "t_max")?;
        let n = need(&s.points, "sweep", "points")?;
        if !(lo > 0.0 && hi > lo) {
            return Err(CliError::config(format!("sweep needs 0 < t_min < t_max, got {lo} and {hi}")));
        }
        if n < 3 {
            return Err(CliError::config(format!("sweep needs at least 3 points, got {n}")));
        }
        let temps = (0..n)
            .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
            .collect();
        let t_star = s.t_star.unwrap_or((lo * hi).sqrt());
        if !(t_star > 0.0) {
            return Err(CliError::config(format!("t_star must be positive, got {t_star}")));
        }
        let t1_star = us_to_s(s.t1_thermal_star.unwrap_or(DEFAULT_T1_AT_STAR_US));
        if !(t1_star > 0.0) {
            return Err(CliError::config("t1_thermal_star must be positive"));
        }
        Ok((temps, t_star, t1_star))
    }
}
