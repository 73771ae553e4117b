use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use dephasim_core::analytics::{crossover_diagnostics, dephasing_law_branch, temperature_sweep, Calibration, LawParams};
use dephasim_core::diffusion::{stationary_density, telegraph_path};
use dephasim_core::dynamics::{log_amplitude, solve_full, FullSolverConfig, MAX_FULL_TLS};
use dephasim_core::harness::{fit_powerlaw, persist_run, run_experiment_with};
use dephasim_core::rng::{stream, AUX_SLOT};
use dephasim_core::stats::{ks_one_sample, KsResult};
use dephasim_core::units::{rad_s_to_mhz, s_to_us};
use dephasim_core::{EngineConfig, ThermalBathParams};
use serde_json::{json, Value};

use crate::config::CliConfig;
use crate::error::{CliError, CliResult};
use crate::plot::{write_script, PlotKind};

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("cannot write {}: {e}", path.display()))
}

/// Writes `text` to `out`, or to stdout without one.
fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn emit_json(value: &Value, out: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    emit(&text, out)
}

fn plot_for(kind: PlotKind, out: Option<&Path>, plot: bool) -> CliResult<()> {
    if !plot {
        return Ok(());
    }
    let csv = out.ok_or_else(|| CliError::config("--plot needs --out"))?;
    let script = write_script(kind, csv)?;
    eprintln!("gnuplot script written to {}", script.display());
    Ok(())
}

pub struct SimulateArgs {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub plot: bool,
}

pub fn simulate(cfg: &CliConfig, args: &SimulateArgs) -> CliResult<String> {
    let rc = cfg.run_config(args.seed, args.runs)?;
    if args.threads == Some(0) {
        return Err(CliError::config("--threads must be at least 1"));
    }
    let (curve, timing) = run_experiment_with(&rc, args.threads)?;
    let csv = persist_run(&rc, &curve, &timing, &args.out)?;
    plot_for(PlotKind::Curve, Some(&csv), args.plot)?;

    let law = LawParams::from_spec(&rc.ensemble);
    let t_tilde = law.t_crossover();
    let class = crossover_diagnostics(&law, rc.qubit.mod_index())
        .map(|r| r.classification.to_string())
        .unwrap_or_else(|_| "n/a".into());
    let first = curve.times.iter().copied().find(|&t| t > 0.0).unwrap_or(0.0);
    let hi = (0.3 * t_tilde).min(rc.grid.stop);
    let exponent = fit_powerlaw(&curve, (first, hi))
        .map(|f| format!("{:.3} +/- {:.3}", f.exponent, f.stderr))
        .unwrap_or_else(|_| "n/a".into());
    Ok(format!(
        "t_tilde = {:.4} us, classification = {class}, short-time exponent = {exponent} ({} runs, {:.2} s on {} threads); wrote {} and {}",
        s_to_us(t_tilde),
        rc.n_runs,
        timing.wall_seconds,
        timing.threads,
        args.out.display(),
        csv.display()
    ))
}

pub fn show_config(cfg: &CliConfig, out: Option<&Path>) -> CliResult<()> {
    emit(&cfg.serialize(), out)
}

pub fn analytic(cfg: &CliConfig, out: Option<&Path>, plot: bool) -> CliResult<()> {
    let law = cfg.law_params()?;
    let x = cfg.mod_index()?;
    let mut text = String::from("t_us,neg2lnD,branch_id\n");
    for t in cfg.grid()?.times()? {
        let (v, branch) = dephasing_law_branch(&law, x, t)?;
        text.push_str(&format!("{},{v},{branch}\n", s_to_us(t)));
    }
    emit(&text, out)?;
    plot_for(PlotKind::Law, out, plot)
}

pub fn regime(cfg: &CliConfig, out: Option<&Path>) -> CliResult<()> {
    let law = cfg.law_params()?;
    let x = cfg.mod_index()?;
    let r = crossover_diagnostics(&law, x)?;
    let per_us = |rate: f64| rate * 1e-6;
    emit_json(
        &json!({
            "classification": r.classification.to_string(),
            "t_crossover_us": s_to_us(r.t_crossover),
            "neg2lnD_at_crossover": r.neg2lnd_at_crossover,
            "markov_number": r.markov_number,
            "markov_ok": r.markov_ok,
            "gamma_1q_per_us": per_us(r.gamma_1q),
            "gamma_phi_per_us": r.gamma_phi.map(per_us),
            "modulation_index": x,
        }),
        out,
    )
}

pub fn sweep(cfg: &CliConfig, out: Option<&Path>, plot: bool) -> CliResult<String> {
    let (temps, t_star, t1_star) = cfg.sweep_grid()?;
    let spec = cfg.ensemble_spec_at(t1_star)?;
    let base = LawParams {
        t1_thermal: t1_star,
        ..LawParams::from_spec(&spec)
    };
    let cal = Calibration::centred(base.gamma, t_star, t1_star);
    let points = temperature_sweep(&base, &cal, &temps, cfg.mod_index()?)?;
    let mut text = String::from("T_K,gamma_phi,gamma_phi_long\n");
    for p in &points {
        text.push_str(&format!("{},{},{}\n", p.temperature, p.gamma_phi * 1e-6, p.gamma_phi_long * 1e-6));
    }
    emit(&text, out)?;
    plot_for(PlotKind::Sweep, out, plot)?;
    let peak = points
        .iter()
        .max_by(|a, b| a.gamma_phi.total_cmp(&b.gamma_phi))
        .expect("sweep has points");
    Ok(format!(
        "peak Gamma_phi = {:.4e} /us at T = {:.4} K (mu_av = gamma at T = {t_star:.4} K)",
        peak.gamma_phi * 1e-6,
        peak.temperature
    ))
}

/// Tabulated CDF of `stationary_density` on `|z| ≤ reach`, uniform in `atan(z/μ_av)`.
struct TabulatedCdf {
    z: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedCdf {
    fn stationary(bath: &ThermalBathParams, points: usize) -> CliResult<Self> {
        let mu = bath.mu_av;
        let reach = 20.0 * bath.mu_max.max(mu);
        let edge = (reach / mu).atan();
        let theta: Vec<f64> = (0..points)
            .map(|k| -edge + 2.0 * edge * k as f64 / (points - 1) as f64)
            .collect();
        let z: Vec<f64> = theta.iter().map(|t| mu * t.tan()).collect();
        let g = theta
            .iter()
            .zip(&z)
            .map(|(t, &z)| Ok(stationary_density(z, bath)? * mu / t.cos().powi(2)))
            .collect::<CliResult<Vec<f64>>>()?;
        let h = theta[1] - theta[0];
        let mut cdf = vec![0.0; points];
        for k in 1..points {
            cdf[k] = cdf[k - 1] + 0.5 * h * (g[k - 1] + g[k]);
        }
        let total = cdf[points - 1];
        for c in &mut cdf {
            *c /= total;
        }
        Ok(Self { z, cdf })
    }

    fn eval(&self, z: f64) -> f64 {
        let k = self.z.partition_point(|&v| v <= z);
        if k == 0 {
            return 0.0;
        }
        if k == self.z.len() {
            return 1.0;
        }
        let (z0, z1) = (self.z[k - 1], self.z[k]);
        let w = (z - z0) / (z1 - z0);
        self.cdf[k - 1] + w * (self.cdf[k] - self.cdf[k - 1])
    }
}

fn ks_json(t: f64, samples: usize, ks: &KsResult) -> Value {
    json!({
        "t_us": s_to_us(t),
        "samples": samples,
        "ks_statistic": ks.statistic,
        "p_value": ks.p_value,
    })
}

pub fn oracle_diffusion(cfg: &CliConfig, seed: Option<u64>, runs: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let spec = cfg.ensemble_spec()?;
    let bath = ThermalBathParams::from_spec(&spec, cfg.n_fluctuators());
    bath.validate()?;
    if bath.is_static() || bath.kappa == 0.0 {
        return Err(CliError::config("oracle-diffusion needs mu_av > 0 and a finite t1_thermal"));
    }
    let samples = runs.unwrap_or_else(|| cfg.runs());
    if samples < 2 {
        return Err(CliError::config(format!("need at least 2 samples, got {samples}")));
    }
    let seed = seed.unwrap_or_else(|| cfg.seed());

    let t_short = 0.05 / bath.kappa;
    let width = bath.m_rate() * t_short;
    let mut ys = (0..samples as u64)
        .map(|r| Ok(telegraph_path(&bath, t_short, t_short, &mut stream(seed, r, AUX_SLOT))?.y_at(t_short)))
        .collect::<CliResult<Vec<f64>>>()?;
    // CDF of the Lorentzian propagator density.
    let short = ks_one_sample(&mut ys, |y| 0.5 + (y / width).atan() / PI);

    let t_long = 10.0 / bath.kappa;
    let mut zs = (0..samples as u64)
        .map(|r| {
            let p = telegraph_path(&bath, t_long, t_long / 10.0, &mut stream(seed, r, AUX_SLOT - 1))?;
            Ok(p.x + p.y_at(t_long))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let table = TabulatedCdf::stationary(&bath, 2001)?;
    let long = ks_one_sample(&mut zs, |z| table.eval(z));

    emit_json(
        &json!({
            "engine": "telegraph",
            "n_fluctuators": bath.n_fluctuators,
            "mu_av_mhz": rad_s_to_mhz(bath.mu_av),
            "mu_max_mhz": rad_s_to_mhz(bath.mu_max),
            "propagator": ks_json(t_short, samples, &short),
            "stationary": ks_json(t_long, samples, &long),
        }),
        out,
    )
}

pub fn validate(cfg: &CliConfig, seed: Option<u64>, runs: Option<usize>, out: Option<&Path>) -> CliResult<bool> {
    let qubit = cfg.qubit_params()?;
    let spec = cfg.ensemble_spec()?;
    let ensemble = match cfg.explicit_tls()? {
        Some(tls) => tls,
        None => {
            let rc = cfg.run_config(seed, runs)?;
            rc.device_ensemble()?
        }
    };
    if ensemble.len() > MAX_FULL_TLS {
        return Err(CliError::config(format!(
            "validate compares against the full solver, which takes at most {MAX_FULL_TLS} TLSs (this device has {})",
            ensemble.len()
        )));
    }
    let times = cfg.grid()?.times()?;
    let runs = runs.unwrap_or_else(|| cfg.runs().min(16));
    if runs == 0 {
        return Err(CliError::config("need at least 1 run"));
    }
    let seed = seed.unwrap_or_else(|| cfg.seed());
    let engine = EngineConfig {
        kind: cfg.engine(),
        n_fluctuators: cfg.n_fluctuators(),
        ka_dt: cfg.solver_config(&spec, &qubit)?.dt,
    };
    let weights = cfg.solver_config(&spec, &qubit)?.sidebands(&qubit);
    let horizon = *times.last().expect("grid is non-empty");
    let widest = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);

    let (mut worst_abs, mut worst_complex) = (0.0f64, 0.0f64);
    let mut worst_at = (0usize, 0.0f64);
    for run in 0..runs {
        let paths = ensemble
            .iter()
            .enumerate()
            .map(|(n, tls)| {
                let bath = ThermalBathParams::for_tls(tls, spec.r_thermal, engine.n_fluctuators);
                engine.realize(&bath, horizon, widest, &mut stream(seed, run as u64, n as u32))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let markov = log_amplitude(&ensemble, &paths, &qubit, &weights, &times)?;
        let full = solve_full(&ensemble, &qubit, &paths, &times, &FullSolverConfig::default())?;
        for ((phi, a), &t) in markov.iter().zip(&full.a).zip(&times) {
            let m = phi.exp();
            let dev = (m.norm() - a.norm()).abs() / a.norm();
            if dev > worst_abs {
                worst_abs = dev;
                worst_at = (run, t);
            }
            worst_complex = worst_complex.max((m - a).norm() / a.norm());
        }
    }
    let agree = worst_abs <= 0.01;
    emit_json(
        &json!({
            "tls": ensemble.len(),
            "runs": runs,
            "t_stop_us": s_to_us(horizon),
            "max_rel_abs_deviation": worst_abs,
            "max_rel_complex_deviation": worst_complex,
            "worst_run": worst_at.0,
            "worst_t_us": s_to_us(worst_at.1),
            "within_1_percent": agree,
        }),
        out,
    )?;
    Ok(agree)
}
