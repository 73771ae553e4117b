//! Full single-excitation equations for the qubit amplitude and the TLS amplitudes.
//!
//! In the frame `β_n = e^{iθ_n} b_n`, `θ_n = E0 t + φ(t) − ∫ε_n + iγ_n t`, the equations read
//!
//! ```text
//! ȧ   = −(i/2) Σ_n g_n β_n
//! β̇_n = [i(E0 + A cos Ωt − ε_n(t)) − γ_n] β_n − (i/2) g_n a
//! ```
//!
//! and `|a|² + Σ|β_n|²` is the surviving excitation probability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ode::{Dopri5, Tolerances};
use super::AmplitudeRecord;
use crate::diffusion::{check_grid, ShiftPath};
use crate::ensemble::{QubitParams, TlsParams};
use crate::error::{Error, Result};

/// Largest ensemble accepted by the full solver.
pub const MAX_FULL_TLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullSolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for FullSolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-8,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullSolution {
    pub times: Vec<f64>,
    pub a: Vec<Complex64>,
    /// `|a|² + Σ|β_n|²` at each grid time.
    pub excitation: Vec<f64>,
    pub steps: usize,
}

pub fn solve_full(
    ensemble: &[TlsParams],
    qubit: &QubitParams,
    paths: &[ShiftPath],
    times: &[f64],
    cfg: &FullSolverConfig,
) -> Result<FullSolution> {
    check_grid(times)?;
    if ensemble.len() > MAX_FULL_TLS {
        return Err(Error::precondition(format!(
            "full solver takes at most {MAX_FULL_TLS} TLSs, got {}",
            ensemble.len()
        )));
    }
    if paths.len() != ensemble.len() {
        return Err(Error::precondition(format!("{} paths for {} TLSs", paths.len(), ensemble.len())));
    }
    let horizon = *times.last().expect("grid is non-empty");

    // Breakpoints: grid times and every jump of every path.
    let mut breaks: Vec<f64> = times.to_vec();
    for p in paths {
        breaks.extend(p.jump_times.iter().copied().filter(|&t| t > 0.0 && t < horizon));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let n = ensemble.len();
    let base: Vec<f64> = ensemble
        .iter()
        .zip(paths)
        .map(|(t, p)| qubit.e0 - t.eps0 - p.x)
        .collect();
    let mut detuning = base.clone();
    let mut cursor = vec![0usize; n];

    let max_rate = ensemble
        .iter()
        .zip(&base)
        .map(|(t, d)| d.abs() + t.gamma + t.g)
        .fold(qubit.a_mod + 1.0 / horizon.max(f64::MIN_POSITIVE), f64::max);
    let mut ode = Dopri5::new(n + 1, 0.05 / max_rate);
    let tol = Tolerances {
        rtol: cfg.rtol,
        atol: cfg.atol,
        max_steps: cfg.max_steps,
    };

    let mut y = vec![Complex64::new(0.0, 0.0); n + 1];
    y[0] = Complex64::new(1.0, 0.0);
    let excitation = |y: &[Complex64]| y.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut a_out = Vec::with_capacity(times.len());
    let mut exc_out = Vec::with_capacity(times.len());
    a_out.push(y[0]);
    exc_out.push(excitation(&y));
    let mut next_grid = 1;

    for w in breaks.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        // Paths are right-continuous: the value on (t0, t1) is the one from t0 on.
        for (i, p) in paths.iter().enumerate() {
            while cursor[i] < p.jump_times.len() && p.jump_times[cursor[i]] <= t0 {
                cursor[i] += 1;
            }
            let yv = if cursor[i] == 0 { 0.0 } else { p.y_after[cursor[i] - 1] };
            detuning[i] = base[i] - yv;
        }
        let mut rhs = |t: f64, s: &[Complex64], ds: &mut [Complex64]| {
            let modulation = if qubit.a_mod > 0.0 {
                qubit.a_mod * (qubit.omega_mod * t).cos()
            } else {
                0.0
            };
            let a = s[0];
            let mut da = Complex64::new(0.0, 0.0);
            for (k, tls) in ensemble.iter().enumerate() {
                let b = s[k + 1];
                let half_g = 0.5 * tls.g;
                da += Complex64::new(0.0, -half_g) * b;
                ds[k + 1] = Complex64::new(-tls.gamma, detuning[k] + modulation) * b + Complex64::new(0.0, -half_g) * a;
            }
            ds[0] = da;
        };
        ode.integrate(&mut rhs, t0, t1, &mut y, &tol)?;
        if next_grid < times.len() && times[next_grid] == t1 {
            a_out.push(y[0]);
            exc_out.push(excitation(&y));
            next_grid += 1;
        }
    }
    debug_assert_eq!(a_out.len(), times.len());
    Ok(FullSolution {
        times: times.to_vec(),
        a: a_out,
        excitation: exc_out,
        steps: ode.steps,
    })
}

/// Full-solver amplitude for frozen diffusion paths.
pub fn evolve_full(
    ensemble: &[TlsParams],
    qubit: &QubitParams,
    paths: &[ShiftPath],
    times: &[f64],
) -> Result<AmplitudeRecord> {
    let sol = solve_full(ensemble, qubit, paths, times, &FullSolverConfig::default())?;
    Ok(AmplitudeRecord {
        times: sol.times,
        a: sol.a,
        seed: 0,
        run: 0,
        engine: None,
    })
}
