//! `M = |⟨a⟩|`, `R = √⟨|a|²⟩` and `D = M/R` from per-run log amplitudes.

use num_complex::Complex64;

use super::DephasingCurve;
use crate::error::{Error, Result};
use crate::stats::{jackknife_stderr, pairwise_sum};

/// Relative overshoot of `M` over `R` attributed to rounding.
const ROUNDING_SLACK: f64 = 1e-12;

/// Builds the curve from `ln a` of each run.
///
/// At every grid point amplitudes are rescaled by `exp(−max_r Re ln a_r)` before summing, so
/// strongly decayed runs neither underflow nor dominate; `D` is independent of the scale.
pub fn estimate(times: &[f64], log_amps: &[Vec<Complex64>]) -> Result<DephasingCurve> {
    let n = log_amps.len();
    if n < 2 {
        return Err(Error::precondition(format!("need at least 2 runs, got {n}")));
    }
    if let Some(bad) = log_amps.iter().position(|r| r.len() != times.len()) {
        return Err(Error::precondition(format!("run {bad} has the wrong number of grid points")));
    }
    let nf = n as f64;
    let mut curve = DephasingCurve {
        times: times.to_vec(),
        m_abs: Vec::with_capacity(times.len()),
        r_rms: Vec::with_capacity(times.len()),
        d: Vec::with_capacity(times.len()),
        d_err: Vec::with_capacity(times.len()),
        n_runs: n,
    };
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    let mut sq = vec![0.0; n];
    let mut loo = Vec::with_capacity(n);
    for k in 0..times.len() {
        let shift = log_amps.iter().map(|r| r[k].re).fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::numeric(format!("no finite amplitude at t = {:e}", times[k])));
        }
        for (r, run) in log_amps.iter().enumerate() {
            let a = (run[k] - shift).exp();
            re[r] = a.re;
            im[r] = a.im;
            sq[r] = a.norm_sqr();
        }
        let (s_re, s_im, q) = (pairwise_sum(&re), pairwise_sum(&im), pairwise_sum(&sq));
        let mean_abs = s_re.hypot(s_im) / nf;
        let rms = (q / nf).sqrt();
        let mut m = mean_abs;
        if m > rms {
            if m - rms > ROUNDING_SLACK * rms {
                return Err(Error::numeric(format!(
                    "|<a>| exceeds sqrt(<|a|^2>) beyond rounding at t = {:e}",
                    times[k]
                )));
            }
            m = rms;
        }
        let d = m / rms;

        loo.clear();
        for r in 0..n {
            let q_r = q - sq[r];
            if q_r > 0.0 {
                let m_r = (s_re - re[r]).hypot(s_im - im[r]) / (nf - 1.0);
                loo.push((m_r / (q_r / (nf - 1.0)).sqrt()).min(1.0));
            }
        }
        let err = if loo.len() >= 2 { jackknife_stderr(&loo) } else { 0.0 };

        let scale = shift.exp();
        curve.m_abs.push(m * scale);
        curve.r_rms.push(rms * scale);
        curve.d.push(d);
        curve.d_err.push(if err.is_finite() { err } else { 0.0 });
    }
    Ok(curve)
}
