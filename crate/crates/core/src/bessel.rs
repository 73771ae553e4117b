//! Bessel sideband weights for harmonic phase modulation.

use serde::{Deserialize, Serialize};

/// One sideband `J_m(x)` of `exp(i x sin Ωt) = Σ_m J_m(x) e^{imΩt}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sideband {
    pub m: i32,
    pub j: f64,
}

/// Integer Bessel functions `J_0(x) ..= J_n(x)` for `x ≥ 0` by Miller's backward recurrence,
/// normalised with `J_0² + 2 Σ_{k≥1} J_k² = 1`.
pub fn bessel_j_upto(n: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel argument must be finite and non-negative");
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = {
        let s = n.max(x.ceil() as usize) + 30 + (10.0 * x.sqrt()) as usize;
        s + (s & 1)
    };
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-30;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        // Keep squares finite for the normalisation sum.
        if vals[k - 1].abs() > 1e100 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-100;
            }
        }
    }
    let mut norm = vals[0] * vals[0];
    let mut even_sum = vals[0];
    for (k, v) in vals.iter().enumerate().skip(1) {
        norm += 2.0 * v * v;
        if k % 2 == 0 {
            even_sum += 2.0 * v;
        }
    }
    // J_0 + 2 Σ J_{2k} = 1 fixes the overall sign.
    let scale = even_sum.signum() / norm.sqrt();
    for (o, v) in out.iter_mut().zip(&vals) {
        *o = v * scale;
    }
    out
}

/// `J_n(x)` for any integer order and `x ≥ 0`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let k = n.unsigned_abs() as usize;
    let v = bessel_j_upto(k, x)[k];
    if n < 0 && k % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Sideband weights `J_m(x)` for `|m| ≤ M`, ordered by `m`.
///
/// `M` is the smallest order for which `Σ_{|m|≤M} J_m² ≥ 1 − tol`, never above
/// `ceil(x) + 20`. Returns the single weight `J_0 = 1` at `x = 0`.
pub fn bessel_weights(x: f64, tol: f64) -> Vec<Sideband> {
    assert!(tol > 0.0 && tol < 1.0, "tol must lie in (0, 1)");
    let cap = x.ceil() as usize + 20;
    let js = bessel_j_upto(cap, x);
    let mut acc = js[0] * js[0];
    let mut order = 0;
    while order < cap && acc < 1.0 - tol {
        order += 1;
        acc += 2.0 * js[order] * js[order];
    }
    let mut out = Vec::with_capacity(2 * order + 1);
    for m in -(order as i32)..=(order as i32) {
        let k = m.unsigned_abs() as usize;
        let j = if m < 0 && k % 2 == 1 { -js[k] } else { js[k] };
        if x == 0.0 && m != 0 {
            continue;
        }
        out.push(Sideband { m, j });
    }
    out
}

/// Modulation suppression factor `S₄(x) = Σ_m J_m(x)⁴` summed over all orders.
pub fn s4(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let js = bessel_j_upto(x.ceil() as usize + 40, x);
    js[0].powi(4) + 2.0 * js[1..].iter().map(|j| j.powi(4)).sum::<f64>()
}

/// `Σ J_m⁴` over an already truncated weight list.
pub fn s4_of(weights: &[Sideband]) -> f64 {
    weights.iter().map(|w| w.j.powi(4)).sum()
}
