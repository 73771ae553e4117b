//! Closed-form correlators and asymptotic dephasing laws.
//!
//! Every `∼` relation is evaluated with its order-one constant set to 1. Ensemble-level laws use
//! the resonance estimate `Σ_n g⁴/(μ² + Δ²) ≈ g_max⁴/(δ μ)`; [`resonance_sum`] gives the explicit
//! sum over a sampled ensemble.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_weights, s4, Sideband};
use crate::dynamics::DEFAULT_BESSEL_TOL;
use crate::ensemble::{EnsembleSpec, QubitParams, TlsParams};
use crate::error::{Error, Result};

/// `−2 ln D(t̃)` above which the quasi-static part dominates.
pub const QUASI_STATIC_THRESHOLD: f64 = 1.0;

/// Ensemble-level parameters of the dephasing law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawParams {
    pub g_max: f64,
    pub delta_typ: f64,
    pub gamma: f64,
    pub mu_av: f64,
    pub mu_max: f64,
    pub t1_thermal: f64,
}

impl LawParams {
    pub fn from_spec(spec: &EnsembleSpec) -> Self {
        Self {
            g_max: spec.g_max,
            delta_typ: spec.delta_typ,
            gamma: spec.gamma,
            mu_av: spec.mu_av,
            mu_max: spec.mu_max,
            t1_thermal: spec.t1_thermal(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("g_max", self.g_max),
            ("delta_typ", self.delta_typ),
            ("gamma", self.gamma),
            ("t1_thermal", self.t1_thermal),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::precondition(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mu_av >= 0.0 && self.mu_max >= self.mu_av && self.mu_max.is_finite()) {
            return Err(Error::precondition(format!(
                "need 0 <= mu_av <= mu_max, got {} and {}",
                self.mu_av, self.mu_max
            )));
        }
        Ok(())
    }

    /// `Γ_{1,q} = g_max²/δ`.
    pub fn golden_rule_rate(&self) -> f64 {
        self.g_max * self.g_max / self.delta_typ
    }

    /// Initial slope of the diffusion width, `μ_av/T_{1,T}`.
    pub fn alpha(&self) -> f64 {
        self.mu_av / self.t1_thermal
    }

    /// `t̃ = (γ/μ_av)·T_{1,T}`.
    pub fn t_crossover(&self) -> f64 {
        self.gamma / self.mu_av * self.t1_thermal
    }

    /// `T_{1,T}·γ·(γ/μ_av)`; the Markov treatment needs this above 1.
    pub fn markov_number(&self) -> f64 {
        self.t1_thermal * self.gamma * self.gamma / self.mu_av
    }

    /// `g_max⁴ S₄/δ`, the prefactor shared by all branches.
    fn prefactor(&self, x: f64) -> f64 {
        self.g_max.powi(4) / self.delta_typ * s4(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    QuasiStaticDominant,
    DynamicalSubdominant,
    SmallDiffusion,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::QuasiStaticDominant => "quasi-static-dominant",
            Classification::DynamicalSubdominant => "dynamical-subdominant",
            Classification::SmallDiffusion => "small-diffusion",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// `t̃` (s).
    pub t_crossover: f64,
    pub neg2lnd_at_crossover: f64,
    pub markov_number: f64,
    pub markov_ok: bool,
    pub classification: Classification,
    /// `Γ_{1,q}` (1/s).
    pub gamma_1q: f64,
    /// Inverse of the time at which `−2 ln D = 2`, when a law applies.
    pub gamma_phi: Option<f64>,
}

/// Which closed form to use for the TLS averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `t ≪ T_{1,T}`: the quasi-static shift is a fixed Lorentzian draw.
    Short,
    /// `t ≫ T_{1,T}`: the shift has relaxed to its stationary law.
    Long,
}

fn weights_for(qubit: &QubitParams) -> Vec<Sideband> {
    bessel_weights(qubit.mod_index(), DEFAULT_BESSEL_TOL)
}

fn check_main_regime(tls: &TlsParams) -> Result<()> {
    if tls.mu_av < tls.gamma {
        return Err(Error::precondition(format!(
            "closed forms need mu_av >= gamma (got {} < {}); use the small-diffusion forms",
            tls.mu_av, tls.gamma
        )));
    }
    Ok(())
}

/// `Σ_m J_m⁴/(μ_av² + (Δ + mΩ)²)` for one TLS.
pub fn sideband_resonance(tls: &TlsParams, qubit: &QubitParams) -> f64 {
    let det = tls.detuning(qubit);
    weights_for(qubit)
        .iter()
        .map(|w| {
            let d = det + w.m as f64 * qubit.omega_mod;
            w.j.powi(4) / (tls.mu_av * tls.mu_av + d * d)
        })
        .sum()
}

/// Explicit `Σ_n g_n⁴ Σ_m J_m⁴/(μ_av² + (Δ_n + mΩ)²)` over an ensemble.
pub fn resonance_sum(ensemble: &[TlsParams], qubit: &QubitParams) -> f64 {
    ensemble.iter().map(|t| t.g.powi(4) * sideband_resonance(t, qubit)).sum()
}

/// The estimate `g_max⁴/(δ μ_av)` of the unmodulated resonance sum.
pub fn resonance_sum_estimate(params: &LawParams) -> f64 {
    params.g_max.powi(4) / (params.delta_typ * params.mu_av)
}

/// Mean of the Markov coefficient over the diffusion.
pub fn mean_c(tls: &TlsParams, qubit: &QubitParams, regime: Regime) -> Complex64 {
    let width = match regime {
        Regime::Short => tls.mu_av,
        Regime::Long => tls.gamma + tls.mu_av,
    };
    let det = tls.detuning(qubit);
    let sum: Complex64 = weights_for(qubit)
        .iter()
        .map(|w| w.j * w.j / Complex64::new(width, -(det + w.m as f64 * qubit.omega_mod)))
        .sum();
    sum * (0.25 * tls.g * tls.g)
}

/// `⟨C(t1) C*(t2)⟩` from the closed forms, with `W(τ) = (μ_av/T_{1,T})|τ|`.
pub fn correlator_closed(
    tls: &TlsParams,
    qubit: &QubitParams,
    t1_thermal: f64,
    t1: f64,
    t2: f64,
    regime: Regime,
) -> Result<Complex64> {
    let tau = (t1 - t2).abs();
    let w = tls.mu_av / t1_thermal * tau;
    let g4 = tls.g.powi(4);
    match regime {
        Regime::Short => {
            check_main_regime(tls)?;
            let value = g4 * tls.mu_av / (8.0 * (2.0 * tls.gamma + w)) * sideband_resonance(tls, qubit);
            Ok(Complex64::new(value, 0.0))
        }
        Regime::Long => {
            let det = tls.detuning(qubit);
            let weights = weights_for(qubit);
            let relaxed = tls.gamma + tls.mu_av;
            let second = if tau >= t1_thermal { relaxed } else { tls.gamma + w };
            let mut left = Complex64::new(0.0, 0.0);
            let mut right = Complex64::new(0.0, 0.0);
            for s in &weights {
                let d = det + s.m as f64 * qubit.omega_mod;
                left += s.j * s.j / Complex64::new(relaxed, d);
                right += s.j * s.j / Complex64::new(second, -d);
            }
            Ok(left * right * (g4 / 16.0))
        }
    }
}

/// `(1 + u) ln(1 + u) − u`.
fn h(u: f64) -> f64 {
    if u < 1e-2 {
        let u2 = u * u;
        u2 * (0.5 - u / 6.0 + u2 / 12.0 - u2 * u / 20.0 + u2 * u2 / 30.0 - u2 * u2 * u / 42.0)
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

/// `−t/α + (αt + γ)/α² · ln(1 + αt/γ) = ∫_0^t (t − τ)/(γ + ατ) dτ`.
pub fn exact_bracket(t: f64, alpha: f64, gamma: f64) -> f64 {
    if alpha == 0.0 {
        return t * t / (2.0 * gamma);
    }
    gamma / (alpha * alpha) * h(alpha * t / gamma)
}

/// Quasi-static limit of [`exact_bracket`]: `t²/(2γ)`.
pub fn bracket_quasi_static(t: f64, gamma: f64) -> f64 {
    t * t / (2.0 * gamma)
}

/// Intermediate-time limit of [`exact_bracket`]: `(t/α) ln(αt/γ)`.
pub fn bracket_logarithmic(t: f64, alpha: f64, gamma: f64) -> f64 {
    t / alpha * (alpha * t / gamma).ln()
}

/// `∫∫ ⟨δC δC*⟩` over `[0, t]²` for one TLS at `t ≤ T_{1,T}`.
pub fn cumulant_exact_shorttime(tls: &TlsParams, qubit: &QubitParams, t1_thermal: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t <= t1_thermal) {
        return Err(Error::precondition(format!(
            "short-time cumulant needs 0 <= t <= T1,T (t = {t:e}, T1,T = {t1_thermal:e})"
        )));
    }
    let alpha = tls.mu_av / t1_thermal;
    Ok(0.25 * tls.g.powi(4) * tls.mu_av * exact_bracket(t, alpha, tls.gamma) * sideband_resonance(tls, qubit))
}

/// Three-branch `−2 ln D(t)` together with the branch index (1, 2 or 3).
pub fn dephasing_law_branch(params: &LawParams, x: f64, t: f64) -> Result<(f64, u8)> {
    params.validate()?;
    if params.mu_av <= params.gamma {
        return Err(Error::precondition(format!(
            "dephasing law needs mu_av > gamma (got {} <= {})",
            params.mu_av, params.gamma
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::precondition(format!("time must be non-negative, got {t}")));
    }
    let k = params.prefactor(x);
    let alpha = params.alpha();
    let t1 = params.t1_thermal;
    if t <= t1 {
        let branch = if t <= params.t_crossover() { 1 } else { 2 };
        return Ok((2.0 * k * exact_bracket(t, alpha, params.gamma), branch));
    }
    let anchor = 2.0 * k * exact_bracket(t1, alpha, params.gamma);
    let slope = k * t1 / params.mu_av * (params.mu_av / params.gamma).ln();
    Ok((anchor + slope * (t - t1), 3))
}

/// Three-branch `−2 ln D(t)`.
pub fn dephasing_law(params: &LawParams, x: f64, t: f64) -> Result<f64> {
    dephasing_law_branch(params, x, t).map(|(v, _)| v)
}

/// Long-time dephasing rate `g_max⁴ S₄/δ · T_{1,T}/μ_av`, without the logarithm.
pub fn long_time_rate(params: &LawParams, x: f64) -> f64 {
    params.prefactor(x) * params.t1_thermal / params.mu_av
}

fn small_diffusion_value(params: &LawParams, x: f64, t: f64) -> f64 {
    let gt = params.golden_rule_rate() * t;
    let r = params.mu_max / params.gamma;
    gt * gt * r * r * (params.delta_typ / params.gamma) * s4(x)
}

/// `(Γ_{1,q} t)² (μ_max/γ)² (δ/γ) S₄(x)`, valid for `μ_max < γ` and `δ < γ`.
pub fn small_diffusion_law(params: &LawParams, x: f64, t: f64) -> Result<f64> {
    params.validate()?;
    if params.mu_max >= params.gamma {
        return Err(Error::precondition(format!(
            "small-diffusion law needs mu_max < gamma (got {} >= {})",
            params.mu_max, params.gamma
        )));
    }
    if params.delta_typ >= params.gamma {
        return Err(Error::precondition(format!(
            "small-diffusion law needs delta_typ < gamma (got {} >= {})",
            params.delta_typ, params.gamma
        )));
    }
    Ok(small_diffusion_value(params, x, t))
}

/// Per-TLS `⟨δC δC*⟩` when `μ_max ≪ γ`: `(g⁴/16) Σ_m J_m⁴ μ_max²/(γ² + (Δ + mΩ)²)²`.
pub fn small_diffusion_correlator(tls: &TlsParams, qubit: &QubitParams) -> f64 {
    let det = tls.detuning(qubit);
    let sum: f64 = weights_for(qubit)
        .iter()
        .map(|w| {
            let d = det + w.m as f64 * qubit.omega_mod;
            let l = tls.gamma * tls.gamma + d * d;
            w.j.powi(4) * tls.mu_max * tls.mu_max / (l * l)
        })
        .sum();
    tls.g.powi(4) / 16.0 * sum
}

/// Time at which a monotone `f` reaches `level`, by bracketing and bisection.
fn solve_level<F: Fn(f64) -> Result<f64>>(f: F, level: f64, t_guess: f64) -> Result<f64> {
    let mut hi = t_guess;
    let mut lo = 0.0;
    let mut n = 0;
    while f(hi)? < level {
        lo = hi;
        hi *= 2.0;
        n += 1;
        if n > 2000 || !hi.is_finite() {
            return Err(Error::numeric("dephasing law never reaches the requested level"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Effective `Γ_φ = 1/t_e` with `−2 ln D(t_e) = 2`.
///
/// Uses the main law when `μ_av > γ` and the small-diffusion law when `μ_max < γ`.
pub fn effective_dephasing_rate(params: &LawParams, x: f64) -> Result<f64> {
    params.validate()?;
    let guess = 1.0 / params.golden_rule_rate();
    let t_e = if params.mu_av > params.gamma {
        solve_level(|t| dephasing_law(params, x, t), 2.0, guess)?
    } else if params.mu_max < params.gamma {
        small_diffusion_time(params, x)?
    } else {
        return Err(Error::precondition(
            "no dephasing law covers mu_av <= gamma <= mu_max",
        ));
    };
    Ok(1.0 / t_e)
}

fn small_diffusion_time(params: &LawParams, x: f64) -> Result<f64> {
    let per_t2 = small_diffusion_value(params, x, 1.0);
    if per_t2 <= 0.0 {
        return Err(Error::numeric("no dephasing without diffusion"));
    }
    Ok((2.0 / per_t2).sqrt())
}

pub fn crossover_diagnostics(params: &LawParams, x: f64) -> Result<RegimeReport> {
    params.validate()?;
    if !(params.mu_av > 0.0) {
        return Err(Error::precondition("crossover diagnostics need mu_av > 0"));
    }
    let gamma_1q = params.golden_rule_rate();
    let g_t1 = gamma_1q * params.t1_thermal;
    let value = g_t1 * g_t1 * s4(x) * params.gamma * params.delta_typ / (params.mu_av * params.mu_av);
    let classification = if params.mu_max < params.gamma {
        Classification::SmallDiffusion
    } else if value > QUASI_STATIC_THRESHOLD {
        Classification::QuasiStaticDominant
    } else {
        Classification::DynamicalSubdominant
    };
    let markov_number = params.markov_number();
    Ok(RegimeReport {
        t_crossover: params.t_crossover(),
        neg2lnd_at_crossover: value,
        markov_number,
        markov_ok: markov_number > 1.0,
        classification,
        gamma_1q,
        gamma_phi: effective_dephasing_rate(params, x).ok(),
    })
}

/// Split of `ln √⟨|a(t)|²⟩` into its golden-rule and fluctuation parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationExponent {
    /// `−Σ_n Re⟨C_n⟩ t` (non-positive).
    pub golden_rule: f64,
    /// `Σ_n ∫∫ ⟨δC'_n δC'_n⟩` (non-negative).
    pub fluctuation: f64,
}

impl RelaxationExponent {
    pub fn total(&self) -> f64 {
        self.golden_rule + self.fluctuation
    }
}

/// Two-term exponent of `√⟨|a(t)|²⟩`.
///
/// The real-part covariance is taken as half of `⟨δC δC*⟩`. TLSs with `μ_av ≤ γ` use the
/// small-diffusion correlator, which is constant over the window.
pub fn relaxation_cumulant(
    ensemble: &[TlsParams],
    qubit: &QubitParams,
    t1_thermal: f64,
    t: f64,
) -> Result<RelaxationExponent> {
    let mut out = RelaxationExponent {
        golden_rule: 0.0,
        fluctuation: 0.0,
    };
    for tls in ensemble {
        out.golden_rule -= mean_c(tls, qubit, Regime::Long).re * t;
        out.fluctuation += if tls.mu_av > tls.gamma {
            0.5 * cumulant_exact_shorttime(tls, qubit, t1_thermal, t)?
        } else {
            0.5 * small_diffusion_correlator(tls, qubit) * t * t
        };
    }
    Ok(out)
}

/// Temperature calibration `μ_av = c_mu T`, `1/T_{1,T} = c_r T³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c_mu: f64,
    pub c_r: f64,
}

impl Calibration {
    /// Calibration with `μ_av(t_star) = gamma` and `T_{1,T}(t_star) = t1_at_star`.
    pub fn centred(gamma: f64, t_star: f64, t1_at_star: f64) -> Self {
        Self {
            c_mu: gamma / t_star,
            c_r: 1.0 / (t1_at_star * t_star.powi(3)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalPoint {
    pub mu_av: f64,
    pub t1_thermal: f64,
}

pub fn temperature_map(temperature: f64, cal: &Calibration) -> Result<ThermalPoint> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::precondition(format!("temperature must be positive, got {temperature}")));
    }
    if !(cal.c_mu > 0.0 && cal.c_r > 0.0) {
        return Err(Error::precondition("calibration constants must be positive"));
    }
    Ok(ThermalPoint {
        mu_av: cal.c_mu * temperature,
        t1_thermal: 1.0 / (cal.c_r * temperature.powi(3)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub temperature: f64,
    pub mu_av: f64,
    pub t1_thermal: f64,
    pub gamma_phi: f64,
    pub gamma_phi_long: f64,
}

/// Effective dephasing rate across temperatures.
///
/// `μ_max/μ_av` is held at its value in `base`. Where `μ_av ≤ γ` the small-diffusion law is used
/// with `μ_max = μ_av`.
pub fn temperature_sweep(base: &LawParams, cal: &Calibration, temperatures: &[f64], x: f64) -> Result<Vec<SweepPoint>> {
    base.validate()?;
    let spread = if base.mu_av > 0.0 { base.mu_max / base.mu_av } else { 1.0 };
    temperatures
        .iter()
        .map(|&temp| {
            let th = temperature_map(temp, cal)?;
            let mut p = LawParams {
                mu_av: th.mu_av,
                mu_max: th.mu_av * spread,
                t1_thermal: th.t1_thermal,
                ..*base
            };
            let gamma_phi = if p.mu_av > p.gamma {
                effective_dephasing_rate(&p, x)?
            } else {
                p.mu_max = p.mu_av;
                1.0 / small_diffusion_time(&p, x)?
            };
            Ok(SweepPoint {
                temperature: temp,
                mu_av: p.mu_av,
                t1_thermal: p.t1_thermal,
                gamma_phi,
                gamma_phi_long: long_time_rate(&p, x),
            })
        })
        .collect()
}
