//! Closed-form bounds, thresholds and regime constants.
//!
//! Exponential factors such as `(4e)^τ` are accumulated as logarithms and
//! exponentiated last.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, OVERFLOW_LIMIT};
use crate::noise::gamma_function;

/// Parameters of a bound evaluation. Each evaluator reads only the fields
/// it needs and reports the first missing one.
///
/// The horizon is real-valued so that closed forms can be probed at
/// non-integer `T` such as `e²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "G")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub horizon: f64,
}

macro_rules! setter {
    ($name:ident) => {
        pub fn $name(mut self, v: f64) -> Self {
            self.$name = Some(v);
            self
        }
    };
}

impl BoundRequest {
    pub fn new(horizon: f64) -> Self {
        BoundRequest { horizon, ..Default::default() }
    }

    setter!(eta);
    setter!(gamma);
    setter!(l);
    setter!(sigma);
    setter!(delta);
    setter!(v0);
    setter!(g);
    setter!(zeta);
    setter!(beta2);
    setter!(alpha);

    fn need(&self, name: &str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| Error::Precondition(format!("bound request is missing `{name}`")))
    }

    fn positive(&self, name: &str, v: Option<f64>) -> Result<f64> {
        let x = self.need(name, v)?;
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Precondition(format!("`{name}` must be positive, got {x}")))
        }
    }

    fn nonneg(&self, name: &str, v: Option<f64>) -> Result<f64> {
        let x = self.need(name, v)?;
        if x >= 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Precondition(format!("`{name}` must be nonnegative, got {x}")))
        }
    }

    fn horizon(&self) -> Result<f64> {
        if self.horizon >= 1.0 && self.horizon.is_finite() {
            Ok(self.horizon)
        } else {
            Err(Error::Precondition(format!("horizon must be >= 1, got {}", self.horizon)))
        }
    }
}

/// What quantity a bound controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMetric {
    /// `(1/T) Σ E‖∇f(xₜ)‖²`
    MeanSquaredGradNorm,
    /// `(1/T) Σ E‖∇f(xₜ)‖`
    MeanGradNorm,
    /// `min_t ‖∇f(xₜ)‖`
    MinGradNorm,
    /// `‖∇f(xₜ)‖` at a given `t`
    GradNormAt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub metric: BoundMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SgdBoundForm {
    MainText,
    AppendixGeneral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallStepsize,
    LargeStepsize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub tau: u64,
    /// Blow-up horizon of the SGD hard instance, when `ηℓ ≥ 5`.
    pub t0: Option<u64>,
    pub regime: Regime,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub delta_tilde_lb: Option<f64>,
}

fn finish(log_value: f64) -> Result<f64> {
    let v = log_value.exp();
    if v.is_finite() && v <= OVERFLOW_LIMIT {
        Ok(v)
    } else {
        Err(Error::overflow(v))
    }
}

fn ceil_clamped(v: f64) -> u64 {
    let c = v.ceil();
    if c <= 0.0 {
        0
    } else {
        c as u64
    }
}

/// `τ = ⌈(ηℓ)^{1/α} − 1⌉`, clamped at 0.
pub fn tau_sgd(eta: f64, l: f64, alpha: f64) -> Result<u64> {
    if !(eta > 0.0 && l > 0.0) {
        return Err(Error::Precondition(format!("eta and l must be positive, got {eta}, {l}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let el = eta * l;
    if el <= 1.0 {
        return Ok(0);
    }
    Ok(ceil_clamped(el.powf(1.0 / alpha) - 1.0))
}

fn sgd_alpha(req: &BoundRequest) -> Result<f64> {
    Ok(req.alpha.unwrap_or(0.5))
}

/// `(α-specific gap term, log of the α-specific time factor)` shared by both regimes.
fn sgd_gap_term(alpha: f64, delta: f64, l: f64, sigma: f64, eta: f64, t: f64) -> f64 {
    let noise = l * sigma * sigma * eta * eta;
    if alpha == 0.5 {
        delta + noise / 2.0 * (1.0 + t.ln())
    } else if alpha > 0.5 {
        delta + noise / (2.0 * (1.0 - 2f64.powf(1.0 - 2.0 * alpha)))
    } else {
        delta / t.powf(1.0 - 2.0 * alpha) + noise / (2.0 * (1.0 - 2.0 * alpha))
    }
}

/// Bound on `(1/T) Σ E‖∇f(xₜ)‖²` for SGD with `ηₜ = η/(t+1)^α`.
pub fn sgd_upper_bound(req: &BoundRequest, form: SgdBoundForm) -> Result<f64> {
    let eta = req.positive("eta", req.eta)?;
    let l = req.positive("l", req.l)?;
    let sigma = req.nonneg("sigma", req.sigma)?;
    let delta = req.positive("delta", req.delta)?;
    let t = req.horizon()?;
    let alpha = sgd_alpha(req)?;
    if form == SgdBoundForm::MainText && alpha != 0.5 {
        return Err(Error::Precondition(format!("the main-text form needs alpha = 1/2, got {alpha}")));
    }
    let tau = tau_sgd(eta, l, alpha)?;
    if tau == 0 {
        let a = sgd_gap_term(alpha, delta, l, sigma, eta, t);
        let rate = if alpha >= 0.5 { t.powf(1.0 - alpha) } else { t.powf(alpha) };
        return Ok(2.0 * a / (eta * rate));
    }
    let tau_f = tau as f64;
    let pi = std::f64::consts::PI;
    match form {
        SgdBoundForm::MainText => {
            // τ of the main-text statement is ⌈η²ℓ² − 1⌉, the α = 1/2 case of the general τ
            let a = sgd_gap_term(0.5, delta, l, sigma, eta, t);
            let log_v = (4.0 * 2f64.sqrt() * l * a).ln() + tau_f * (4.0 * std::f64::consts::E).ln()
                - 0.5 * (pi * t).ln();
            finish(log_v)
        }
        SgdBoundForm::AppendixGeneral => {
            let a = sgd_gap_term(alpha, delta, l, sigma, eta, t);
            if alpha == 0.5 {
                let bracket = 1.0 + l * eta * (1.0 + 2.0 * tau_f.sqrt());
                let log_v = 0.5 * 2f64.ln() + tau_f * (4.0 * std::f64::consts::E).ln()
                    - (eta * (pi * tau_f * t).sqrt()).ln()
                    + (bracket * a).ln();
                finish(log_v)
            } else {
                let bracket = 1.0 + l * eta * (1.0 + tau_f.powf(1.0 - alpha) / (1.0 - alpha));
                let rate = if alpha > 0.5 { t.powf(1.0 - alpha) } else { t.powf(alpha) };
                let log_v = 2f64.ln() + tau_f * (4f64.ln() + 2.0 * alpha)
                    - (eta * (2.0 * pi * tau_f).powf(alpha) * rate).ln()
                    + (bracket * a).ln();
                finish(log_v)
            }
        }
    }
}

/// `(1/√T)(Δ/η + ℓη(G² + σ²) log T / 2)`
pub fn sgd_bounded_grad_bound(req: &BoundRequest) -> Result<f64> {
    let eta = req.positive("eta", req.eta)?;
    let l = req.positive("l", req.l)?;
    let sigma = req.nonneg("sigma", req.sigma)?;
    let delta = req.positive("delta", req.delta)?;
    let g = req.nonneg("G", req.g)?;
    let t = req.horizon()?;
    Ok((delta / eta + l * eta * (g * g + sigma * sigma) * t.ln() / 2.0) / t.sqrt())
}

/// Lower bound on `Δ̃ = ℓx_{t₀}²/2`: `(4/(3ηℓ))(8e)^{η²ℓ²/16 − 2} Δ`.
pub fn sgd_delta_tilde_lb(eta: f64, l: f64, delta: f64) -> Result<f64> {
    let log_v = (4.0 / (3.0 * eta * l)).ln() + (eta * eta * l * l / 16.0 - 2.0) * (8.0 * std::f64::consts::E).ln()
        + delta.ln();
    finish(log_v)
}

/// `√(8Δ/(3η)) (8e)^{η²ℓ²/32 − 4}`, the bound on `|∇f(x_{t₀})|`.
pub fn sgd_t0_gradient_bound(eta: f64, l: f64, delta: f64) -> Result<f64> {
    let log_v = 0.5 * (8.0 * delta / (3.0 * eta)).ln()
        + (eta * eta * l * l / 32.0 - 4.0) * (8.0 * std::f64::consts::E).ln();
    finish(log_v)
}

/// `(1/4)√Δ̃ min{√ℓ, (2η)^{−1/2} T^{−1/4}}` for a given `Δ̃`.
pub fn sgd_plateau_value(delta_tilde: f64, eta: f64, l: f64, horizon_t: f64) -> f64 {
    0.25 * delta_tilde.sqrt() * l.sqrt().min((2.0 * eta).powf(-0.5) * horizon_t.powf(-0.25))
}

/// Gradient-norm lower curve of untuned SGD on the hard instance: the
/// growth curve for `t ≤ t₀`, the plateau (with the `Δ̃` lower bound) after.
pub fn sgd_lower_curve(eta: f64, l: f64, delta: f64, t: u64, t0: u64, horizon_t: u64) -> Result<f64> {
    if !(eta * l >= 5.0) {
        return Err(Error::Precondition(format!("the lower curve needs eta*l >= 5, got {}", eta * l)));
    }
    if t < 1 || t > horizon_t {
        return Err(Error::Precondition(format!("t must lie in [1, T={horizon_t}], got {t}")));
    }
    if t <= t0 {
        let tf = t as f64;
        let log_v = 0.5 * (2.0 * l * delta / (3.0 * tf.sqrt())).ln() + tf / 2.0 * (8.0 * std::f64::consts::E).ln();
        finish(log_v)
    } else {
        Ok(sgd_plateau_value(sgd_delta_tilde_lb(eta, l, delta)?, eta, l, horizon_t as f64))
    }
}

/// `3(Δ/γ + ℓγ log T)/√T + 24σ`, a bound on `(1/T) Σ E‖∇f(xₜ)‖`.
pub fn nsgd_upper_bound(req: &BoundRequest) -> Result<f64> {
    let gamma = req.positive("gamma", req.gamma)?;
    let l = req.positive("l", req.l)?;
    let delta = req.positive("delta", req.delta)?;
    let sigma = req.nonneg("sigma", req.sigma)?;
    let t = req.horizon()?;
    Ok(3.0 * (delta / gamma + l * gamma * t.ln()) / t.sqrt() + 24.0 * sigma)
}

/// `min{σ, √(2ℓΔ), (√(Δ² + 2Δγσ) − Δ)/γ}`.
pub fn nsgd_noncvg_threshold(l: f64, delta: f64, sigma: f64, gamma_max: f64) -> Result<f64> {
    for (name, v) in [("l", l), ("delta", delta), ("sigma", sigma), ("gamma_max", gamma_max)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
        }
    }
    // rationalized to avoid cancellation as γ → 0
    let third = 2.0 * delta * sigma / (delta + (delta * delta + 2.0 * delta * gamma_max * sigma).sqrt());
    Ok(sigma.min((2.0 * l * delta).sqrt()).min(third))
}

/// `M` of the AMSGrad deterministic bound, by decay exponent.
pub fn amsgrad_m(l: f64, gamma: f64, v0: f64, alpha: f64) -> f64 {
    if alpha == 0.5 {
        l * gamma * gamma * (1.0 + (l * gamma / v0).ln())
    } else if alpha > 0.5 {
        l * gamma * gamma / (2.0 * (1.0 - 2f64.powf(1.0 - 2.0 * alpha)))
    } else {
        gamma * (l * gamma).powf(1.0 / alpha - 1.0) / (2.0 * (1.0 - 2.0 * alpha) * v0.powf(1.0 / alpha - 2.0))
    }
}

/// Deterministic AMSGrad-norm upper bound (`β₁ = β₂ = 0`).
///
/// For `α = 1/2` this bounds the mean gradient norm; for other `α` it bounds
/// the mean squared gradient norm. The returned metric says which.
pub fn amsgrad_det_upper_bound(req: &BoundRequest) -> Result<Bound> {
    let gamma = req.positive("gamma", req.gamma)?;
    let l = req.positive("l", req.l)?;
    let delta = req.positive("delta", req.delta)?;
    let v0 = req.positive("v0", req.v0)?;
    let alpha = req.need("alpha", req.alpha)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let t = req.horizon()?;
    let m = amsgrad_m(l, gamma, v0, alpha);
    let md = m + delta;
    if v0 >= gamma * l && !(md > 0.0) {
        return Err(Error::Domain(format!("M + delta = {md} is not positive")));
    }
    let scale = |d: f64, floor: f64| d * floor.max((2.0 * l * d).sqrt());
    if alpha == 0.5 {
        let value = if v0 < gamma * l {
            (2.0 * scale(delta, v0)).sqrt() / (gamma.sqrt() * t.powf(0.25))
        } else {
            gamma * gamma * l * l / (v0 * v0 * t.sqrt())
                + (2.0 * scale(md, gamma * l)).sqrt() / (gamma.sqrt() * t.powf(0.25))
        };
        Ok(Bound { value, metric: BoundMetric::MeanGradNorm })
    } else {
        let value = if v0 < gamma * l {
            2.0 * scale(delta, v0) / (gamma * t.powf(1.0 - alpha))
        } else {
            (l * gamma / v0).powf(1.0 / alpha) * gamma * gamma * l * l / t
                + 2.0 * scale(md, gamma * l) / (gamma * t.powf(1.0 - alpha))
        };
        Ok(Bound { value, metric: BoundMetric::MeanSquaredGradNorm })
    }
}

/// Lower bound on `min_t ‖∇f(xₜ)‖` for deterministic AMSGrad-norm.
pub fn amsgrad_det_lower(req: &BoundRequest) -> Result<f64> {
    let gamma = req.positive("gamma", req.gamma)?;
    let l = req.positive("l", req.l)?;
    let delta = req.positive("delta", req.delta)?;
    let v0 = req.positive("v0", req.v0)?;
    let alpha = req.need("alpha", req.alpha)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Precondition(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if v0 > l * gamma / 2.0 {
        return Err(Error::Precondition(format!("needs v0 <= l*gamma/2 = {}, got {v0}", l * gamma / 2.0)));
    }
    if gamma > 4.0 * delta / v0 {
        return Err(Error::Precondition(format!("needs gamma <= 4*delta/v0 = {}, got {gamma}", 4.0 * delta / v0)));
    }
    if alpha == 0.0 {
        return Ok(v0);
    }
    let t = req.horizon()?;
    let inner = (1.0 / l).max(gamma * t.powf(1.0 - alpha) / ((1.0 - alpha) * v0));
    Ok((delta / (16.0 * inner)).sqrt())
}

/// High-probability lower bound on `min_t ‖∇f(xₜ)‖` for stochastic
/// AMSGrad-norm under Fréchet-tailed noise.
pub fn amsgrad_stoch_lower(req: &BoundRequest) -> Result<f64> {
    let zeta = req.need("zeta", req.zeta)?;
    if !(zeta > 0.5 && zeta < 1.0) {
        return Err(Error::Domain(format!("zeta must lie in (1/2, 1), got {zeta}")));
    }
    let beta2 = req.need("beta2", req.beta2)?;
    if !(0.0..1.0).contains(&beta2) {
        return Err(Error::Precondition(format!("beta2 must lie in [0, 1), got {beta2}")));
    }
    let gamma = req.positive("gamma", req.gamma)?;
    let l = req.positive("l", req.l)?;
    let delta = req.positive("delta", req.delta)?;
    let sigma = req.positive("sigma", req.sigma)?;
    let t = req.horizon()?;
    let coef = gamma * (2.0 * gamma_function(1.0 - zeta / 2.0)?).sqrt()
        / (sigma
            * (std::f64::consts::E * (1.0 / zeta - 1.0)).powf(zeta / 2.0)
            * (1.0 - zeta)
            * (1.0 - beta2).sqrt());
    let inner = (1.0 / l).max(coef * (t.powf(1.0 - zeta) - zeta));
    Ok((delta / (16.0 * inner)).sqrt())
}

/// `(Δ/γ + (σ + ℓγ) log T)/T^{1/4}`; shape only, the constant is set to 1.
pub fn nsgdm_rate_template(req: &BoundRequest) -> Result<f64> {
    let gamma = req.positive("gamma", req.gamma)?;
    let l = req.positive("l", req.l)?;
    let delta = req.positive("delta", req.delta)?;
    let sigma = req.nonneg("sigma", req.sigma)?;
    let t = req.horizon()?;
    Ok((delta / gamma + (sigma + l * gamma) * t.ln()) / t.powf(0.25))
}

/// `2A/√T + √(v₀A)/√T + 2√(Aσ)/T^{1/4}` with `A = (Δ/η + σ + ℓη)(1 + log T)`;
/// shape only.
pub fn adagrad_rate_template(req: &BoundRequest) -> Result<f64> {
    let eta = req.positive("eta", req.eta)?;
    let v0 = req.positive("v0", req.v0)?;
    let l = req.positive("l", req.l)?;
    let delta = req.positive("delta", req.delta)?;
    let sigma = req.nonneg("sigma", req.sigma)?;
    let t = req.horizon()?;
    let a = (delta / eta + sigma + l * eta) * (1.0 + t.ln());
    Ok(2.0 * a / t.sqrt() + (v0 * a).sqrt() / t.sqrt() + 2.0 * (a * sigma).sqrt() / t.powf(0.25))
}

/// Regime constants of untuned SGD.
pub fn sgd_regime(req: &BoundRequest) -> Result<RegimeReport> {
    let eta = req.positive("eta", req.eta)?;
    let l = req.positive("l", req.l)?;
    let alpha = sgd_alpha(req)?;
    let tau = tau_sgd(eta, l, alpha)?;
    let a = match (req.sigma, req.delta) {
        (Some(s), Some(d)) => Some(sgd_gap_term(alpha, d, l, s, eta, req.horizon()?)),
        _ => None,
    };
    let hard = eta * l >= 5.0;
    Ok(RegimeReport {
        tau,
        t0: hard.then(|| crate::instances::hard_instance_t0(eta, l)),
        regime: if tau == 0 { Regime::SmallStepsize } else { Regime::LargeStepsize },
        a,
        m: None,
        delta_tilde_lb: match req.delta {
            Some(d) if hard => sgd_delta_tilde_lb(eta, l, d).ok(),
            _ => None,
        },
    })
}

/// Regime of deterministic AMSGrad-norm: small iff `v₀ ≥ γℓ`.
pub fn amsgrad_regime(req: &BoundRequest) -> Result<RegimeReport> {
    let gamma = req.positive("gamma", req.gamma)?;
    let l = req.positive("l", req.l)?;
    let v0 = req.positive("v0", req.v0)?;
    let alpha = req.need("alpha", req.alpha)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let ratio = l * gamma / v0;
    let tau = if ratio <= 1.0 { 0 } else { ceil_clamped(ratio.powf(1.0 / alpha) - 1.0) };
    Ok(RegimeReport {
        tau,
        t0: None,
        regime: if v0 >= gamma * l { Regime::SmallStepsize } else { Regime::LargeStepsize },
        a: None,
        m: Some(amsgrad_m(l, gamma, v0, alpha)),
        delta_tilde_lb: None,
    })
}
