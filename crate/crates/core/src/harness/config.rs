//! Experiment configuration: schema, parsing and validation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{self, HardInstanceReport};
use crate::noise::{NoiseOracle, NoiseSpec};
use crate::optimizers::{OptimizerConfig, PolynomialSchedule};
use crate::problem::{BoxDomain, ProblemInstance};
use crate::theory::{BoundMetric, BoundRequest};

use super::json_pointer;

/// Problem family plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Quadratic {
        l: f64,
        delta: f64,
        #[serde(default = "one")]
        dimension: usize,
        /// Half-width `R` of a box on which `G = ℓR√d` is certified.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gradient_box: Option<f64>,
    },
    SgdHard {
        l: f64,
        delta: f64,
        eta: f64,
        /// Horizon the instance is built for; defaults to `horizon_T`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<u64>,
    },
    NsgdNoncvg {
        l: f64,
        sigma: f64,
        epsilon: f64,
        delta: f64,
        gamma_max: f64,
    },
    AmsgradSlow {
        l: f64,
        delta: f64,
        sigma: f64,
        zeta: f64,
        gamma: f64,
        #[serde(default)]
        beta2: f64,
    },
    AmsgradOscillator {
        v0: f64,
        gamma: f64,
        l: f64,
        delta: f64,
    },
    MomentumLb {
        l: f64,
        delta: f64,
        /// Stepsize caps `η̃ₜ = eta/(t+1)^alpha`.
        caps: PolynomialSchedule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<u64>,
    },
}

fn one() -> usize {
    1
}

impl InstanceSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            InstanceSpec::Quadratic { .. } => "quadratic",
            InstanceSpec::SgdHard { .. } => "sgd_hard",
            InstanceSpec::NsgdNoncvg { .. } => "nsgd_noncvg",
            InstanceSpec::AmsgradSlow { .. } => "amsgrad_slow",
            InstanceSpec::AmsgradOscillator { .. } => "amsgrad_oscillator",
            InstanceSpec::MomentumLb { .. } => "momentum_lb",
        }
    }

    pub fn l(&self) -> f64 {
        match self {
            InstanceSpec::Quadratic { l, .. }
            | InstanceSpec::SgdHard { l, .. }
            | InstanceSpec::NsgdNoncvg { l, .. }
            | InstanceSpec::AmsgradSlow { l, .. }
            | InstanceSpec::AmsgradOscillator { l, .. }
            | InstanceSpec::MomentumLb { l, .. } => *l,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            InstanceSpec::Quadratic { delta, .. }
            | InstanceSpec::SgdHard { delta, .. }
            | InstanceSpec::NsgdNoncvg { delta, .. }
            | InstanceSpec::AmsgradSlow { delta, .. }
            | InstanceSpec::AmsgradOscillator { delta, .. }
            | InstanceSpec::MomentumLb { delta, .. } => *delta,
        }
    }

    /// Whether the instance carries its own noise model.
    pub fn supplies_noise(&self) -> bool {
        matches!(self, InstanceSpec::NsgdNoncvg { .. } | InstanceSpec::AmsgradSlow { .. })
    }

    fn positive_fields(&self) -> Vec<(&'static str, f64)> {
        match self {
            InstanceSpec::Quadratic { l, delta, gradient_box, .. } => {
                let mut v = vec![("l", *l), ("delta", *delta)];
                if let Some(r) = gradient_box {
                    v.push(("gradient_box", *r));
                }
                v
            }
            InstanceSpec::SgdHard { l, delta, eta, .. } => vec![("l", *l), ("delta", *delta), ("eta", *eta)],
            InstanceSpec::NsgdNoncvg { l, sigma, epsilon, delta, gamma_max } => vec![
                ("l", *l),
                ("sigma", *sigma),
                ("epsilon", *epsilon),
                ("delta", *delta),
                ("gamma_max", *gamma_max),
            ],
            InstanceSpec::AmsgradSlow { l, delta, sigma, zeta, gamma, .. } => {
                vec![("l", *l), ("delta", *delta), ("sigma", *sigma), ("zeta", *zeta), ("gamma", *gamma)]
            }
            InstanceSpec::AmsgradOscillator { v0, gamma, l, delta } => {
                vec![("v0", *v0), ("gamma", *gamma), ("l", *l), ("delta", *delta)]
            }
            InstanceSpec::MomentumLb { l, delta, caps, .. } => vec![("l", *l), ("delta", *delta), ("caps/eta", caps.eta)],
        }
    }
}

/// Names of the closed-form quantities that can be overlaid on a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    SgdUpperBound,
    SgdBoundedGradBound,
    SgdLowerCurve,
    NsgdUpperBound,
    NsgdNoncvgThreshold,
    AmsgradDetUpperBound,
    AmsgradDetLower,
    AmsgradStochLower,
    NsgdmRateTemplate,
    AdagradRateTemplate,
}

impl BoundName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::SgdUpperBound => "sgd_upper_bound",
            BoundName::SgdBoundedGradBound => "sgd_bounded_grad_bound",
            BoundName::SgdLowerCurve => "sgd_lower_curve",
            BoundName::NsgdUpperBound => "nsgd_upper_bound",
            BoundName::NsgdNoncvgThreshold => "nsgd_noncvg_threshold",
            BoundName::AmsgradDetUpperBound => "amsgrad_det_upper_bound",
            BoundName::AmsgradDetLower => "amsgrad_det_lower",
            BoundName::AmsgradStochLower => "amsgrad_stoch_lower",
            BoundName::NsgdmRateTemplate => "nsgdm_rate_template",
            BoundName::AdagradRateTemplate => "adagrad_rate_template",
        }
    }

    /// Parameters the evaluator reads. `alpha` is optional for the SGD bound.
    pub fn required_parameters(&self) -> &'static [&'static str] {
        match self {
            BoundName::SgdUpperBound => &["eta", "l", "sigma", "delta"],
            BoundName::SgdBoundedGradBound => &["eta", "l", "sigma", "delta", "G"],
            BoundName::SgdLowerCurve => &["eta", "l", "delta", "t0"],
            BoundName::NsgdUpperBound | BoundName::NsgdmRateTemplate => &["gamma", "l", "delta", "sigma"],
            BoundName::NsgdNoncvgThreshold => &["l", "delta", "sigma", "gamma_max"],
            BoundName::AmsgradDetUpperBound | BoundName::AmsgradDetLower => &["gamma", "l", "delta", "v0", "alpha"],
            BoundName::AmsgradStochLower => &["zeta", "beta2", "gamma", "l", "delta", "sigma"],
            BoundName::AdagradRateTemplate => &["eta", "v0", "l", "delta", "sigma"],
        }
    }

    /// The quantity a scalar bound refers to, when fixed by its name.
    pub fn metric(&self) -> Option<BoundMetric> {
        match self {
            BoundName::SgdUpperBound | BoundName::SgdBoundedGradBound => Some(BoundMetric::MeanSquaredGradNorm),
            BoundName::NsgdUpperBound | BoundName::NsgdmRateTemplate | BoundName::AdagradRateTemplate => {
                Some(BoundMetric::MeanGradNorm)
            }
            BoundName::SgdLowerCurve | BoundName::NsgdNoncvgThreshold => Some(BoundMetric::GradNormAt),
            BoundName::AmsgradDetLower | BoundName::AmsgradStochLower => Some(BoundMetric::MinGradNorm),
            // tagged at evaluation time
            BoundName::AmsgradDetUpperBound => None,
        }
    }
}

/// Per-iterate observables that can be aggregated across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    GradNorm,
    GradNormSq,
    FValue,
    EffectiveStepsize,
    /// `min_{s ≤ t} ‖∇f(x_s)‖`
    RunningMinGradNorm,
}

impl MetricName {
    pub const ALL: [MetricName; 5] = [
        MetricName::GradNorm,
        MetricName::GradNormSq,
        MetricName::FValue,
        MetricName::EffectiveStepsize,
        MetricName::RunningMinGradNorm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricName::GradNorm => "grad_norm",
            MetricName::GradNormSq => "grad_norm_sq",
            MetricName::FValue => "f_value",
            MetricName::EffectiveStepsize => "effective_stepsize",
            MetricName::RunningMinGradNorm => "running_min_grad_norm",
        }
    }

    pub(crate) fn index(&self) -> usize {
        MetricName::ALL.iter().position(|m| m == self).unwrap()
    }
}

fn default_metrics() -> Vec<MetricName> {
    vec![MetricName::GradNorm]
}

/// A threshold given either literally or by the name of an overlaid bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    Value(f64),
    Bound(BoundName),
}

impl Threshold {
    fn label(&self) -> String {
        match self {
            Threshold::Value(v) => format!("{v}"),
            Threshold::Bound(b) => b.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthExpectation {
    Exceeds,
    StaysBelow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RateSeries {
    /// Running average `(1/t) Σ_{s<t}` of the across-seed mean.
    #[default]
    RunningAverage,
    PerIterate,
}

fn three() -> f64 {
    3.0
}

fn floor_fraction() -> f64 {
    0.45
}

fn window() -> f64 {
    crate::diagnostics::DEFAULT_WINDOW_FRACTION
}

/// A verdict to render after the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Empirical average (of the bound's metric) ≤ bound + k·stderr.
    BoundDominance {
        bound: BoundName,
        #[serde(default = "three")]
        k_stderr: f64,
    },
    /// Growth, `t₀` display and plateau inequalities on the SGD hard instance.
    SgdHardPhases,
    /// Across-seed mean of `‖∇f(xₜ)‖` ≥ threshold − k·stderr at every `t`.
    MeanAtLeast {
        threshold: Threshold,
        #[serde(default)]
        k_stderr: f64,
    },
    /// Share of seeds with `min_t ‖∇f(xₜ)‖ ≥ bound` is at least `min_fraction`.
    MinGradFraction {
        bound: Threshold,
        #[serde(default = "floor_fraction")]
        min_fraction: f64,
    },
    /// Every recorded `‖∇f(xₜ)‖` equals `value` exactly.
    ExactGradNorm { value: f64 },
    /// Every seed has `min_t ‖∇f(xₜ)‖ ≥ threshold`.
    MinGradAtLeast { threshold: Threshold },
    /// Fitted exponent of the metric's across-seed mean lies in `range`.
    RateExponent {
        #[serde(default = "grad_norm")]
        metric: MetricName,
        range: (f64, f64),
        #[serde(default = "window")]
        window_fraction: f64,
        #[serde(default)]
        series: RateSeries,
    },
    /// `max_t ‖∇f(xₜ)‖ / ‖∇f(x₀)‖` compared with `factor` on every seed.
    MaxGrowth { factor: f64, expect: GrowthExpectation },
    /// Every iterate lies in the instance's evaluation domain.
    StaysInDomain,
}

fn grad_norm() -> MetricName {
    MetricName::GradNorm
}

impl CheckSpec {
    /// Default verdict key.
    pub fn name(&self) -> String {
        match self {
            CheckSpec::BoundDominance { bound, .. } => format!("bound_dominance/{}", bound.as_str()),
            CheckSpec::SgdHardPhases => "sgd_hard_phases".into(),
            CheckSpec::MeanAtLeast { threshold, .. } => format!("mean_at_least/{}", threshold.label()),
            CheckSpec::MinGradFraction { bound, .. } => format!("min_grad_fraction/{}", bound.label()),
            CheckSpec::ExactGradNorm { .. } => "exact_grad_norm".into(),
            CheckSpec::MinGradAtLeast { threshold } => format!("min_grad_at_least/{}", threshold.label()),
            CheckSpec::RateExponent { metric, .. } => format!("rate_exponent/{}", metric.as_str()),
            CheckSpec::MaxGrowth { expect, .. } => match expect {
                GrowthExpectation::Exceeds => "max_growth/exceeds".into(),
                GrowthExpectation::StaysBelow => "max_growth/stays_below".into(),
            },
            CheckSpec::StaysInDomain => "stays_in_domain".into(),
        }
    }

    fn referenced_bounds(&self) -> Vec<(&'static str, BoundName)> {
        let from = |field: &'static str, t: &Threshold| match t {
            Threshold::Bound(b) => vec![(field, *b)],
            Threshold::Value(_) => vec![],
        };
        match self {
            CheckSpec::BoundDominance { bound, .. } => vec![("bound", *bound)],
            CheckSpec::MeanAtLeast { threshold, .. } => from("threshold", threshold),
            CheckSpec::MinGradFraction { bound, .. } => from("bound", bound),
            CheckSpec::MinGradAtLeast { threshold } => from("threshold", threshold),
            _ => vec![],
        }
    }
}

/// A complete, runnable experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment_id: String,
    /// Short display key, e.g. `eta=0.5,l=1` inside a sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub instance_spec: InstanceSpec,
    pub optimizer_spec: OptimizerConfig,
    /// Absent means exact gradients, or the instance's own noise model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_spec: Option<NoiseSpec>,
    #[serde(rename = "horizon_T")]
    pub horizon_t: u64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub bounds_to_overlay: Vec<BoundName>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricName>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    /// Record overflow as a verdict instead of failing the run.
    #[serde(default)]
    pub allow_overflow: bool,
}

/// Parse and validate a JSON experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = json_pointer(&e.path().to_string());
        Error::config(path, e.into_inner().to_string())
    })?;
    validate_spec(&spec)?;
    Ok(spec)
}

pub fn spec_to_json(spec: &ExperimentSpec) -> Result<String> {
    serde_json::to_string_pretty(spec).map_err(|e| Error::Io(e.to_string()))
}

fn cfg<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T> {
    Err(Error::config(path, message))
}

/// Every check `parse_config` applies after deserialization.
pub fn validate_spec(spec: &ExperimentSpec) -> Result<()> {
    if spec.experiment_id.is_empty() {
        return cfg("/experiment_id", "experiment_id must not be empty");
    }
    if spec.horizon_t < 1 {
        return cfg("/horizon_T", "horizon_T must be at least 1");
    }
    if spec.seeds.is_empty() {
        return cfg("/seeds", "at least one seed is required");
    }
    let mut seen = BTreeSet::new();
    for (i, s) in spec.seeds.iter().enumerate() {
        if !seen.insert(*s) {
            return cfg(format!("/seeds/{i}"), format!("duplicate seed {s}"));
        }
    }
    validate_instance(spec)?;
    if let Err(e) = spec.optimizer_spec.validate() {
        let msg = match &e {
            Error::Precondition(m) => m.clone(),
            other => other.to_string(),
        };
        let field = msg.split_whitespace().next().unwrap_or("").replace('.', "/");
        return cfg(format!("/optimizer_spec/{field}"), msg);
    }
    if let Some(noise) = &spec.noise_spec {
        if spec.instance_spec.supplies_noise() {
            return cfg("/noise_spec", format!("instance kind {} supplies its own noise model", spec.instance_spec.kind()));
        }
        if let Err((field, msg)) = noise.validate() {
            return cfg(format!("/noise_spec/{field}"), msg);
        }
        let dim = match &spec.instance_spec {
            InstanceSpec::Quadratic { dimension, .. } => *dimension,
            _ => 1,
        };
        if noise.required_dimension() > dim {
            return cfg("/noise_spec/kind", format!("noise needs dimension {}, instance has {dim}", noise.required_dimension()));
        }
    }
    let params = BoundParameters::from_spec(spec);
    let mut overlays = BTreeSet::new();
    for (i, b) in spec.bounds_to_overlay.iter().enumerate() {
        if !overlays.insert(*b) {
            return cfg(format!("/bounds_to_overlay/{i}"), format!("duplicate overlay {}", b.as_str()));
        }
        if let Some(missing) = params.missing(*b) {
            return cfg(
                format!("/bounds_to_overlay/{i}"),
                format!("{} needs `{missing}`, which this instance/optimizer/noise combination does not define", b.as_str()),
            );
        }
    }
    let mut metrics = BTreeSet::new();
    for (i, m) in spec.metrics.iter().enumerate() {
        if !metrics.insert(*m) {
            return cfg(format!("/metrics/{i}"), format!("duplicate metric {}", m.as_str()));
        }
    }
    for (i, c) in spec.checks.iter().enumerate() {
        validate_check(spec, i, c, &overlays)?;
    }
    Ok(())
}

fn validate_check(spec: &ExperimentSpec, i: usize, c: &CheckSpec, overlays: &BTreeSet<BoundName>) -> Result<()> {
    let at = |f: &str| format!("/checks/{i}/{f}");
    for (field, b) in c.referenced_bounds() {
        if !overlays.contains(&b) {
            return cfg(at(field), format!("{} must be listed in bounds_to_overlay", b.as_str()));
        }
    }
    let nonneg = |name: &str, v: f64| -> Result<()> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            cfg(at(name), format!("{name} must be a finite nonnegative number, got {v}"))
        }
    };
    match c {
        CheckSpec::BoundDominance { bound, k_stderr } => {
            nonneg("k_stderr", *k_stderr)?;
            if matches!(bound.metric(), Some(BoundMetric::MinGradNorm | BoundMetric::GradNormAt)) {
                return cfg(at("bound"), format!("{} is a lower bound; use min_grad_* or mean_at_least", bound.as_str()));
            }
        }
        CheckSpec::SgdHardPhases => {
            if !matches!(spec.instance_spec, InstanceSpec::SgdHard { .. }) {
                return cfg(at("kind"), "sgd_hard_phases needs an sgd_hard instance");
            }
        }
        CheckSpec::MeanAtLeast { k_stderr, .. } => nonneg("k_stderr", *k_stderr)?,
        CheckSpec::MinGradFraction { min_fraction, .. } => {
            if !(0.0..=1.0).contains(min_fraction) {
                return cfg(at("min_fraction"), format!("min_fraction must lie in [0, 1], got {min_fraction}"));
            }
        }
        CheckSpec::ExactGradNorm { value } => nonneg("value", *value)?,
        CheckSpec::MinGradAtLeast { .. } | CheckSpec::StaysInDomain => {}
        CheckSpec::RateExponent { range, window_fraction, .. } => {
            if !(range.0 <= range.1) {
                return cfg(at("range"), format!("range must be ordered, got [{}, {}]", range.0, range.1));
            }
            if !(*window_fraction > 0.0 && *window_fraction <= 1.0) {
                return cfg(at("window_fraction"), format!("window_fraction must lie in (0, 1], got {window_fraction}"));
            }
        }
        CheckSpec::MaxGrowth { factor, .. } => {
            if !(*factor > 1.0 && factor.is_finite()) {
                return cfg(at("factor"), format!("factor must exceed 1, got {factor}"));
            }
        }
    }
    Ok(())
}

fn validate_instance(spec: &ExperimentSpec) -> Result<()> {
    let inst = &spec.instance_spec;
    for (name, v) in inst.positive_fields() {
        if !(v > 0.0 && v.is_finite()) {
            return cfg(format!("/instance_spec/{name}"), format!("{name} must be positive and finite, got {v}"));
        }
    }
    match inst {
        InstanceSpec::Quadratic { dimension, .. } if *dimension == 0 => {
            return cfg("/instance_spec/dimension", "dimension must be at least 1");
        }
        InstanceSpec::SgdHard { l, eta, horizon, .. } => {
            if eta * l < 5.0 {
                return cfg(
                    "/instance_spec/eta",
                    format!("the SGD hard instance requires eta*l >= 5, got eta*l = {}", eta * l),
                );
            }
            if *horizon == Some(0) {
                return cfg("/instance_spec/horizon", "horizon must be at least 1");
            }
        }
        InstanceSpec::AmsgradSlow { zeta, beta2, .. } => {
            if !(*zeta > 0.5 && *zeta < 1.0) {
                return cfg("/instance_spec/zeta", format!("zeta must lie in (1/2, 1), got {zeta}"));
            }
            if !(0.0..1.0).contains(beta2) {
                return cfg("/instance_spec/beta2", format!("beta2 must lie in [0, 1), got {beta2}"));
            }
        }
        InstanceSpec::AmsgradOscillator { v0, gamma, l, delta } => {
            if *v0 > l * gamma / 2.0 {
                return cfg("/instance_spec/v0", format!("v0 must not exceed l*gamma/2 = {}, got {v0}", l * gamma / 2.0));
            }
            if *gamma > 4.0 * delta / v0 {
                return cfg("/instance_spec/gamma", format!("gamma must not exceed 4*delta/v0 = {}, got {gamma}", 4.0 * delta / v0));
            }
        }
        InstanceSpec::MomentumLb { caps, horizon, .. } => {
            if !(caps.alpha >= 0.0 && caps.alpha.is_finite()) {
                return cfg("/instance_spec/caps/alpha", format!("alpha must be nonnegative, got {}", caps.alpha));
            }
            if *horizon == Some(0) {
                return cfg("/instance_spec/horizon", "horizon must be at least 1");
            }
        }
        _ => {}
    }
    build_instance(spec).map(|_| ()).map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config("/instance_spec", other.to_string()),
    })
}

/// An instance ready to run, with its oracle.
#[derive(Debug, Clone)]
pub struct BuiltInstance {
    pub instance: ProblemInstance,
    pub oracle: NoiseOracle,
    pub hard_report: Option<HardInstanceReport>,
}

pub fn build_instance(spec: &ExperimentSpec) -> Result<BuiltInstance> {
    let t = spec.horizon_t;
    let (instance, own_oracle, hard_report) = match &spec.instance_spec {
        InstanceSpec::Quadratic { l, delta, dimension, gradient_box } => {
            let q = instances::make_quadratic(*l, *delta, *dimension)?;
            let q = match gradient_box {
                Some(r) => {
                    let g = l * r * (*dimension as f64).sqrt();
                    q.with_gradient_bound(g, BoxDomain::symmetric(*dimension, *r))
                }
                None => q,
            };
            (q, None, None)
        }
        InstanceSpec::SgdHard { l, delta, eta, horizon } => {
            let (inst, report) = instances::build_sgd_hard_instance(*l, *delta, *eta, horizon.unwrap_or(t))?;
            (inst, None, Some(report))
        }
        InstanceSpec::NsgdNoncvg { l, sigma, epsilon, delta, gamma_max } => {
            let (inst, oracle) = instances::make_nsgd_noncvg_instance(*l, *sigma, *epsilon, *delta, *gamma_max)?;
            (inst, Some(oracle), None)
        }
        InstanceSpec::AmsgradSlow { l, delta, sigma, zeta, gamma, beta2 } => {
            let (inst, oracle) = instances::make_amsgrad_slow_instance(*l, *delta, *sigma, *zeta, *gamma, *beta2, t)?;
            (inst, Some(oracle), None)
        }
        InstanceSpec::AmsgradOscillator { v0, gamma, l, delta } => {
            (instances::make_amsgrad_oscillator(*v0, *gamma, *l, *delta)?, None, None)
        }
        InstanceSpec::MomentumLb { l, delta, caps, horizon } => {
            let caps = *caps;
            let inst = instances::make_momentum_lb_quadratic(*l, *delta, move |s| caps.at(s), horizon.unwrap_or(t))?;
            (inst, None, None)
        }
    };
    let oracle = match (own_oracle, &spec.noise_spec) {
        (Some(o), None) => o,
        (Some(_), Some(_)) => {
            return cfg("/noise_spec", format!("instance kind {} supplies its own noise model", spec.instance_spec.kind()))
        }
        (None, Some(n)) => NoiseOracle::new(n.clone().normalized()?),
        (None, None) => NoiseOracle::exact(),
    };
    Ok(BuiltInstance { instance, oracle, hard_report })
}

/// Parameters a bound overlay can draw from an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundParameters {
    pub request: BoundRequest,
    pub gamma_max: Option<f64>,
    pub t0: Option<u64>,
    /// Horizon the instance was built for, when it differs from `horizon_T`.
    pub instance_horizon: Option<u64>,
}

impl BoundParameters {
    pub fn from_spec(spec: &ExperimentSpec) -> Self {
        let mut r = BoundRequest::new(spec.horizon_t as f64);
        let mut gamma_max = None;
        let mut t0 = None;
        let mut instance_horizon = None;
        r.l = Some(spec.instance_spec.l());
        r.delta = Some(spec.instance_spec.delta());
        match &spec.optimizer_spec {
            OptimizerConfig::Sgd(c) => {
                r.eta = Some(c.eta);
                r.alpha = Some(c.alpha);
            }
            OptimizerConfig::Nsgd(c) => {
                r.gamma = Some(c.gamma);
                r.alpha = Some(c.alpha);
                gamma_max = Some(c.gamma_max());
            }
            OptimizerConfig::Nsgdm(c) => {
                r.gamma = Some(c.gamma);
                r.alpha = Some(c.alpha);
            }
            OptimizerConfig::Amsgrad(c) => {
                r.gamma = Some(c.gamma);
                r.alpha = Some(c.alpha);
                r.v0 = Some(c.v0);
                r.beta2 = Some(c.beta2);
            }
            OptimizerConfig::Adagrad(c) => {
                r.eta = Some(c.eta);
                r.v0 = Some(c.v0);
            }
            OptimizerConfig::MomentumSgd(c) => {
                r.eta = Some(c.stepsize_schedule.eta);
                r.alpha = Some(c.stepsize_schedule.alpha);
            }
        }
        r.sigma = Some(spec.noise_spec.as_ref().map(|n| n.sigma).unwrap_or(0.0));
        match &spec.instance_spec {
            InstanceSpec::Quadratic { l, dimension, gradient_box: Some(radius), .. } => {
                r.g = Some(l * radius * (*dimension as f64).sqrt());
            }
            InstanceSpec::SgdHard { eta, l, horizon, .. } => {
                r.eta = Some(*eta);
                t0 = Some(instances::hard_instance_t0(*eta, *l));
                instance_horizon = *horizon;
            }
            InstanceSpec::NsgdNoncvg { sigma, gamma_max: g, .. } => {
                r.sigma = Some(*sigma);
                gamma_max = Some(*g);
            }
            InstanceSpec::AmsgradSlow { sigma, zeta, gamma, beta2, .. } => {
                r.sigma = Some(*sigma);
                r.zeta = Some(*zeta);
                r.gamma = Some(*gamma);
                r.beta2 = Some(*beta2);
            }
            InstanceSpec::MomentumLb { horizon, .. } => instance_horizon = *horizon,
            _ => {}
        }
        BoundParameters { request: r, gamma_max, t0, instance_horizon }
    }

    fn has(&self, name: &str) -> bool {
        let r = &self.request;
        match name {
            "eta" => r.eta.is_some(),
            "gamma" => r.gamma.is_some(),
            "l" => r.l.is_some(),
            "sigma" => r.sigma.is_some(),
            "delta" => r.delta.is_some(),
            "v0" => r.v0.is_some(),
            "G" => r.g.is_some(),
            "zeta" => r.zeta.is_some(),
            "beta2" => r.beta2.is_some(),
            "alpha" => r.alpha.is_some(),
            "gamma_max" => self.gamma_max.is_some(),
            "t0" => self.t0.is_some(),
            _ => false,
        }
    }

    /// First required parameter that cannot be derived, if any.
    pub fn missing(&self, bound: BoundName) -> Option<&'static str> {
        bound.required_parameters().iter().copied().find(|p| !self.has(p))
    }
}
