//! Running an experiment across seeds and rendering verdicts.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{fit_power_law, running_average, MonteCarloStat, RateFit};
use crate::error::{Error, Result};
use crate::instances::HardInstanceReport;
use crate::optimizers::run_truncating;
use crate::problem::Trajectory;
use crate::theory::{self, BoundMetric, SgdBoundForm};

use super::config::{
    build_instance, BoundName, BoundParameters, BuiltInstance, CheckSpec, ExperimentSpec, GrowthExpectation,
    MetricName, RateSeries, Threshold,
};

/// Per-seed rows are kept only when the experiment has at most this many seeds.
pub const TRAJECTORY_RETENTION_CAP: usize = 32;

const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub message: String,
}

impl Verdict {
    pub fn pass(message: impl Into<String>) -> Self {
        Verdict { status: VerdictStatus::Pass, message: message.into() }
    }
    pub fn fail(message: impl Into<String>) -> Self {
        Verdict { status: VerdictStatus::Fail, message: message.into() }
    }
    pub fn skip(reason: impl Into<String>) -> Self {
        Verdict { status: VerdictStatus::Skip, message: reason.into() }
    }
    pub fn from_bool(ok: bool, message: impl Into<String>) -> Self {
        if ok {
            Self::pass(message)
        } else {
            Self::fail(message)
        }
    }
}

/// Value of an overlaid bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundValue {
    Scalar { value: f64, metric: BoundMetric },
    /// One entry per `t`; `null` where the curve is undefined.
    Curve { values: Vec<Option<f64>>, metric: BoundMetric },
    Skip { reason: String },
}

impl BoundValue {
    pub fn at(&self, t: u64) -> Option<f64> {
        match self {
            BoundValue::Scalar { value, .. } => Some(*value),
            BoundValue::Curve { values, .. } => values.get(t as usize).copied().flatten(),
            BoundValue::Skip { .. } => None,
        }
    }
}

/// A rate fit, or why none could be made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateFitEntry {
    Fit(RateFit),
    Skip { skip: String },
}

/// Scalars of one seed's run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub records: usize,
    pub overflow_at: Option<u64>,
    pub initial_grad_norm: f64,
    pub mean_grad_norm: f64,
    pub mean_grad_norm_sq: f64,
    pub min_grad_norm: f64,
    pub max_grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    /// Present only when the seed count is within [`TRAJECTORY_RETENTION_CAP`].
    pub per_seed_trajectories: Option<Vec<Trajectory>>,
    pub seed_summaries: Vec<SeedSummary>,
    /// Metric name → one entry per `t < horizon_T`.
    pub aggregates: BTreeMap<String, Vec<MonteCarloStat>>,
    pub rate_fits: BTreeMap<String, RateFitEntry>,
    pub bound_values: BTreeMap<String, BoundValue>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub hard_instance: Option<HardInstanceReport>,
    pub wall_time: f64,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| v.status != VerdictStatus::Fail)
    }

    pub fn aggregate(&self, metric: MetricName) -> Option<&[MonteCarloStat]> {
        self.aggregates.get(metric.as_str()).map(|v| v.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

/// Run with default options.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    run_experiment_with(spec, RunOptions::default())
}

pub fn run_experiment_with(spec: &ExperimentSpec, options: RunOptions) -> Result<ExperimentResult> {
    super::config::validate_spec(spec)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(spec))
}

/// Welford accumulator, folded in seed order.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn stat(&self) -> MonteCarloStat {
        match self.n {
            0 => MonteCarloStat { mean: f64::NAN, stderr: f64::NAN, n: 0 },
            1 => MonteCarloStat { mean: self.mean, stderr: f64::NAN, n: 1 },
            n => MonteCarloStat { mean: self.mean, stderr: (self.m2 / (n as f64 - 1.0) / n as f64).sqrt(), n },
        }
    }
}

/// Outcome of one `(check, seed)` pair.
#[derive(Debug, Clone)]
struct Finding {
    key: String,
    ok: bool,
    detail: String,
}

struct Context<'a> {
    spec: &'a ExperimentSpec,
    built: &'a BuiltInstance,
    bounds: &'a BTreeMap<BoundName, BoundValue>,
}

impl Context<'_> {
    fn threshold(&self, t: &Threshold) -> std::result::Result<f64, String> {
        match t {
            Threshold::Value(v) => Ok(*v),
            Threshold::Bound(b) => match self.bounds.get(b) {
                Some(BoundValue::Scalar { value, .. }) => Ok(*value),
                Some(BoundValue::Curve { .. }) => Err(format!("{} is a curve, not a scalar", b.as_str())),
                Some(BoundValue::Skip { reason }) => Err(format!("{} unavailable: {reason}", b.as_str())),
                None => Err(format!("{} was not evaluated", b.as_str())),
            },
        }
    }
}

struct SeedOutcome {
    trajectory: Trajectory,
    overflow: Option<Error>,
    findings: Vec<Vec<Finding>>,
}

fn execute(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let start = Instant::now();
    let built = build_instance(spec)?;
    let params = BoundParameters::from_spec(spec);
    let bounds: BTreeMap<BoundName, BoundValue> =
        spec.bounds_to_overlay.iter().map(|b| (*b, evaluate_bound(*b, &params, spec.horizon_t))).collect();
    let ctx = Context { spec, built: &built, bounds: &bounds };

    let mut seeds = spec.seeds.clone();
    seeds.sort_unstable();
    let retain = seeds.len() <= TRAJECTORY_RETENTION_CAP;
    let horizon = spec.horizon_t as usize;
    let mut acc = vec![[Welford::default(); 5]; horizon];
    let mut summaries = Vec::with_capacity(seeds.len());
    let mut kept = Vec::new();
    let mut findings: Vec<Vec<Vec<Finding>>> = vec![Vec::new(); spec.checks.len()];

    for chunk in seeds.chunks(CHUNK) {
        let outcomes: Vec<Result<SeedOutcome>> = chunk.par_iter().map(|&seed| simulate(&ctx, seed)).collect();
        for outcome in outcomes {
            let o = outcome?;
            if let Some(e) = &o.overflow {
                if !spec.allow_overflow {
                    return Err(e.clone());
                }
            }
            fold(&mut acc, &o.trajectory);
            summaries.push(summarize(&o.trajectory, o.overflow.as_ref()));
            for (slot, f) in findings.iter_mut().zip(o.findings) {
                slot.push(f);
            }
            if retain {
                kept.push(o.trajectory);
            }
        }
    }

    let mut aggregates = BTreeMap::new();
    for m in MetricName::ALL {
        let series: Vec<MonteCarloStat> = acc.iter().map(|row| row[m.index()].stat()).collect();
        aggregates.insert(m.as_str().to_string(), series);
    }

    let mut rate_fits = BTreeMap::new();
    for m in &spec.metrics {
        let means: Vec<f64> = aggregates[m.as_str()].iter().map(|s| s.mean).collect();
        rate_fits.insert(m.as_str().to_string(), rate_fit(&means, RateSeries::RunningAverage, crate::diagnostics::DEFAULT_WINDOW_FRACTION));
    }

    let mut verdicts = BTreeMap::new();
    let overflowed: Vec<&SeedSummary> = summaries.iter().filter(|s| s.overflow_at.is_some()).collect();
    if !overflowed.is_empty() {
        verdicts.insert(
            "overflow".to_string(),
            Verdict::pass(format!(
                "{} of {} seeds overflowed; first at seed {} t={}",
                overflowed.len(),
                summaries.len(),
                overflowed[0].seed,
                overflowed[0].overflow_at.unwrap()
            )),
        );
    }
    for (i, check) in spec.checks.iter().enumerate() {
        for (key, verdict) in render(&ctx, check, &findings[i], &summaries, &aggregates) {
            verdicts.insert(key, verdict);
        }
    }

    Ok(ExperimentResult {
        spec: spec.clone(),
        per_seed_trajectories: retain.then_some(kept),
        seed_summaries: summaries,
        aggregates,
        rate_fits,
        bound_values: bounds.into_iter().map(|(k, v)| (k.as_str().to_string(), v)).collect(),
        verdicts,
        hard_instance: built.hard_report.clone(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn simulate(ctx: &Context, seed: u64) -> Result<SeedOutcome> {
    let run = run_truncating(&ctx.built.instance, &ctx.spec.optimizer_spec, &ctx.built.oracle, ctx.spec.horizon_t, seed)?;
    let findings = ctx.spec.checks.iter().map(|c| per_seed(ctx, c, &run.trajectory)).collect();
    Ok(SeedOutcome { trajectory: run.trajectory, overflow: run.error, findings })
}

fn fold(acc: &mut [[Welford; 5]], traj: &Trajectory) {
    let mut running_min = f64::INFINITY;
    for (row, r) in acc.iter_mut().zip(&traj.records) {
        running_min = running_min.min(r.grad_norm);
        row[MetricName::GradNorm.index()].push(r.grad_norm);
        row[MetricName::GradNormSq.index()].push(r.grad_norm * r.grad_norm);
        row[MetricName::FValue.index()].push(r.f_value);
        row[MetricName::EffectiveStepsize.index()].push(r.effective_stepsize);
        row[MetricName::RunningMinGradNorm.index()].push(running_min);
    }
}

fn summarize(traj: &Trajectory, overflow: Option<&Error>) -> SeedSummary {
    let n = traj.len().max(1) as f64;
    SeedSummary {
        seed: traj.seed,
        records: traj.len(),
        overflow_at: overflow.map(|e| match e {
            Error::Overflow { iteration, .. } => iteration.unwrap_or(traj.len() as u64),
            _ => traj.len() as u64,
        }),
        initial_grad_norm: traj.records.first().map(|r| r.grad_norm).unwrap_or(f64::NAN),
        mean_grad_norm: traj.grad_norms().sum::<f64>() / n,
        mean_grad_norm_sq: traj.grad_norms().map(|g| g * g).sum::<f64>() / n,
        min_grad_norm: traj.min_grad_norm(),
        max_grad_norm: traj.max_grad_norm(),
    }
}

fn rate_fit(means: &[f64], series: RateSeries, window_fraction: f64) -> RateFitEntry {
    let values = match series {
        RateSeries::RunningAverage => running_average(means),
        RateSeries::PerIterate => means.to_vec(),
    };
    let pts: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, v)| ((i + 1) as f64, *v)).collect();
    match fit_power_law(&pts, window_fraction) {
        Ok(fit) => RateFitEntry::Fit(fit),
        Err(e) => RateFitEntry::Skip { skip: e.to_string() },
    }
}

/// Evaluate one overlay; failures become a skip with the reason.
pub fn evaluate_bound(name: BoundName, params: &BoundParameters, horizon_t: u64) -> BoundValue {
    let r = &params.request;
    let scalar = |v: Result<f64>| match (v, name.metric()) {
        (Ok(value), Some(metric)) => BoundValue::Scalar { value, metric },
        (Ok(_), None) => BoundValue::Skip { reason: "bound metric unknown".into() },
        (Err(e), _) => BoundValue::Skip { reason: e.to_string() },
    };
    if let Some(missing) = params.missing(name) {
        return BoundValue::Skip { reason: format!("missing parameter `{missing}`") };
    }
    match name {
        BoundName::SgdUpperBound => {
            let form = if r.alpha.unwrap_or(0.5) == 0.5 { SgdBoundForm::MainText } else { SgdBoundForm::AppendixGeneral };
            scalar(theory::sgd_upper_bound(r, form))
        }
        BoundName::SgdBoundedGradBound => scalar(theory::sgd_bounded_grad_bound(r)),
        BoundName::NsgdUpperBound => scalar(theory::nsgd_upper_bound(r)),
        BoundName::NsgdNoncvgThreshold => scalar(theory::nsgd_noncvg_threshold(
            r.l.unwrap(),
            r.delta.unwrap(),
            r.sigma.unwrap(),
            params.gamma_max.unwrap(),
        )),
        BoundName::AmsgradDetUpperBound => match theory::amsgrad_det_upper_bound(r) {
            Ok(b) => BoundValue::Scalar { value: b.value, metric: b.metric },
            Err(e) => BoundValue::Skip { reason: e.to_string() },
        },
        BoundName::AmsgradDetLower => scalar(theory::amsgrad_det_lower(r)),
        BoundName::AmsgradStochLower => {
            let mut req = *r;
            if let Some(h) = params.instance_horizon {
                req.horizon = h as f64;
            }
            scalar(theory::amsgrad_stoch_lower(&req))
        }
        BoundName::NsgdmRateTemplate => scalar(theory::nsgdm_rate_template(r)),
        BoundName::AdagradRateTemplate => scalar(theory::adagrad_rate_template(r)),
        BoundName::SgdLowerCurve => {
            let (eta, l, delta) = (r.eta.unwrap(), r.l.unwrap(), r.delta.unwrap());
            let t0 = params.t0.unwrap();
            let inst_t = params.instance_horizon.unwrap_or(horizon_t);
            let values = (0..horizon_t).map(|t| theory::sgd_lower_curve(eta, l, delta, t, t0, inst_t).ok()).collect();
            BoundValue::Curve { values, metric: BoundMetric::GradNormAt }
        }
    }
}

fn per_seed(ctx: &Context, check: &CheckSpec, traj: &Trajectory) -> Vec<Finding> {
    let name = check.name();
    let one = |ok: bool, detail: String| vec![Finding { key: name.clone(), ok, detail }];
    match check {
        CheckSpec::SgdHardPhases => hard_phases(ctx, traj),
        CheckSpec::MinGradFraction { bound, .. } | CheckSpec::MinGradAtLeast { threshold: bound } => {
            match ctx.threshold(bound) {
                Ok(thr) => {
                    let m = traj.min_grad_norm();
                    one(m >= thr, format!("seed {}: min grad norm {m:e} vs {thr:e}", traj.seed))
                }
                Err(_) => vec![],
            }
        }
        CheckSpec::ExactGradNorm { value } => {
            let bad = traj.records.iter().find(|r| r.grad_norm.to_bits() != value.to_bits());
            match bad {
                None => one(true, String::new()),
                Some(r) => one(false, format!("seed {}: grad norm at t={} is {:e}, expected {value:e}", traj.seed, r.t, r.grad_norm)),
            }
        }
        CheckSpec::MaxGrowth { factor, expect } => {
            let g0 = traj.records.first().map(|r| r.grad_norm).unwrap_or(f64::NAN);
            let ratio = traj.max_grad_norm() / g0;
            let ok = match expect {
                GrowthExpectation::Exceeds => ratio > *factor,
                GrowthExpectation::StaysBelow => ratio <= *factor,
            };
            one(ok, format!("seed {}: max/initial grad norm = {ratio:e}", traj.seed))
        }
        CheckSpec::StaysInDomain => {
            let inst = &ctx.built.instance;
            let Some(domain) = inst.evaluation_domain() else { return vec![] };
            let d = inst.dimension();
            if d > 4 {
                return vec![];
            }
            let bad = traj.records.iter().find(|r| !domain.contains(&r.iterate[..d]));
            match bad {
                None => one(true, String::new()),
                Some(r) => one(false, format!("seed {}: iterate left the domain at t={}", traj.seed, r.t)),
            }
        }
        _ => vec![],
    }
}

fn hard_phases(ctx: &Context, traj: &Trajectory) -> Vec<Finding> {
    let (Some(report), super::config::InstanceSpec::SgdHard { l, delta, eta, horizon }) =
        (&ctx.built.hard_report, &ctx.spec.instance_spec)
    else {
        return vec![];
    };
    let inst_t = horizon.unwrap_or(ctx.spec.horizon_t);
    let t0 = report.t0;
    let seed = traj.seed;
    let g = |t: u64| traj.records.get(t as usize).map(|r| r.grad_norm);
    let mut out = Vec::new();

    let mut growth = Finding { key: "sgd_hard_phases/growth_phase".into(), ok: true, detail: String::new() };
    for t in 1..=t0 {
        let curve = theory::sgd_lower_curve(*eta, *l, *delta, t, t0, inst_t);
        match (g(t), curve) {
            (Some(v), Ok(c)) if v >= c => {}
            (v, c) => {
                growth.ok = false;
                growth.detail = format!("seed {seed}: t={t} grad norm {v:?} vs curve {c:?}");
                break;
            }
        }
    }
    if growth.ok {
        growth.detail = format!("|grad f(x_t)| >= lower curve for 1 <= t <= t0 = {t0}");
    }
    out.push(growth);

    let display = theory::sgd_t0_gradient_bound(*eta, *l, *delta);
    let (ok, detail) = match (g(t0), &display) {
        (Some(v), Ok(b)) => (v >= *b, format!("seed {seed}: grad norm at t0={t0} is {v:e}, display value {b:e}")),
        (None, _) => (false, format!("seed {seed}: no iterate at t0={t0}")),
        (_, Err(e)) => (false, format!("display value unavailable: {e}")),
    };
    out.push(Finding { key: "sgd_hard_phases/t0_display".into(), ok, detail });

    let plateau = theory::sgd_plateau_value(report.delta_tilde, *eta, *l, inst_t as f64);
    let last = (ctx.spec.horizon_t - 1).min(inst_t);
    let mut p = Finding { key: "sgd_hard_phases/plateau_phase".into(), ok: last > t0, detail: String::new() };
    p.detail = if last > t0 {
        format!("|grad f(x_t)| >= {plateau:e} for {} <= t <= {last}", t0 + 1)
    } else {
        "no iterates after t0".into()
    };
    for t in t0 + 1..=last {
        match g(t) {
            Some(v) if v >= plateau => {}
            v => {
                p.ok = false;
                p.detail = format!("seed {seed}: t={t} grad norm {v:?} below plateau {plateau:e}");
                break;
            }
        }
    }
    out.push(p);
    out
}

fn all_seeds(key: &str, findings: &[Vec<Finding>], pass_msg: &str) -> Vec<(String, Verdict)> {
    let mut keys: Vec<String> = Vec::new();
    for f in findings.iter().flatten() {
        if !keys.contains(&f.key) {
            keys.push(f.key.clone());
        }
    }
    if keys.is_empty() {
        return vec![(key.to_string(), Verdict::skip("no per-seed results"))];
    }
    keys.into_iter()
        .map(|k| {
            let mine: Vec<&Finding> = findings.iter().flatten().filter(|f| f.key == k).collect();
            let verdict = match mine.iter().find(|f| !f.ok) {
                Some(f) => Verdict::fail(f.detail.clone()),
                None if mine.len() == 1 && !mine[0].detail.is_empty() => Verdict::pass(mine[0].detail.clone()),
                None => Verdict::pass(format!("{pass_msg} on all {} seeds", mine.len())),
            };
            (k, verdict)
        })
        .collect()
}

fn render(
    ctx: &Context,
    check: &CheckSpec,
    findings: &[Vec<Finding>],
    summaries: &[SeedSummary],
    aggregates: &BTreeMap<String, Vec<MonteCarloStat>>,
) -> Vec<(String, Verdict)> {
    let name = check.name();
    let truncated = summaries.iter().any(|s| s.overflow_at.is_some());
    let v = match check {
        CheckSpec::BoundDominance { bound, k_stderr } => {
            let Some(BoundValue::Scalar { value, metric }) = ctx.bounds.get(bound) else {
                let why = match ctx.bounds.get(bound) {
                    Some(BoundValue::Skip { reason }) => reason.clone(),
                    _ => "bound is not a scalar".into(),
                };
                return vec![(name, Verdict::skip(why))];
            };
            if truncated {
                return vec![(name, Verdict::fail("some seeds overflowed, the average is undefined"))];
            }
            let values: Vec<f64> = match metric {
                BoundMetric::MeanSquaredGradNorm => summaries.iter().map(|s| s.mean_grad_norm_sq).collect(),
                BoundMetric::MeanGradNorm => summaries.iter().map(|s| s.mean_grad_norm).collect(),
                other => return vec![(name, Verdict::skip(format!("{other:?} is not an averaged metric")))],
            };
            let stat = MonteCarloStat::from_values(&values).expect("at least one seed");
            let lhs = stat.mean;
            let rhs = value + if stat.stderr.is_nan() { 0.0 } else { k_stderr * stat.stderr };
            Verdict::from_bool(
                lhs <= rhs,
                format!("{metric:?}: empirical {lhs:e} (stderr {:e}, n={}) vs bound {value:e} + {k_stderr}*stderr", stat.stderr, stat.n),
            )
        }
        CheckSpec::MeanAtLeast { threshold, k_stderr } => {
            let thr = match ctx.threshold(threshold) {
                Ok(v) => v,
                Err(why) => return vec![(name, Verdict::skip(why))],
            };
            let series = &aggregates[MetricName::GradNorm.as_str()];
            let worst = series
                .iter()
                .enumerate()
                .filter(|(_, s)| s.n > 0)
                .map(|(t, s)| {
                    let slack = if s.stderr.is_nan() { 0.0 } else { k_stderr * s.stderr };
                    (t, s.mean + slack - thr, s.mean)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                None => Verdict::skip("no aggregated iterates"),
                Some((t, margin, mean)) => Verdict::from_bool(
                    margin >= 0.0,
                    format!("smallest margin at t={t}: mean {mean:e} vs threshold {thr:e} (k={k_stderr})"),
                ),
            }
        }
        CheckSpec::MinGradFraction { bound, min_fraction } => {
            if let Err(why) = ctx.threshold(bound) {
                return vec![(name, Verdict::skip(why))];
            }
            let flat: Vec<&Finding> = findings.iter().flatten().collect();
            let hits = flat.iter().filter(|f| f.ok).count();
            let frac = hits as f64 / flat.len().max(1) as f64;
            Verdict::from_bool(frac >= *min_fraction, format!("{hits} of {} seeds ({frac}) vs floor {min_fraction}", flat.len()))
        }
        CheckSpec::MinGradAtLeast { threshold } => {
            if let Err(why) = ctx.threshold(threshold) {
                return vec![(name, Verdict::skip(why))];
            }
            return all_seeds(&name, findings, "min grad norm above threshold");
        }
        CheckSpec::RateExponent { metric, range, window_fraction, series } => {
            let means: Vec<f64> = aggregates[metric.as_str()].iter().map(|s| s.mean).collect();
            match rate_fit(&means, *series, *window_fraction) {
                RateFitEntry::Fit(fit) => Verdict::from_bool(
                    fit.exponent >= range.0 && fit.exponent <= range.1,
                    format!("exponent {:.4} (r2 {:.4}) vs [{}, {}]", fit.exponent, fit.r_squared, range.0, range.1),
                ),
                RateFitEntry::Skip { skip } => Verdict::skip(skip),
            }
        }
        CheckSpec::StaysInDomain if findings.iter().all(|f| f.is_empty()) => {
            Verdict::skip("no evaluation domain, or dimension above 4")
        }
        CheckSpec::SgdHardPhases | CheckSpec::ExactGradNorm { .. } | CheckSpec::MaxGrowth { .. } | CheckSpec::StaysInDomain => {
            return all_seeds(&name, findings, "holds");
        }
    };
    vec![(name, v)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    fn spec(seeds: &str, noise: &str, t: u64) -> ExperimentSpec {
        parse_config(&format!(
            r#"{{
            "experiment_id": "t",
            "instance_spec": {{"kind": "quadratic", "l": 1.0, "delta": 0.5}},
            "optimizer_spec": {{"kind": "sgd", "eta": 0.5, "alpha": 0.5}},
            {noise}
            "horizon_T": {t},
            "seeds": {seeds},
            "metrics": ["grad_norm", "f_value"]
        }}"#
        ))
        .unwrap()
    }

    #[test]
    fn single_exact_seed_aggregates_equal_the_trajectory() {
        let s = spec("[7]", "", 10);
        let r = run_experiment(&s).unwrap();
        let traj = &r.per_seed_trajectories.as_ref().unwrap()[0];
        let agg = r.aggregate(MetricName::GradNorm).unwrap();
        assert_eq!(agg.len(), 10);
        for (a, rec) in agg.iter().zip(&traj.records) {
            assert_eq!(a.mean, rec.grad_norm);
            assert_eq!(a.n, 1);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let s = spec("[5, 1, 3, 2, 4, 9, 8, 100, 77]", r#""noise_spec": {"kind": "gaussian", "sigma": 1.0},"#, 50);
        let a = run_experiment_with(&s, RunOptions { workers: Some(1) }).unwrap();
        let b = run_experiment_with(&s, RunOptions { workers: Some(4) }).unwrap();
        assert_eq!(a.aggregates, b.aggregates);
        assert_eq!(a.seed_summaries, b.seed_summaries);
        assert_eq!(a.per_seed_trajectories, b.per_seed_trajectories);
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.0];
        let mut w = Welford::default();
        xs.iter().for_each(|x| w.push(*x));
        let direct = MonteCarloStat::from_values(&xs).unwrap();
        let s = w.stat();
        assert!((s.mean - direct.mean).abs() < 1e-14);
        assert!((s.stderr - direct.stderr).abs() < 1e-14);
    }
}
