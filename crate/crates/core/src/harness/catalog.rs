//! Named, immediately runnable reproductions.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{fit_power_law, RateFit};
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::optimizers::{
    AdagradConfig, AmsgradConfig, MomentumSchedule, MomentumSgdConfig, NsgdConfig, NsgdmConfig, OptimizerConfig,
    PolynomialSchedule, SgdConfig,
};

use super::config::{BoundName, CheckSpec, ExperimentSpec, GrowthExpectation, InstanceSpec, MetricName, RateSeries, Threshold};
use super::experiment::{run_experiment_with, ExperimentResult, RunOptions, Verdict, VerdictStatus};

/// Fit `log(mean averaged grad norm) ~ log T` across arms run at different horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonRate {
    pub name: String,
    pub arms: Vec<String>,
    pub range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub name: String,
    pub description: String,
    /// What a faithful run is expected to report.
    pub expected: String,
    pub arms: Vec<ExperimentSpec>,
    pub horizon_rates: Vec<HorizonRate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproResult {
    pub reproduction: Reproduction,
    pub arms: Vec<ExperimentResult>,
    pub rate_fits: BTreeMap<String, RateFit>,
    /// Arm verdicts under `<arm label>/<check>` plus the horizon-rate verdicts.
    pub verdicts: BTreeMap<String, Verdict>,
    pub wall_time: f64,
}

impl ReproResult {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| v.status != VerdictStatus::Fail)
    }
}

fn seeds(n: u64) -> Vec<u64> {
    (0..n).collect()
}

fn quadratic(l: f64, delta: f64) -> InstanceSpec {
    InstanceSpec::Quadratic { l, delta, dimension: 1, gradient_box: None }
}

fn sgd(eta: f64, alpha: f64) -> OptimizerConfig {
    SgdConfig { eta, alpha }.into()
}

fn amsgrad(gamma: f64, alpha: f64, v0: f64) -> OptimizerConfig {
    AmsgradConfig { gamma, alpha, beta1: 0.0, beta2: 0.0, v0, initial_m: None }.into()
}

fn nsgdm(gamma: f64) -> OptimizerConfig {
    NsgdmConfig { gamma, alpha: 0.75, momentum_schedule: MomentumSchedule::Default, initial_momentum: None }.into()
}

fn base(id: String, label: String, instance: InstanceSpec, optimizer: OptimizerConfig, t: u64) -> ExperimentSpec {
    ExperimentSpec {
        experiment_id: id,
        label: Some(label),
        instance_spec: instance,
        optimizer_spec: optimizer,
        noise_spec: None,
        horizon_t: t,
        seeds: vec![0],
        bounds_to_overlay: vec![],
        metrics: vec![MetricName::GradNorm],
        checks: vec![],
        allow_overflow: false,
    }
}

fn quadratic_contrast() -> Reproduction {
    let mut arms = Vec::new();
    for l in [1.0, 30.0] {
        let methods: [(&str, OptimizerConfig); 3] = [
            ("sgd", sgd(1.0, 0.5)),
            ("adagrad", AdagradConfig { eta: 1.0, v0: 1.0 }.into()),
            ("nsgdm", nsgdm(1.0)),
        ];
        for (m, opt) in methods {
            // x0 = 10 for both curvatures
            let mut s = base(format!("fig1a-quadratic_{m}_l{l}"), format!("{m},l={l}"), quadratic(l, 50.0 * l), opt, 1000);
            s.noise_spec = Some(NoiseSpec::gaussian(1.0));
            s.seeds = seeds(20);
            s.metrics = vec![MetricName::GradNorm, MetricName::RunningMinGradNorm, MetricName::EffectiveStepsize];
            if l == 30.0 {
                let expect = if m == "sgd" { (10.0, GrowthExpectation::Exceeds) } else { (2.0, GrowthExpectation::StaysBelow) };
                s.checks = vec![CheckSpec::MaxGrowth { factor: expect.0, expect: expect.1 }];
            }
            arms.push(s);
        }
    }
    Reproduction {
        name: "fig1a-quadratic".into(),
        description: "SGD, AdaGrad-norm and NSGD-M with eta = 1 on quadratics with l in {1, 30}, x0 = 10, Gaussian noise sigma = 1".into(),
        expected: "for l = 30 SGD's gradient norm exceeds 10x its initial value; AdaGrad-norm and NSGD-M stay within 2x".into(),
        arms,
        horizon_rates: vec![],
    }
}

fn hard_instance_blowup() -> Reproduction {
    let (l, delta, eta, t) = (1.0, 0.5, 8.0, 64);
    let mut s = base(
        "thm32-blowup".into(),
        "eta=8,l=1".into(),
        InstanceSpec::SgdHard { l, delta, eta, horizon: Some(t) },
        sgd(eta, 0.5),
        t + 1,
    );
    s.bounds_to_overlay = vec![BoundName::SgdLowerCurve];
    s.metrics = vec![MetricName::GradNorm, MetricName::FValue];
    s.checks = vec![CheckSpec::SgdHardPhases];
    Reproduction {
        name: "thm32-blowup".into(),
        description: "deterministic untuned GD (eta_t = 8/sqrt(t+1)) on the piecewise-quadratic hard instance, l = 1, Delta = 0.5, T = 64".into(),
        expected: "growth_phase, t0_display and plateau_phase all pass".into(),
        arms: vec![s],
        horizon_rates: vec![],
    }
}

fn nsgd_noncvg() -> Reproduction {
    let mut s = base(
        "nsgd-noncvg".into(),
        "gamma=1".into(),
        InstanceSpec::NsgdNoncvg { l: 1.0, sigma: 1.0, epsilon: 0.5, delta: 1.0, gamma_max: 1.0 },
        NsgdConfig { gamma: 1.0, alpha: 0.5 }.into(),
        1000,
    );
    s.seeds = seeds(1000);
    s.bounds_to_overlay = vec![BoundName::NsgdNoncvgThreshold];
    s.checks = vec![
        CheckSpec::MeanAtLeast { threshold: Threshold::Value(0.5), k_stderr: 0.0 },
        CheckSpec::MeanAtLeast { threshold: Threshold::Bound(BoundName::NsgdNoncvgThreshold), k_stderr: 3.0 },
    ];
    Reproduction {
        name: "nsgd-noncvg".into(),
        description: "NSGD with gamma_t = 1/sqrt(t+1) on the sign-noise quadratic, l = sigma = Delta = gamma_max = 1, eps = 0.5, 1000 seeds".into(),
        expected: "the mean gradient norm stays above eps = 0.5 at every t; the comparison with the closed-form threshold \
                   sqrt(3) - 1 fails because the stationary mean settles near sigma/2"
            .into(),
        arms: vec![s],
        horizon_rates: vec![],
    }
}

fn amsgrad_frechet() -> Reproduction {
    let mut s = base(
        "amsgrad-frechet".into(),
        "zeta=0.75".into(),
        InstanceSpec::AmsgradSlow { l: 1.0, delta: 1.0, sigma: 1.0, zeta: 0.75, gamma: 1.0, beta2: 0.0 },
        amsgrad(1.0, 0.5, 1.0),
        10_000,
    );
    s.seeds = seeds(200);
    s.metrics = vec![MetricName::GradNorm, MetricName::RunningMinGradNorm];
    s.bounds_to_overlay = vec![BoundName::AmsgradStochLower];
    s.checks = vec![CheckSpec::MinGradFraction { bound: Threshold::Bound(BoundName::AmsgradStochLower), min_fraction: 0.45 }];
    Reproduction {
        name: "amsgrad-frechet".into(),
        description: "AMSGrad-norm (beta1 = beta2 = 0, v0 = 1) under Frechet-tailed noise, l = Delta = sigma = gamma = 1, zeta = 0.75, T = 1e4, 200 seeds".into(),
        expected: "at least 45% of seeds keep min_t |grad f| above the high-probability lower bound".into(),
        arms: vec![s],
        horizon_rates: vec![],
    }
}

fn amsgrad_oscillator() -> Reproduction {
    let (v0, gamma) = (1.0, 2.0);
    let mut s = base(
        "amsgrad-oscillator".into(),
        "v0=1,gamma=2".into(),
        InstanceSpec::AmsgradOscillator { v0, gamma, l: 1.0, delta: 1.0 },
        amsgrad(gamma, 0.0, v0),
        101,
    );
    s.metrics = vec![MetricName::GradNorm, MetricName::EffectiveStepsize];
    s.bounds_to_overlay = vec![BoundName::AmsgradDetLower];
    s.checks = vec![
        CheckSpec::ExactGradNorm { value: v0 },
        CheckSpec::MinGradAtLeast { threshold: Threshold::Bound(BoundName::AmsgradDetLower) },
    ];
    Reproduction {
        name: "amsgrad-oscillator".into(),
        description: "AMSGrad-norm with constant stepsize on f = (v0/gamma) x^2 from x0 = gamma/2; v0 = 1, gamma = 2".into(),
        expected: "|grad f(x_t)| = v0 exactly for t = 0..100".into(),
        arms: vec![s],
        horizon_rates: vec![],
    }
}

/// `√(Δ / (16 max{1/ℓ, Σ_{t<T} caps}))`
fn momentum_floor(l: f64, delta: f64, caps: PolynomialSchedule, t: u64) -> f64 {
    let sum: f64 = (0..t).map(|s| caps.at(s)).sum();
    (delta / (16.0 * (1.0 / l).max(sum))).sqrt()
}

fn momentum_lb() -> Reproduction {
    let (l, delta, t) = (1.0, 1.0, 1000);
    let sched = PolynomialSchedule { eta: 1.0, alpha: 0.5 };
    let methods: [(&str, OptimizerConfig, PolynomialSchedule); 3] = [
        ("sgd", sgd(1.0, 0.5), sched),
        ("momentum_sgd", MomentumSgdConfig { beta1: 0.9, stepsize_schedule: sched, initial_m: None }.into(), sched),
        ("adagrad", AdagradConfig { eta: 1.0, v0: 1.0 }.into(), PolynomialSchedule { eta: 1.0, alpha: 0.0 }),
    ];
    let arms = methods
        .into_iter()
        .map(|(m, opt, caps)| {
            let mut s = base(format!("momentum-lb_{m}"), m.into(), InstanceSpec::MomentumLb { l, delta, caps, horizon: None }, opt, t);
            s.metrics = vec![MetricName::GradNorm, MetricName::EffectiveStepsize];
            s.checks = vec![CheckSpec::MinGradAtLeast { threshold: Threshold::Value(momentum_floor(l, delta, caps, t)) }];
            s
        })
        .collect();
    Reproduction {
        name: "momentum-lb".into(),
        description: "deterministic methods whose effective stepsize is capped by eta~_t on f = x^2/(4S): SGD, momentum SGD and AdaGrad-norm".into(),
        expected: "min_t |grad f(x_t)| >= sqrt(Delta/(16 max{1/l, sum eta~_t})) on every arm".into(),
        arms,
        horizon_rates: vec![],
    }
}

fn bound_sweep() -> Reproduction {
    let mut arms = Vec::new();
    for l in [0.5, 1.0] {
        for eta in [0.25, 0.5, 1.0, 2.0] {
            let mut s = base(
                format!("bound-sweep_eta{eta}_l{l}"),
                format!("eta={eta},l={l}"),
                InstanceSpec::Quadratic { l, delta: 0.5, dimension: 1, gradient_box: Some(20.0) },
                sgd(eta, 0.5),
                1000,
            );
            s.noise_spec = Some(NoiseSpec::gaussian(1.0));
            s.seeds = seeds(500);
            s.metrics = vec![MetricName::GradNorm, MetricName::GradNormSq];
            s.bounds_to_overlay = vec![BoundName::SgdUpperBound, BoundName::SgdBoundedGradBound];
            s.checks = vec![
                CheckSpec::BoundDominance { bound: BoundName::SgdUpperBound, k_stderr: 3.0 },
                CheckSpec::BoundDominance { bound: BoundName::SgdBoundedGradBound, k_stderr: 3.0 },
                CheckSpec::StaysInDomain,
            ];
            arms.push(s);
        }
    }
    Reproduction {
        name: "bound-sweep".into(),
        description: "SGD (eta_t = eta/sqrt(t+1)) on quadratics with Gaussian noise sigma = 1, Delta = 0.5, T = 1000, 500 seeds, \
                      over an (eta, l) grid; both upper bounds overlaid, G certified on the box |x| <= 20"
            .into(),
        expected: "every arm's averaged squared gradient norm is dominated by both bounds within 3 stderr and iterates stay in the box".into(),
        arms,
        horizon_rates: vec![],
    }
}

const HORIZONS: [u64; 5] = [100, 300, 1000, 3000, 10_000];

fn amsgrad_det_rate() -> Reproduction {
    let mut arms = Vec::new();
    for t in [100, 1000, 10_000] {
        let mut s = base(format!("amsgrad-det-rate_T{t}"), format!("T={t}"), quadratic(1.0, 0.5), amsgrad(1.0, 0.5, 0.1), t);
        s.bounds_to_overlay = vec![BoundName::AmsgradDetUpperBound];
        s.checks = vec![CheckSpec::BoundDominance { bound: BoundName::AmsgradDetUpperBound, k_stderr: 0.0 }];
        if t == 10_000 {
            s.checks.push(CheckSpec::RateExponent {
                metric: MetricName::GradNorm,
                range: (-0.35, -0.15),
                window_fraction: 0.5,
                series: RateSeries::RunningAverage,
            });
        }
        arms.push(s);
    }
    let caps = PolynomialSchedule { eta: 1.0 / 0.1, alpha: 0.5 };
    let mut matched = Vec::new();
    for t in HORIZONS {
        let s = base(
            format!("amsgrad-det-rate_matched_T{t}"),
            format!("matched,T={t}"),
            InstanceSpec::MomentumLb { l: 1.0, delta: 0.5, caps, horizon: None },
            amsgrad(1.0, 0.5, 0.1),
            t,
        );
        matched.push(s.experiment_id.clone());
        arms.push(s);
    }
    Reproduction {
        name: "amsgrad-det-rate".into(),
        description: "deterministic AMSGrad-norm (beta1 = beta2 = 0, v0 = 0.1, gamma = 1) on the quadratic l = 1 for T in {1e2, 1e3, 1e4}, \
                      plus horizon-matched instances f = x^2/(4S) built for each T"
            .into(),
        expected: "the averaged gradient norm is below the bound for every T; the running-average exponent on the fixed quadratic \
                   is near -1 and misses [-0.35, -0.15]; the horizon-matched fit across T lands inside it"
            .into(),
        arms,
        horizon_rates: vec![HorizonRate { name: "horizon_rate/matched".into(), arms: matched, range: (-0.35, -0.15) }],
    }
}

fn adagrad_rate() -> Reproduction {
    let caps = PolynomialSchedule { eta: 1.0, alpha: 0.0 };
    let arms: Vec<ExperimentSpec> = HORIZONS
        .iter()
        .map(|&t| {
            let mut s = base(
                format!("adagrad-rate_T{t}"),
                format!("T={t}"),
                InstanceSpec::MomentumLb { l: 1.0, delta: 0.5, caps, horizon: None },
                AdagradConfig { eta: 1.0, v0: 1.0 }.into(),
                t,
            );
            s.bounds_to_overlay = vec![BoundName::AdagradRateTemplate];
            s
        })
        .collect();
    let ids = arms.iter().map(|a| a.experiment_id.clone()).collect();
    Reproduction {
        name: "adagrad-rate".into(),
        description: "deterministic AdaGrad-norm (eta = v0 = 1) on horizon-matched quadratics f = x^2/(4T), T in {1e2 .. 1e4}".into(),
        expected: "the averaged gradient norm decays with exponent in [-0.6, -0.4] across T".into(),
        arms,
        horizon_rates: vec![HorizonRate { name: "horizon_rate/adagrad".into(), arms: ids, range: (-0.6, -0.4) }],
    }
}

fn nsgd_rate() -> Reproduction {
    let delta = 0.5;
    let arms: Vec<ExperimentSpec> = HORIZONS
        .iter()
        .map(|&t| {
            // start at twice the total travel so the iterate never reaches the optimum
            let x0 = 2.0 * (0..t).map(|s| 1.0 / ((s + 1) as f64).sqrt()).sum::<f64>();
            let l = 2.0 * delta / (x0 * x0);
            let mut s = base(format!("nsgd-rate_T{t}"), format!("T={t}"), quadratic(l, delta), NsgdConfig { gamma: 1.0, alpha: 0.5 }.into(), t);
            s.bounds_to_overlay = vec![BoundName::NsgdUpperBound];
            s.checks = vec![CheckSpec::BoundDominance { bound: BoundName::NsgdUpperBound, k_stderr: 0.0 }];
            s
        })
        .collect();
    let ids = arms.iter().map(|a| a.experiment_id.clone()).collect();
    Reproduction {
        name: "nsgd-rate".into(),
        description: "deterministic NSGD (gamma_t = 1/sqrt(t+1)) on horizon-matched quadratics started at twice the total travel".into(),
        expected: "the averaged gradient norm is below the upper bound and decays with exponent in [-0.6, -0.4] across T".into(),
        arms,
        horizon_rates: vec![HorizonRate { name: "horizon_rate/nsgd".into(), arms: ids, range: (-0.6, -0.4) }],
    }
}

fn nsgdm_rate() -> Reproduction {
    let mut s = base("nsgdm-rate".into(), "sigma=1".into(), quadratic(1.0, 1.0), nsgdm(1.0), 100_000);
    s.noise_spec = Some(NoiseSpec::gaussian(1.0));
    s.seeds = seeds(100);
    s.bounds_to_overlay = vec![BoundName::NsgdmRateTemplate];
    s.checks = vec![CheckSpec::RateExponent {
        metric: MetricName::GradNorm,
        range: (-0.6, -0.15),
        window_fraction: 0.5,
        series: RateSeries::RunningAverage,
    }];
    Reproduction {
        name: "nsgdm-rate".into(),
        description: "NSGD-M (gamma = 1, alpha_t = sqrt(2/(t+2))) on the quadratic l = 1 with Gaussian noise sigma = 1, 100 seeds, T = 1e5".into(),
        expected: "the running average of the mean gradient norm decays with exponent in [-0.6, -0.15]".into(),
        arms: vec![s],
        horizon_rates: vec![],
    }
}

/// Every named reproduction.
pub fn list_reproductions() -> Vec<Reproduction> {
    vec![
        quadratic_contrast(),
        hard_instance_blowup(),
        nsgd_noncvg(),
        amsgrad_frechet(),
        amsgrad_oscillator(),
        momentum_lb(),
        bound_sweep(),
        amsgrad_det_rate(),
        adagrad_rate(),
        nsgdm_rate(),
        nsgd_rate(),
    ]
}

pub fn find_reproduction(name: &str) -> Result<Reproduction> {
    list_reproductions().into_iter().find(|r| r.name == name).ok_or_else(|| {
        let names: Vec<String> = list_reproductions().into_iter().map(|r| r.name).collect();
        Error::config("", format!("unknown reproduction `{name}`; known: {}", names.join(", ")))
    })
}

fn arm_key(spec: &ExperimentSpec) -> String {
    spec.label.clone().unwrap_or_else(|| spec.experiment_id.clone())
}

pub fn run_reproduction(repro: &Reproduction, options: RunOptions) -> Result<ReproResult> {
    let start = Instant::now();
    let arms = repro.arms.iter().map(|a| run_experiment_with(a, options)).collect::<Result<Vec<_>>>()?;
    let mut verdicts = BTreeMap::new();
    for a in &arms {
        let key = arm_key(&a.spec);
        for (k, v) in &a.verdicts {
            let full = if repro.arms.len() == 1 { k.clone() } else { format!("{key}/{k}") };
            verdicts.insert(full, v.clone());
        }
    }
    let mut rate_fits = BTreeMap::new();
    for hr in &repro.horizon_rates {
        let mut pts = Vec::new();
        for id in &hr.arms {
            let arm = arms
                .iter()
                .find(|a| &a.spec.experiment_id == id)
                .ok_or_else(|| Error::config("", format!("horizon rate {} names unknown arm {id}", hr.name)))?;
            let mean = arm.seed_summaries.iter().map(|s| s.mean_grad_norm).sum::<f64>() / arm.seed_summaries.len() as f64;
            pts.push((arm.spec.horizon_t as f64, mean));
        }
        let verdict = match fit_power_law(&pts, 1.0) {
            Ok(fit) => {
                let ok = fit.exponent >= hr.range.0 && fit.exponent <= hr.range.1;
                rate_fits.insert(hr.name.clone(), fit);
                Verdict::from_bool(
                    ok,
                    format!("exponent {:.4} across T (r2 {:.4}) vs [{}, {}]", fit.exponent, fit.r_squared, hr.range.0, hr.range.1),
                )
            }
            Err(e) => Verdict::skip(e.to_string()),
        };
        verdicts.insert(hr.name.clone(), verdict);
    }
    Ok(ReproResult { reproduction: repro.clone(), arms, rate_fits, verdicts, wall_time: start.elapsed().as_secs_f64() })
}
