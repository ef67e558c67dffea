//! Stepping rules and the trajectory runner.
//!
//! Every `*_step` function is pure: it takes the current state, one gradient
//! sample and a config, and returns the next state. The runner owns sampling
//! order, so NSGD-M's move-then-sample protocol lives in [`run`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, OVERFLOW_LIMIT};
use crate::noise::{NoiseOracle, RngStream};
use crate::problem::{iterate_summary, ProblemInstance, Trajectory, TrajectoryRecord};
use crate::vecops;

/// Gradients with norm at or below this are treated as zero by the
/// normalized methods, which then skip the step.
pub const ZERO_GRAD_GUARD: f64 = 1e-300;

fn polynomial(base: f64, t: u64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        base
    } else {
        base / ((t + 1) as f64).powf(alpha)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must be positive and finite, got {v}")))
    }
}

fn in_range(name: &str, v: f64, lo: f64, hi: f64, hi_closed: bool) -> Result<()> {
    let ok = v >= lo && if hi_closed { v <= hi } else { v < hi };
    if ok {
        Ok(())
    } else {
        let close = if hi_closed { ']' } else { ')' };
        Err(Error::Precondition(format!("{name} must lie in [{lo}, {hi}{close}, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdConfig {
    pub eta: f64,
    #[serde(default)]
    pub alpha: f64,
}

impl SgdConfig {
    pub fn new(eta: f64, alpha: f64) -> Result<Self> {
        let c = SgdConfig { eta, alpha };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        positive("eta", self.eta)?;
        in_range("alpha", self.alpha, 0.0, 1.0, false)
    }

    pub fn stepsize(&self, t: u64) -> f64 {
        polynomial(self.eta, t, self.alpha)
    }
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsgdConfig {
    pub gamma: f64,
    #[serde(default = "half")]
    pub alpha: f64,
}

impl NsgdConfig {
    pub fn new(gamma: f64, alpha: f64) -> Result<Self> {
        let c = NsgdConfig { gamma, alpha };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        positive("gamma", self.gamma)?;
        in_range("alpha", self.alpha, 0.0, 1.0, true)
    }

    /// Uniform bound on `γₜ`.
    pub fn gamma_max(&self) -> f64 {
        self.gamma
    }

    pub fn stepsize(&self, t: u64) -> f64 {
        polynomial(self.gamma, t, self.alpha)
    }
}

/// Momentum weight schedule `t ↦ αₜ` for NSGD-M.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MomentumSchedule {
    /// `αₜ = √2/√(t+2)`
    #[default]
    Default,
    Constant { value: f64 },
}

impl MomentumSchedule {
    pub fn weight(&self, t: u64) -> f64 {
        match self {
            MomentumSchedule::Default => (2.0 / (t as f64 + 2.0)).sqrt(),
            MomentumSchedule::Constant { value } => *value,
        }
    }
}

fn three_quarters() -> f64 {
    0.75
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsgdmConfig {
    pub gamma: f64,
    #[serde(default = "three_quarters")]
    pub alpha: f64,
    #[serde(default)]
    pub momentum_schedule: MomentumSchedule,
    /// `g₀`; when absent the runner uses the oracle sample at `x₀`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_momentum: Option<Vec<f64>>,
}

impl NsgdmConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        let c = NsgdmConfig { gamma, alpha: 0.75, momentum_schedule: MomentumSchedule::Default, initial_momentum: None };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        positive("gamma", self.gamma)?;
        if !self.alpha.is_finite() {
            return Err(Error::Precondition(format!("alpha must be finite, got {}", self.alpha)));
        }
        if let MomentumSchedule::Constant { value } = self.momentum_schedule {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::Precondition(format!("momentum weight must lie in (0, 1], got {value}")));
            }
        }
        if let Some(g0) = &self.initial_momentum {
            if !vecops::all_finite(g0) {
                return Err(Error::Precondition("initial_momentum must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn stepsize(&self, t: u64) -> f64 {
        polynomial(self.gamma, t, self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmsgradConfig {
    pub gamma: f64,
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default)]
    pub beta1: f64,
    #[serde(default)]
    pub beta2: f64,
    pub v0: f64,
    /// `m₀`; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_m: Option<Vec<f64>>,
}

impl AmsgradConfig {
    pub fn new(gamma: f64, alpha: f64, beta1: f64, beta2: f64, v0: f64) -> Result<Self> {
        let c = AmsgradConfig { gamma, alpha, beta1, beta2, v0, initial_m: None };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        positive("gamma", self.gamma)?;
        positive("v0", self.v0)?;
        in_range("alpha", self.alpha, 0.0, 1.0, false)?;
        in_range("beta1", self.beta1, 0.0, 1.0, false)?;
        in_range("beta2", self.beta2, 0.0, 1.0, true)
    }

    pub fn stepsize(&self, t: u64) -> f64 {
        polynomial(self.gamma, t, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdagradConfig {
    pub eta: f64,
    pub v0: f64,
}

impl AdagradConfig {
    pub fn new(eta: f64, v0: f64) -> Result<Self> {
        let c = AdagradConfig { eta, v0 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        positive("eta", self.eta)?;
        positive("v0", self.v0)
    }
}

/// Stepsize schedule `ηₜ = eta/(t+1)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSchedule {
    pub eta: f64,
    #[serde(default)]
    pub alpha: f64,
}

impl PolynomialSchedule {
    pub fn at(&self, t: u64) -> f64 {
        polynomial(self.eta, t, self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumSgdConfig {
    pub beta1: f64,
    pub stepsize_schedule: PolynomialSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_m: Option<Vec<f64>>,
}

impl MomentumSgdConfig {
    pub fn new(beta1: f64, eta: f64, alpha: f64) -> Result<Self> {
        let c = MomentumSgdConfig { beta1, stepsize_schedule: PolynomialSchedule { eta, alpha }, initial_m: None };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        in_range("beta1", self.beta1, 0.0, 1.0, false)?;
        positive("stepsize_schedule.eta", self.stepsize_schedule.eta)?;
        // a negative exponent would let the schedule grow without bound
        in_range("stepsize_schedule.alpha", self.stepsize_schedule.alpha, 0.0, f64::INFINITY, false)
    }

    pub fn stepsize(&self, t: u64) -> f64 {
        self.stepsize_schedule.at(t)
    }
}

/// Per-algorithm mutable state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub x: Vec<f64>,
    pub t: u64,
    /// Momentum `m` (AMSGrad, momentum SGD) or the current direction `gₜ` (NSGD-M).
    pub m: Option<Vec<f64>>,
    pub v_sq: Option<f64>,
    pub v_hat_sq: Option<f64>,
    pub v_accum_sq: Option<f64>,
    /// Effective stepsize of the most recent step.
    pub effective_stepsize: f64,
}

impl OptimizerState {
    pub fn new(x0: Vec<f64>) -> Self {
        OptimizerState { x: x0, t: 0, m: None, v_sq: None, v_hat_sq: None, v_accum_sq: None, effective_stepsize: 0.0 }
    }

    pub fn for_amsgrad(x0: Vec<f64>, config: &AmsgradConfig) -> Self {
        let d = x0.len();
        let v0_sq = config.v0 * config.v0;
        OptimizerState {
            m: Some(config.initial_m.clone().unwrap_or_else(|| vec![0.0; d])),
            v_sq: Some(v0_sq),
            v_hat_sq: Some(v0_sq),
            ..Self::new(x0)
        }
    }

    pub fn for_adagrad(x0: Vec<f64>, config: &AdagradConfig) -> Self {
        OptimizerState { v_accum_sq: Some(config.v0 * config.v0), ..Self::new(x0) }
    }

    pub fn for_momentum_sgd(x0: Vec<f64>, config: &MomentumSgdConfig) -> Self {
        let d = x0.len();
        OptimizerState { m: Some(config.initial_m.clone().unwrap_or_else(|| vec![0.0; d])), ..Self::new(x0) }
    }

    pub fn for_nsgdm(x0: Vec<f64>, g0: Vec<f64>) -> Self {
        OptimizerState { m: Some(g0), ..Self::new(x0) }
    }
}

fn check_sample(state: &OptimizerState, g: &[f64]) -> Result<()> {
    if g.len() != state.x.len() {
        return Err(Error::Dimension { expected: state.x.len(), got: g.len() });
    }
    if !vecops::all_finite(g) {
        return Err(Error::overflow(f64::INFINITY));
    }
    Ok(())
}

fn check_iterate(x: &[f64]) -> Result<()> {
    let mag = vecops::max_abs(x);
    if mag <= OVERFLOW_LIMIT {
        Ok(())
    } else {
        Err(Error::overflow(mag))
    }
}

fn advance(state: &OptimizerState, x: Vec<f64>, effective_stepsize: f64) -> Result<OptimizerState> {
    check_iterate(&x)?;
    Ok(OptimizerState { x, t: state.t + 1, effective_stepsize, ..state.clone() })
}

pub fn sgd_step(state: &OptimizerState, g: &[f64], config: &SgdConfig) -> Result<OptimizerState> {
    check_sample(state, g)?;
    let eta = config.stepsize(state.t);
    advance(state, vecops::sub_scaled(&state.x, eta, g), eta)
}

/// `x − γₜ g/‖g‖`, or `x` itself when `‖g‖ ≤ 1e−300`. Returns the new point
/// and the effective stepsize `γₜ/‖g‖` (zero when guarded).
fn normalized_move(x: &[f64], g: &[f64], gamma_t: f64) -> (Vec<f64>, f64) {
    let n = vecops::norm(g);
    if n <= ZERO_GRAD_GUARD {
        (x.to_vec(), 0.0)
    } else {
        let unit: Vec<f64> = g.iter().map(|v| v / n).collect();
        (vecops::sub_scaled(x, gamma_t, &unit), gamma_t / n)
    }
}

pub fn nsgd_step(state: &OptimizerState, g: &[f64], config: &NsgdConfig) -> Result<OptimizerState> {
    check_sample(state, g)?;
    let (x, eff) = normalized_move(&state.x, g, config.stepsize(state.t));
    advance(state, x, eff)
}

/// The point NSGD-M moves to from `state`, before the fresh sample is drawn.
pub fn nsgdm_next_point(state: &OptimizerState, config: &NsgdmConfig) -> Result<(Vec<f64>, f64)> {
    let g_t = state
        .m
        .as_ref()
        .ok_or_else(|| Error::Contract("NSGD-M state has no current direction g_t".into()))?;
    check_sample(state, g_t)?;
    let (x, eff) = normalized_move(&state.x, g_t, config.stepsize(state.t));
    check_iterate(&x)?;
    Ok((x, eff))
}

/// One NSGD-M step. `fresh_g` must have been sampled at `sampled_at`, which
/// has to be the new iterate `nsgdm_next_point(state)`.
pub fn nsgdm_step(
    state: &OptimizerState,
    fresh_g: &[f64],
    sampled_at: &[f64],
    config: &NsgdmConfig,
) -> Result<OptimizerState> {
    let (x, eff) = nsgdm_next_point(state, config)?;
    if sampled_at != x.as_slice() {
        return Err(Error::Contract("NSGD-M fresh sample must be drawn at the new iterate x_{t+1}".into()));
    }
    check_sample(state, fresh_g)?;
    let a = config.momentum_schedule.weight(state.t);
    let g_t = state.m.as_ref().unwrap();
    let m = if a == 1.0 { fresh_g.to_vec() } else { vecops::lincomb(1.0 - a, g_t, a, fresh_g) };
    Ok(OptimizerState { x, t: state.t + 1, m: Some(m), effective_stepsize: eff, ..state.clone() })
}

pub fn amsgrad_norm_step(state: &OptimizerState, g: &[f64], config: &AmsgradConfig) -> Result<OptimizerState> {
    check_sample(state, g)?;
    let (m, v_sq, v_hat_sq) = match (&state.m, state.v_sq, state.v_hat_sq) {
        (Some(m), Some(v), Some(vh)) => (m, v, vh),
        _ => return Err(Error::Contract("AMSGrad state must carry m, v² and v̂²".into())),
    };
    let m_new = vecops::lincomb(config.beta1, m, 1.0 - config.beta1, g);
    let v_new = config.beta2 * v_sq + (1.0 - config.beta2) * vecops::norm_sq(g);
    let v_hat_new = v_hat_sq.max(v_new);
    let eff = config.stepsize(state.t) / v_hat_new.sqrt();
    let x = vecops::sub_scaled(&state.x, eff, &m_new);
    check_iterate(&x)?;
    Ok(OptimizerState {
        x,
        t: state.t + 1,
        m: Some(m_new),
        v_sq: Some(v_new),
        v_hat_sq: Some(v_hat_new),
        effective_stepsize: eff,
        ..state.clone()
    })
}

pub fn adagrad_norm_step(state: &OptimizerState, g: &[f64], config: &AdagradConfig) -> Result<OptimizerState> {
    check_sample(state, g)?;
    let acc = state
        .v_accum_sq
        .ok_or_else(|| Error::Contract("AdaGrad state must carry the accumulator v²".into()))?;
    let acc_new = acc + vecops::norm_sq(g);
    let eff = config.eta / acc_new.sqrt();
    let x = vecops::sub_scaled(&state.x, eff, g);
    check_iterate(&x)?;
    Ok(OptimizerState { x, t: state.t + 1, v_accum_sq: Some(acc_new), effective_stepsize: eff, ..state.clone() })
}

pub fn momentum_sgd_step(state: &OptimizerState, g: &[f64], config: &MomentumSgdConfig) -> Result<OptimizerState> {
    check_sample(state, g)?;
    let m = state.m.as_ref().ok_or_else(|| Error::Contract("momentum SGD state must carry m".into()))?;
    // β₁ = 0 takes the literal g so the iterates match plain SGD bitwise
    let m_new = if config.beta1 == 0.0 { g.to_vec() } else { vecops::lincomb(config.beta1, m, 1.0 - config.beta1, g) };
    let eta = config.stepsize(state.t);
    let x = vecops::sub_scaled(&state.x, eta, &m_new);
    check_iterate(&x)?;
    Ok(OptimizerState { x, t: state.t + 1, m: Some(m_new), effective_stepsize: eta, ..state.clone() })
}

/// Any optimizer configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Sgd(SgdConfig),
    Nsgd(NsgdConfig),
    Nsgdm(NsgdmConfig),
    Amsgrad(AmsgradConfig),
    Adagrad(AdagradConfig),
    MomentumSgd(MomentumSgdConfig),
}

impl OptimizerConfig {
    pub fn id(&self) -> &'static str {
        match self {
            OptimizerConfig::Sgd(_) => "sgd",
            OptimizerConfig::Nsgd(_) => "nsgd",
            OptimizerConfig::Nsgdm(_) => "nsgdm",
            OptimizerConfig::Amsgrad(_) => "amsgrad",
            OptimizerConfig::Adagrad(_) => "adagrad",
            OptimizerConfig::MomentumSgd(_) => "momentum_sgd",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OptimizerConfig::Sgd(c) => c.validate(),
            OptimizerConfig::Nsgd(c) => c.validate(),
            OptimizerConfig::Nsgdm(c) => c.validate(),
            OptimizerConfig::Amsgrad(c) => c.validate(),
            OptimizerConfig::Adagrad(c) => c.validate(),
            OptimizerConfig::MomentumSgd(c) => c.validate(),
        }
    }
}

impl From<SgdConfig> for OptimizerConfig {
    fn from(c: SgdConfig) -> Self {
        OptimizerConfig::Sgd(c)
    }
}
impl From<NsgdConfig> for OptimizerConfig {
    fn from(c: NsgdConfig) -> Self {
        OptimizerConfig::Nsgd(c)
    }
}
impl From<NsgdmConfig> for OptimizerConfig {
    fn from(c: NsgdmConfig) -> Self {
        OptimizerConfig::Nsgdm(c)
    }
}
impl From<AmsgradConfig> for OptimizerConfig {
    fn from(c: AmsgradConfig) -> Self {
        OptimizerConfig::Amsgrad(c)
    }
}
impl From<AdagradConfig> for OptimizerConfig {
    fn from(c: AdagradConfig) -> Self {
        OptimizerConfig::Adagrad(c)
    }
}
impl From<MomentumSgdConfig> for OptimizerConfig {
    fn from(c: MomentumSgdConfig) -> Self {
        OptimizerConfig::MomentumSgd(c)
    }
}

/// Records produced before a run stopped, plus the error that stopped it.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialRun {
    pub trajectory: Trajectory,
    pub error: Option<Error>,
}

/// Run `horizon_t` steps from the instance's initial point.
pub fn run(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    oracle: &NoiseOracle,
    horizon_t: u64,
    seed: u64,
) -> Result<Trajectory> {
    let partial = run_truncating(instance, config, oracle, horizon_t, seed)?;
    match partial.error {
        None => Ok(partial.trajectory),
        Some(e) => Err(e),
    }
}

/// Like [`run`], but an overflow mid-run keeps the records computed so far.
/// Configuration and contract errors are still returned as `Err`.
pub fn run_truncating(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    oracle: &NoiseOracle,
    horizon_t: u64,
    seed: u64,
) -> Result<PartialRun> {
    run_with_stream(instance, config, oracle, horizon_t, seed, 0)
}

pub fn run_with_stream(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    oracle: &NoiseOracle,
    horizon_t: u64,
    seed: u64,
    stream_index: u64,
) -> Result<PartialRun> {
    if horizon_t < 1 {
        return Err(Error::Precondition("horizon_T must be at least 1".into()));
    }
    config.validate()?;
    if instance.dimension() < oracle.spec.required_dimension() {
        return Err(Error::KindMismatch(format!(
            "noise needs dimension {} but instance has {}",
            oracle.spec.required_dimension(),
            instance.dimension()
        )));
    }
    let mut rng = RngStream::new(seed, stream_index);
    let mut records = Vec::with_capacity(horizon_t.min(1 << 20) as usize);
    let outcome = drive(instance, config, oracle, horizon_t, &mut rng, &mut records);
    let trajectory = Trajectory {
        instance_id: instance.id().to_string(),
        optimizer_id: config.id().to_string(),
        seed,
        records,
    };
    match outcome {
        Ok(()) => Ok(PartialRun { trajectory, error: None }),
        Err(e @ Error::Overflow { .. }) => Ok(PartialRun { trajectory, error: Some(e) }),
        Err(e) => Err(e),
    }
}

fn drive(
    instance: &ProblemInstance,
    config: &OptimizerConfig,
    oracle: &NoiseOracle,
    horizon_t: u64,
    rng: &mut RngStream,
    records: &mut Vec<TrajectoryRecord>,
) -> Result<()> {
    let x0 = instance.initial_point().to_vec();
    let mut state = match config {
        OptimizerConfig::Amsgrad(c) => OptimizerState::for_amsgrad(x0, c),
        OptimizerConfig::Adagrad(c) => OptimizerState::for_adagrad(x0, c),
        OptimizerConfig::MomentumSgd(c) => OptimizerState::for_momentum_sgd(x0, c),
        _ => OptimizerState::new(x0),
    };
    if let Some(m) = &state.m {
        if m.len() != state.x.len() {
            return Err(Error::Dimension { expected: state.x.len(), got: m.len() });
        }
    }
    let (mut f, mut grad) = instance.evaluate(&state.x).map_err(|e| e.at_iteration(0))?;
    if let OptimizerConfig::Nsgdm(c) = config {
        let g0 = match &c.initial_momentum {
            Some(g0) if g0.len() != state.x.len() => {
                return Err(Error::Dimension { expected: state.x.len(), got: g0.len() })
            }
            Some(g0) => g0.clone(),
            None => oracle.sample(&grad, &state.x, rng)?,
        };
        state.m = Some(g0);
    }
    for t in 0..horizon_t {
        let at = |e: Error| e.at_iteration(t);
        let (next, stoch_norm) = match config {
            OptimizerConfig::Nsgdm(c) => {
                let g_t_norm = vecops::norm(state.m.as_ref().unwrap());
                let (x_next, _) = nsgdm_next_point(&state, c).map_err(at)?;
                let true_next = instance.gradient(&x_next).map_err(|e| e.at_iteration(t + 1))?;
                let fresh = oracle.sample(&true_next, &x_next, rng)?;
                (nsgdm_step(&state, &fresh, &x_next, c).map_err(at)?, g_t_norm)
            }
            other => {
                let g = oracle.sample(&grad, &state.x, rng)?;
                let n = vecops::norm(&g);
                let s = match other {
                    OptimizerConfig::Sgd(c) => sgd_step(&state, &g, c),
                    OptimizerConfig::Nsgd(c) => nsgd_step(&state, &g, c),
                    OptimizerConfig::Amsgrad(c) => amsgrad_norm_step(&state, &g, c),
                    OptimizerConfig::Adagrad(c) => adagrad_norm_step(&state, &g, c),
                    OptimizerConfig::MomentumSgd(c) => momentum_sgd_step(&state, &g, c),
                    OptimizerConfig::Nsgdm(_) => unreachable!(),
                }
                .map_err(at)?;
                (s, n)
            }
        };
        records.push(TrajectoryRecord {
            t,
            f_value: f,
            grad_norm: vecops::norm(&grad),
            stoch_grad_norm: stoch_norm,
            effective_stepsize: next.effective_stepsize,
            iterate: iterate_summary(&state.x),
        });
        state = next;
        if t + 1 < horizon_t {
            let (f1, g1) = instance.evaluate(&state.x).map_err(|e| e.at_iteration(t + 1))?;
            f = f1;
            grad = g1;
        }
    }
    Ok(())
}
