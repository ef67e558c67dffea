//! C ABI for sgdlab.
//!
//! Every fallible function returns an [`SgdStatus`]; on failure the message
//! is kept per thread and read with [`sgdlab_last_error_message`]. Handles
//! are opaque and must be released with their `_free` function. Strings
//! returned through `char **` out-parameters are owned by the caller and
//! released with [`sgdlab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sgdlab::diagnostics::{fit_power_law, verify_smoothness};
use sgdlab::harness::{self, emit, RunOptions};
use sgdlab::instances;
use sgdlab::noise::{gamma_function, NoiseOracle, NoiseSpec};
use sgdlab::optimizers::{run_truncating, OptimizerConfig, PolynomialSchedule};
use sgdlab::theory::{self, BoundMetric, BoundRequest, SgdBoundForm};
use sgdlab::{Error, ProblemInstance, RngStream, Trajectory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Overflow = 3,
    Dimension = 4,
    Precondition = 5,
    Contract = 6,
    Domain = 7,
    Degenerate = 8,
    Index = 9,
    KindMismatch = 10,
    Config = 11,
    Io = 12,
    /// The call failed its checks (for example a verdict or certification).
    Failed = 13,
    Panic = 14,
}

impl From<&Error> for SgdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Overflow { .. } => SgdStatus::Overflow,
            Error::Dimension { .. } => SgdStatus::Dimension,
            Error::Precondition(_) => SgdStatus::Precondition,
            Error::Contract(_) => SgdStatus::Contract,
            Error::Domain(_) => SgdStatus::Domain,
            Error::Degenerate(_) => SgdStatus::Degenerate,
            Error::Index(_) => SgdStatus::Index,
            Error::KindMismatch(_) => SgdStatus::KindMismatch,
            Error::Config { .. } => SgdStatus::Config,
            Error::Io(_) => SgdStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(SgdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(SgdStatus::from(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SgdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SgdStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside sgdlab".into());
            SgdStatus::Panic
        }
    }
}

fn null(name: &str) -> Fail {
    Fail(SgdStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SgdStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|_| Fail(SgdStatus::Io, "string contains NUL".into()))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sgdlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sgdlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// A problem instance together with the gradient oracle it ships with
/// (exact unless the builder supplies noise).
pub struct SgdInstance {
    instance: ProblemInstance,
    oracle: NoiseOracle,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgdHardReport {
    pub t0: u64,
    pub x_t0: f64,
    pub x_t0_plus1: f64,
    pub delta_tilde: f64,
    pub valley_scale: f64,
    pub sign_flipped: bool,
    pub used_double_double: bool,
}

unsafe fn emit_instance(h: *mut *mut SgdInstance, instance: ProblemInstance, oracle: NoiseOracle) -> Result<(), Fail> {
    *out(h, "out")? = Box::into_raw(Box::new(SgdInstance { instance, oracle }));
    Ok(())
}

unsafe fn instance_ref<'a>(h: *const SgdInstance) -> Result<&'a SgdInstance, Fail> {
    h.as_ref().ok_or_else(|| null("instance"))
}

/// `f(x) = l‖x‖²/2` in `dimension` coordinates with gap `delta`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_quadratic_new(
    l: f64,
    delta: f64,
    dimension: usize,
    out: *mut *mut SgdInstance,
) -> SgdStatus {
    guard(|| emit_instance(out, instances::make_quadratic(l, delta, dimension)?, NoiseOracle::exact()))
}

/// The piecewise-quadratic hard instance for untuned SGD. `report` may be NULL.
///
/// # Safety
/// `out` must be valid; `report` must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_sgd_hard_new(
    l: f64,
    delta: f64,
    eta: f64,
    horizon: u64,
    out: *mut *mut SgdInstance,
    report: *mut SgdHardReport,
) -> SgdStatus {
    guard(|| {
        let (inst, r) = instances::build_sgd_hard_instance(l, delta, eta, horizon)?;
        if let Some(dst) = report.as_mut() {
            *dst = SgdHardReport {
                t0: r.t0,
                x_t0: r.x_t0,
                x_t0_plus1: r.x_t0_plus1,
                delta_tilde: r.delta_tilde,
                valley_scale: r.valley_scale,
                sign_flipped: r.sign_flipped,
                used_double_double: r.used_double_double,
            };
        }
        emit_instance(out, inst, NoiseOracle::exact())
    })
}

/// Momentum lower-bound quadratic for stepsize caps `eta/(t+1)^alpha`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_momentum_lb_new(
    l: f64,
    delta: f64,
    cap_eta: f64,
    cap_alpha: f64,
    horizon: u64,
    out: *mut *mut SgdInstance,
) -> SgdStatus {
    guard(|| {
        let caps = PolynomialSchedule { eta: cap_eta, alpha: cap_alpha };
        emit_instance(out, instances::make_momentum_lb_quadratic(l, delta, |t| caps.at(t), horizon)?, NoiseOracle::exact())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_amsgrad_oscillator_new(
    v0: f64,
    gamma: f64,
    l: f64,
    delta: f64,
    out: *mut *mut SgdInstance,
) -> SgdStatus {
    guard(|| emit_instance(out, instances::make_amsgrad_oscillator(v0, gamma, l, delta)?, NoiseOracle::exact()))
}

/// NSGD nonconvergence instance; carries its sign-multiplicative oracle.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_nsgd_noncvg_new(
    l: f64,
    sigma: f64,
    epsilon: f64,
    delta: f64,
    gamma_max: f64,
    out: *mut *mut SgdInstance,
) -> SgdStatus {
    guard(|| {
        let (inst, oracle) = instances::make_nsgd_noncvg_instance(l, sigma, epsilon, delta, gamma_max)?;
        emit_instance(out, inst, oracle)
    })
}

/// Heavy-tailed slow-AMSGrad instance; carries its Fréchet oracle.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_amsgrad_slow_new(
    l: f64,
    delta: f64,
    sigma: f64,
    zeta: f64,
    gamma: f64,
    beta2: f64,
    horizon: u64,
    out: *mut *mut SgdInstance,
) -> SgdStatus {
    guard(|| {
        let (inst, oracle) = instances::make_amsgrad_slow_instance(l, delta, sigma, zeta, gamma, beta2, horizon)?;
        emit_instance(out, inst, oracle)
    })
}

/// Rebuild an instance from the JSON written by [`sgdlab_instance_to_json`].
/// The oracle is exact.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_instance_from_json(json: *const c_char, out: *mut *mut SgdInstance) -> SgdStatus {
    guard(|| emit_instance(out, instances::instance_from_json(str_arg(json, "json")?)?, NoiseOracle::exact()))
}

/// # Safety
/// `h` must be a valid instance; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_instance_to_json(h: *const SgdInstance, out: *mut *mut c_char) -> SgdStatus {
    guard(|| {
        let s = instances::instance_to_json(&instance_ref(h)?.instance)?;
        *self::out(out, "out")? = into_c_string(s)?;
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_instance_free(h: *mut SgdInstance) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of the instance, or 0 for NULL.
///
/// # Safety
/// `h` must be NULL or a valid instance.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_instance_dimension(h: *const SgdInstance) -> usize {
    h.as_ref().map_or(0, |i| i.instance.dimension())
}

/// Write the initial point into `x0[0..dimension]`.
///
/// # Safety
/// `h` must be valid; `x0` must hold `dimension` doubles.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_instance_initial_point(h: *const SgdInstance, x0: *mut f64, len: usize) -> SgdStatus {
    guard(|| {
        let inst = &instance_ref(h)?.instance;
        let p = inst.initial_point();
        if len != p.len() {
            return Err(Error::Dimension { expected: p.len(), got: len }.into());
        }
        if x0.is_null() {
            return Err(null("x0"));
        }
        std::slice::from_raw_parts_mut(x0, len).copy_from_slice(p);
        Ok(())
    })
}

/// Objective value and gradient at `x`. `grad` may be NULL.
///
/// # Safety
/// `x` (and `grad`, when non-NULL) must hold `len` doubles; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_instance_evaluate(
    h: *const SgdInstance,
    x: *const f64,
    len: usize,
    value: *mut f64,
    grad: *mut f64,
) -> SgdStatus {
    guard(|| {
        let inst = &instance_ref(h)?.instance;
        let (f, g) = inst.evaluate(slice_arg(x, len, "x")?)?;
        *out(value, "value")? = f;
        if !grad.is_null() {
            std::slice::from_raw_parts_mut(grad, len).copy_from_slice(&g);
        }
        Ok(())
    })
}

/// Smoothness constant the instance is certified for.
///
/// # Safety
/// `h` must be NULL or a valid instance.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_instance_smoothness(h: *const SgdInstance) -> f64 {
    h.as_ref().map_or(f64::NAN, |i| i.instance.smoothness_l())
}

/// Largest observed gradient-Lipschitz ratio over `n_probes` random pairs
/// (plus straddles at piece boundaries) drawn from stream `(seed, 0)`.
///
/// # Safety
/// `h` and `ratio` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_instance_verify_smoothness(
    h: *const SgdInstance,
    n_probes: usize,
    seed: u64,
    ratio: *mut f64,
) -> SgdStatus {
    guard(|| {
        let mut rng = RngStream::new(seed, 0);
        *out(ratio, "ratio")? = verify_smoothness(&instance_ref(h)?.instance, n_probes, &mut rng)?;
        Ok(())
    })
}

pub struct SgdTrajectory {
    trajectory: Trajectory,
    overflow_at: Option<u64>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgdRecord {
    pub t: u64,
    pub f_value: f64,
    pub grad_norm: f64,
    pub stoch_grad_norm: f64,
    pub effective_stepsize: f64,
    pub x1: f64,
}

/// Run an optimizer on an instance. `optimizer_json` is an optimizer spec
/// such as `{"kind": "sgd", "eta": 1.0, "alpha": 0.5}`; `noise_json` is a
/// noise spec or NULL to use the instance's own oracle. When
/// `allow_overflow` is set, a run that leaves the representable range is
/// truncated instead of failing.
///
/// # Safety
/// `h` and `out` must be valid; the strings must be NULL-terminated or NULL
/// where allowed.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_run(
    h: *const SgdInstance,
    optimizer_json: *const c_char,
    noise_json: *const c_char,
    horizon: u64,
    seed: u64,
    allow_overflow: bool,
    out: *mut *mut SgdTrajectory,
) -> SgdStatus {
    guard(|| {
        let inst = instance_ref(h)?;
        let cfg: OptimizerConfig = serde_json::from_str(str_arg(optimizer_json, "optimizer_json")?)
            .map_err(|e| Error::config("/optimizer_spec", e.to_string()))?;
        let oracle = if noise_json.is_null() {
            inst.oracle.clone()
        } else {
            let spec: NoiseSpec = serde_json::from_str(str_arg(noise_json, "noise_json")?)
                .map_err(|e| Error::config("/noise_spec", e.to_string()))?;
            if let Err((field, msg)) = spec.validate() {
                return Err(Error::config(format!("/noise_spec/{field}"), msg).into());
            }
            NoiseOracle::new(spec)
        };
        let partial = run_truncating(&inst.instance, &cfg, &oracle, horizon, seed)?;
        let overflow_at = match partial.error {
            None => None,
            Some(e) if allow_overflow => match e {
                Error::Overflow { .. } => Some(partial.trajectory.len() as u64),
                other => return Err(other.into()),
            },
            Some(e) => return Err(e.into()),
        };
        *self::out(out, "out")? = Box::into_raw(Box::new(SgdTrajectory { trajectory: partial.trajectory, overflow_at }));
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_trajectory_free(h: *mut SgdTrajectory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of records, or 0 for NULL.
///
/// # Safety
/// `h` must be NULL or a valid trajectory.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_trajectory_len(h: *const SgdTrajectory) -> usize {
    h.as_ref().map_or(0, |t| t.trajectory.len())
}

/// Iteration at which the run overflowed, or -1 if it completed.
///
/// # Safety
/// `h` must be NULL or a valid trajectory.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_trajectory_overflow_at(h: *const SgdTrajectory) -> i64 {
    h.as_ref().and_then(|t| t.overflow_at).map_or(-1, |t| t as i64)
}

/// Copy up to `cap` records into `records`; `written` receives the count.
///
/// # Safety
/// `h` and `written` must be valid; `records` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_trajectory_records(
    h: *const SgdTrajectory,
    records: *mut SgdRecord,
    cap: usize,
    written: *mut usize,
) -> SgdStatus {
    guard(|| {
        let traj = &h.as_ref().ok_or_else(|| null("trajectory"))?.trajectory;
        let n = traj.len().min(cap);
        if n > 0 && records.is_null() {
            return Err(null("records"));
        }
        for (i, r) in traj.records.iter().take(n).enumerate() {
            *records.add(i) = SgdRecord {
                t: r.t,
                f_value: r.f_value,
                grad_norm: r.grad_norm,
                stoch_grad_norm: r.stoch_grad_norm,
                effective_stepsize: r.effective_stepsize,
                x1: r.x1(),
            };
        }
        *out(written, "written")? = n;
        Ok(())
    })
}

/// Bound parameters; NaN marks a parameter as absent.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SgdBoundRequest {
    pub eta: f64,
    pub gamma: f64,
    pub l: f64,
    pub sigma: f64,
    pub delta: f64,
    pub v0: f64,
    pub g: f64,
    pub zeta: f64,
    pub beta2: f64,
    pub alpha: f64,
    pub horizon: f64,
}

/// A request with every parameter absent and horizon `horizon`.
#[no_mangle]
pub extern "C" fn sgdlab_bound_request_new(horizon: f64) -> SgdBoundRequest {
    let n = f64::NAN;
    SgdBoundRequest { eta: n, gamma: n, l: n, sigma: n, delta: n, v0: n, g: n, zeta: n, beta2: n, alpha: n, horizon }
}

impl From<&SgdBoundRequest> for BoundRequest {
    fn from(r: &SgdBoundRequest) -> Self {
        let opt = |v: f64| (!v.is_nan()).then_some(v);
        BoundRequest {
            eta: opt(r.eta),
            gamma: opt(r.gamma),
            l: opt(r.l),
            sigma: opt(r.sigma),
            delta: opt(r.delta),
            v0: opt(r.v0),
            g: opt(r.g),
            zeta: opt(r.zeta),
            beta2: opt(r.beta2),
            alpha: opt(r.alpha),
            horizon: r.horizon,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgdBoundMetric {
    MeanSquaredGradNorm = 0,
    MeanGradNorm = 1,
    MinGradNorm = 2,
    GradNormAt = 3,
}

impl From<BoundMetric> for SgdBoundMetric {
    fn from(m: BoundMetric) -> Self {
        match m {
            BoundMetric::MeanSquaredGradNorm => SgdBoundMetric::MeanSquaredGradNorm,
            BoundMetric::MeanGradNorm => SgdBoundMetric::MeanGradNorm,
            BoundMetric::MinGradNorm => SgdBoundMetric::MinGradNorm,
            BoundMetric::GradNormAt => SgdBoundMetric::GradNormAt,
        }
    }
}

unsafe fn eval_bound(
    req: *const SgdBoundRequest,
    value: *mut f64,
    f: impl FnOnce(&BoundRequest) -> sgdlab::Result<f64>,
) -> SgdStatus {
    guard(|| {
        let r = BoundRequest::from(req.as_ref().ok_or_else(|| null("request"))?);
        *out(value, "value")? = f(&r)?;
        Ok(())
    })
}

/// SGD upper bound on the mean squared gradient norm; `appendix` selects
/// the general form, otherwise the `alpha = 1/2` form.
///
/// # Safety
/// `req` and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_sgd_upper_bound(req: *const SgdBoundRequest, appendix: bool, value: *mut f64) -> SgdStatus {
    let form = if appendix { SgdBoundForm::AppendixGeneral } else { SgdBoundForm::MainText };
    eval_bound(req, value, |r| theory::sgd_upper_bound(r, form))
}

/// # Safety
/// `req` and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_sgd_bounded_grad_bound(req: *const SgdBoundRequest, value: *mut f64) -> SgdStatus {
    eval_bound(req, value, theory::sgd_bounded_grad_bound)
}

/// # Safety
/// `req` and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_nsgd_upper_bound(req: *const SgdBoundRequest, value: *mut f64) -> SgdStatus {
    eval_bound(req, value, theory::nsgd_upper_bound)
}

/// # Safety
/// `req` and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_amsgrad_det_lower(req: *const SgdBoundRequest, value: *mut f64) -> SgdStatus {
    eval_bound(req, value, theory::amsgrad_det_lower)
}

/// # Safety
/// `req` and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_amsgrad_stoch_lower(req: *const SgdBoundRequest, value: *mut f64) -> SgdStatus {
    eval_bound(req, value, theory::amsgrad_stoch_lower)
}

/// # Safety
/// `req` and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_nsgdm_rate_template(req: *const SgdBoundRequest, value: *mut f64) -> SgdStatus {
    eval_bound(req, value, theory::nsgdm_rate_template)
}

/// # Safety
/// `req` and `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_adagrad_rate_template(req: *const SgdBoundRequest, value: *mut f64) -> SgdStatus {
    eval_bound(req, value, theory::adagrad_rate_template)
}

/// Deterministic AMSGrad upper bound; `metric` says which mean it controls.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_amsgrad_det_upper_bound(
    req: *const SgdBoundRequest,
    value: *mut f64,
    metric: *mut SgdBoundMetric,
) -> SgdStatus {
    guard(|| {
        let r = BoundRequest::from(req.as_ref().ok_or_else(|| null("request"))?);
        let b = theory::amsgrad_det_upper_bound(&r)?;
        *out(value, "value")? = b.value;
        *out(metric, "metric")? = b.metric.into();
        Ok(())
    })
}

/// # Safety
/// `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_nsgd_noncvg_threshold(
    l: f64,
    delta: f64,
    sigma: f64,
    gamma_max: f64,
    value: *mut f64,
) -> SgdStatus {
    guard(|| {
        *out(value, "value")? = theory::nsgd_noncvg_threshold(l, delta, sigma, gamma_max)?;
        Ok(())
    })
}

/// Gradient-norm lower curve of untuned SGD on the hard instance at `t`.
///
/// # Safety
/// `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_sgd_lower_curve(
    eta: f64,
    l: f64,
    delta: f64,
    t: u64,
    t0: u64,
    horizon: u64,
    value: *mut f64,
) -> SgdStatus {
    guard(|| {
        *out(value, "value")? = theory::sgd_lower_curve(eta, l, delta, t, t0, horizon)?;
        Ok(())
    })
}

/// # Safety
/// `tau` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_tau_sgd(eta: f64, l: f64, alpha: f64, tau: *mut u64) -> SgdStatus {
    guard(|| {
        *out(tau, "tau")? = theory::tau_sgd(eta, l, alpha)?;
        Ok(())
    })
}

/// Blow-up horizon of the hard instance.
#[no_mangle]
pub extern "C" fn sgdlab_hard_instance_t0(eta: f64, l: f64) -> u64 {
    instances::hard_instance_t0(eta, l)
}

/// # Safety
/// `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_gamma(x: f64, value: *mut f64) -> SgdStatus {
    guard(|| {
        *out(value, "value")? = gamma_function(x)?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgdRateFit {
    pub exponent: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
    pub window_start: f64,
    pub window_end: f64,
}

/// Log-log least squares over the trailing `window_fraction` of `(t, y)`.
///
/// # Safety
/// `t` and `y` must hold `len` doubles; `fit` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_fit_power_law(
    t: *const f64,
    y: *const f64,
    len: usize,
    window_fraction: f64,
    fit: *mut SgdRateFit,
) -> SgdStatus {
    guard(|| {
        let ts = slice_arg(t, len, "t")?;
        let ys = slice_arg(y, len, "y")?;
        let series: Vec<(f64, f64)> = ts.iter().copied().zip(ys.iter().copied()).collect();
        let f = fit_power_law(&series, window_fraction)?;
        *out(fit, "fit")? = SgdRateFit {
            exponent: f.exponent,
            log_intercept: f.log_intercept,
            r_squared: f.r_squared,
            window_start: f.fit_window.0,
            window_end: f.fit_window.1,
        };
        Ok(())
    })
}

fn workers_option(workers: u32) -> RunOptions {
    RunOptions { workers: (workers > 0).then_some(workers as usize) }
}

/// Run an experiment config (JSON) and return its summary JSON. `workers`
/// of 0 uses the available parallelism. `out_dir` may be NULL; otherwise
/// the CSV and summary files are written there too. Returns `Failed` when
/// any verdict fails; the summary is still produced.
///
/// # Safety
/// `config_json` must be NUL-terminated; `out_dir` NULL or NUL-terminated;
/// `summary` valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_run_config(
    config_json: *const c_char,
    workers: u32,
    out_dir: *const c_char,
    summary: *mut *mut c_char,
) -> SgdStatus {
    let mut passed = true;
    let status = guard(|| {
        let spec = harness::parse_config(str_arg(config_json, "config_json")?)?;
        let dst = out(summary, "summary")?;
        let result = harness::run_experiment_with(&spec, workers_option(workers))?;
        if !out_dir.is_null() {
            emit::emit_experiment(&result, Path::new(str_arg(out_dir, "out_dir")?))?;
        }
        *dst = into_c_string(emit::summary_json(&result)?)?;
        passed = result.passed();
        Ok(())
    });
    finish_run(status, passed)
}

/// Run a named reproduction and return its summary JSON; see
/// [`sgdlab_run_config`] for the remaining arguments.
///
/// # Safety
/// As for [`sgdlab_run_config`].
#[no_mangle]
pub unsafe extern "C" fn sgdlab_run_reproduction(
    name: *const c_char,
    workers: u32,
    out_dir: *const c_char,
    summary: *mut *mut c_char,
) -> SgdStatus {
    let mut passed = true;
    let status = guard(|| {
        let repro = harness::find_reproduction(str_arg(name, "name")?)?;
        let dst = out(summary, "summary")?;
        let result = harness::run_reproduction(&repro, workers_option(workers))?;
        if !out_dir.is_null() {
            emit::emit_reproduction(&result, Path::new(str_arg(out_dir, "out_dir")?))?;
        }
        *dst = into_c_string(emit::repro_summary_json(&result)?)?;
        passed = result.passed();
        Ok(())
    });
    finish_run(status, passed)
}

fn finish_run(status: SgdStatus, passed: bool) -> SgdStatus {
    if status == SgdStatus::Ok && !passed {
        set_error("at least one verdict failed".into());
        SgdStatus::Failed
    } else {
        status
    }
}

/// Newline-separated names of the catalog reproductions.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgdlab_list_reproductions(out: *mut *mut c_char) -> SgdStatus {
    guard(|| {
        let names: Vec<String> = harness::list_reproductions().into_iter().map(|r| r.name).collect();
        *self::out(out, "out")? = into_c_string(names.join("\n"))?;
        Ok(())
    })
}
