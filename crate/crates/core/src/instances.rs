//! Builders for every problem instance used by the experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseOracle, NoiseSpec};
use crate::optimizers::{sgd_step, OptimizerState, SgdConfig};
use crate::piecewise::{Piece, PiecewiseQuadratic};
use crate::problem::{BoxDomain, Objective, ProblemInstance};

fn require_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for (name, v) in pairs {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::Precondition(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

fn default_domain(dimension: usize, x0: &[f64]) -> BoxDomain {
    let r = crate::vecops::max_abs(x0).max(1.0) * 4.0;
    BoxDomain::symmetric(dimension, r)
}

/// `f(x) = ℓ‖x‖²/2` started at `x₀ = √(2Δ/ℓ)·e₁`.
pub fn make_quadratic(l: f64, delta: f64, dimension: usize) -> Result<ProblemInstance> {
    require_positive(&[("l", l), ("delta", delta)])?;
    if dimension == 0 {
        return Err(Error::Precondition("dimension must be at least 1".into()));
    }
    let mut x0 = vec![0.0; dimension];
    x0[0] = (2.0 * delta / l).sqrt();
    let domain = default_domain(dimension, &x0);
    Ok(ProblemInstance::new(
        format!("quadratic(l={l},delta={delta},d={dimension})"),
        Objective::Isotropic { curvature: l },
        l,
        delta,
        0.0,
        Some(vec![0.0; dimension]),
        x0,
        Some(domain),
    ))
}

/// Quadratic with a given start point; `Δ` is taken as `f(x₀)`.
pub fn make_quadratic_at(l: f64, x0: Vec<f64>) -> Result<ProblemInstance> {
    require_positive(&[("l", l)])?;
    if x0.is_empty() || !crate::vecops::all_finite(&x0) {
        return Err(Error::Precondition("x0 must be a non-empty finite vector".into()));
    }
    let d = x0.len();
    let gap = 0.5 * l * crate::vecops::norm_sq(&x0);
    let domain = default_domain(d, &x0);
    Ok(ProblemInstance::new(
        format!("quadratic(l={l},x0={})", x0[0]),
        Objective::Isotropic { curvature: l },
        l,
        gap,
        0.0,
        Some(vec![0.0; d]),
        x0,
        Some(domain),
    ))
}

/// Boundary data of the SGD hard instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardInstanceReport {
    pub t0: u64,
    pub x_t0: f64,
    pub x_t0_plus1: f64,
    pub delta_tilde: f64,
    /// Interior boundaries in ascending order.
    pub segment_boundaries: Vec<f64>,
    /// `max{1/ℓ, Σ_{t₀<t<T} η/√(t+1)}`
    pub valley_scale: f64,
    /// Whether the start point was negated so that `x_{t₀} > 0`.
    pub sign_flipped: bool,
    pub used_double_double: bool,
}

/// Double-double arithmetic, enough for the phase-1 product recursion.
mod dd {
    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd { hi: p, lo: a.mul_add(b, -p) }
    }

    impl Dd {
        pub fn from(v: f64) -> Dd {
            Dd { hi: v, lo: 0.0 }
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }

        pub fn add(self, o: Dd) -> Dd {
            let s = two_sum(self.hi, o.hi);
            let t = two_sum(self.lo, o.lo);
            let s = quick_two_sum(s.hi, s.lo + t.hi);
            quick_two_sum(s.hi, s.lo + t.lo)
        }

        pub fn neg(self) -> Dd {
            Dd { hi: -self.hi, lo: -self.lo }
        }

        pub fn mul(self, o: Dd) -> Dd {
            let p = two_prod(self.hi, o.hi);
            quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
        }

        pub fn div(self, o: Dd) -> Dd {
            let q1 = self.hi / o.hi;
            let r = self.add(o.mul(Dd::from(q1)).neg());
            let q2 = r.hi / o.hi;
            let r = r.add(o.mul(Dd::from(q2)).neg());
            let q3 = r.hi / o.hi;
            quick_two_sum(q1, q2).add(Dd::from(q3))
        }

        /// Square root by one Newton correction of the f64 root.
        pub fn sqrt(self) -> Dd {
            let s = self.hi.sqrt();
            let sq = two_prod(s, s);
            let resid = self.add(sq.neg());
            quick_two_sum(s, resid.hi / (2.0 * s))
        }
    }
}

/// `|x_t| = ∏_{k≤t} |ηℓ/√k − 1|·|x₀|` evaluated in double-double; returns the
/// signed iterates `x_0..=x_{t_end}`.
pub fn gd_quadratic_iterates_dd(l: f64, eta: f64, x0: f64, t_end: u64) -> Vec<f64> {
    use dd::Dd;
    let el = Dd::from(eta).mul(Dd::from(l));
    let mut x = Dd::from(x0);
    let mut out = vec![x0];
    for k in 1..=t_end {
        let r = el.div(Dd::from(k as f64).sqrt());
        x = x.mul(Dd::from(1.0).add(r.neg()));
        out.push(x.to_f64());
    }
    out
}

/// The first `t_end + 1` GD iterates on `ℓx²/2` with `ηₜ = η/√(t+1)`, in f64,
/// using the same stepping code as the optimizer runner.
fn phase_one_f64(segment: &Piece, eta: f64, x0: f64, t_end: u64) -> Result<Vec<f64>> {
    let cfg = SgdConfig { eta, alpha: 0.5 };
    let mut state = OptimizerState::new(vec![x0]);
    let mut out = vec![x0];
    for _ in 0..t_end {
        let g = segment.slope(state.x[0]);
        state = sgd_step(&state, &[g], &cfg)?;
        out.push(state.x[0]);
    }
    Ok(out)
}

/// Blow-up horizon `⌊η²ℓ²/16 − 1⌋` (clamped at 0).
pub fn hard_instance_t0(eta: f64, l: f64) -> u64 {
    let v = (eta * eta * l * l / 16.0 - 1.0).floor();
    if v <= 0.0 {
        0
    } else {
        v as u64
    }
}

/// The trajectory-dependent piecewise-quadratic lower-bound instance for
/// untuned SGD with `ηₜ = η/√(t+1)`.
pub fn build_sgd_hard_instance(
    l: f64,
    delta: f64,
    eta: f64,
    horizon_t: u64,
) -> Result<(ProblemInstance, HardInstanceReport)> {
    require_positive(&[("l", l), ("delta", delta), ("eta", eta)])?;
    if eta * l < 5.0 {
        return Err(Error::Precondition(format!("the hard instance needs eta*l >= 5, got {}", eta * l)));
    }
    let t0 = hard_instance_t0(eta, l);
    let log10_growth = t0 as f64 * (8.0 * std::f64::consts::E).log10();
    if log10_growth >= 290.0 {
        return Err(Error::Precondition(format!(
            "(8e)^t0 = 10^{log10_growth:.1} exceeds 1e290; choose a smaller eta*l"
        )));
    }
    if horizon_t <= t0 + 1 {
        return Err(Error::Precondition(format!("horizon_T must exceed t0 + 1 = {}", t0 + 1)));
    }

    let segment1 = Piece::new(f64::NEG_INFINITY, f64::INFINITY, l / 2.0, 0.0, 0.0);
    let use_dd = log10_growth / 2.0 > 100.0;
    let base_x0 = (2.0 * delta / l).sqrt();
    let simulate = |x0: f64| -> Result<Vec<f64>> {
        if use_dd {
            Ok(gd_quadratic_iterates_dd(l, eta, x0, t0 + 1))
        } else {
            phase_one_f64(&segment1, eta, x0, t0 + 1)
        }
    };
    let mut xs = simulate(base_x0)?;
    let sign_flipped = xs[t0 as usize] < 0.0;
    if sign_flipped {
        xs = simulate(-base_x0)?;
    }
    let x = xs[t0 as usize];
    let x1 = xs[t0 as usize + 1];
    if !(x.is_finite() && x1.is_finite()) {
        return Err(Error::overflow(f64::INFINITY).at_iteration(t0 + 1));
    }
    if !(x1 <= -3.0 * x * (1.0 - 1e-12)) {
        return Err(Error::Degenerate(format!("expected x_(t0+1) <= -3 x_t0, got {x1} vs {x}")));
    }

    let tail: f64 = (t0 + 1..horizon_t).map(|t| eta / ((t + 1) as f64).sqrt()).sum();
    let s = (1.0 / l).max(tail);
    let delta_tilde = l * x * x / 2.0;
    let peak = l * x * x;

    let a3 = -delta_tilde.sqrt() / (4.0 * (-2.0 * x - x1) * s.sqrt());
    let seg3 = Piece::new(x1, -2.0 * x, a3, -2.0 * x, peak);
    let w = seg3.value(x1);
    let a4 = 1.0 / (4.0 * s);
    let h4 = x1 - (delta_tilde * s).sqrt();
    let k4 = w - delta_tilde / 4.0;

    let pieces = vec![
        Piece::new(f64::NEG_INFINITY, x1, a4, h4, k4),
        seg3,
        Piece::new(-2.0 * x, -x, -l / 2.0, -2.0 * x, peak),
        Piece::new(-x, x, l / 2.0, 0.0, 0.0),
        Piece::new(x, 2.0 * x, -l / 2.0, 2.0 * x, peak),
        Piece::new(2.0 * x, -x1, a3, 2.0 * x, peak),
        Piece::new(-x1, f64::INFINITY, a4, -h4, k4),
    ];
    let pw = PiecewiseQuadratic::new(pieces, true)?;
    let report = HardInstanceReport {
        t0,
        x_t0: x,
        x_t0_plus1: x1,
        delta_tilde,
        segment_boundaries: pw.boundaries(),
        valley_scale: s,
        sign_flipped,
        used_double_double: use_dd,
    };
    let x0 = xs[0];
    let r = 2.0 * h4.abs();
    let inst = ProblemInstance::new(
        format!("sgd_hard(l={l},delta={delta},eta={eta},T={horizon_t})"),
        Objective::Piecewise(pw),
        l,
        delta,
        0.0,
        Some(vec![0.0]),
        vec![x0],
        Some(BoxDomain::symmetric(1, r)),
    );
    Ok((inst, report))
}

/// `f(x) = x²/(4S)`, `S = max{1/ℓ, Σ_{t<T} η̃ₜ}`, started at `√(ΔS)`.
pub fn make_momentum_lb_quadratic(
    l: f64,
    delta: f64,
    caps: impl Fn(u64) -> f64,
    horizon_t: u64,
) -> Result<ProblemInstance> {
    require_positive(&[("l", l), ("delta", delta)])?;
    if horizon_t == 0 {
        return Err(Error::Precondition("horizon_T must be at least 1".into()));
    }
    let mut sum = 0.0;
    for t in 0..horizon_t {
        let c = caps(t);
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Precondition(format!("stepsize cap at t={t} must be positive, got {c}")));
        }
        sum += c;
    }
    let s = (1.0 / l).max(sum);
    let x0 = vec![(delta * s).sqrt()];
    let domain = default_domain(1, &x0);
    Ok(ProblemInstance::new(
        format!("momentum_lb(l={l},delta={delta},S={s},T={horizon_t})"),
        Objective::Isotropic { curvature: 1.0 / (2.0 * s) },
        l,
        delta,
        0.0,
        Some(vec![0.0]),
        x0,
        Some(domain),
    ))
}

/// Embed a 1-D isotropic instance as `f(x) = F(x¹)` on ℝ².
pub fn lift_first_coordinate(inst: &ProblemInstance) -> Result<ProblemInstance> {
    let curvature = match inst.objective() {
        Objective::Isotropic { curvature } if inst.dimension() == 1 => *curvature,
        _ => return Err(Error::Precondition("only 1-D quadratic instances can be lifted".into())),
    };
    let x0 = vec![inst.initial_point()[0], 0.0];
    let domain = default_domain(2, &x0);
    Ok(ProblemInstance::new(
        format!("lifted({})", inst.id()),
        Objective::FirstCoordinate { curvature },
        inst.smoothness_l(),
        inst.initial_gap(),
        inst.optimum_value(),
        Some(vec![0.0, 0.0]),
        x0,
        Some(domain),
    ))
}

/// `f(x) = (v₀/γ)x²` from `x₀ = γ/2`.
pub fn make_amsgrad_oscillator(v0: f64, gamma: f64, l: f64, delta: f64) -> Result<ProblemInstance> {
    require_positive(&[("v0", v0), ("gamma", gamma), ("l", l), ("delta", delta)])?;
    if v0 > l * gamma / 2.0 {
        return Err(Error::Precondition(format!("oscillator needs v0 <= l*gamma/2, got v0={v0}, l*gamma/2={}", l * gamma / 2.0)));
    }
    if gamma > 4.0 * delta / v0 {
        return Err(Error::Precondition(format!("oscillator needs gamma <= 4*delta/v0 = {}, got {gamma}", 4.0 * delta / v0)));
    }
    let x0 = vec![gamma / 2.0];
    let domain = default_domain(1, &x0);
    Ok(ProblemInstance::new(
        format!("amsgrad_oscillator(v0={v0},gamma={gamma},l={l},delta={delta})"),
        Objective::Isotropic { curvature: 2.0 * v0 / gamma },
        l,
        delta,
        0.0,
        Some(vec![0.0]),
        x0,
        Some(domain),
    ))
}

/// Free parameters of the NSGD nonconvergence instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoncvgParams {
    pub curvature: f64,
    pub x0: f64,
    pub region_halfwidth: f64,
    pub delta_noise: f64,
}

/// Where inside its admissible interval the region half-width `w` is placed,
/// as a fraction from the lower end. `0.5` is the interval midpoint.
pub const NONCVG_REGION_FRACTION: f64 = 0.999;

/// `f = Lx²/2` with sign-multiplicative noise near the optimum; normalized
/// SGD started at `x₀` keeps `E|∇f|` above `ε`.
pub fn make_nsgd_noncvg_instance(
    l: f64,
    sigma: f64,
    epsilon: f64,
    delta: f64,
    gamma_max: f64,
) -> Result<(ProblemInstance, NoiseOracle)> {
    make_nsgd_noncvg_instance_with(l, sigma, epsilon, delta, gamma_max, NONCVG_REGION_FRACTION)
}

pub fn make_nsgd_noncvg_instance_with(
    l: f64,
    sigma: f64,
    epsilon: f64,
    delta: f64,
    gamma_max: f64,
    region_fraction: f64,
) -> Result<(ProblemInstance, NoiseOracle)> {
    let p = nsgd_noncvg_params(l, sigma, epsilon, delta, gamma_max, region_fraction)?;
    let x0 = vec![p.x0];
    let inst = ProblemInstance::new(
        format!("nsgd_noncvg(l={l},sigma={sigma},eps={epsilon},delta={delta},gmax={gamma_max})"),
        Objective::Isotropic { curvature: p.curvature },
        l,
        delta,
        0.0,
        Some(vec![0.0]),
        x0,
        Some(BoxDomain::symmetric(1, 4.0 * p.region_halfwidth.max(p.x0))),
    );
    let spec = NoiseSpec::multiplicative_sign(sigma, p.delta_noise, p.region_halfwidth);
    Ok((inst, NoiseOracle::new(spec)))
}

pub fn nsgd_noncvg_params(
    l: f64,
    sigma: f64,
    epsilon: f64,
    delta: f64,
    gamma_max: f64,
    region_fraction: f64,
) -> Result<NoncvgParams> {
    require_positive(&[("l", l), ("sigma", sigma), ("epsilon", epsilon), ("delta", delta), ("gamma_max", gamma_max)])?;
    if !(region_fraction > 0.0 && region_fraction < 1.0) {
        return Err(Error::Precondition(format!("region_fraction must lie in (0, 1), got {region_fraction}")));
    }
    let e2 = epsilon * epsilon;
    let cap = (sigma * sigma).min(2.0 * l * delta).min(2.0 * delta * (sigma - epsilon) / gamma_max);
    if !(e2 < cap) {
        return Err(Error::Precondition(format!(
            "need eps^2 < min(sigma^2, 2 l delta, 2 delta (sigma - eps)/gamma_max); eps^2 = {e2}, min = {cap}"
        )));
    }
    let lo = e2 / (2.0 * delta);
    let hi = l.min((sigma - epsilon) / gamma_max * (1.0 - 1e-9));
    if !(lo < hi) {
        return Err(Error::Precondition(format!("empty interval for L: ({lo}, {hi}]")));
    }
    let curvature = 0.5 * (lo + hi);
    let (wlo, whi) = (epsilon / curvature + gamma_max, sigma / curvature);
    if !(wlo < whi) {
        return Err(Error::Precondition(format!("empty interval for w: ({wlo}, {whi})")));
    }
    let w = wlo + region_fraction * (whi - wlo);
    let x0 = (0.5 * (epsilon / curvature + (2.0 * delta / curvature).sqrt())).min(w);
    let delta_noise = 0.5 * (1.0 + sigma / (curvature * w));
    Ok(NoncvgParams { curvature, x0, region_halfwidth: w, delta_noise })
}

/// Constants of the heavy-tailed slow-AMSGrad construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowAmsgradConstants {
    /// Fréchet scale `s = σ/√Γ(1−ζ/2)`.
    pub scale_s: f64,
    /// `C = s (e(1/ζ − 1))^{ζ/2} / √2`
    pub c: f64,
}

pub fn slow_amsgrad_constants(sigma: f64, zeta: f64) -> Result<SlowAmsgradConstants> {
    if !(zeta > 0.5 && zeta < 1.0) {
        return Err(Error::Precondition(format!("zeta must lie in (1/2, 1), got {zeta}")));
    }
    require_positive(&[("sigma", sigma)])?;
    let scale_s = sigma / crate::noise::gamma_function(1.0 - zeta / 2.0)?.sqrt();
    let c = scale_s * (std::f64::consts::E * (1.0 / zeta - 1.0)).powf(zeta / 2.0) / 2f64.sqrt();
    Ok(SlowAmsgradConstants { scale_s, c })
}

/// 2-D instance `f(x) = F(x¹)` with Fréchet noise on the second coordinate.
#[allow(clippy::too_many_arguments)]
pub fn make_amsgrad_slow_instance(
    l: f64,
    delta: f64,
    sigma: f64,
    zeta: f64,
    gamma: f64,
    beta2: f64,
    horizon_t: u64,
) -> Result<(ProblemInstance, NoiseOracle)> {
    if !(0.0..1.0).contains(&beta2) {
        return Err(Error::Precondition(format!("beta2 must lie in [0, 1), got {beta2}")));
    }
    require_positive(&[("gamma", gamma)])?;
    let k = slow_amsgrad_constants(sigma, zeta)?;
    let root = (1.0 - beta2).sqrt();
    let caps = |t: u64| gamma / (k.c * ((t + 1) as f64).powf(zeta) * root);
    let base = make_momentum_lb_quadratic(l, delta, caps, horizon_t)?;
    let inst = lift_first_coordinate(&base)?;
    let spec = NoiseSpec::frechet_symmetric(sigma, zeta)?;
    Ok((inst, NoiseOracle::new(spec)))
}

pub fn instance_to_json(inst: &ProblemInstance) -> Result<String> {
    serde_json::to_string_pretty(inst).map_err(|e| Error::Io(e.to_string()))
}

pub fn instance_from_json(s: &str) -> Result<ProblemInstance> {
    let de = &mut serde_json::Deserializer::from_str(s);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(crate::harness::json_pointer(&path), e.into_inner().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_examples() {
        let q = make_quadratic(1.0, 0.5, 3).unwrap();
        assert_eq!(q.initial_point(), &[1.0, 0.0, 0.0]);
        let (v, g) = q.evaluate(q.initial_point()).unwrap();
        assert_eq!((v, crate::vecops::norm(&g)), (0.5, 1.0));
        let q = make_quadratic(2.0, 1.0, 1).unwrap();
        assert_eq!(q.gradient(q.initial_point()).unwrap(), vec![2.0]);
    }

    #[test]
    fn hard_instance_eta8() {
        let (inst, rep) = build_sgd_hard_instance(1.0, 0.5, 8.0, 64).unwrap();
        assert_eq!(rep.t0, 3);
        assert!(rep.sign_flipped);
        assert_eq!(inst.initial_point(), &[-1.0]);
        // x1 = 7, x2 = (1 - 8/√2)·7, x3 = (1 - 8/√3)·x2
        let x2 = (1.0 - 8.0 / 2f64.sqrt()) * 7.0;
        let x3 = (1.0 - 8.0 / 3f64.sqrt()) * x2;
        assert!((rep.x_t0 / x3 - 1.0).abs() < 1e-14);
        assert!(rep.x_t0 > 0.0);
        assert_eq!(rep.x_t0_plus1, -3.0 * rep.x_t0);
        assert!((rep.delta_tilde - x3 * x3 / 2.0).abs() <= 1e-12 * rep.delta_tilde);
        // segment 3 apex
        let (v, g) = inst.evaluate(&[-2.0 * rep.x_t0]).unwrap();
        assert_eq!(g[0], 0.0);
        assert!((v - rep.x_t0 * rep.x_t0).abs() <= 1e-12 * v);
        assert_eq!(inst.evaluate(&[0.0]).unwrap().0, 0.0);
    }

    #[test]
    fn hard_instance_is_c1() {
        for (eta, l) in [(8.0, 1.0), (5.0, 1.0), (10.0, 2.0), (40.0, 1.0)] {
            let (inst, _) = build_sgd_hard_instance(l, 0.5, eta, 500).unwrap();
            for j in inst.piecewise().unwrap().boundary_jumps() {
                assert!(j.value_jump <= 1e-9 * j.scale, "eta={eta}: {j:?}");
                assert!(j.slope_jump <= 1e-9 * j.scale, "eta={eta}: {j:?}");
            }
        }
    }

    #[test]
    fn hard_instance_valley_curvature() {
        let (inst, rep) = build_sgd_hard_instance(1.0, 0.5, 8.0, 64).unwrap();
        let first = inst.piecewise().unwrap().pieces()[0];
        assert_eq!(first.curvature, 1.0 / (4.0 * rep.valley_scale));
        assert!(first.curvature <= 0.25);
    }

    #[test]
    fn hard_instance_double_double_regime() {
        // t0 = 155: (8e)^{t0/2} > 1e100
        let eta = 50.0;
        let (inst, rep) = build_sgd_hard_instance(1.0, 0.5, eta, 400).unwrap();
        assert_eq!(rep.t0, 155);
        assert!(rep.used_double_double);
        let f64_path = phase_one_f64(&Piece::new(f64::NEG_INFINITY, f64::INFINITY, 0.5, 0.0, 0.0), eta, inst.initial_point()[0], rep.t0)
            .unwrap();
        let rel = (f64_path[rep.t0 as usize] / rep.x_t0 - 1.0).abs();
        assert!(rel < 1e-11, "rel = {rel}");
    }

    #[test]
    fn hard_instance_preconditions() {
        assert!(matches!(build_sgd_hard_instance(1.0, 0.5, 4.9, 64), Err(Error::Precondition(_))));
        assert!(matches!(build_sgd_hard_instance(1.0, 0.5, 70.0, 10_000), Err(Error::Precondition(_))));
    }

    #[test]
    fn momentum_lb_examples() {
        let q = make_momentum_lb_quadratic(1.0, 1.0, |_| 1.0, 4).unwrap();
        assert_eq!(q.initial_point(), &[2.0]);
        assert_eq!(q.gradient(&[2.0]).unwrap(), vec![0.25]);
        let q = make_momentum_lb_quadratic(2.0, 1.0, |_| 0.01, 10).unwrap();
        assert_eq!(q.objective(), &Objective::Isotropic { curvature: 1.0 });
        assert_eq!(q.initial_point(), &[0.5f64.sqrt()]);
        assert!(make_momentum_lb_quadratic(1.0, 1.0, |t| if t == 2 { 0.0 } else { 1.0 }, 4).is_err());
    }

    #[test]
    fn oscillator_examples() {
        let o = make_amsgrad_oscillator(1.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(o.initial_point(), &[1.0]);
        assert_eq!(o.gradient(&[1.0]).unwrap(), vec![1.0]);
        assert!(matches!(make_amsgrad_oscillator(2.0, 2.0, 1.0, 1.0), Err(Error::Precondition(_))));
        assert!(matches!(make_amsgrad_oscillator(0.5, 9.0, 1.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn noncvg_params_feasible() {
        let p = nsgd_noncvg_params(1.0, 1.0, 0.5, 1.0, 1.0, 0.5).unwrap();
        assert!(p.curvature > 0.125 && p.curvature <= 0.5);
        assert!(p.x0 > 0.5 / p.curvature && p.x0 < (2.0 / p.curvature).sqrt());
        assert!(p.region_halfwidth > 0.5 / p.curvature + 1.0 && p.region_halfwidth < 1.0 / p.curvature);
        assert!(p.delta_noise > 1.0 && p.delta_noise * p.curvature * p.region_halfwidth < 1.0);
        assert!(nsgd_noncvg_params(1.0, 1.0, 1.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn slow_instance_gradient_on_first_coordinate() {
        let (inst, oracle) = make_amsgrad_slow_instance(1.0, 1.0, 1.0, 0.75, 1.0, 0.0, 100).unwrap();
        assert_eq!(inst.dimension(), 2);
        let g = inst.gradient(&[1.0, 5.0]).unwrap();
        assert_eq!(g[1], 0.0);
        assert!(g[0] > 0.0);
        assert_eq!(oracle.spec.kind, crate::noise::NoiseKind::FrechetSymmetric);
        assert!(make_amsgrad_slow_instance(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 100).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let (inst, _) = build_sgd_hard_instance(1.0, 0.5, 8.0, 64).unwrap();
        let back = instance_from_json(&instance_to_json(&inst).unwrap()).unwrap();
        assert_eq!(back, inst);
        let q = make_quadratic(1.0 / 3.0, 0.1, 2).unwrap();
        assert_eq!(instance_from_json(&instance_to_json(&q).unwrap()).unwrap(), q);
    }
}
