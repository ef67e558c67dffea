//! Rate fitting, Monte Carlo aggregation and instance certification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::RngStream;
use crate::piecewise::BoundaryJump;
use crate::problem::{ProblemInstance, Trajectory, TrajectoryRecord};
use crate::vecops;

/// Trailing share of a series used by rate fits unless told otherwise.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
    pub fit_window: (f64, f64),
}

/// OLS fit of `log value = log_intercept + exponent · log t` over the
/// trailing `window_fraction` of `series`.
pub fn fit_power_law(series: &[(f64, f64)], window_fraction: f64) -> Result<RateFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::Precondition(format!("window_fraction must lie in (0, 1], got {window_fraction}")));
    }
    let n = series.len();
    let take = ((n as f64) * window_fraction).ceil() as usize;
    let window = &series[n - take.min(n)..];
    if window.len() < 3 {
        return Err(Error::Precondition(format!("rate fit needs at least 3 points in the window, got {}", window.len())));
    }
    if let Some((t, v)) = window.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0 && t.is_finite() && v.is_finite())) {
        return Err(Error::Degenerate(format!("rate fit needs positive finite t and values, got ({t}, {v})")));
    }
    let xs: Vec<f64> = window.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = window.iter().map(|(_, v)| v.ln()).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all t in the fit window are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let exponent = sxy / sxx;
    let log_intercept = ybar - exponent * xbar;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - log_intercept - exponent * x).powi(2)).sum();
    // a series that is constant up to rounding is a perfect (flat) fit
    let noise_floor = m * (m * f64::EPSILON * (1.0 + ybar.abs())).powi(2);
    let r_squared = if syy > noise_floor { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RateFit { exponent, log_intercept, r_squared, fit_window: (window[0].0, window[window.len() - 1].0) })
}

/// Prefix means `(1/(t+1)) Σ_{k≤t} values[k]`.
pub fn running_average(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            acc / (i + 1) as f64
        })
        .collect()
}

/// `(t + 1, running average)` pairs, ready for [`fit_power_law`].
pub fn running_average_series(values: &[f64]) -> Vec<(f64, f64)> {
    running_average(values).into_iter().enumerate().map(|(i, v)| ((i + 1) as f64, v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloStat {
    pub mean: f64,
    /// Standard error of the mean; NaN when `n < 2`.
    pub stderr: f64,
    pub n: usize,
}

impl MonteCarloStat {
    /// Mean and standard error of `values`, summed in the given order.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Precondition("cannot estimate from zero samples".into()));
        }
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let stderr = if n < 2 {
            f64::NAN
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
            (var / nf).sqrt()
        };
        Ok(MonteCarloStat { mean, stderr, n })
    }

    /// `mean + k·stderr`, treating an undefined stderr as zero.
    pub fn upper(&self, k: f64) -> f64 {
        self.mean + if self.stderr.is_nan() { 0.0 } else { k * self.stderr }
    }

    pub fn lower(&self, k: f64) -> f64 {
        self.mean - if self.stderr.is_nan() { 0.0 } else { k * self.stderr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    GradNorm,
    GradNormSq,
    FValue,
}

impl Metric {
    pub fn of(&self, r: &TrajectoryRecord) -> f64 {
        match self {
            Metric::GradNorm => r.grad_norm,
            Metric::GradNormSq => r.grad_norm * r.grad_norm,
            Metric::FValue => r.f_value,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::GradNorm => "grad_norm",
            Metric::GradNormSq => "grad_norm_sq",
            Metric::FValue => "f_value",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeIndex {
    At(u64),
    AverageOverT,
}

/// Per-trajectory value of `metric` at `at`.
pub fn trajectory_value(traj: &Trajectory, metric: Metric, at: TimeIndex) -> Result<f64> {
    match at {
        TimeIndex::At(t) => traj
            .records
            .get(t as usize)
            .map(|r| metric.of(r))
            .ok_or_else(|| Error::Index(format!("t = {t} outside trajectory of length {}", traj.len()))),
        TimeIndex::AverageOverT => {
            if traj.is_empty() {
                return Err(Error::Index("empty trajectory".into()));
            }
            Ok(traj.records.iter().map(|r| metric.of(r)).sum::<f64>() / traj.len() as f64)
        }
    }
}

/// Across-seed mean and standard error. Trajectories are reduced in seed
/// order, so the result does not depend on how they were produced.
pub fn estimate_expectation(trajectories: &[Trajectory], metric: Metric, at: TimeIndex) -> Result<MonteCarloStat> {
    let mut sorted: Vec<&Trajectory> = trajectories.iter().collect();
    sorted.sort_by_key(|t| t.seed);
    let values = sorted.iter().map(|t| trajectory_value(t, metric, at)).collect::<Result<Vec<_>>>()?;
    MonteCarloStat::from_values(&values)
}

fn straddle_pairs(boundaries: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &b in boundaries {
        for k in 1..=6 {
            let h = 10f64.powi(-k);
            out.push((b - h, b + h));
            out.push((b - h, b));
            out.push((b, b + h));
        }
    }
    out
}

/// Largest observed `‖∇f(a) − ∇f(b)‖ / (ℓ‖a − b‖)` over random pairs in the
/// evaluation domain plus pairs straddling every piece boundary.
pub fn verify_smoothness(instance: &ProblemInstance, n_probes: usize, rng: &mut RngStream) -> Result<f64> {
    let domain = instance
        .evaluation_domain()
        .ok_or_else(|| Error::Precondition("verify_smoothness needs an evaluation domain".into()))?;
    if n_probes < 1000 {
        return Err(Error::Precondition(format!("verify_smoothness needs n_probes >= 1000, got {n_probes}")));
    }
    let l = instance.smoothness_l();
    let d = instance.dimension();
    let mut worst = 0.0_f64;
    let mut probe = |a: &[f64], b: &[f64]| -> Result<()> {
        let dist = vecops::distance(a, b);
        if dist > 0.0 {
            let ga = instance.gradient(a)?;
            let gb = instance.gradient(b)?;
            worst = worst.max(vecops::distance(&ga, &gb) / (l * dist));
        }
        Ok(())
    };
    let sample = |rng: &mut RngStream| -> Vec<f64> {
        (0..d).map(|k| domain.lo[k] + (domain.hi[k] - domain.lo[k]) * rng.uniform_open()).collect()
    };
    for _ in 0..n_probes {
        let a = sample(rng);
        let b = sample(rng);
        probe(&a, &b)?;
    }
    if let Some(pw) = instance.piecewise() {
        for (a, b) in straddle_pairs(&pw.boundaries()) {
            probe(&[a], &[b])?;
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1Report {
    pub jumps: Vec<BoundaryJump>,
    pub tol: f64,
    pub pass: bool,
}

/// Value and slope jumps at every interior boundary of a piecewise body.
pub fn check_c1_continuity(instance: &ProblemInstance, tol: f64) -> Result<C1Report> {
    let pw = instance
        .piecewise()
        .ok_or_else(|| Error::Precondition("check_c1_continuity needs a piecewise instance".into()))?;
    let jumps = pw.boundary_jumps();
    let pass = jumps.iter().all(|j| j.value_jump <= tol * j.scale && j.slope_jump <= tol * j.scale);
    Ok(C1Report { jumps, tol, pass })
}

/// First `t` with `grad_norm(t) ≥ factor · grad_norm(0)`.
pub fn detect_blowup(trajectory: &Trajectory, factor: f64) -> Result<Option<u64>> {
    if !(factor > 1.0) {
        return Err(Error::Precondition(format!("blow-up factor must exceed 1, got {factor}")));
    }
    let Some(first) = trajectory.records.first() else {
        return Ok(None);
    };
    let threshold = factor * first.grad_norm;
    Ok(trajectory.records.iter().skip(1).find(|r| r.grad_norm >= threshold).map(|r| r.t))
}

/// Central finite-difference gradient with step `h` per coordinate.
pub fn finite_difference_gradient(instance: &ProblemInstance, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let (fp, _) = instance.evaluate(&xp)?;
        let (fm, _) = instance.evaluate(&xm)?;
        g.push((fp - fm) / (xp[k] - xm[k]));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::noise::NoiseOracle;
    use crate::optimizers::{run, AdagradConfig, SgdConfig};
    use crate::piecewise::Piece;

    fn exact(p: f64) -> Vec<(f64, f64)> {
        (1..=200).map(|t| (t as f64, 3.0 * (t as f64).powf(p))).collect()
    }

    #[test]
    fn planted_exponents() {
        for p in [-1.0, -0.5, -0.25, 0.0] {
            let f = fit_power_law(&exact(p), 0.5).unwrap();
            assert!((f.exponent - p).abs() < 1e-10, "{p}: {f:?}");
            assert!((f.r_squared - 1.0).abs() < 1e-12, "{p}: {f:?}");
            assert!((f.log_intercept - 3f64.ln()).abs() < 1e-9);
            assert_eq!(f.fit_window, (101.0, 200.0));
        }
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_power_law(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], 1.0), Err(Error::Degenerate(_))));
        assert!(matches!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0)], 1.0), Err(Error::Degenerate(_))));
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 1.0)], 1.0).is_err());
    }

    fn traj(seed: u64, values: &[f64]) -> Trajectory {
        Trajectory {
            instance_id: "i".into(),
            optimizer_id: "o".into(),
            seed,
            records: values
                .iter()
                .enumerate()
                .map(|(t, v)| TrajectoryRecord {
                    t: t as u64,
                    f_value: v * v / 2.0,
                    grad_norm: *v,
                    stoch_grad_norm: *v,
                    effective_stepsize: 1.0,
                    iterate: [*v, 0.0, 0.0, 0.0],
                })
                .collect(),
        }
    }

    #[test]
    fn expectation_basics() {
        let same = vec![traj(1, &[1.0, 2.0]), traj(2, &[1.0, 2.0])];
        let s = estimate_expectation(&same, Metric::GradNorm, TimeIndex::AverageOverT).unwrap();
        assert_eq!((s.mean, s.stderr, s.n), (1.5, 0.0, 2));
        let s = estimate_expectation(&same, Metric::GradNormSq, TimeIndex::At(1)).unwrap();
        assert_eq!(s.mean, 4.0);
        assert!(matches!(estimate_expectation(&same, Metric::GradNorm, TimeIndex::At(2)), Err(Error::Index(_))));
        let single = estimate_expectation(&same[..1], Metric::GradNorm, TimeIndex::At(0)).unwrap();
        assert!(single.stderr.is_nan());
    }

    #[test]
    fn expectation_ignores_order() {
        let a = vec![traj(3, &[0.1]), traj(1, &[0.7]), traj(2, &[0.3])];
        let mut b = a.clone();
        b.reverse();
        let sa = estimate_expectation(&a, Metric::GradNorm, TimeIndex::At(0)).unwrap();
        let sb = estimate_expectation(&b, Metric::GradNorm, TimeIndex::At(0)).unwrap();
        assert_eq!(sa.mean.to_bits(), sb.mean.to_bits());
        assert_eq!(sa.stderr.to_bits(), sb.stderr.to_bits());
    }

    #[test]
    fn smoothness_examples() {
        let mut rng = RngStream::new(9, 0);
        let q = instances::make_quadratic(3.0, 1.0, 2).unwrap();
        let r = verify_smoothness(&q, 1000, &mut rng).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
        let lb = instances::make_momentum_lb_quadratic(1.0, 1.0, |_| 1.0, 10).unwrap();
        assert!(verify_smoothness(&lb, 1000, &mut rng).unwrap() <= 0.5);
        let (h, _) = instances::build_sgd_hard_instance(1.0, 0.5, 8.0, 64).unwrap();
        let r = verify_smoothness(&h, 10_000, &mut rng).unwrap();
        assert!(r <= 1.0 + 1e-6, "{r}");
    }

    #[test]
    fn c1_detector_sensitivity() {
        let (h, rep) = instances::build_sgd_hard_instance(1.0, 0.5, 8.0, 64).unwrap();
        let c = check_c1_continuity(&h, 1e-9).unwrap();
        assert!(c.pass);
        assert_eq!(c.jumps.len(), 6);
        let pw = h.piecewise().unwrap();
        let p = pw.pieces()[4];
        let bumped = pw.with_piece(4, Piece { curvature: p.curvature * (1.0 + 1e-3), ..p });
        let jumps = bumped.boundary_jumps();
        assert!(jumps.iter().any(|j| j.slope_jump > 1e-9 * j.scale));
        // the valley piece meets segment 3 with the prescribed slope
        let slope = pw.pieces()[0].slope(rep.x_t0_plus1);
        let want = rep.delta_tilde.sqrt() / (2.0 * rep.valley_scale.sqrt());
        assert!((slope - want).abs() <= 1e-12 * want);
        assert!(check_c1_continuity(&instances::make_quadratic(1.0, 1.0, 1).unwrap(), 1e-9).is_err());
    }

    #[test]
    fn blowup_examples() {
        let q = instances::make_quadratic(8.0, 4.0, 1).unwrap();
        let tr = run(&q, &SgdConfig::new(1.0, 0.5).unwrap().into(), &NoiseOracle::exact(), 10, 0).unwrap();
        assert_eq!(detect_blowup(&tr, 5.0).unwrap(), Some(1));
        let calm = run(&q, &SgdConfig::new(0.1, 0.5).unwrap().into(), &NoiseOracle::exact(), 50, 0).unwrap();
        assert_eq!(detect_blowup(&calm, 1.5).unwrap(), None);
        let ada = run(&q, &AdagradConfig::new(1.0, 1.0).unwrap().into(), &NoiseOracle::exact(), 1000, 0).unwrap();
        assert_eq!(detect_blowup(&ada, 10.0).unwrap(), None);
        assert!(detect_blowup(&tr, 1.0).is_err());
    }

    #[test]
    fn finite_differences_match() {
        let (h, _) = instances::build_sgd_hard_instance(1.0, 0.5, 8.0, 64).unwrap();
        for x in [-300.0, -50.3, -3.1, 0.4, 7.7, 200.0] {
            let fd = finite_difference_gradient(&h, &[x], 1e-6 * x.abs().max(1.0)).unwrap()[0];
            let g = h.gradient(&[x]).unwrap()[0];
            assert!((fd - g).abs() <= 1e-4 * g.abs().max(1.0), "x={x}: {fd} vs {g}");
        }
    }
}
