//! Seedable stochastic-gradient oracles and the Gamma function.
//!
//! Random streams use ChaCha8 keyed by a 64-bit seed, with the ChaCha stream
//! id selecting an independent replicate. `(seed, stream_index)` fixes the
//! whole sample sequence within one build of this crate.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::vecops;

pub const RNG_ALGORITHM: &str = "chacha8";

/// Reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        RngStream { seed, stream_index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn algorithm_id(&self) -> &'static str {
        RNG_ALGORITHM
    }

    /// Uniform on the open interval (0, 1); exact zeros are redrawn.
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.gen();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fair_sign(&mut self) -> f64 {
        if self.rng.next_u32() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Zero,
    Gaussian,
    MultiplicativeSign,
    FrechetSymmetric,
}

/// Noise model of a stochastic gradient oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_halfwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_s: Option<f64>,
}

impl NoiseSpec {
    pub fn zero() -> Self {
        NoiseSpec {
            kind: NoiseKind::Zero,
            sigma: 0.0,
            delta_noise: None,
            region_halfwidth: None,
            zeta: None,
            scale_s: None,
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        NoiseSpec { kind: NoiseKind::Gaussian, sigma, ..Self::zero() }
    }

    /// `(1 ± δ)·∇f` with equal probability inside `|x¹| ≤ w`, exact outside.
    pub fn multiplicative_sign(sigma: f64, delta_noise: f64, region_halfwidth: f64) -> Self {
        NoiseSpec {
            kind: NoiseKind::MultiplicativeSign,
            sigma,
            delta_noise: Some(delta_noise),
            region_halfwidth: Some(region_halfwidth),
            ..Self::zero()
        }
    }

    /// Symmetric Fréchet-tailed noise on coordinate 2 with scale
    /// `s = σ / √Γ(1 − ζ/2)`.
    pub fn frechet_symmetric(sigma: f64, zeta: f64) -> Result<Self> {
        check_zeta(zeta)?;
        let s = sigma / gamma_function(1.0 - zeta / 2.0)?.sqrt();
        Ok(NoiseSpec {
            kind: NoiseKind::FrechetSymmetric,
            sigma,
            zeta: Some(zeta),
            scale_s: Some(s),
            ..Self::zero()
        })
    }

    /// Fill derived fields (currently only `scale_s`).
    pub fn normalized(mut self) -> Result<Self> {
        if self.kind == NoiseKind::FrechetSymmetric && self.scale_s.is_none() {
            if let Some(z) = self.zeta {
                check_zeta(z)?;
                self.scale_s = Some(self.sigma / gamma_function(1.0 - z / 2.0)?.sqrt());
            }
        }
        Ok(self)
    }

    /// Check kind-specific requirements. On failure returns the offending
    /// field name and a message.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(("sigma", format!("sigma must be a finite nonnegative number, got {}", self.sigma)));
        }
        match self.kind {
            NoiseKind::Zero => Ok(()),
            NoiseKind::Gaussian => {
                if self.sigma > 0.0 {
                    Ok(())
                } else {
                    Err(("sigma", "gaussian noise requires sigma > 0".into()))
                }
            }
            NoiseKind::MultiplicativeSign => {
                match self.delta_noise {
                    Some(d) if d > 1.0 && d.is_finite() => {}
                    Some(d) => return Err(("delta_noise", format!("delta_noise must exceed 1, got {d}"))),
                    None => return Err(("delta_noise", "multiplicative_sign requires delta_noise".into())),
                }
                match self.region_halfwidth {
                    Some(w) if w > 0.0 && w.is_finite() => Ok(()),
                    Some(w) => Err(("region_halfwidth", format!("region_halfwidth must be positive, got {w}"))),
                    None => Err(("region_halfwidth", "multiplicative_sign requires region_halfwidth".into())),
                }
            }
            NoiseKind::FrechetSymmetric => {
                if !(self.sigma > 0.0) {
                    return Err(("sigma", "frechet_symmetric requires sigma > 0".into()));
                }
                match self.zeta {
                    Some(z) if z > 0.5 && z < 1.0 => {}
                    Some(z) => return Err(("zeta", format!("zeta must lie in (1/2, 1), got {z}"))),
                    None => return Err(("zeta", "frechet_symmetric requires zeta".into())),
                }
                match self.scale_s {
                    Some(s) if !(s > 0.0) => Err(("scale_s", format!("scale_s must be positive, got {s}"))),
                    _ => Ok(()),
                }
            }
        }
    }

    /// Minimum problem dimension this noise model needs.
    pub fn required_dimension(&self) -> usize {
        match self.kind {
            NoiseKind::FrechetSymmetric => 2,
            _ => 1,
        }
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta > 0.5 && zeta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("zeta must lie in (1/2, 1), got {zeta}")))
    }
}

/// Draw `g(x; ξ)` given the true gradient at `x`.
pub fn sample_gradient(spec: &NoiseSpec, true_grad: &[f64], x: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
    match spec.kind {
        NoiseKind::Zero => Ok(true_grad.to_vec()),
        NoiseKind::Gaussian => {
            // isotropic, total variance σ²
            let per_coord = spec.sigma / (true_grad.len() as f64).sqrt();
            Ok(true_grad.iter().map(|g| g + per_coord * rng.standard_normal()).collect())
        }
        NoiseKind::MultiplicativeSign => {
            let (delta, w) = match (spec.delta_noise, spec.region_halfwidth) {
                (Some(d), Some(w)) => (d, w),
                _ => return Err(Error::KindMismatch("multiplicative_sign needs delta_noise and region_halfwidth".into())),
            };
            if x[0].abs() <= w {
                let factor = 1.0 + rng.fair_sign() * delta;
                Ok(true_grad.iter().map(|g| factor * g).collect())
            } else {
                Ok(true_grad.to_vec())
            }
        }
        NoiseKind::FrechetSymmetric => {
            if true_grad.len() != 2 {
                return Err(Error::KindMismatch(format!(
                    "frechet_symmetric noise acts on coordinate 2 of a 2-D problem; dimension is {}",
                    true_grad.len()
                )));
            }
            let (zeta, s) = match (spec.zeta, spec.scale_s) {
                (Some(z), Some(s)) => (z, s),
                _ => return Err(Error::KindMismatch("frechet_symmetric needs zeta and scale_s".into())),
            };
            let xi = frechet_symmetric_sample(zeta, s, rng)?;
            Ok(vec![true_grad[0], true_grad[1] + xi])
        }
    }
}

/// Magnitude with CDF `exp(-(x/s)^(-2/ζ))` by inversion, times a fair sign.
pub fn frechet_symmetric_sample(zeta: f64, scale_s: f64, rng: &mut RngStream) -> Result<f64> {
    check_zeta(zeta)?;
    let u = rng.uniform_open();
    let magnitude = frechet_magnitude_quantile(zeta, scale_s, u);
    Ok(rng.fair_sign() * magnitude)
}

/// Inverse of `P(|ξ| ≤ x) = exp(-(x/s)^(-2/ζ))`.
pub fn frechet_magnitude_quantile(zeta: f64, scale_s: f64, u: f64) -> f64 {
    scale_s * (-u.ln()).powf(-zeta / 2.0)
}

pub fn frechet_magnitude_cdf(zeta: f64, scale_s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-(x / scale_s).powf(-2.0 / zeta)).exp()
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for `x > 0` (Lanczos, g = 7, with reflection below 1/2).
pub fn gamma_function(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_function needs a finite x > 0, got {x}")));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_positive(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

/// A stochastic-gradient oracle: a noise model bound to its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseOracle {
    pub spec: NoiseSpec,
}

impl NoiseOracle {
    pub fn new(spec: NoiseSpec) -> Self {
        NoiseOracle { spec }
    }

    pub fn exact() -> Self {
        NoiseOracle { spec: NoiseSpec::zero() }
    }

    pub fn sample(&self, true_grad: &[f64], x: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        sample_gradient(&self.spec, true_grad, x, rng)
    }
}

/// Monte Carlo estimate of bias and second moment of `g − ∇f` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCheck {
    pub bias_norm: f64,
    /// Standard error of each coordinate of the mean deviation, combined in norm.
    pub bias_stderr: f64,
    pub variance_estimate: f64,
    pub variance_stderr: f64,
    pub n: usize,
    /// `variance_estimate > σ²(1 + 5/√n)`
    pub violation: bool,
}

pub fn oracle_moment_check(
    spec: &NoiseSpec,
    instance: &ProblemInstance,
    x: &[f64],
    n: usize,
    rng: &mut RngStream,
) -> Result<MomentCheck> {
    if n < 1000 {
        return Err(Error::Precondition(format!("oracle_moment_check needs n >= 1000, got {n}")));
    }
    if instance.dimension() < spec.required_dimension() {
        return Err(Error::KindMismatch(format!(
            "noise needs dimension {} but instance has {}",
            spec.required_dimension(),
            instance.dimension()
        )));
    }
    let grad = instance.gradient(x)?;
    let d = grad.len();
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    let mut dev_sq_mean = 0.0;
    let mut dev_sq_m2 = 0.0;
    for i in 0..n {
        let g = sample_gradient(spec, &grad, x, rng)?;
        let dev: Vec<f64> = g.iter().zip(&grad).map(|(a, b)| a - b).collect();
        for k in 0..d {
            sum[k] += dev[k];
            sum_sq[k] += dev[k] * dev[k];
        }
        // Welford on ‖g − ∇f‖²
        let q = vecops::norm_sq(&dev);
        let delta = q - dev_sq_mean;
        dev_sq_mean += delta / (i + 1) as f64;
        dev_sq_m2 += delta * (q - dev_sq_mean);
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let coord_var: Vec<f64> = (0..d).map(|k| (sum_sq[k] / nf - mean[k] * mean[k]).max(0.0) * nf / (nf - 1.0)).collect();
    let bias_stderr = (coord_var.iter().sum::<f64>() / nf).sqrt();
    let variance_stderr = (dev_sq_m2 / (nf - 1.0) / nf).sqrt();
    let variance_estimate = dev_sq_mean;
    Ok(MomentCheck {
        bias_norm: vecops::norm(&mean),
        bias_stderr,
        variance_estimate,
        variance_stderr,
        n,
        violation: variance_estimate > spec.sigma * spec.sigma * (1.0 + 5.0 / nf.sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn gamma_known_values() {
        assert!((gamma_function(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_function(2.0).unwrap() - 1.0).abs() < 1e-14);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma_function(0.5).unwrap() / sqrt_pi - 1.0).abs() < 1e-13);
        assert!((gamma_function(5.0).unwrap() / 24.0 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gamma_reflection_identity() {
        for x in [0.55, 0.625, 0.7] {
            let lhs = gamma_function(x).unwrap() * gamma_function(1.0 - x).unwrap() * (std::f64::consts::PI * x).sin()
                / std::f64::consts::PI;
            assert!((lhs - 1.0).abs() < 1e-9, "x={x}: {lhs}");
        }
    }

    #[test]
    fn gamma_domain() {
        assert!(matches!(gamma_function(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_function(-1.5), Err(Error::Domain(_))));
        assert!(matches!(gamma_function(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn frechet_quantiles() {
        let s = 1.7;
        let q = frechet_magnitude_quantile(0.75, s, (-1.0f64).exp());
        assert!((q - s).abs() < 1e-15);
        let q = frechet_magnitude_quantile(0.75, s, 0.5);
        assert!((q - s * 2f64.ln().powf(-0.375)).abs() < 1e-14);
        assert!((frechet_magnitude_cdf(0.75, s, q) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn frechet_rejects_bad_zeta() {
        let mut rng = RngStream::new(1, 0);
        assert!(frechet_symmetric_sample(0.5, 1.0, &mut rng).is_err());
        assert!(frechet_symmetric_sample(1.0, 1.0, &mut rng).is_err());
        assert!(NoiseSpec::frechet_symmetric(1.0, 0.3).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, stream| {
            let mut r = RngStream::new(seed, stream);
            (0..8).map(|_| r.uniform_open()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 0), draw(7, 0));
        assert_ne!(draw(7, 0), draw(7, 1));
        assert_ne!(draw(7, 0), draw(8, 0));
    }

    #[test]
    fn zero_noise_is_identity() {
        let mut rng = RngStream::new(3, 0);
        let g = sample_gradient(&NoiseSpec::zero(), &[1.5, -2.0], &[0.0, 0.0], &mut rng).unwrap();
        assert_eq!(g, vec![1.5, -2.0]);
        let inst = instances::make_quadratic(1.0, 0.5, 1).unwrap();
        let m = oracle_moment_check(&NoiseSpec::zero(), &inst, &[0.3], 1000, &mut rng).unwrap();
        assert_eq!((m.bias_norm, m.variance_estimate), (0.0, 0.0));
        assert!(!m.violation);
    }

    #[test]
    fn multiplicative_branches_average_to_gradient() {
        let spec = NoiseSpec::multiplicative_sign(1.0, 1.05, 3.0);
        let mut rng = RngStream::new(5, 0);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..64 {
            let g = sample_gradient(&spec, &[2.0], &[1.0], &mut rng).unwrap();
            seen.insert(g[0].to_bits());
        }
        let vals: Vec<f64> = seen.iter().map(|b| f64::from_bits(*b)).collect();
        assert_eq!(vals.len(), 2);
        assert!(((vals[0] + vals[1]) / 2.0 - 2.0).abs() < 1e-15);
        // outside the region the oracle is exact
        let g = sample_gradient(&spec, &[2.0], &[3.5], &mut rng).unwrap();
        assert_eq!(g, vec![2.0]);
    }

    #[test]
    fn frechet_needs_two_dimensions() {
        let spec = NoiseSpec::frechet_symmetric(1.0, 0.75).unwrap();
        let mut rng = RngStream::new(5, 0);
        assert!(matches!(sample_gradient(&spec, &[1.0], &[0.0], &mut rng), Err(Error::KindMismatch(_))));
        let g = sample_gradient(&spec, &[0.25, 0.0], &[1.0, 0.0], &mut rng).unwrap();
        assert_eq!(g[0], 0.25);
    }

    #[test]
    fn validate_reports_fields() {
        let mut s = NoiseSpec::gaussian(-1.0);
        assert_eq!(s.validate().unwrap_err().0, "sigma");
        s.sigma = 1.0;
        assert!(s.validate().is_ok());
        let m = NoiseSpec::multiplicative_sign(1.0, 0.9, 1.0);
        assert_eq!(m.validate().unwrap_err().0, "delta_noise");
        let f = NoiseSpec { zeta: Some(0.4), ..NoiseSpec::frechet_symmetric(1.0, 0.75).unwrap() };
        assert_eq!(f.validate().unwrap_err().0, "zeta");
    }
}
