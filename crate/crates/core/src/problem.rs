//! Problem instances, objective/gradient evaluation and trajectory records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, OVERFLOW_LIMIT};
use crate::piecewise::PiecewiseQuadratic;
use crate::vecops;

/// Analytic objective bodies. Every body supplies its own gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// `f(x) = c/2 ‖x‖²`
    Isotropic { curvature: f64 },
    /// `f(x) = c/2 (x¹)²`; the remaining coordinates do not enter `f`.
    FirstCoordinate { curvature: f64 },
    /// One-dimensional piecewise quadratic.
    Piecewise(PiecewiseQuadratic),
}

/// Axis-aligned box used to probe diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn symmetric(dimension: usize, halfwidth: f64) -> Self {
        BoxDomain { lo: vec![-halfwidth; dimension], hi: vec![halfwidth; dimension] }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

/// An evaluable objective together with its certified constants.
///
/// Instances are immutable once built and can be shared freely between
/// worker threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    id: String,
    dimension: usize,
    objective: Objective,
    smoothness_l: f64,
    initial_gap: f64,
    optimum_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimum_point: Option<Vec<f64>>,
    initial_point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gradient_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    evaluation_domain: Option<BoxDomain>,
}

impl ProblemInstance {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        id: impl Into<String>,
        objective: Objective,
        smoothness_l: f64,
        initial_gap: f64,
        optimum_value: f64,
        optimum_point: Option<Vec<f64>>,
        initial_point: Vec<f64>,
        evaluation_domain: Option<BoxDomain>,
    ) -> Self {
        ProblemInstance {
            id: id.into(),
            dimension: initial_point.len(),
            objective,
            smoothness_l,
            initial_gap,
            optimum_value,
            optimum_point,
            initial_point,
            gradient_bound: None,
            evaluation_domain,
        }
    }

    /// Restrict attention to a box and certify a gradient bound on it.
    pub fn with_gradient_bound(mut self, bound: f64, domain: BoxDomain) -> Self {
        self.gradient_bound = Some(bound);
        self.evaluation_domain = Some(domain);
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn objective(&self) -> &Objective {
        &self.objective
    }
    pub fn smoothness_l(&self) -> f64 {
        self.smoothness_l
    }
    pub fn initial_gap(&self) -> f64 {
        self.initial_gap
    }
    pub fn optimum_value(&self) -> f64 {
        self.optimum_value
    }
    pub fn optimum_point(&self) -> Option<&[f64]> {
        self.optimum_point.as_deref()
    }
    pub fn initial_point(&self) -> &[f64] {
        &self.initial_point
    }
    pub fn gradient_bound(&self) -> Option<f64> {
        self.gradient_bound
    }
    pub fn evaluation_domain(&self) -> Option<&BoxDomain> {
        self.evaluation_domain.as_ref()
    }

    pub fn piecewise(&self) -> Option<&PiecewiseQuadratic> {
        match &self.objective {
            Objective::Piecewise(p) => Some(p),
            _ => None,
        }
    }

    /// Objective value and gradient at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.dimension {
            return Err(Error::Dimension { expected: self.dimension, got: x.len() });
        }
        if !vecops::all_finite(x) {
            return Err(Error::overflow(f64::INFINITY));
        }
        let (value, grad) = match &self.objective {
            Objective::Isotropic { curvature } => {
                (0.5 * curvature * vecops::norm_sq(x), x.iter().map(|v| curvature * v).collect())
            }
            Objective::FirstCoordinate { curvature } => {
                let mut g = vec![0.0; x.len()];
                g[0] = curvature * x[0];
                (0.5 * curvature * x[0] * x[0], g)
            }
            Objective::Piecewise(p) => {
                let piece = p.piece_at(x[0]);
                (piece.value(x[0]), vec![piece.slope(x[0])])
            }
        };
        let gnorm = vecops::norm(&grad);
        if !(value.abs() <= OVERFLOW_LIMIT) {
            return Err(Error::overflow(value.abs()));
        }
        if !(gnorm <= OVERFLOW_LIMIT) {
            return Err(Error::overflow(gnorm));
        }
        Ok((value, grad))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.evaluate(x).map(|(_, g)| g)
    }
}

/// Observables of one iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: u64,
    pub f_value: f64,
    /// `‖∇f(x_t)‖` of the true gradient.
    pub grad_norm: f64,
    /// Norm of the stochastic direction the step consumed at `t`.
    pub stoch_grad_norm: f64,
    pub effective_stepsize: f64,
    /// First `min(dimension, 4)` coordinates of `x_t`; unused slots are zero.
    pub iterate: [f64; 4],
}

impl TrajectoryRecord {
    pub fn x1(&self) -> f64 {
        self.iterate[0]
    }
}

pub(crate) fn iterate_summary(x: &[f64]) -> [f64; 4] {
    let mut s = [0.0; 4];
    for (slot, v) in s.iter_mut().zip(x) {
        *slot = *v;
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub instance_id: String,
    pub optimizer_id: String,
    pub seed: u64,
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn grad_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.grad_norm)
    }

    pub fn min_grad_norm(&self) -> f64 {
        self.grad_norms().fold(f64::INFINITY, f64::min)
    }

    pub fn max_grad_norm(&self) -> f64 {
        self.grad_norms().fold(0.0, f64::max)
    }
}
