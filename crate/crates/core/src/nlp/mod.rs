//! Smooth constrained nonlinear programming.
//!
//! Problems have the form
//!
//! ```text
//! minimize    f(x)
//! subject to  h_j(x)  = 0     j = 0..num_eq
//!             g_j(x) <= 0     j = 0..num_ineq
//!             l <= x <= u
//! ```
//!
//! and are solved by [`solve`], an augmented-Lagrangian method with
//! nonnegative slacks for the inequalities and a projected damped-Newton
//! inner minimizer. Derivatives are exact, obtained with the dual numbers in
//! [`dual`].

pub mod dual;
mod solver;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use dual::{Dual, HyperDual, Scalar};
pub use solver::solve;

/// A smooth constrained minimization problem.
///
/// Functions are generic over [`Scalar`] so the solver can evaluate them with
/// plain values or with dual numbers. Supports list the variables each
/// function depends on; the default (every variable) is always correct but
/// makes second derivatives quadratic in the problem dimension.
pub trait NlpProblem {
    fn num_vars(&self) -> usize;
    fn num_eq(&self) -> usize;
    fn num_ineq(&self) -> usize;

    fn lower_bounds(&self) -> Vec<f64>;
    fn upper_bounds(&self) -> Vec<f64>;
    fn initial_point(&self) -> Vec<f64>;

    fn objective<S: Scalar>(&self, x: &[S]) -> S;
    fn equality<S: Scalar>(&self, j: usize, x: &[S]) -> S;
    /// Inequality `j`, feasible when `<= 0`.
    fn inequality<S: Scalar>(&self, j: usize, x: &[S]) -> S;

    fn objective_support(&self) -> Vec<usize> {
        (0..self.num_vars()).collect()
    }

    fn equality_support(&self, _j: usize) -> Vec<usize> {
        (0..self.num_vars()).collect()
    }

    fn inequality_support(&self, _j: usize) -> Vec<usize> {
        (0..self.num_vars()).collect()
    }
}

/// Identifies one scalar function of an [`NlpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionId {
    Objective,
    Equality(usize),
    Inequality(usize),
}

impl std::fmt::Display for FunctionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FunctionId::Objective => write!(f, "objective"),
            FunctionId::Equality(j) => write!(f, "equality {j}"),
            FunctionId::Inequality(j) => write!(f, "inequality {j}"),
        }
    }
}

pub(crate) fn evaluate<P: NlpProblem, S: Scalar>(problem: &P, id: FunctionId, x: &[S]) -> S {
    match id {
        FunctionId::Objective => problem.objective(x),
        FunctionId::Equality(j) => problem.equality(j, x),
        FunctionId::Inequality(j) => problem.inequality(j, x),
    }
}

pub(crate) fn support<P: NlpProblem>(problem: &P, id: FunctionId) -> Vec<usize> {
    match id {
        FunctionId::Objective => problem.objective_support(),
        FunctionId::Equality(j) => problem.equality_support(j),
        FunctionId::Inequality(j) => problem.inequality_support(j),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Feasibility tolerance on equalities and inequality violation.
    pub eq_tolerance: f64,
    /// Tolerance on the projected Lagrangian gradient.
    pub kkt_tolerance: f64,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_penalty: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eq_tolerance: 1e-8,
            kkt_tolerance: 1e-6,
            max_outer_iterations: 50,
            max_inner_iterations: 200,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            max_penalty: 1e8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eq_tolerance", self.eq_tolerance),
            ("kkt_tolerance", self.kkt_tolerance),
            ("initial_penalty", self.initial_penalty),
            ("max_penalty", self.max_penalty),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::Config(format!(
                "penalty_growth must exceed 1, got {}",
                self.penalty_growth
            )));
        }
        if self.max_outer_iterations == 0 || self.max_inner_iterations == 0 {
            return Err(Error::Config("iteration limits must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    Infeasible,
    IterationLimit,
}

/// First-order optimality measures at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `‖∇f + Jₕᵀλ + J_gᵀν‖∞`, with components pushing against an active
    /// bound discarded.
    pub stationarity: f64,
    /// `‖h(x)‖∞`.
    pub equality: f64,
    /// `max(0, max_j g_j(x))`.
    pub inequality: f64,
    /// `max_j |ν_j g_j(x)|`.
    pub complementarity: f64,
}

/// One outer (multiplier/penalty) iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub penalty: f64,
    /// Largest constraint residual, slacks included.
    pub violation: f64,
    pub inner_iterations: usize,
    /// Whether the multipliers were updated (otherwise the penalty grew).
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub status: SolverStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub eq_multipliers: Vec<f64>,
    /// Nonnegative multipliers of the `g(x) <= 0` rows.
    pub ineq_multipliers: Vec<f64>,
    pub residuals: KktResiduals,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub history: Vec<OuterRecord>,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
    pub message: Option<String>,
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64(secs.max(0.0)))
    }
}

/// Objective gradient and dense constraint Jacobians.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub objective_gradient: Vec<f64>,
    /// One row per equality.
    pub equality_jacobian: Vec<Vec<f64>>,
    /// One row per inequality.
    pub inequality_jacobian: Vec<Vec<f64>>,
}

/// Exact gradient of one function, one dual pass per supported variable.
pub fn function_gradient<P: NlpProblem>(problem: &P, id: FunctionId, x: &[f64]) -> Vec<f64> {
    let mut point: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
    let mut grad = vec![0.0; x.len()];
    for var in support(problem, id) {
        point[var].eps = 1.0;
        grad[var] = evaluate(problem, id, &point).eps;
        point[var].eps = 0.0;
    }
    grad
}

/// Exact first derivatives of every problem function at `x`.
pub fn differentiate<P: NlpProblem>(problem: &P, x: &[f64]) -> Derivatives {
    Derivatives {
        objective_gradient: function_gradient(problem, FunctionId::Objective, x),
        equality_jacobian: (0..problem.num_eq())
            .map(|j| function_gradient(problem, FunctionId::Equality(j), x))
            .collect(),
        inequality_jacobian: (0..problem.num_ineq())
            .map(|j| function_gradient(problem, FunctionId::Inequality(j), x))
            .collect(),
    }
}

/// Optimality residuals of a point and multiplier estimate.
pub fn kkt_residual<P: NlpProblem>(
    problem: &P,
    x: &[f64],
    eq_multipliers: &[f64],
    ineq_multipliers: &[f64],
) -> KktResiduals {
    let d = differentiate(problem, x);
    let mut grad = d.objective_gradient;
    for (row, &lambda) in d.equality_jacobian.iter().zip(eq_multipliers) {
        for (gi, &a) in grad.iter_mut().zip(row) {
            *gi += lambda * a;
        }
    }
    for (row, &nu) in d.inequality_jacobian.iter().zip(ineq_multipliers) {
        for (gi, &a) in grad.iter_mut().zip(row) {
            *gi += nu * a;
        }
    }
    let lower = problem.lower_bounds();
    let upper = problem.upper_bounds();
    let stationarity = grad
        .iter()
        .enumerate()
        .map(|(i, &g)| projected_component(x[i], g, lower[i], upper[i]))
        .fold(0.0, f64::max);

    let equality = (0..problem.num_eq())
        .map(|j| problem.equality(j, x).abs())
        .fold(0.0, f64::max);
    let mut inequality = 0.0f64;
    let mut complementarity = 0.0f64;
    for j in 0..problem.num_ineq() {
        let g = problem.inequality(j, x);
        inequality = inequality.max(g);
        let nu = ineq_multipliers.get(j).copied().unwrap_or(0.0);
        complementarity = complementarity.max((nu * g).abs());
    }
    KktResiduals {
        stationarity,
        equality,
        inequality,
        complementarity,
    }
}

/// Stationarity contribution of one variable: the length of the projected
/// gradient step `|x - P(x - g)|`, so a gradient pointing out of the box at
/// a bound contributes at most the distance to that bound.
fn projected_component(x: f64, g: f64, lower: f64, upper: f64) -> f64 {
    if lower == upper {
        return 0.0;
    }
    (x - (x - g).clamp(lower, upper)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f = (x0 - 1)^2 + x0 * x1^2, no constraints.
    struct Bowl;

    impl NlpProblem for Bowl {
        fn num_vars(&self) -> usize {
            2
        }
        fn num_eq(&self) -> usize {
            0
        }
        fn num_ineq(&self) -> usize {
            0
        }
        fn lower_bounds(&self) -> Vec<f64> {
            vec![f64::NEG_INFINITY; 2]
        }
        fn upper_bounds(&self) -> Vec<f64> {
            vec![f64::INFINITY; 2]
        }
        fn initial_point(&self) -> Vec<f64> {
            vec![0.0, 0.0]
        }
        fn objective<S: Scalar>(&self, x: &[S]) -> S {
            (x[0] - 1.0).square() + x[0] * x[1].square()
        }
        fn equality<S: Scalar>(&self, _j: usize, _x: &[S]) -> S {
            unreachable!()
        }
        fn inequality<S: Scalar>(&self, _j: usize, _x: &[S]) -> S {
            unreachable!()
        }
    }

    #[test]
    fn stationarity_equals_gradient_norm_without_constraints() {
        let x = [2.0, 3.0];
        let r = kkt_residual(&Bowl, &x, &[], &[]);
        // grad = (2(x0-1) + x1^2, 2 x0 x1) = (11, 12)
        assert_eq!(r.stationarity, 12.0);
        assert_eq!(r.equality, 0.0);
        assert_eq!(r.inequality, 0.0);
    }

    #[test]
    fn differentiate_matches_hand_gradient() {
        let d = differentiate(&Bowl, &[0.5, -1.0]);
        assert_eq!(d.objective_gradient, vec![0.0, -1.0]);
        assert!(d.equality_jacobian.is_empty());
    }

    #[test]
    fn default_config_is_valid_and_bad_ones_rejected() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            eq_tolerance: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            penalty_growth: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bound_projection_discards_outward_gradient() {
        assert_eq!(projected_component(0.0, 3.0, 0.0, 1.0), 0.0);
        assert_eq!(projected_component(0.0, -0.25, 0.0, 1.0), 0.25);
        assert_eq!(projected_component(1.0, -3.0, 0.0, 1.0), 0.0);
        assert_eq!(projected_component(0.5, -3.0, 0.0, 1.0), 0.5);
        assert_eq!(projected_component(0.0, 7.0, 0.0, 0.0), 0.0);
        // Just inside a bound, an outward gradient counts only up to the gap.
        assert!((projected_component(1.0 - 1e-9, -3.0, 0.0, 1.0) - 1e-9).abs() < 1e-15);
    }
}
