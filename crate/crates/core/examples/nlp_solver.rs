//! Uses the constrained NLP solver on its own, outside power flow.
//!
//!     cargo run --example nlp_solver

use acdc_opf::nlp::{differentiate, solve, NlpProblem, Scalar, SolverConfig};

/// Rosenbrock's function restricted to the disc x² + y² <= 1.5 and the
/// line x + y = 1.2.
struct Rosenbrock;

impl NlpProblem for Rosenbrock {
    fn num_vars(&self) -> usize {
        2
    }
    fn num_eq(&self) -> usize {
        1
    }
    fn num_ineq(&self) -> usize {
        1
    }
    fn lower_bounds(&self) -> Vec<f64> {
        vec![-2.0, -2.0]
    }
    fn upper_bounds(&self) -> Vec<f64> {
        vec![2.0, 2.0]
    }
    fn initial_point(&self) -> Vec<f64> {
        vec![-1.0, 1.0]
    }
    fn objective<S: Scalar>(&self, x: &[S]) -> S {
        (-x[0] + 1.0).square() + (x[1] - x[0] * x[0]).square() * 100.0
    }
    fn equality<S: Scalar>(&self, _j: usize, x: &[S]) -> S {
        x[0] + x[1] - 1.2
    }
    fn inequality<S: Scalar>(&self, _j: usize, x: &[S]) -> S {
        x[0] * x[0] + x[1] * x[1] - 1.5
    }
}

fn main() -> acdc_opf::Result<()> {
    let result = solve(&Rosenbrock, &SolverConfig::default())?;
    println!("status     {:?}", result.status);
    println!("x          ({:.8}, {:.8})", result.x[0], result.x[1]);
    println!("objective  {:.10}", result.objective);
    println!("multiplier eq {:.6}, ineq {:.6}", result.eq_multipliers[0], result.ineq_multipliers[0]);
    println!("iterations {} outer, {} inner", result.outer_iterations, result.inner_iterations);
    println!("residuals  {:?}", result.residuals);

    let d = differentiate(&Rosenbrock, &result.x);
    println!("gradient   {:?}", d.objective_gradient);
    Ok(())
}
