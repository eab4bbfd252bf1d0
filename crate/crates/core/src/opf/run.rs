use super::problem::OpfProblem;
use super::solution::{extract_solution, OpfSolution};
use crate::error::Result;
use crate::grid_model::{GridMode, NetworkModel};
use crate::nlp::{solve, SolverConfig, SolverResult, SolverStatus};
use crate::scenario::OpfScenario;

/// A solved OPF: the assembled problem, the raw solver output and the
/// engineering-unit solution.
#[derive(Debug, Clone)]
pub struct OpfRun {
    pub problem: OpfProblem,
    pub result: SolverResult,
    pub solution: OpfSolution,
    /// Number of sign-restricted external-grid variants that were solved.
    pub variants: usize,
}

/// Assembles and solves the OPF of `network` under `scenario`.
///
/// An external grid in `either` mode may import or export but not both;
/// each such grid is solved once restricted to consumption and once to
/// supply, and the converged variant with the lower objective is kept.
pub fn solve_opf(network: &NetworkModel, scenario: &OpfScenario, config: &SolverConfig) -> Result<OpfRun> {
    let either: Vec<usize> = network
        .external_grids()
        .iter()
        .filter(|g| {
            let mode = scenario
                .grid_modes
                .get(&g.id)
                .copied()
                .or(scenario.grid_mode)
                .unwrap_or(g.mode);
            mode == GridMode::Either
        })
        .map(|g| g.id)
        .collect();

    let mut best: Option<OpfRun> = None;
    let variants = 1usize << either.len();
    for mask in 0..variants {
        let mut variant = scenario.clone();
        for (bit, id) in either.iter().enumerate() {
            let mode = if mask >> bit & 1 == 0 {
                GridMode::ConsumeOnly
            } else {
                GridMode::SupplyOnly
            };
            variant.grid_modes.insert(*id, mode);
        }
        let problem = OpfProblem::assemble(network, &variant)?;
        let result = solve(&problem, config)?;
        let solution = extract_solution(&problem, &result, config.eq_tolerance);
        let run = OpfRun {
            problem,
            result,
            solution,
            variants,
        };
        best = Some(match best {
            None => run,
            Some(current) => {
                if better(&run, &current) {
                    run
                } else {
                    current
                }
            }
        });
    }
    Ok(best.expect("at least one variant"))
}

fn better(candidate: &OpfRun, current: &OpfRun) -> bool {
    let ok = |r: &OpfRun| r.result.status == SolverStatus::Converged;
    match (ok(candidate), ok(current)) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => candidate.result.objective < current.result.objective,
        (false, false) => {
            let violation = |r: &OpfRun| {
                r.solution
                    .max_equality_residual_pu
                    .max(r.solution.max_inequality_violation_pu)
            };
            violation(candidate) < violation(current)
        }
    }
}
