use serde::{Deserialize, Serialize};

use super::problem::OpfProblem;
use super::ObjectiveKind;
use crate::grid_model::{CurrentKind, GridMode};
use crate::nlp::{KktResiduals, SolverResult, SolverStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusResult {
    pub id: usize,
    pub kind: CurrentKind,
    /// Net injection (generation less load), kW.
    pub p_kw: f64,
    /// Net reactive injection, kVAr; absent on DC buses.
    pub q_kvar: Option<f64>,
    pub v_kv: f64,
    pub v_pu: f64,
    pub angle_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorResult {
    pub id: usize,
    pub bus: usize,
    pub p_kw: f64,
    pub q_kvar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub id: usize,
    pub bus: usize,
    pub mode: GridMode,
    /// Injection into the microgrid; negative when the grid consumes.
    pub p_kw: f64,
    pub q_kvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverterResult {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub forward_kw: f64,
    pub reverse_kw: f64,
    pub input_bus: usize,
    pub output_bus: usize,
    pub input_kw: f64,
    pub output_kw: f64,
    pub loss_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Line,
    Transformer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchResult {
    pub kind: BranchKind,
    pub id: usize,
    pub from: usize,
    pub to: usize,
    /// Series current, kA, on the base of the `from` bus (lines) or the
    /// reference winding (transformers).
    pub current_ka: f64,
    pub loss_kw: f64,
}

/// An OPF result in engineering units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfSolution {
    pub objective: ObjectiveKind,
    /// In [`ObjectiveKind::unit`] units, without regularization.
    pub objective_value: f64,
    pub objective_unit: String,
    pub status: SolverStatus,
    /// Whether every equality and inequality holds within the tolerance.
    pub feasible: bool,
    pub residuals: KktResiduals,
    pub max_equality_residual_pu: f64,
    pub max_inequality_violation_pu: f64,
    pub buses: Vec<BusResult>,
    pub generators: Vec<GeneratorResult>,
    pub external_grids: Vec<GridResult>,
    pub converters: Vec<ConverterResult>,
    pub branches: Vec<BranchResult>,
    /// Local generation, external grid excluded, kW.
    pub total_generation_kw: f64,
    pub total_load_kw: f64,
    /// Sum of bus injections, kW.
    pub total_losses_kw: f64,
    pub series_losses_kw: f64,
    pub converter_losses_kw: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl OpfSolution {
    pub fn bus(&self, id: usize) -> Option<&BusResult> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn generator(&self, id: usize) -> Option<&GeneratorResult> {
        self.generators.iter().find(|g| g.id == id)
    }
}

/// Unpacks a solver result into engineering units. The solution is marked
/// infeasible when any equality residual or inequality exceeds `tolerance`
/// (pu).
pub fn extract_solution(problem: &OpfProblem, result: &SolverResult, tolerance: f64) -> OpfSolution {
    let x = &result.x;
    let network = problem.network();
    let pu = network.per_unit().expect("normalized network");
    let sb = pu.s_base;
    let layout = problem.layout();

    let max_eq = problem
        .equality_set(x)
        .iter()
        .fold(0.0f64, |a, r| a.max(r.abs()));
    let max_ineq = problem.inequality_set(x).iter().fold(0.0f64, |a, &g| a.max(g));
    let finite = x.iter().all(|v| v.is_finite());
    let feasible = finite && max_eq <= tolerance && max_ineq <= tolerance;

    let generators: Vec<GeneratorResult> = network
        .generators()
        .iter()
        .enumerate()
        .map(|(i, g)| GeneratorResult {
            id: g.id,
            bus: g.bus,
            p_kw: x[layout.generator_p[i]] * sb,
            q_kvar: layout.generator_q[i].map(|q| x[q] * sb),
        })
        .collect();
    let external_grids: Vec<GridResult> = network
        .external_grids()
        .iter()
        .enumerate()
        .map(|(i, g)| GridResult {
            id: g.id,
            bus: g.bus,
            mode: g.mode,
            p_kw: x[layout.grid_p[i]] * sb,
            q_kvar: x[layout.grid_q[i]] * sb,
        })
        .collect();

    let n_bus = network.buses().len();
    let mut p = vec![0.0; n_bus];
    let mut q = vec![0.0; n_bus];
    for g in &generators {
        p[g.bus] += g.p_kw;
        q[g.bus] += g.q_kvar.unwrap_or(0.0);
    }
    for g in &external_grids {
        p[g.bus] += g.p_kw;
        q[g.bus] += g.q_kvar;
    }
    for l in network.loads() {
        p[l.bus] -= l.p * sb;
        q[l.bus] -= l.q * sb;
    }
    let buses: Vec<BusResult> = network
        .buses()
        .iter()
        .map(|b| {
            let e = x[layout.bus_e[b.id]];
            let f = layout.bus_f[b.id].map_or(0.0, |i| x[i]);
            let v_pu = e.hypot(f);
            BusResult {
                id: b.id,
                kind: b.kind,
                p_kw: p[b.id],
                q_kvar: (b.kind == CurrentKind::Ac).then_some(q[b.id]),
                v_kv: v_pu * pu.v_base[b.id],
                v_pu,
                angle_rad: f.atan2(e),
            }
        })
        .collect();

    let converters: Vec<ConverterResult> = network
        .converters()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let flow = problem.converter_flow(i, x);
            ConverterResult {
                id: c.id,
                from: c.from,
                to: c.to,
                forward_kw: flow.forward * sb,
                reverse_kw: flow.reverse * sb,
                input_bus: flow.input_bus,
                output_bus: flow.output_bus,
                input_kw: flow.input * sb,
                output_kw: flow.output * sb,
                loss_kw: flow.loss * sb,
            }
        })
        .collect();

    let n_lines = network.lines().len();
    let branches: Vec<BranchResult> = problem
        .branches
        .iter()
        .enumerate()
        .map(|(index, b)| {
            let (kind, id, base_bus) = if index < n_lines {
                (BranchKind::Line, network.lines()[index].id, b.from)
            } else {
                let t = index - n_lines;
                (
                    BranchKind::Transformer,
                    network.transformers()[t].id,
                    pu.transformer_reference[t],
                )
            };
            let i_base = sb / (pu.v_base[base_bus] * 1000.0);
            let loss = problem.branch_power(x, index, b.from).0 + problem.branch_power(x, index, b.to).0;
            BranchResult {
                kind,
                id,
                from: b.from,
                to: b.to,
                current_ka: problem.branch_current_sq(x, index).sqrt() * i_base,
                loss_kw: loss * sb,
            }
        })
        .collect();

    let total_generation_kw = generators.iter().map(|g| g.p_kw).sum();
    let total_load_kw = network.loads().iter().map(|l| l.p * sb).sum();
    let total_losses_kw = buses.iter().map(|b| b.p_kw).sum();
    let series_losses_kw = branches.iter().map(|b| b.loss_kw).sum();
    let converter_losses_kw = converters.iter().map(|c| c.loss_kw).sum();

    OpfSolution {
        objective: problem.objective(),
        objective_value: problem.objective_value(problem.objective(), x),
        objective_unit: problem.objective().unit().to_string(),
        status: result.status,
        feasible,
        residuals: result.residuals,
        max_equality_residual_pu: max_eq,
        max_inequality_violation_pu: max_ineq,
        buses,
        generators,
        external_grids,
        converters,
        branches,
        total_generation_kw,
        total_load_kw,
        total_losses_kw,
        series_losses_kw,
        converter_losses_kw,
        outer_iterations: result.outer_iterations,
        inner_iterations: result.inner_iterations,
        wall_time_s: result.wall_time.as_secs_f64(),
        message: result.message.clone(),
    }
}
