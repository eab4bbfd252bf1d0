//! Solves the CEDER network under each of the four objectives and
//! tabulates generation, grid exchange and solver effort.
//!
//!     cargo run --example objective_sweep

use acdc_opf::grid_model::GridMode;
use acdc_opf::io::{fixture_path, read_network};
use acdc_opf::nlp::SolverConfig;
use acdc_opf::opf::{solve_opf, ObjectiveKind};
use acdc_opf::scenario::OpfScenario;

fn main() -> acdc_opf::Result<()> {
    let network = read_network(fixture_path("ceder.json"))?;
    println!(
        "{:<4} {:>12} {:<10} {:>10} {:>10} {:>10} {:>8} {:>8}",
        "obj", "value", "unit", "PV kW", "wind kW", "grid kW", "inner", "ms"
    );
    for objective in ObjectiveKind::ALL {
        let scenario = OpfScenario::new(objective).with_grid_mode(GridMode::ConsumeOnly);
        let run = solve_opf(&network, &scenario, &SolverConfig::default())?;
        let s = &run.solution;
        let gen = |id| s.generator(id).map_or(0.0, |g| g.p_kw);
        println!(
            "{:<4} {:>12.6} {:<10} {:>10.5} {:>10.5} {:>10.5} {:>8} {:>8.1}",
            objective.label(),
            s.objective_value,
            s.objective_unit,
            gen(0),
            gen(1),
            s.external_grids.iter().map(|g| g.p_kw).sum::<f64>(),
            s.inner_iterations,
            s.wall_time_s * 1e3
        );
    }
    Ok(())
}
