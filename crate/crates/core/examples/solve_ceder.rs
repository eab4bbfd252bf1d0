//! Solves the bundled CEDER microgrid for minimum losses and prints the bus
//! table.
//!
//!     cargo run --example solve_ceder

use acdc_opf::grid_model::GridMode;
use acdc_opf::io::{fixture_path, read_network, render_solution, ReportFormat};
use acdc_opf::nlp::SolverConfig;
use acdc_opf::opf::{solve_opf, ObjectiveKind};
use acdc_opf::scenario::OpfScenario;

fn main() -> acdc_opf::Result<()> {
    let network = read_network(fixture_path("ceder.json"))?;
    let scenario = OpfScenario::new(ObjectiveKind::H1)
        .with_storage_fraction(0.5)
        .with_grid_mode(GridMode::ConsumeOnly);
    let run = solve_opf(&network, &scenario, &SolverConfig::default())?;
    print!("{}", render_solution(&run.solution, ReportFormat::Text)?);

    println!();
    for c in &run.solution.converters {
        println!(
            "converter {}: {} -> {}  in {:.5} kW  out {:.5} kW  loss {:.5} kW",
            c.id, c.input_bus, c.output_bus, c.input_kw, c.output_kw, c.loss_kw
        );
    }
    Ok(())
}
