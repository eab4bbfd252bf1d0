//! Compares the solved scenarios with the bundled field measurements.
//!
//!     cargo run --example measurement_validation

use acdc_opf::io::{
    compare_measurements, fixture_path, read_measurements, read_network, read_scenarios, render_report,
    CompareOptions, Report, ReportFormat,
};
use acdc_opf::nlp::SolverConfig;
use acdc_opf::opf::solve_opf;

fn main() -> acdc_opf::Result<()> {
    let network = read_network(fixture_path("ceder.json"))?;
    let scenarios = read_scenarios(fixture_path("ceder-scenarios.json"))?;
    let measurements = read_measurements(fixture_path("ceder-measurements.json"))?;

    let mut tables = Vec::new();
    for set in measurements.normalized_sets() {
        let Some(scenario) = scenarios.opf_scenario(&set.label) else {
            eprintln!("no scenario for {}", set.label);
            continue;
        };
        let run = solve_opf(&network, scenario, &SolverConfig::default())?;
        tables.push(compare_measurements(&run.solution, &set.label, &set, &CompareOptions::default())?);
    }
    print!("{}", render_report(Report::Comparison(&tables), ReportFormat::Text)?);
    Ok(())
}
