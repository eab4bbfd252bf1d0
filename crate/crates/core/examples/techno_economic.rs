//! Evaluates the eight KPIs for the four economic scenarios and shows how
//! the payback period reacts to the electricity price.
//!
//!     cargo run --example techno_economic

use acdc_opf::io::{fixture_path, read_economics, read_network, render_kpis, KpiRow, ReportFormat};
use acdc_opf::kpi::{compute_kpis, payback};
use acdc_opf::scenario::{apply_economic_scenario, EconomicScenario, EconomicScenarioKind};

fn main() -> acdc_opf::Result<()> {
    let network = read_network(fixture_path("ceder.json"))?;
    let econ = read_economics(fixture_path("ceder-econ.json"))?;
    let market = econ.flexibility_market.expect("the bundled economics define a market");

    let mut rows = Vec::new();
    for kind in EconomicScenarioKind::ALL {
        let (e, n) = apply_economic_scenario(&econ, &network, &EconomicScenario { kind, market })?;
        rows.push(KpiRow {
            scenario: kind.label().into(),
            report: compute_kpis(&n, &e)?,
        });
    }
    print!("{}", render_kpis(&rows, ReportFormat::Text)?);

    println!("\nbaseline payback against the selling price:");
    for price in [0.10, 0.145, 0.20, 0.25, 0.30] {
        let mut e = econ.clone();
        e.ep = price;
        println!("  {price:.3} EUR/kWh -> {}", payback(&network, &e)?);
    }
    Ok(())
}
