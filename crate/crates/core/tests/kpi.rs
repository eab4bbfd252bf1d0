use acdc_opf::io::{fixture_path, read_economics, read_network};
use acdc_opf::kpi::{compute_kpis, discounted_annuity, KpiReport, Payback};
use acdc_opf::scenario::{apply_economic_scenario, EconomicScenario, EconomicScenarioKind};
use approx::assert_relative_eq;

fn report(kind: EconomicScenarioKind) -> KpiReport {
    let net = read_network(fixture_path("ceder.json")).unwrap();
    let econ = read_economics(fixture_path("ceder-econ.json")).unwrap();
    let market = econ.flexibility_market.unwrap();
    let (e, n) = apply_economic_scenario(&econ, &net, &EconomicScenario { kind, market }).unwrap();
    compute_kpis(&n, &e).unwrap()
}

#[test]
fn technical_kpis_match_hand_arithmetic() {
    let r = report(EconomicScenarioKind::Baseline);
    // Oracle: nominal power x capacity factor x 8760 h per generator.
    let pv = 22.14 * 0.335 * 8760.0;
    let wind = 4.2 * 0.42 * 8760.0;
    assert_relative_eq!(r.kpi1_kwh, pv + wind, max_relative = 1e-12);
    assert_relative_eq!(r.kpi2_kg_co2, pv * 0.035 + wind * 0.00464, max_relative = 1e-12);
    assert_relative_eq!(r.kpi3_pct.unwrap(), (22.14 * 0.335 + 4.2 * 0.42) / 9.0 * 100.0, max_relative = 1e-12);
    assert_eq!(r.kpi4_kw, 25.0);
}

#[test]
fn technical_kpis_do_not_depend_on_the_economic_scenario() {
    let base = report(EconomicScenarioKind::Baseline);
    for kind in EconomicScenarioKind::ALL {
        let r = report(kind);
        assert_eq!((r.kpi1_kwh, r.kpi2_kg_co2, r.kpi3_pct), (base.kpi1_kwh, base.kpi2_kg_co2, base.kpi3_pct));
    }
}

#[test]
fn removing_the_battery_saves_its_discounted_cost() {
    let delta = report(EconomicScenarioKind::Baseline).kpi6 - report(EconomicScenarioKind::NoBattery).kpi6;
    let oracle = 59_000.0 - 3_400.0 / 1.01f64.powi(25);
    assert_relative_eq!(delta, oracle, epsilon = 1e-6);
    assert!((delta - 56_348.79).abs() < 0.01);
}

#[test]
fn flexibility_scenarios() {
    let flex = report(EconomicScenarioKind::BatteryFlex);
    assert_eq!((flex.flexibility_income * 100.0).round() / 100.0, 2_045.55);
    let base = report(EconomicScenarioKind::Baseline);
    assert_relative_eq!(flex.kpi5 - base.kpi5, discounted_annuity(0.01, 25) * flex.flexibility_income, epsilon = 1e-6);
    assert_eq!(flex.kpi6, base.kpi6);
    assert_eq!(base.kpi7, Payback::Never);
    assert_eq!(report(EconomicScenarioKind::VbFlex).kpi7, Payback::Years(17));
    assert_relative_eq!(base.kpi5, 256_824.77, max_relative = 1e-4);
}
