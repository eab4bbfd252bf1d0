use acdc_opf::grid_model::{
    Bus, CurrentKind, GridMode, NetworkModel, NetworkParts,
};
use acdc_opf::io::{fixture_path, read_network};
use acdc_opf::nlp::{kkt_residual, NlpProblem, SolverConfig, SolverStatus};
use acdc_opf::opf::{solve_opf, BranchKind, EqualityRow, ObjectiveKind, OpfProblem, OpfRun};
use acdc_opf::scenario::OpfScenario;
use approx::assert_relative_eq;

fn ceder() -> NetworkModel {
    read_network(fixture_path("ceder.json")).unwrap()
}

fn scenario(objective: ObjectiveKind) -> OpfScenario {
    OpfScenario::new(objective)
        .with_storage_fraction(0.5)
        .with_grid_mode(GridMode::ConsumeOnly)
}

fn run(objective: ObjectiveKind) -> OpfRun {
    let run = solve_opf(&ceder(), &scenario(objective), &SolverConfig::default()).unwrap();
    assert_eq!(run.solution.status, SolverStatus::Converged, "{objective}");
    run
}

#[test]
fn ceder_row_counts() {
    let p = OpfProblem::assemble(&ceder(), &scenario(ObjectiveKind::H1)).unwrap();
    assert_eq!(p.active_balance_count(), 9);
    assert_eq!(p.reactive_balance_count(), 5);
    assert_eq!(p.converter_coupling_count(), 5);
    assert_eq!(p.grid_forming_count(), 3);
    let forming: Vec<usize> = p
        .equality_rows()
        .iter()
        .filter_map(|r| match r {
            EqualityRow::GridForming { bus, .. } => Some(*bus),
            _ => None,
        })
        .collect();
    assert_eq!(forming, vec![4, 5, 7]);
}

#[test]
fn h4_differs_from_h1_only_in_the_objective() {
    let h1 = OpfProblem::assemble(&ceder(), &scenario(ObjectiveKind::H1)).unwrap();
    let h4 = OpfProblem::assemble(&ceder(), &scenario(ObjectiveKind::H4)).unwrap();
    assert_eq!(h1.equality_rows(), h4.equality_rows());
    assert_eq!(h1.inequality_rows(), h4.inequality_rows());
    assert_eq!(h1.lower_bounds(), h4.lower_bounds());
    assert_eq!(h1.upper_bounds(), h4.upper_bounds());
    let x = h1.initial_point();
    assert_eq!(
        h1.objective_value(ObjectiveKind::H1, &x),
        -h4.objective_value(ObjectiveKind::H4, &x)
    );
}

#[test]
fn empty_network_gives_an_empty_problem() {
    let net = NetworkModel::from_parts(NetworkParts {
        buses: vec![Bus {
            id: 0,
            v_nominal: 0.4,
            kind: CurrentKind::Ac,
            v_max_pu: 1.05,
            v_min_pu: 0.95,
        }],
        ..Default::default()
    })
    .unwrap();
    let p = OpfProblem::assemble(&net, &OpfScenario::new(ObjectiveKind::H1)).unwrap();
    assert_eq!(p.objective_value(ObjectiveKind::H1, &p.initial_point()), 0.0);
    let run = solve_opf(&net, &OpfScenario::new(ObjectiveKind::H1), &SolverConfig::default()).unwrap();
    assert_eq!(run.solution.status, SolverStatus::Converged);
    assert_eq!(run.solution.total_generation_kw, 0.0);
    assert!(run.solution.buses.iter().all(|b| b.p_kw == 0.0));
}

#[test]
fn h2_is_zero_at_nominal_voltage() {
    let p = OpfProblem::assemble(&ceder(), &scenario(ObjectiveKind::H2)).unwrap();
    let mut x = vec![0.0; p.num_vars()];
    for &e in &p.layout().bus_e {
        x[e] = 1.0;
    }
    assert_eq!(p.objective_value(ObjectiveKind::H2, &x), 0.0);
}

#[test]
fn h1_bus4_energy_balance() {
    let run = run(ObjectiveKind::H1);
    let s = &run.solution;
    // Hand balance at the 800 V DC hub: converter deliveries in, converter
    // draws and the DC line out.
    let delivered: f64 = s.converters.iter().filter(|c| c.output_bus == 4).map(|c| c.output_kw).sum();
    let drawn: f64 = s.converters.iter().filter(|c| c.input_bus == 4).map(|c| c.input_kw).sum();
    let line = s.branches.iter().find(|b| b.kind == BranchKind::Line && b.id == 1).unwrap();
    let to_line = 5.0 + line.loss_kw;
    assert!((delivered - drawn - to_line).abs() < 1e-5, "{delivered} {drawn} {to_line}");
    assert!(run.problem.residual_active(4, &run.result.x).abs() < 1e-8);
}

#[test]
fn h1_dc_line_delivers_the_bus6_load() {
    let run = run(ObjectiveKind::H1);
    let v4 = run.solution.bus(4).unwrap().v_kv;
    let v6 = run.solution.bus(6).unwrap().v_kv;
    // Ohm's law on the 0.1 ohm DC line, kV and kA.
    let current = (v4 - v6) / 0.1;
    let delivered = v6 * current * 1000.0;
    assert!((delivered - 5.0).abs() < 1e-3, "{delivered}");
    assert!(run.problem.residual_active(6, &run.result.x).abs() < 1e-5);
}

#[test]
fn converter_2_feeds_the_battery_through_its_efficiency() {
    let run = run(ObjectiveKind::H1);
    let c = &run.solution.converters[2];
    assert_eq!((c.input_bus, c.output_bus), (4, 5));
    assert_relative_eq!(c.output_kw, 12.5, epsilon = 1e-6);
    assert_relative_eq!(c.input_kw, 12.5 / 0.86, epsilon = 1e-5);
    for i in 0..5 {
        assert!(run.problem.converter_coupling_residual(i, &run.result.x).abs() < 1e-12);
    }
}

#[test]
fn h1_totals_and_reactive_balance() {
    let run = run(ObjectiveKind::H1);
    let s = &run.solution;
    assert_relative_eq!(s.total_generation_kw, 23.81739, max_relative = 1e-3);
    assert_relative_eq!(s.total_losses_kw, s.total_generation_kw - 21.5, epsilon = 1e-6);
    assert_relative_eq!(s.total_losses_kw, 2.31739, max_relative = 1e-3);
    // The grid-following source at bus 2 absorbs the line's shunt production.
    let q2 = s.generator(2).unwrap().q_kvar.unwrap();
    assert!(q2 < 0.0 && q2 > -0.002, "{q2}");
    assert!(s.feasible);
    assert!(s.max_equality_residual_pu <= 1e-8);
    assert!(s.max_inequality_violation_pu <= 1e-8);
}

#[test]
fn h1_kkt_residuals_within_tolerance() {
    let run = run(ObjectiveKind::H1);
    let config = SolverConfig::default();
    let r = kkt_residual(&run.problem, &run.result.x, &run.result.eq_multipliers, &run.result.ineq_multipliers);
    assert!(r.equality <= config.eq_tolerance);
    assert!(r.inequality <= config.eq_tolerance);
    assert!(r.stationarity <= config.kkt_tolerance, "{r:?}");
}

#[test]
fn h3_converter_1_rating_is_active() {
    let run = run(ObjectiveKind::H3);
    let c = &run.solution.converters[1];
    assert_relative_eq!(c.input_kw, 20.0, epsilon = 1e-5);
    let row = run
        .problem
        .inequality_rows()
        .iter()
        .position(|r| *r == acdc_opf::opf::InequalityRow::ConverterRating { converter: 1 })
        .unwrap();
    assert!(run.problem.inequality_set(&run.result.x)[row].abs() < 1e-6);
    assert_relative_eq!(run.solution.objective_value, 0.003 * 20.0 + 0.008 * 3.81737, max_relative = 1e-4);
}

#[test]
fn h4_uses_every_generator_at_its_rating() {
    let run = run(ObjectiveKind::H4);
    assert_relative_eq!(run.solution.total_generation_kw, 26.34, epsilon = 1e-6);
    assert!(run.solution.external_grids[0].p_kw < 0.0);
}

#[test]
fn either_mode_solves_both_variants() {
    let s = OpfScenario::new(ObjectiveKind::H1).with_grid_mode(GridMode::Either);
    let run = solve_opf(&ceder(), &s, &SolverConfig::default()).unwrap();
    assert_eq!(run.variants, 2);
    assert_eq!(run.solution.status, SolverStatus::Converged);
}
