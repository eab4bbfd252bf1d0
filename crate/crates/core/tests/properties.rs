use acdc_opf::grid_model::{
    denormalize, parse_network, per_unit_normalize, render_network, Bus, ControlMode, Converter, CurrentKind,
    ExternalGrid, Generator, GridMode, Line, Load, NetworkModel, NetworkParts,
};
use acdc_opf::io::{
    compare_measurements, fixture_path, read_economics, read_network, CompareOptions, MeasuredBus, MeasurementFile,
    MeasurementSet, PowerUnit, VoltageUnit,
};
use acdc_opf::kpi::{compute_kpis, discounted_annuity, EconomicModel, Payback};
use acdc_opf::nlp::{function_gradient, FunctionId, NlpProblem, SolverConfig, SolverStatus};
use acdc_opf::opf::{solve_opf, ObjectiveKind, OpfProblem};
use acdc_opf::scenario::{flexibility_income, OpfScenario};
use proptest::prelude::*;

fn ceder() -> NetworkModel {
    read_network(fixture_path("ceder.json")).unwrap()
}

fn econ() -> EconomicModel {
    read_economics(fixture_path("ceder-econ.json")).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// CEDER with loads, line lengths and the power base rescaled.
fn perturbed(load_scale: f64, length_scale: f64, s_base: f64) -> NetworkModel {
    let mut parts = ceder().to_parts();
    parts.s_base = s_base;
    for l in &mut parts.loads {
        l.p *= load_scale;
        l.q *= load_scale;
    }
    for l in &mut parts.lines {
        l.length_km *= length_scale;
    }
    NetworkModel::from_parts(parts).unwrap()
}

fn eval(problem: &OpfProblem, id: FunctionId, x: &[f64]) -> f64 {
    match id {
        FunctionId::Objective => NlpProblem::objective(problem, x),
        FunctionId::Equality(j) => problem.equality(j, x),
        FunctionId::Inequality(j) => problem.inequality(j, x),
    }
}

/// Two DC buses joined by a line: a generator on one, a load on the other.
fn dc_pair(load_kw: f64, r_ohm_per_km: f64) -> NetworkModel {
    let bus = |id| Bus {
        id,
        v_nominal: 0.8,
        kind: CurrentKind::Dc,
        v_max_pu: 1.05,
        v_min_pu: 0.95,
    };
    NetworkModel::from_parts(NetworkParts {
        buses: vec![
            bus(0),
            bus(1),
            Bus {
                id: 2,
                v_nominal: 0.4,
                kind: CurrentKind::Ac,
                v_max_pu: 1.05,
                v_min_pu: 0.95,
            },
        ],
        lines: vec![Line {
            id: 0,
            from: 0,
            to: 1,
            length_km: 0.1,
            r_per_km: r_ohm_per_km,
            x_per_km: None,
            c_per_km: None,
            i_max: 1.0,
            kind: CurrentKind::Dc,
        }],
        converters: vec![Converter {
            id: 0,
            from: 2,
            to: 0,
            s_n: 50.0,
            efficiency: 0.98,
            control: ControlMode::GridForming,
        }],
        generators: vec![Generator {
            id: 0,
            bus: 1,
            p_nom: 10.0,
            p_min: 0.0,
            q_nom: 0.0,
            q_min: 0.0,
            economics: None,
        }],
        loads: vec![Load {
            id: 0,
            bus: 0,
            p: load_kw,
            q: 0.0,
        }],
        external_grids: vec![ExternalGrid {
            id: 0,
            bus: 2,
            mode: GridMode::SupplyOnly,
        }],
        ..Default::default()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn per_unit_round_trip(load in 0.1f64..3.0, length in 0.2f64..5.0, s_base in 10.0f64..1000.0) {
        let net = perturbed(load, length, s_base);
        let back = denormalize(&per_unit_normalize(&net, s_base).unwrap()).unwrap();
        let (a, b) = (net.to_parts(), back.to_parts());
        for (x, y) in a.loads.iter().zip(&b.loads) {
            prop_assert!(rel_close(x.p, y.p, 1e-14) && rel_close(x.q, y.q, 1e-14));
        }
        for (x, y) in a.lines.iter().zip(&b.lines) {
            prop_assert!(rel_close(x.r_per_km, y.r_per_km, 1e-14));
            prop_assert!(rel_close(x.i_max, y.i_max, 1e-14));
        }
        for (x, y) in a.converters.iter().zip(&b.converters) {
            prop_assert!(rel_close(x.s_n, y.s_n, 1e-14));
        }
        for (x, y) in a.generators.iter().zip(&b.generators) {
            prop_assert!(rel_close(x.p_nom, y.p_nom, 1e-14) && rel_close(x.q_min, y.q_min, 1e-14));
        }
    }

    #[test]
    fn document_round_trip(load in 0.1f64..3.0, length in 0.2f64..5.0) {
        let net = perturbed(load, length, 100.0);
        let text = render_network(&net).unwrap();
        let again = parse_network(&text).unwrap();
        prop_assert_eq!(&net, &again);
        prop_assert_eq!(render_network(&again).unwrap(), text);
    }

    #[test]
    fn dual_gradients_match_finite_differences(seed in any::<u64>(), objective in 0usize..4) {
        let kind = ObjectiveKind::ALL[objective];
        let problem = OpfProblem::assemble(&ceder(), &OpfScenario::new(kind)).unwrap();
        let (lo, hi) = (problem.lower_bounds(), problem.upper_bounds());
        let mut state = seed;
        let x: Vec<f64> = lo.iter().zip(&hi).map(|(&l, &u)| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let t = (state >> 11) as f64 / (1u64 << 53) as f64;
            let (l, u) = (l.max(-2.0), u.min(2.0));
            l + t * (u - l)
        }).collect();
        let ids = std::iter::once(FunctionId::Objective)
            .chain((0..problem.num_eq()).map(FunctionId::Equality))
            .chain((0..problem.num_ineq()).map(FunctionId::Inequality));
        for id in ids {
            let exact = function_gradient(&problem, id, &x);
            let mut p = x.clone();
            for i in 0..x.len() {
                let h = 1e-6 * (1.0 + x[i].abs());
                p[i] = x[i] + h;
                let up = eval(&problem, id, &p);
                p[i] = x[i] - h;
                let down = eval(&problem, id, &p);
                p[i] = x[i];
                let fd = (up - down) / (2.0 * h);
                prop_assert!((exact[i] - fd).abs() <= 1e-6 * exact[i].abs().max(1.0),
                    "{id} d/dx{i}: {} vs {fd}", exact[i]);
            }
        }
    }

    #[test]
    fn annuity_matches_closed_form(rate_pct in 0.1f64..15.0, years in 0u32..60) {
        let r = rate_pct / 100.0;
        let closed = (1.0 - (1.0 + r).powi(-(years as i32))) / r;
        prop_assert!(rel_close(discounted_annuity(r, years), closed, 1e-12));
    }

    #[test]
    fn flexibility_income_is_bilinear(price in 0.0f64..500.0, power in 0.0f64..100.0, k in 0.0f64..4.0) {
        let base = flexibility_income(price, power, 1.0, 365.0);
        prop_assert!(rel_close(flexibility_income(price * k, power, 1.0, 365.0), k * base, 1e-12));
        prop_assert!(rel_close(flexibility_income(price, power * k, 1.0, 365.0), k * base, 1e-12));
        prop_assert_eq!(flexibility_income(price, power, 0.0, 365.0), 0.0);
    }

    #[test]
    fn kpi_identities(ep in 0.01f64..0.6, rate in 0.0f64..8.0, ic in 0.0f64..400_000.0, fi in 0.0f64..20_000.0) {
        let net = ceder();
        let mut e = econ();
        e.ep = ep;
        e.discount_rate_pct = rate;
        e.ic = ic;
        e.fi = fi;
        let r = compute_kpis(&net, &e).unwrap();
        let energy = r.kpi1_kwh;
        let lhs = r.kpi8.unwrap() * r.annuity * energy;
        prop_assert!(rel_close(lhs, r.kpi6, 1e-12));
        prop_assert_eq!(r.kpi7 == Payback::Never, r.kpi5 < r.kpi6);
        if let Payback::Years(n) = r.kpi7 {
            prop_assert!(n >= 1 && n <= e.useful_life_years);
        }
    }

    #[test]
    fn comparison_ignores_bus_order_and_units(shift in 0usize..9, noise in -0.05f64..0.05) {
        let run = solve_opf(&ceder(), &OpfScenario::new(ObjectiveKind::H4).with_grid_mode(GridMode::ConsumeOnly), &SolverConfig::default()).unwrap();
        let buses: Vec<MeasuredBus> = run.solution.buses.iter().map(|b| MeasuredBus {
            bus: b.id,
            p: Some(b.p_kw * (1.0 + noise)),
            v: Some(b.v_kv * (1.0 - noise)),
            gate_p: true,
            gate_v: true,
        }).collect();
        let set = MeasurementSet { label: "H4".into(), buses: buses.clone(), power_groups: Vec::new() };
        // Same data in W and V, rotated.
        let mut rotated: Vec<MeasuredBus> = buses.iter().map(|m| MeasuredBus {
            p: m.p.map(|p| p * 1000.0),
            v: m.v.map(|v| v * 1000.0),
            ..m.clone()
        }).collect();
        rotated.rotate_left(shift);
        let file = MeasurementFile {
            format_version: 1,
            power_unit: PowerUnit::W,
            voltage_unit: VoltageUnit::V,
            sets: vec![MeasurementSet { label: "h4".into(), buses: rotated, power_groups: Vec::new() }],
        };
        let other = file.set("H4").unwrap();
        let a = compare_measurements(&run.solution, "H4", &set, &CompareOptions::default()).unwrap();
        let b = compare_measurements(&run.solution, "H4", &other, &CompareOptions::default()).unwrap();
        prop_assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert_eq!((x.bus, x.quantity, x.relative), (y.bus, y.quantity, y.relative));
            prop_assert!((x.error - y.error).abs() <= 1e-9 * x.error.abs().max(1.0));
        }
        prop_assert_eq!(a.pass, b.pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn converged_solutions_conserve_energy(load in 1.0f64..30.0, r in 0.05f64..2.0) {
        let net = dc_pair(load, r);
        let run = solve_opf(&net, &OpfScenario::new(ObjectiveKind::H1), &SolverConfig::default()).unwrap();
        prop_assert_eq!(run.solution.status, SolverStatus::Converged);
        let s = &run.solution;
        let tol = 1e-6 * net.s_base();
        prop_assert!((s.total_losses_kw - s.series_losses_kw - s.converter_losses_kw).abs() <= tol);
        prop_assert!(s.total_losses_kw >= -tol);
        for b in s.buses.iter().filter(|b| b.kind == CurrentKind::Dc) {
            prop_assert!(b.q_kvar.is_none());
            prop_assert_eq!(b.angle_rad, 0.0);
        }
        prop_assert!(s.max_equality_residual_pu <= 1e-8);
    }
}

#[test]
fn solves_are_bit_identical() {
    let net = ceder();
    let s = OpfScenario::new(ObjectiveKind::H1).with_grid_mode(GridMode::ConsumeOnly);
    let a = solve_opf(&net, &s, &SolverConfig::default()).unwrap();
    let b = solve_opf(&net, &s, &SolverConfig::default()).unwrap();
    assert!(a.result.x.iter().zip(&b.result.x).all(|(p, q)| p.to_bits() == q.to_bits()));
    assert_eq!(a.result.inner_iterations, b.result.inner_iterations);
}
