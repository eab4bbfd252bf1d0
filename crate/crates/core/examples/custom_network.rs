//! Builds a small hybrid network in code: a 400 V AC feeder behind an
//! external grid, a grid-forming converter to a 700 V DC bus with PV and a
//! load. Validates it, writes it as a document and solves it for minimum and maximum generation.
//!
//!     cargo run --example custom_network

use acdc_opf::grid_model::{
    render_network, validate, Bus, ControlMode, Converter, CurrentKind, ExternalGrid, Generator,
    GeneratorEconomics, GridMode, Line, Load, NetworkModel, NetworkParts,
};
use acdc_opf::nlp::SolverConfig;
use acdc_opf::opf::{solve_opf, ObjectiveKind};
use acdc_opf::scenario::OpfScenario;

fn bus(id: usize, v_nominal: f64, kind: CurrentKind) -> Bus {
    Bus {
        id,
        v_nominal,
        kind,
        v_max_pu: 1.05,
        v_min_pu: 0.95,
    }
}

fn main() -> acdc_opf::Result<()> {
    let network = NetworkModel::from_parts(NetworkParts {
        name: Some("feeder with DC nanogrid".into()),
        buses: vec![
            bus(0, 0.4, CurrentKind::Ac),
            bus(1, 0.4, CurrentKind::Ac),
            bus(2, 0.7, CurrentKind::Dc),
            bus(3, 0.7, CurrentKind::Dc),
        ],
        lines: vec![
            Line {
                id: 0,
                from: 0,
                to: 1,
                length_km: 0.3,
                r_per_km: 0.4,
                x_per_km: Some(0.3),
                c_per_km: Some(80.0),
                i_max: 0.2,
                kind: CurrentKind::Ac,
            },
            Line {
                id: 1,
                from: 2,
                to: 3,
                length_km: 0.05,
                r_per_km: 0.6,
                x_per_km: None,
                c_per_km: None,
                i_max: 0.1,
                kind: CurrentKind::Dc,
            },
        ],
        converters: vec![Converter {
            id: 0,
            from: 1,
            to: 2,
            s_n: 40.0,
            efficiency: 0.97,
            control: ControlMode::GridForming,
        }],
        generators: vec![Generator {
            id: 0,
            bus: 3,
            p_nom: 15.0,
            p_min: 0.0,
            q_nom: 0.0,
            q_min: 0.0,
            economics: Some(GeneratorEconomics {
                ic: 12_000.0,
                rv: 0.0,
                mc: 150.0,
                oc: 0.002,
                cf_pct: 18.0,
                ghg: 0.04,
            }),
        }],
        loads: vec![
            Load { id: 0, bus: 1, p: 6.0, q: 2.0 },
            Load { id: 1, bus: 2, p: 12.0, q: 0.0 },
        ],
        external_grids: vec![ExternalGrid {
            id: 0,
            bus: 0,
            mode: GridMode::Either,
        }],
        ..Default::default()
    })?;

    let diagnostics = validate(&network);
    if !diagnostics.is_empty() {
        for d in diagnostics {
            eprintln!("{d}");
        }
        std::process::exit(1);
    }
    println!("{}", render_network(&network)?);

    for objective in [ObjectiveKind::H1, ObjectiveKind::H4] {
        let run = solve_opf(&network, &OpfScenario::new(objective), &SolverConfig::default())?;
        let s = &run.solution;
        println!(
            "{objective}: {:?}, PV {:.3} kW, grid {:.3} kW, losses {:.4} kW",
            s.status,
            s.generators[0].p_kw,
            s.external_grids[0].p_kw,
            s.total_losses_kw
        );
    }
    Ok(())
}
