use std::fmt;

use serde::{Deserialize, Serialize};

use super::records::ControlMode;
use super::NetworkModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// The buses do not form a single component (converters count as edges).
    Disconnected,
    /// A component has neither a grid-forming converter output nor an
    /// external grid.
    IslandWithoutReference,
    ConverterSelfLoop,
    /// A line joins buses with different nominal voltages.
    LineVoltageMismatch,
    /// A transformer's `v_ln` matches neither endpoint voltage.
    TransformerReference,
    /// Two grid-forming converters impose voltage on the same bus.
    ConflictingGridForming,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Structural checks that decide whether an OPF on `model` is well posed.
/// An empty list means the model is solvable.
pub fn validate(model: &NetworkModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = model.buses().len();
    let mut parent: Vec<usize> = (0..n).collect();

    for line in model.lines() {
        union(&mut parent, line.from, line.to);
        let (vf, vt) = (model.buses()[line.from].v_nominal, model.buses()[line.to].v_nominal);
        if (vf - vt).abs() > 1e-9 * vf.max(vt) {
            out.push(Diagnostic {
                kind: DiagnosticKind::LineVoltageMismatch,
                message: format!(
                    "line {} joins buses {} ({vf} kV) and {} ({vt} kV) with different nominal voltages",
                    line.id, line.from, line.to
                ),
            });
        }
    }
    for t in model.transformers() {
        union(&mut parent, t.from, t.to);
        if !model.is_per_unit() {
            let matches = |bus: usize| {
                let v = model.buses()[bus].v_nominal;
                (v - t.v_ln).abs() <= 1e-9 * v.max(t.v_ln)
            };
            if !matches(t.from) && !matches(t.to) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::TransformerReference,
                    message: format!(
                        "transformer {}: v_ln {} kV matches neither endpoint voltage",
                        t.id, t.v_ln
                    ),
                });
            }
        }
    }
    for c in model.converters() {
        if c.from == c.to {
            out.push(Diagnostic {
                kind: DiagnosticKind::ConverterSelfLoop,
                message: format!("converter {}: endpoints are the same bus {}", c.id, c.from),
            });
        } else {
            union(&mut parent, c.from, c.to);
        }
    }

    let mut formed = vec![false; n];
    for c in model.converters() {
        if c.control == ControlMode::GridForming && c.from != c.to {
            if formed[c.to] {
                out.push(Diagnostic {
                    kind: DiagnosticKind::ConflictingGridForming,
                    message: format!(
                        "converter {}: bus {} already has a grid-forming converter",
                        c.id, c.to
                    ),
                });
            }
            formed[c.to] = true;
        }
    }

    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut components: Vec<usize> = roots.clone();
    components.sort_unstable();
    components.dedup();
    if components.len() > 1 {
        out.push(Diagnostic {
            kind: DiagnosticKind::Disconnected,
            message: format!("network is not connected: {} islands", components.len()),
        });
    }
    for &root in &components {
        let buses: Vec<usize> = (0..n).filter(|&i| roots[i] == root).collect();
        let has_reference = buses.iter().any(|&b| formed[b])
            || model
                .external_grids()
                .iter()
                .any(|g| roots[g.bus] == root);
        if !has_reference {
            out.push(Diagnostic {
                kind: DiagnosticKind::IslandWithoutReference,
                message: format!("island without voltage reference: buses {buses:?}"),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::{
        Bus, Converter, CurrentKind, ExternalGrid, GridMode, Line, NetworkParts,
    };

    fn bus(id: usize, kind: CurrentKind) -> Bus {
        Bus {
            id,
            v_nominal: 0.8,
            kind,
            v_max_pu: 1.05,
            v_min_pu: 0.95,
        }
    }

    fn converter(id: usize, from: usize, to: usize, control: ControlMode) -> Converter {
        Converter {
            id,
            from,
            to,
            s_n: 10.0,
            efficiency: 0.98,
            control,
        }
    }

    fn parts() -> NetworkParts {
        NetworkParts {
            buses: vec![
                bus(0, CurrentKind::Ac),
                bus(1, CurrentKind::Dc),
                bus(2, CurrentKind::Dc),
            ],
            lines: vec![Line {
                id: 0,
                from: 1,
                to: 2,
                length_km: 0.1,
                r_per_km: 0.5,
                x_per_km: None,
                c_per_km: None,
                i_max: 1.0,
                kind: CurrentKind::Dc,
            }],
            converters: vec![converter(0, 0, 1, ControlMode::GridForming)],
            external_grids: vec![ExternalGrid {
                id: 0,
                bus: 0,
                mode: GridMode::Either,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn referenced_connected_network_is_clean() {
        let model = NetworkModel::from_parts(parts()).unwrap();
        assert!(validate(&model).is_empty());
    }

    #[test]
    fn isolated_dc_island_lacks_reference() {
        let mut p = parts();
        p.converters.clear();
        let diags = validate(&NetworkModel::from_parts(p).unwrap());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::Disconnected));
        let island = diags
            .iter()
            .find(|d| d.kind == DiagnosticKind::IslandWithoutReference)
            .unwrap();
        assert!(island.message.contains("island without voltage reference"));
        assert!(island.message.contains("[1, 2]"));
    }

    #[test]
    fn converter_self_loop_is_reported() {
        let mut p = parts();
        p.converters.push(converter(1, 2, 2, ControlMode::GridFollowing));
        let diags = validate(&NetworkModel::from_parts(p).unwrap());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::ConverterSelfLoop);
    }

    #[test]
    fn two_forming_converters_on_one_bus() {
        let mut p = parts();
        p.converters.push(converter(1, 2, 1, ControlMode::GridForming));
        let diags = validate(&NetworkModel::from_parts(p).unwrap());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::ConflictingGridForming);
    }
}
