use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opf::OpfSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PowerUnit {
    W,
    #[default]
    #[serde(rename = "kW")]
    KW,
    MW,
}

impl PowerUnit {
    fn to_kw(self) -> f64 {
        match self {
            PowerUnit::W => 1e-3,
            PowerUnit::KW => 1.0,
            PowerUnit::MW => 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VoltageUnit {
    V,
    #[default]
    #[serde(rename = "kV")]
    KV,
}

impl VoltageUnit {
    fn to_kv(self) -> f64 {
        match self {
            VoltageUnit::V => 1e-3,
            VoltageUnit::KV => 1.0,
        }
    }
}

fn yes() -> bool {
    true
}

/// One measured bus. `gate_p`/`gate_v` mark whether the quantity counts
/// toward the pass verdict; ungated quantities are still reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredBus {
    pub bus: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default = "yes")]
    pub gate_p: bool,
    #[serde(default = "yes")]
    pub gate_v: bool,
}

/// Measurements taken while the microgrid ran one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSet {
    pub label: String,
    pub buses: Vec<MeasuredBus>,
    /// Bus groups whose summed power is compared (and gated) as one value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub power_groups: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    pub format_version: u32,
    #[serde(default)]
    pub power_unit: PowerUnit,
    #[serde(default)]
    pub voltage_unit: VoltageUnit,
    pub sets: Vec<MeasurementSet>,
}

impl MeasurementFile {
    /// The set labelled `label` (case-insensitive), converted to kW and kV.
    pub fn set(&self, label: &str) -> Option<MeasurementSet> {
        self.sets
            .iter()
            .find(|s| s.label.eq_ignore_ascii_case(label))
            .map(|s| self.normalized(s))
    }

    /// Every set, converted to kW and kV.
    pub fn normalized_sets(&self) -> Vec<MeasurementSet> {
        self.sets.iter().map(|s| self.normalized(s)).collect()
    }

    fn normalized(&self, set: &MeasurementSet) -> MeasurementSet {
        let kp = self.power_unit.to_kw();
        let kv = self.voltage_unit.to_kv();
        MeasurementSet {
            label: set.label.clone(),
            buses: set
                .buses
                .iter()
                .map(|b| MeasuredBus {
                    p: b.p.map(|p| p * kp),
                    v: b.v.map(|v| v * kv),
                    ..b.clone()
                })
                .collect(),
            power_groups: set.power_groups.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Net active injection, kW.
    Power,
    /// Voltage magnitude, kV.
    Voltage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Largest relative error (%) that passes.
    pub threshold_pct: f64,
    /// Largest absolute error (kW or kV) that passes where the measured
    /// value is zero and a relative error is undefined.
    pub absolute_tolerance: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            threshold_pct: 3.0,
            absolute_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub bus: usize,
    pub quantity: Quantity,
    pub simulated: f64,
    pub measured: f64,
    /// Percent when `relative`, otherwise absolute in kW or kV.
    pub error: f64,
    pub relative: bool,
    pub gated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub buses: Vec<usize>,
    pub simulated: f64,
    pub measured: f64,
    pub error: f64,
    pub relative: bool,
}

/// Simulated against measured values for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub label: String,
    pub rows: Vec<ErrorRow>,
    pub groups: Vec<GroupRow>,
    /// Maxima over gated entries with a nonzero measurement, percent.
    pub max_voltage_error_pct: f64,
    pub max_power_error_pct: f64,
    /// Maxima over gated entries measured as zero, kW and kV.
    pub max_power_abs_error_kw: f64,
    pub max_voltage_abs_error_kv: f64,
    pub threshold_pct: f64,
    pub absolute_tolerance: f64,
    pub pass: bool,
}

impl ErrorTable {
    /// Gated rows, in bus order.
    pub fn gated(&self) -> impl Iterator<Item = &ErrorRow> {
        self.rows.iter().filter(|r| r.gated)
    }
}

fn error_of(simulated: f64, measured: f64) -> (f64, bool) {
    if measured == 0.0 {
        ((simulated - measured).abs(), false)
    } else {
        ((simulated - measured).abs() / measured.abs() * 100.0, true)
    }
}

/// Compares a solution with one measurement set (already in kW and kV, see
/// [`MeasurementFile::set`]).
///
/// `label` is the scenario the solution was computed for; it must match the
/// set's label. Errors are relative (`|sim − meas| / |meas|`, percent) unless
/// the measurement is zero, where the absolute error is used.
pub fn compare_measurements(
    solution: &OpfSolution,
    label: &str,
    set: &MeasurementSet,
    options: &CompareOptions,
) -> Result<ErrorTable> {
    if !set.label.eq_ignore_ascii_case(label) {
        return Err(Error::Compare(format!(
            "measurement set {:?} does not match scenario {label:?}",
            set.label
        )));
    }
    let lookup = |bus: usize| {
        solution
            .bus(bus)
            .ok_or_else(|| Error::Compare(format!("measured bus {bus} is not in the solution")))
    };

    let mut rows = Vec::new();
    for m in &set.buses {
        let sim = lookup(m.bus)?;
        if let Some(p) = m.p {
            let (error, relative) = error_of(sim.p_kw, p);
            rows.push(ErrorRow {
                bus: m.bus,
                quantity: Quantity::Power,
                simulated: sim.p_kw,
                measured: p,
                error,
                relative,
                gated: m.gate_p,
            });
        }
        if let Some(v) = m.v {
            let (error, relative) = error_of(sim.v_kv, v);
            rows.push(ErrorRow {
                bus: m.bus,
                quantity: Quantity::Voltage,
                simulated: sim.v_kv,
                measured: v,
                error,
                relative,
                gated: m.gate_v,
            });
        }
    }
    rows.sort_by_key(|r| (r.bus, r.quantity));

    let mut groups = Vec::new();
    for buses in &set.power_groups {
        let mut simulated = 0.0;
        let mut measured = 0.0;
        for &bus in buses {
            simulated += lookup(bus)?.p_kw;
            measured += set
                .buses
                .iter()
                .find(|m| m.bus == bus)
                .and_then(|m| m.p)
                .ok_or_else(|| Error::Compare(format!("power group bus {bus} has no power measurement")))?;
        }
        let (error, relative) = error_of(simulated, measured);
        groups.push(GroupRow {
            buses: buses.clone(),
            simulated,
            measured,
            error,
            relative,
        });
    }

    let mut max_voltage_error_pct = 0.0f64;
    let mut max_power_error_pct = 0.0f64;
    let mut max_power_abs_error_kw = 0.0f64;
    let mut max_voltage_abs_error_kv = 0.0f64;
    let gated_power = rows
        .iter()
        .filter(|r| r.gated && r.quantity == Quantity::Power)
        .map(|r| (r.error, r.relative))
        .chain(groups.iter().map(|g| (g.error, g.relative)));
    for (error, relative) in gated_power {
        if relative {
            max_power_error_pct = max_power_error_pct.max(error);
        } else {
            max_power_abs_error_kw = max_power_abs_error_kw.max(error);
        }
    }
    for r in rows.iter().filter(|r| r.gated && r.quantity == Quantity::Voltage) {
        if r.relative {
            max_voltage_error_pct = max_voltage_error_pct.max(r.error);
        } else {
            max_voltage_abs_error_kv = max_voltage_abs_error_kv.max(r.error);
        }
    }
    let pass = max_voltage_error_pct <= options.threshold_pct
        && max_power_error_pct <= options.threshold_pct
        && max_power_abs_error_kw <= options.absolute_tolerance
        && max_voltage_abs_error_kv <= options.absolute_tolerance;

    Ok(ErrorTable {
        label: set.label.clone(),
        rows,
        groups,
        max_voltage_error_pct,
        max_power_error_pct,
        max_power_abs_error_kw,
        max_voltage_abs_error_kv,
        threshold_pct: options.threshold_pct,
        absolute_tolerance: options.absolute_tolerance,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::CurrentKind;
    use crate::nlp::{KktResiduals, SolverStatus};
    use crate::opf::{BusResult, ObjectiveKind};

    fn solution(buses: &[(f64, f64)]) -> OpfSolution {
        OpfSolution {
            objective: ObjectiveKind::H1,
            objective_value: 0.0,
            objective_unit: "kW".into(),
            status: SolverStatus::Converged,
            feasible: true,
            residuals: KktResiduals::default(),
            max_equality_residual_pu: 0.0,
            max_inequality_violation_pu: 0.0,
            buses: buses
                .iter()
                .enumerate()
                .map(|(id, &(p, v))| BusResult {
                    id,
                    kind: CurrentKind::Dc,
                    p_kw: p,
                    q_kvar: None,
                    v_kv: v,
                    v_pu: v,
                    angle_rad: 0.0,
                })
                .collect(),
            generators: vec![],
            external_grids: vec![],
            converters: vec![],
            branches: vec![],
            total_generation_kw: 0.0,
            total_load_kw: 0.0,
            total_losses_kw: 0.0,
            series_losses_kw: 0.0,
            converter_losses_kw: 0.0,
            outer_iterations: 0,
            inner_iterations: 0,
            wall_time_s: 0.0,
            message: None,
        }
    }

    fn measured(bus: usize, p: f64, v: f64) -> MeasuredBus {
        MeasuredBus {
            bus,
            p: Some(p),
            v: Some(v),
            gate_p: true,
            gate_v: true,
        }
    }

    #[test]
    fn voltage_error_example() {
        let s = solution(&[(19.7545, 0.62046)]);
        let set = MeasurementSet {
            label: "H1".into(),
            buses: vec![measured(0, 19.75, 0.612)],
            power_groups: vec![],
        };
        let t = compare_measurements(&s, "h1", &set, &CompareOptions::default()).unwrap();
        // (0.62046 - 0.612) / 0.612
        let expected = (0.62046 - 0.612) / 0.612 * 100.0;
        assert!((t.max_voltage_error_pct - expected).abs() < 1e-12);
        assert!((t.max_voltage_error_pct - 1.38).abs() < 0.01);
        assert!(t.pass);
    }

    #[test]
    fn identical_values_give_zero_errors() {
        let s = solution(&[(1.0, 0.4), (0.0, 0.8)]);
        let set = MeasurementSet {
            label: "H1".into(),
            buses: vec![measured(0, 1.0, 0.4), measured(1, 0.0, 0.8)],
            power_groups: vec![vec![0, 1]],
        };
        let t = compare_measurements(&s, "H1", &set, &CompareOptions::default()).unwrap();
        assert!(t.rows.iter().all(|r| r.error == 0.0));
        assert_eq!(t.groups[0].error, 0.0);
        assert!(t.pass);
        // zero measurement falls back to absolute error
        assert!(!t.rows.iter().find(|r| r.bus == 1 && r.quantity == Quantity::Power).unwrap().relative);
    }

    #[test]
    fn bus_order_and_units_do_not_matter() {
        let s = solution(&[(2.0, 0.40), (-1.0, 0.81)]);
        let file = MeasurementFile {
            format_version: 1,
            power_unit: PowerUnit::W,
            voltage_unit: VoltageUnit::V,
            sets: vec![MeasurementSet {
                label: "H1".into(),
                buses: vec![measured(1, -1010.0, 800.0), measured(0, 2100.0, 404.0)],
                power_groups: vec![],
            }],
        };
        let kw = MeasurementSet {
            label: "H1".into(),
            buses: vec![measured(0, 2.1, 0.404), measured(1, -1.01, 0.8)],
            power_groups: vec![],
        };
        let opts = CompareOptions::default();
        let a = compare_measurements(&s, "H1", &file.set("h1").unwrap(), &opts).unwrap();
        let b = compare_measurements(&s, "H1", &kw, &opts).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!((x.bus, x.quantity), (y.bus, y.quantity));
            assert!((x.error - y.error).abs() < 1e-9);
        }
        assert!((a.max_power_error_pct - b.max_power_error_pct).abs() < 1e-9);
    }

    #[test]
    fn ungated_rows_do_not_fail_the_table() {
        let s = solution(&[(10.0, 0.5)]);
        let mut m = measured(0, 10.0, 0.6);
        m.gate_v = false;
        let set = MeasurementSet {
            label: "H1".into(),
            buses: vec![m],
            power_groups: vec![],
        };
        let t = compare_measurements(&s, "H1", &set, &CompareOptions::default()).unwrap();
        assert!(t.pass);
        assert_eq!(t.max_voltage_error_pct, 0.0);
        assert!(t.rows[1].error > 16.0);
    }

    #[test]
    fn missing_bus_and_label_mismatch_are_errors() {
        let s = solution(&[(0.0, 1.0)]);
        let set = MeasurementSet {
            label: "H1".into(),
            buses: vec![measured(4, 0.0, 1.0)],
            power_groups: vec![],
        };
        let opts = CompareOptions::default();
        assert!(compare_measurements(&s, "H1", &set, &opts).is_err());
        let set = MeasurementSet {
            label: "H2".into(),
            buses: vec![],
            power_groups: vec![],
        };
        assert!(compare_measurements(&s, "H1", &set, &opts).is_err());
    }
}
