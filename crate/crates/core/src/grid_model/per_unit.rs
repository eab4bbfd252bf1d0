use serde::{Deserialize, Serialize};

use super::admittance::{branch_admittance, BranchRecord};
use super::{NetworkModel, NetworkParts};
use crate::error::{Error, Result};

/// Base quantities of a normalized network.
///
/// Every bus uses its own nominal voltage as voltage base, so transformers
/// and converters become ratio-1 couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerUnitSystem {
    /// kVA.
    pub s_base: f64,
    /// rad/s.
    pub omega: f64,
    /// kV, per bus.
    pub v_base: Vec<f64>,
    /// Ω, per bus: `v_base² / s_base`.
    pub z_base: Vec<f64>,
    /// For each transformer, the bus its impedance is referred to.
    pub transformer_reference: Vec<usize>,
}

impl PerUnitSystem {
    pub fn from_bases(
        s_base: f64,
        omega: f64,
        v_base: Vec<f64>,
        transformer_reference: Vec<usize>,
    ) -> Result<Self> {
        if !(s_base.is_finite() && s_base > 0.0) {
            return Err(Error::PerUnit(format!("s_base must be positive, got {s_base}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::PerUnit(format!("omega must be positive, got {omega}")));
        }
        if let Some(v) = v_base.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::PerUnit(format!("voltage base must be positive, got {v}")));
        }
        if let Some(&bus) = transformer_reference.iter().find(|&&b| b >= v_base.len()) {
            return Err(Error::PerUnit(format!("transformer reference bus {bus} does not exist")));
        }
        // kV² · 1000 / kVA = Ω
        let z_base = v_base.iter().map(|v| v * v * 1000.0 / s_base).collect();
        Ok(PerUnitSystem {
            s_base,
            omega,
            v_base,
            z_base,
            transformer_reference,
        })
    }

    pub fn z_base(&self, bus: usize) -> Result<f64> {
        self.z_base
            .get(bus)
            .copied()
            .ok_or_else(|| Error::PerUnit(format!("no voltage base for bus {bus}")))
    }

    /// Current base at `bus`, kA.
    pub fn i_base(&self, bus: usize) -> Result<f64> {
        self.v_base
            .get(bus)
            .map(|v| self.s_base / (v * 1000.0))
            .ok_or_else(|| Error::PerUnit(format!("no voltage base for bus {bus}")))
    }

    pub fn transformer_reference(&self, index: usize) -> Result<usize> {
        self.transformer_reference
            .get(index)
            .copied()
            .ok_or_else(|| Error::PerUnit(format!("no reference bus for transformer {index}")))
    }
}

fn same_voltage(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Normalizes a physical model: powers by `s_base`, voltages by the bus
/// nominal voltage, impedances by the reference bus impedance base.
///
/// Transformer impedances are referred to the endpoint whose nominal voltage
/// equals the transformer's `v_ln` (the `from` bus when both match).
pub fn per_unit_normalize(model: &NetworkModel, s_base: f64) -> Result<NetworkModel> {
    if model.is_per_unit() {
        return Err(Error::PerUnit("model is already normalized".into()));
    }
    let v_base: Vec<f64> = model.buses().iter().map(|b| b.v_nominal).collect();
    let references = model
        .transformers()
        .iter()
        .map(|t| {
            if same_voltage(t.v_ln, v_base[t.from]) {
                Ok(t.from)
            } else if same_voltage(t.v_ln, v_base[t.to]) {
                Ok(t.to)
            } else {
                Err(Error::PerUnit(format!(
                    "transformer {}: v_ln {} kV matches neither endpoint voltage ({} kV, {} kV)",
                    t.id, t.v_ln, v_base[t.from], v_base[t.to]
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let pu = PerUnitSystem::from_bases(s_base, model.omega(), v_base, references)?;

    let line_admittances = model
        .lines()
        .iter()
        .map(|l| branch_admittance(BranchRecord::Line(l), &pu))
        .collect::<Result<Vec<_>>>()?;
    let transformer_admittances = model
        .transformers()
        .iter()
        .enumerate()
        .map(|(i, t)| branch_admittance(BranchRecord::Transformer(i, t), &pu))
        .collect::<Result<Vec<_>>>()?;

    let parts = rescale(model.parts(), &pu, Direction::ToPerUnit)?;
    Ok(NetworkModel::normalized(
        parts,
        pu,
        line_admittances,
        transformer_admittances,
    ))
}

/// Inverse of [`per_unit_normalize`].
pub fn denormalize(model: &NetworkModel) -> Result<NetworkModel> {
    let pu = model
        .per_unit()
        .ok_or_else(|| Error::PerUnit("model is not normalized".into()))?;
    let parts = rescale(model.parts(), pu, Direction::ToPhysical)?;
    NetworkModel::from_parts(parts)
}

#[derive(Clone, Copy)]
enum Direction {
    ToPerUnit,
    ToPhysical,
}

impl Direction {
    /// Converts a quantity whose base is `base`.
    fn by(self, value: f64, base: f64) -> f64 {
        match self {
            Direction::ToPerUnit => value / base,
            Direction::ToPhysical => value * base,
        }
    }

    /// Converts a quantity that scales with the inverse of `base`.
    fn inverse_by(self, value: f64, base: f64) -> f64 {
        match self {
            Direction::ToPerUnit => value * base,
            Direction::ToPhysical => value / base,
        }
    }
}

fn rescale(p: &NetworkParts, pu: &PerUnitSystem, dir: Direction) -> Result<NetworkParts> {
    let sb = pu.s_base;
    let mut out = p.clone();
    for bus in &mut out.buses {
        bus.v_nominal = dir.by(bus.v_nominal, pu.v_base[bus.id]);
    }
    for line in &mut out.lines {
        let zb = pu.z_base(line.from)?;
        line.r_per_km = dir.by(line.r_per_km, zb);
        line.x_per_km = line.x_per_km.map(|x| dir.by(x, zb));
        // Capacitance scales like an admittance.
        line.c_per_km = line.c_per_km.map(|c| dir.inverse_by(c, zb));
        line.i_max = dir.by(line.i_max, pu.i_base(line.from)?);
    }
    for (index, t) in out.transformers.iter_mut().enumerate() {
        t.s_n = dir.by(t.s_n, sb);
        t.v_ln = dir.by(t.v_ln, pu.v_base[pu.transformer_reference(index)?]);
    }
    for c in &mut out.converters {
        c.s_n = dir.by(c.s_n, sb);
    }
    for g in &mut out.generators {
        g.p_nom = dir.by(g.p_nom, sb);
        g.p_min = dir.by(g.p_min, sb);
        g.q_nom = dir.by(g.q_nom, sb);
        g.q_min = dir.by(g.q_min, sb);
    }
    for l in &mut out.loads {
        l.p = dir.by(l.p, sb);
        l.q = dir.by(l.q, sb);
    }
    for s in &mut out.storages {
        s.p_stor = dir.by(s.p_stor, sb);
    }
    Ok(out)
}
