//! Network description: records, parsing, per-unit normalization, branch
//! admittances and structural validation.

mod admittance;
pub(crate) mod document;
mod per_unit;
mod records;
mod validate;

use std::collections::{BTreeSet, HashSet};

pub use admittance::{
    branch_admittance, line_impedance, transformer_impedance, BranchAdmittance, BranchImpedance,
    BranchRecord,
};
pub use document::{parse_network, render_network, NetworkDocument, NETWORK_FORMAT_VERSION};
pub use per_unit::{denormalize, per_unit_normalize, PerUnitSystem};
pub use records::{
    Bus, ControlMode, Converter, CurrentKind, ExternalGrid, Generator, GeneratorEconomics,
    GridMode, Line, Load, Storage, Transformer,
};
pub use validate::{validate, Diagnostic, DiagnosticKind};

use crate::error::{Error, Result};

/// Default angular frequency, rad/s (50 Hz).
pub const DEFAULT_OMEGA: f64 = 100.0 * std::f64::consts::PI;

/// Default power base, kVA.
pub const DEFAULT_S_BASE: f64 = 100.0;

/// Raw, unchecked network content. Build a [`NetworkModel`] from it with
/// [`NetworkModel::from_parts`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParts {
    pub name: Option<String>,
    /// kVA.
    pub s_base: f64,
    /// rad/s.
    pub omega: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub transformers: Vec<Transformer>,
    pub converters: Vec<Converter>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
    pub storages: Vec<Storage>,
    pub external_grids: Vec<ExternalGrid>,
}

impl Default for NetworkParts {
    fn default() -> Self {
        NetworkParts {
            name: None,
            s_base: DEFAULT_S_BASE,
            omega: DEFAULT_OMEGA,
            buses: Vec::new(),
            lines: Vec::new(),
            transformers: Vec::new(),
            converters: Vec::new(),
            generators: Vec::new(),
            loads: Vec::new(),
            storages: Vec::new(),
            external_grids: Vec::new(),
        }
    }
}

/// A checked network, either in physical units or normalized per-unit.
///
/// Immutable once built; edit a copy of [`NetworkModel::to_parts`] and rebuild
/// to change it.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    parts: NetworkParts,
    adjacency: Vec<BTreeSet<usize>>,
    per_unit: Option<PerUnitSystem>,
    line_admittances: Vec<BranchAdmittance>,
    transformer_admittances: Vec<BranchAdmittance>,
}

impl NetworkModel {
    /// Checks cross-references and physical invariants and builds a model in
    /// physical units.
    pub fn from_parts(parts: NetworkParts) -> Result<Self> {
        check_parts(&parts)?;
        let adjacency = build_adjacency(&parts);
        Ok(NetworkModel {
            parts,
            adjacency,
            per_unit: None,
            line_admittances: Vec::new(),
            transformer_admittances: Vec::new(),
        })
    }

    pub(crate) fn normalized(
        parts: NetworkParts,
        per_unit: PerUnitSystem,
        line_admittances: Vec<BranchAdmittance>,
        transformer_admittances: Vec<BranchAdmittance>,
    ) -> Self {
        let adjacency = build_adjacency(&parts);
        NetworkModel {
            parts,
            adjacency,
            per_unit: Some(per_unit),
            line_admittances,
            transformer_admittances,
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.parts.name.as_deref()
    }

    /// Power base declared by the network, kVA.
    pub fn s_base(&self) -> f64 {
        self.parts.s_base
    }

    pub fn omega(&self) -> f64 {
        self.parts.omega
    }

    pub fn buses(&self) -> &[Bus] {
        &self.parts.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.parts.lines
    }

    pub fn transformers(&self) -> &[Transformer] {
        &self.parts.transformers
    }

    pub fn converters(&self) -> &[Converter] {
        &self.parts.converters
    }

    pub fn generators(&self) -> &[Generator] {
        &self.parts.generators
    }

    pub fn loads(&self) -> &[Load] {
        &self.parts.loads
    }

    pub fn storages(&self) -> &[Storage] {
        &self.parts.storages
    }

    pub fn external_grids(&self) -> &[ExternalGrid] {
        &self.parts.external_grids
    }

    /// Buses connected to `bus` through a line or transformer.
    pub fn adjacent(&self, bus: usize) -> &BTreeSet<usize> {
        &self.adjacency[bus]
    }

    /// The per-unit system, if the model has been normalized.
    pub fn per_unit(&self) -> Option<&PerUnitSystem> {
        self.per_unit.as_ref()
    }

    pub fn is_per_unit(&self) -> bool {
        self.per_unit.is_some()
    }

    /// Series and shunt admittance of line `index` (normalized models only).
    pub fn line_admittance(&self, index: usize) -> Option<&BranchAdmittance> {
        self.line_admittances.get(index)
    }

    /// Series admittance of transformer `index` (normalized models only).
    pub fn transformer_admittance(&self, index: usize) -> Option<&BranchAdmittance> {
        self.transformer_admittances.get(index)
    }

    pub fn to_parts(&self) -> NetworkParts {
        self.parts.clone()
    }

    pub(crate) fn parts(&self) -> &NetworkParts {
        &self.parts
    }

    /// Sum of generator nominal powers and storage ratings, in the model's
    /// units.
    pub fn installed_capacity(&self) -> f64 {
        let gens: f64 = self.parts.generators.iter().map(|g| g.p_nom).sum();
        let stor: f64 = self.parts.storages.iter().map(|s| s.p_stor).sum();
        gens + stor
    }
}

fn build_adjacency(parts: &NetworkParts) -> Vec<BTreeSet<usize>> {
    let mut adjacency = vec![BTreeSet::new(); parts.buses.len()];
    let pairs = parts
        .lines
        .iter()
        .map(|l| (l.from, l.to))
        .chain(parts.transformers.iter().map(|t| (t.from, t.to)));
    for (i, k) in pairs {
        adjacency[i].insert(k);
        adjacency[k].insert(i);
    }
    adjacency
}

fn positive(value: f64, locus: &str, field: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::model(locus, format!("{field} must be positive, got {value}")))
    }
}

fn non_negative(value: f64, locus: &str, field: &str) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::model(locus, format!("{field} must be non-negative, got {value}")))
    }
}

fn finite(value: f64, locus: &str, field: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::model(locus, format!("{field} must be finite, got {value}")))
    }
}

fn unique_ids<I: Iterator<Item = usize>>(ids: I, table: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for (index, id) in ids.enumerate() {
        if !seen.insert(id) {
            return Err(Error::model(format!("{table}[{index}]"), format!("duplicate id {id}")));
        }
    }
    Ok(())
}

fn check_parts(p: &NetworkParts) -> Result<()> {
    positive(p.s_base, "network", "s_base_kva")?;
    positive(p.omega, "network", "omega_rad_s")?;

    for (index, bus) in p.buses.iter().enumerate() {
        let locus = format!("buses[{index}]");
        if bus.id != index {
            let message = if p.buses[..index].iter().any(|b| b.id == bus.id) {
                format!("duplicate id {}", bus.id)
            } else {
                format!("bus ids must be contiguous from 0; expected {index}, found {}", bus.id)
            };
            return Err(Error::model(locus, message));
        }
        positive(bus.v_nominal, &locus, "v_n_kv")?;
        finite(bus.v_max_pu, &locus, "v_max_pu")?;
        finite(bus.v_min_pu, &locus, "v_min_pu")?;
        if !(bus.v_min_pu < 1.0 && 1.0 < bus.v_max_pu) {
            return Err(Error::model(
                locus,
                format!(
                    "voltage band must satisfy v_min_pu < 1 < v_max_pu, got [{}, {}]",
                    bus.v_min_pu, bus.v_max_pu
                ),
            ));
        }
        if bus.v_min_pu < 0.0 {
            return Err(Error::model(locus, "v_min_pu must be non-negative"));
        }
    }

    let n = p.buses.len();
    let bus_ref = |bus: usize, locus: &str| -> Result<CurrentKind> {
        p.buses
            .get(bus)
            .map(|b| b.kind)
            .ok_or_else(|| Error::model(locus, format!("unknown bus id {bus} (network has {n} buses)")))
    };

    unique_ids(p.lines.iter().map(|l| l.id), "lines")?;
    for (index, line) in p.lines.iter().enumerate() {
        let locus = format!("lines[{index}]");
        let kind_from = bus_ref(line.from, &locus)?;
        let kind_to = bus_ref(line.to, &locus)?;
        if line.from == line.to {
            return Err(Error::model(locus, "line endpoints must be distinct"));
        }
        if kind_from != line.kind || kind_to != line.kind {
            return Err(Error::model(
                locus,
                format!(
                    "{} line connects {} bus {} and {} bus {}",
                    line.kind, kind_from, line.from, kind_to, line.to
                ),
            ));
        }
        positive(line.length_km, &locus, "length_km")?;
        positive(line.r_per_km, &locus, "r_ohm_per_km")?;
        positive(line.i_max, &locus, "i_max_ka")?;
        match line.kind {
            CurrentKind::Dc => {
                if line.x_per_km.is_some() || line.c_per_km.is_some() {
                    return Err(Error::model(locus, "reactive parameter on DC line"));
                }
            }
            CurrentKind::Ac => {
                let x = line
                    .x_per_km
                    .ok_or_else(|| Error::model(&locus, "AC line requires x_ohm_per_km"))?;
                let c = line
                    .c_per_km
                    .ok_or_else(|| Error::model(&locus, "AC line requires c_nf_per_km"))?;
                non_negative(x, &locus, "x_ohm_per_km")?;
                non_negative(c, &locus, "c_nf_per_km")?;
            }
        }
    }

    unique_ids(p.transformers.iter().map(|t| t.id), "transformers")?;
    for (index, t) in p.transformers.iter().enumerate() {
        let locus = format!("transformers[{index}]");
        let kind_from = bus_ref(t.from, &locus)?;
        let kind_to = bus_ref(t.to, &locus)?;
        if t.from == t.to {
            return Err(Error::model(locus, "transformer endpoints must be distinct"));
        }
        if kind_from != CurrentKind::Ac || kind_to != CurrentKind::Ac {
            return Err(Error::model(locus, "transformer endpoints must be AC buses"));
        }
        positive(t.s_n, &locus, "s_n_kva")?;
        positive(t.v_ccl_pct, &locus, "v_ccl_pct")?;
        positive(t.v_rccl_pct, &locus, "v_rccl_pct")?;
        positive(t.v_ln, &locus, "v_ln_kv")?;
        if t.v_rccl_pct > t.v_ccl_pct {
            return Err(Error::model(locus, "v_rccl_pct exceeds v_ccl_pct (imaginary reactance)"));
        }
    }

    unique_ids(p.converters.iter().map(|c| c.id), "converters")?;
    for (index, c) in p.converters.iter().enumerate() {
        let locus = format!("converters[{index}]");
        bus_ref(c.from, &locus)?;
        bus_ref(c.to, &locus)?;
        positive(c.s_n, &locus, "s_n_kva")?;
        if !(c.efficiency > 0.0 && c.efficiency <= 1.0) {
            return Err(Error::model(
                locus,
                format!("eta must lie in (0, 1], got {}", c.efficiency),
            ));
        }
    }

    unique_ids(p.generators.iter().map(|g| g.id), "generators")?;
    for (index, g) in p.generators.iter().enumerate() {
        let locus = format!("generators[{index}]");
        let kind = bus_ref(g.bus, &locus)?;
        for (value, field) in [
            (g.p_nom, "p_gen_nom_kw"),
            (g.p_min, "p_gen_min_kw"),
            (g.q_nom, "q_gen_nom_kvar"),
            (g.q_min, "q_gen_min_kvar"),
        ] {
            finite(value, &locus, field)?;
        }
        if g.p_min > g.p_nom {
            return Err(Error::model(locus, "p_gen_min_kw exceeds p_gen_nom_kw"));
        }
        if g.q_min > g.q_nom {
            return Err(Error::model(locus, "q_gen_min_kvar exceeds q_gen_nom_kvar"));
        }
        if kind == CurrentKind::Dc && (g.q_min != 0.0 || g.q_nom != 0.0) {
            return Err(Error::model(locus, "reactive power range on DC bus"));
        }
        if let Some(econ) = &g.economics {
            for (value, field) in [
                (econ.ic, "ic"),
                (econ.rv, "rv"),
                (econ.mc, "mc_per_year"),
                (econ.oc, "oc_per_kwh"),
                (econ.ghg, "ghg_kg_per_kwh"),
            ] {
                non_negative(value, &locus, field)?;
            }
            if !(0.0..=100.0).contains(&econ.cf_pct) {
                return Err(Error::model(
                    locus,
                    format!("cf_pct must lie in [0, 100], got {}", econ.cf_pct),
                ));
            }
        }
    }

    unique_ids(p.loads.iter().map(|l| l.id), "loads")?;
    for (index, load) in p.loads.iter().enumerate() {
        let locus = format!("loads[{index}]");
        let kind = bus_ref(load.bus, &locus)?;
        non_negative(load.p, &locus, "p_load_kw")?;
        finite(load.q, &locus, "q_load_kvar")?;
        if kind == CurrentKind::Dc && load.q != 0.0 {
            return Err(Error::model(locus, "reactive load on DC bus"));
        }
    }

    unique_ids(p.storages.iter().map(|s| s.id), "storages")?;
    for (index, s) in p.storages.iter().enumerate() {
        let locus = format!("storages[{index}]");
        bus_ref(s.bus, &locus)?;
        non_negative(s.p_stor, &locus, "p_stor_kw")?;
    }

    unique_ids(p.external_grids.iter().map(|g| g.id), "external_grids")?;
    for (index, g) in p.external_grids.iter().enumerate() {
        let locus = format!("external_grids[{index}]");
        if bus_ref(g.bus, &locus)? != CurrentKind::Ac {
            return Err(Error::model(locus, "external grid must connect to an AC bus"));
        }
    }
    Ok(())
}
