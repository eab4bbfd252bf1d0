//! Operating scenarios for the OPF and economic scenarios for the KPIs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_model::{GridMode, Load, NetworkModel};
use crate::opf::ObjectiveKind;

fn default_storage_fraction() -> f64 {
    0.5
}

/// How a network is operated for one OPF run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpfScenario {
    pub objective: ObjectiveKind,
    /// Share of each storage's rating drawn as a fixed load.
    #[serde(default = "default_storage_fraction")]
    pub storage_fraction: f64,
    /// Overrides the mode of every external grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_mode: Option<GridMode>,
    /// Per external-grid id, applied after `grid_mode`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grid_modes: BTreeMap<usize, GridMode>,
    /// Per storage id, replaces `storage_fraction`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub storage_fractions: BTreeMap<usize, f64>,
}

impl OpfScenario {
    /// Storage at half its rating, external grid modes as in the network.
    pub fn new(objective: ObjectiveKind) -> Self {
        OpfScenario {
            objective,
            storage_fraction: default_storage_fraction(),
            grid_mode: None,
            grid_modes: BTreeMap::new(),
            storage_fractions: BTreeMap::new(),
        }
    }

    pub fn with_grid_mode(mut self, mode: GridMode) -> Self {
        self.grid_mode = Some(mode);
        self
    }

    pub fn with_storage_fraction(mut self, fraction: f64) -> Self {
        self.storage_fraction = fraction;
        self
    }

    fn check(&self) -> Result<()> {
        let fractions = std::iter::once(self.storage_fraction).chain(self.storage_fractions.values().copied());
        for f in fractions {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Scenario(format!("storage fraction must lie in [0, 1], got {f}")));
            }
        }
        Ok(())
    }
}

/// Replaces every storage by a fixed load of `fraction × P_stor` on its bus
/// and sets external-grid modes. Works on physical or per-unit models.
pub fn apply_opf_scenario(network: &NetworkModel, scenario: &OpfScenario) -> Result<NetworkModel> {
    scenario.check()?;
    if network.is_per_unit() {
        return Err(Error::Scenario("scenarios apply to physical-unit networks".into()));
    }
    for id in scenario.storage_fractions.keys() {
        if !network.storages().iter().any(|s| s.id == *id) {
            return Err(Error::Scenario(format!("unknown storage id {id}")));
        }
    }
    for id in scenario.grid_modes.keys() {
        if !network.external_grids().iter().any(|g| g.id == *id) {
            return Err(Error::Scenario(format!("unknown external grid id {id}")));
        }
    }

    let mut parts = network.to_parts();
    let mut next_id = parts.loads.iter().map(|l| l.id + 1).max().unwrap_or(0);
    for storage in std::mem::take(&mut parts.storages) {
        let fraction = scenario
            .storage_fractions
            .get(&storage.id)
            .copied()
            .unwrap_or(scenario.storage_fraction);
        if fraction > 0.0 {
            parts.loads.push(Load {
                id: next_id,
                bus: storage.bus,
                p: fraction * storage.p_stor,
                q: 0.0,
            });
            next_id += 1;
        }
    }
    for grid in &mut parts.external_grids {
        if let Some(mode) = scenario.grid_mode {
            grid.mode = mode;
        }
        if let Some(&mode) = scenario.grid_modes.get(&grid.id) {
            grid.mode = mode;
        }
    }
    NetworkModel::from_parts(parts)
}

/// Yearly income from selling flexible power: `price` in currency/MWh,
/// `power_kw` in kW.
pub fn flexibility_income(price: f64, power_kw: f64, hours_per_day: f64, days_per_year: f64) -> f64 {
    price * power_kw * hours_per_day * days_per_year / 1000.0
}

/// The four economic configurations of the demonstrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EconomicScenarioKind {
    /// Network and costs as given.
    Baseline,
    /// Battery and its converter removed.
    NoBattery,
    /// Battery sells its rated power on the flexibility market.
    BatteryFlex,
    /// Battery replaced by a virtual battery of equal power that sells
    /// flexibility.
    VbFlex,
}

impl EconomicScenarioKind {
    pub const ALL: [EconomicScenarioKind; 4] = [
        EconomicScenarioKind::Baseline,
        EconomicScenarioKind::NoBattery,
        EconomicScenarioKind::BatteryFlex,
        EconomicScenarioKind::VbFlex,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EconomicScenarioKind::Baseline => "baseline",
            EconomicScenarioKind::NoBattery => "no-battery",
            EconomicScenarioKind::BatteryFlex => "battery-flex",
            EconomicScenarioKind::VbFlex => "vb-flex",
        }
    }

    fn removes_battery_costs(self) -> bool {
        matches!(self, EconomicScenarioKind::NoBattery | EconomicScenarioKind::VbFlex)
    }

    fn sells_flexibility(self) -> bool {
        matches!(self, EconomicScenarioKind::BatteryFlex | EconomicScenarioKind::VbFlex)
    }
}

impl fmt::Display for EconomicScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EconomicScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EconomicScenarioKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Scenario(format!(
                    "unknown economic scenario {s:?} (expected baseline, no-battery, battery-flex or vb-flex)"
                ))
            })
    }
}

/// Flexibility market terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlexibilityMarket {
    /// currency/MWh.
    pub price_per_mwh: f64,
    pub hours_per_day: f64,
    pub days_per_year: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicScenario {
    pub kind: EconomicScenarioKind,
    pub market: FlexibilityMarket,
}

/// Applies an economic scenario to a base economic model and network.
///
/// `no-battery` and `vb-flex` subtract the investment and residual value of
/// every equipment item tagged as storage; `no-battery` also drops the
/// storages from the network. `battery-flex` and `vb-flex` set the
/// flexibility income from the total storage power.
pub fn apply_economic_scenario(
    base: &crate::kpi::EconomicModel,
    network: &NetworkModel,
    scenario: &EconomicScenario,
) -> Result<(crate::kpi::EconomicModel, NetworkModel)> {
    let mut econ = base.clone();
    let mut parts = network.to_parts();
    let kind = scenario.kind;
    if kind.removes_battery_costs() {
        for item in econ.equipment.iter().filter(|e| e.storage) {
            econ.ic -= item.investment;
            econ.rv -= item.residual;
        }
        econ.equipment.retain(|e| !e.storage);
    }
    if kind == EconomicScenarioKind::NoBattery {
        parts.storages.clear();
    }
    if kind.sells_flexibility() {
        let m = scenario.market;
        for (value, name) in [
            (m.price_per_mwh, "price_per_mwh"),
            (m.hours_per_day, "hours_per_day"),
            (m.days_per_year, "days_per_year"),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Scenario(format!("{name} must be non-negative, got {value}")));
            }
        }
        let power: f64 = network.storages().iter().map(|s| s.p_stor).sum();
        econ.fi = flexibility_income(m.price_per_mwh, power, m.hours_per_day, m.days_per_year);
    }
    Ok((econ, NetworkModel::from_parts(parts)?))
}
