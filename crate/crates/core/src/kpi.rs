//! Technical and economic key performance indicators.
//!
//! | KPI  | meaning                                   | unit          |
//! |------|-------------------------------------------|---------------|
//! | kpi1 | yearly energy generated                   | kWh           |
//! | kpi2 | yearly CO₂ emissions                      | kgCO₂         |
//! | kpi3 | self-sufficiency (generation over load)   | %             |
//! | kpi4 | flexible (storage) power                  | kW            |
//! | kpi5 | discounted income over the useful life    | currency      |
//! | kpi6 | discounted total cost                     | currency      |
//! | kpi7 | payback period                            | years / Never |
//! | kpi8 | levelized cost of energy                  | currency/kWh  |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_model::{GeneratorEconomics, NetworkModel};
use crate::scenario::FlexibilityMarket;

/// How generator operating costs (currency/kWh) enter the total cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatingCostMode {
    /// `OC_i × yearly energy_i`, discounted every year of the useful life.
    #[default]
    Energy,
    /// `OC_i` added once, as a plain currency amount.
    Literal,
}

/// An itemized investment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquipmentItem {
    pub name: String,
    pub investment: f64,
    pub residual: f64,
    /// Part of the storage system (removed in battery-less scenarios).
    #[serde(default)]
    pub storage: bool,
}

fn default_hours() -> f64 {
    8760.0
}

fn default_currency() -> String {
    "EUR".into()
}

/// Microgrid-level economic data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicModel {
    #[serde(default = "default_currency")]
    pub currency: String,
    /// Investment cost.
    pub ic: f64,
    /// Residual value at the end of the useful life.
    pub rv: f64,
    #[serde(rename = "omc_per_year")]
    pub omc: f64,
    pub discount_rate_pct: f64,
    pub useful_life_years: u32,
    /// Energy price, currency/kWh.
    #[serde(rename = "ep_per_kwh")]
    pub ep: f64,
    /// Flexibility income, currency/year.
    #[serde(rename = "fi_per_year", default)]
    pub fi: f64,
    #[serde(default = "default_hours")]
    pub hours_per_year: f64,
    #[serde(default)]
    pub operating_cost_mode: OperatingCostMode,
    #[serde(default)]
    pub equipment: Vec<EquipmentItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flexibility_market: Option<FlexibilityMarket>,
}

impl EconomicModel {
    pub fn validate(&self) -> Result<()> {
        if self.useful_life_years < 1 {
            return Err(Error::model("economics", "useful_life_years must be at least 1"));
        }
        if !(self.discount_rate_pct >= 0.0 && self.discount_rate_pct.is_finite()) {
            return Err(Error::model("economics", "discount_rate_pct must be non-negative"));
        }
        if !(self.hours_per_year > 0.0 && self.hours_per_year.is_finite()) {
            return Err(Error::model("economics", "hours_per_year must be positive"));
        }
        for (value, name) in [
            (self.ic, "ic"),
            (self.rv, "rv"),
            (self.omc, "omc_per_year"),
            (self.ep, "ep_per_kwh"),
            (self.fi, "fi_per_year"),
        ] {
            if !value.is_finite() {
                return Err(Error::model("economics", format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    fn rate(&self) -> f64 {
        self.discount_rate_pct / 100.0
    }
}

/// Payback period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PaybackRepr", try_from = "PaybackRepr")]
pub enum Payback {
    Years(u32),
    Never,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PaybackRepr {
    Years(u32),
    Label(String),
}

impl From<Payback> for PaybackRepr {
    fn from(p: Payback) -> Self {
        match p {
            Payback::Years(n) => PaybackRepr::Years(n),
            Payback::Never => PaybackRepr::Label("Never".into()),
        }
    }
}

impl TryFrom<PaybackRepr> for Payback {
    type Error = String;

    fn try_from(r: PaybackRepr) -> std::result::Result<Self, String> {
        match r {
            PaybackRepr::Years(n) => Ok(Payback::Years(n)),
            PaybackRepr::Label(s) if s.eq_ignore_ascii_case("never") => Ok(Payback::Never),
            PaybackRepr::Label(s) => Err(format!("invalid payback {s:?}")),
        }
    }
}

impl fmt::Display for Payback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payback::Years(n) => write!(f, "{n}"),
            Payback::Never => f.write_str("Never"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechnicalKpis {
    pub kpi1_kwh: f64,
    pub kpi2_kg_co2: f64,
    /// `None` when the network has no load.
    pub kpi3_pct: Option<f64>,
    pub kpi4_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicKpis {
    pub kpi5: f64,
    pub kpi6: f64,
    /// `None` when no energy is generated.
    pub kpi8: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub kpi1_kwh: f64,
    pub kpi2_kg_co2: f64,
    pub kpi3_pct: Option<f64>,
    pub kpi4_kw: f64,
    pub kpi5: f64,
    pub kpi6: f64,
    pub kpi7: Payback,
    pub kpi8: Option<f64>,
    pub currency: String,
    /// `Σ_{n=1..UL} (1+r)^-n`.
    pub annuity: f64,
    pub flexibility_income: f64,
}

/// `Σ_{n=1..N} (1 + r)^-n` with `r` as a fraction.
pub fn discounted_annuity(rate: f64, years: u32) -> f64 {
    (1..=years).map(|n| (1.0 + rate).powi(-(n as i32))).sum()
}

/// Yearly energy of every generator with economic data, kWh.
fn generator_energy<'a>(network: &'a NetworkModel, econ: &EconomicModel) -> Vec<(f64, &'a GeneratorEconomics)> {
    network
        .generators()
        .iter()
        .filter_map(|g| {
            g.economics
                .as_ref()
                .map(|e| (g.p_nom * e.cf_pct / 100.0 * econ.hours_per_year, e))
        })
        .collect()
}

fn physical(network: &NetworkModel) -> Result<()> {
    if network.is_per_unit() {
        Err(Error::Scenario("KPIs are computed on physical-unit networks".into()))
    } else {
        Ok(())
    }
}

pub fn technical_kpis(network: &NetworkModel, econ: &EconomicModel) -> Result<TechnicalKpis> {
    physical(network)?;
    econ.validate()?;
    let energy = generator_energy(network, econ);
    let kpi1_kwh = energy.iter().map(|(e, _)| e).sum();
    let kpi2_kg_co2 = energy.iter().map(|(e, g)| e * g.ghg).sum();
    let mean_generation: f64 = network
        .generators()
        .iter()
        .filter_map(|g| g.economics.as_ref().map(|e| g.p_nom * e.cf_pct / 100.0))
        .sum();
    let load: f64 = network.loads().iter().map(|l| l.p).sum();
    let kpi3_pct = (load > 0.0).then(|| mean_generation / load * 100.0);
    let kpi4_kw = network.storages().iter().fold(0.0, |a, s| a + s.p_stor);
    Ok(TechnicalKpis {
        kpi1_kwh,
        kpi2_kg_co2,
        kpi3_pct,
        kpi4_kw,
    })
}

fn yearly_income(network: &NetworkModel, econ: &EconomicModel) -> f64 {
    let energy: f64 = generator_energy(network, econ).iter().map(|(e, _)| e).sum();
    energy * econ.ep + econ.fi
}

pub fn economic_kpis(network: &NetworkModel, econ: &EconomicModel) -> Result<EconomicKpis> {
    physical(network)?;
    econ.validate()?;
    let r = econ.rate();
    let ul = econ.useful_life_years;
    let annuity = discounted_annuity(r, ul);
    let energy = generator_energy(network, econ);
    let total_energy: f64 = energy.iter().map(|(e, _)| e).sum();

    let kpi5 = annuity * yearly_income(network, econ);

    let mut upfront = econ.ic;
    let mut yearly = econ.omc;
    let mut residual = econ.rv;
    for (e, g) in &energy {
        upfront += g.ic;
        yearly += g.mc;
        residual -= g.rv;
        match econ.operating_cost_mode {
            OperatingCostMode::Literal => upfront += g.oc,
            OperatingCostMode::Energy => yearly += g.oc * e,
        }
    }
    let kpi6 = upfront + annuity * yearly - residual * (1.0 + r).powi(-(ul as i32));
    let discounted_energy = annuity * total_energy;
    let kpi8 = (discounted_energy > 0.0).then(|| kpi6 / discounted_energy);
    Ok(EconomicKpis { kpi5, kpi6, kpi8 })
}

/// First year whose cumulative discounted income covers the total cost.
pub fn payback(network: &NetworkModel, econ: &EconomicModel) -> Result<Payback> {
    let cost = economic_kpis(network, econ)?.kpi6;
    let income = yearly_income(network, econ);
    let r = econ.rate();
    let mut cumulative = 0.0;
    for n in 1..=econ.useful_life_years {
        cumulative += income * (1.0 + r).powi(-(n as i32));
        if cumulative >= cost {
            return Ok(Payback::Years(n));
        }
    }
    Ok(Payback::Never)
}

pub fn compute_kpis(network: &NetworkModel, econ: &EconomicModel) -> Result<KpiReport> {
    let t = technical_kpis(network, econ)?;
    let e = economic_kpis(network, econ)?;
    Ok(KpiReport {
        kpi1_kwh: t.kpi1_kwh,
        kpi2_kg_co2: t.kpi2_kg_co2,
        kpi3_pct: t.kpi3_pct,
        kpi4_kw: t.kpi4_kw,
        kpi5: e.kpi5,
        kpi6: e.kpi6,
        kpi7: payback(network, econ)?,
        kpi8: e.kpi8,
        currency: econ.currency.clone(),
        annuity: discounted_annuity(econ.rate(), econ.useful_life_years),
        flexibility_income: econ.fi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::{Bus, CurrentKind, Generator, Load, NetworkParts};

    fn econ() -> EconomicModel {
        EconomicModel {
            currency: "EUR".into(),
            ic: 0.0,
            rv: 0.0,
            omc: 0.0,
            discount_rate_pct: 1.0,
            useful_life_years: 25,
            ep: 0.145,
            fi: 0.0,
            hours_per_year: 8760.0,
            operating_cost_mode: OperatingCostMode::Energy,
            equipment: Vec::new(),
            flexibility_market: None,
        }
    }

    fn network(cf: f64, load: f64) -> NetworkModel {
        NetworkModel::from_parts(NetworkParts {
            buses: vec![Bus {
                id: 0,
                v_nominal: 0.8,
                kind: CurrentKind::Dc,
                v_max_pu: 1.05,
                v_min_pu: 0.95,
            }],
            generators: vec![Generator {
                id: 0,
                bus: 0,
                p_nom: 22.14,
                p_min: 0.0,
                q_nom: 0.0,
                q_min: 0.0,
                economics: Some(GeneratorEconomics {
                    ic: 0.0,
                    rv: 0.0,
                    mc: 0.0,
                    oc: 0.0,
                    cf_pct: cf,
                    ghg: 0.035,
                }),
            }],
            loads: vec![Load {
                id: 0,
                bus: 0,
                p: load,
                q: 0.0,
            }],
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn annuity_examples() {
        let closed = (1.0 - 1.01f64.powi(-25)) / 0.01;
        assert!((discounted_annuity(0.01, 25) - closed).abs() < 1e-12);
        assert!((discounted_annuity(0.01, 25) - 22.0232).abs() < 1e-4);
        assert_eq!(discounted_annuity(0.0, 10), 10.0);
        assert_eq!(discounted_annuity(0.05, 0), 0.0);
    }

    #[test]
    fn single_generator_energy() {
        let t = technical_kpis(&network(33.5, 5.0), &econ()).unwrap();
        assert!((t.kpi1_kwh - 22.14 * 0.335 * 8760.0).abs() < 1e-9);
        assert!((t.kpi1_kwh - 64_972.0).abs() < 1.0);
    }

    #[test]
    fn zero_capacity_factor_and_no_load() {
        let t = technical_kpis(&network(0.0, 5.0), &econ()).unwrap();
        assert_eq!((t.kpi1_kwh, t.kpi2_kg_co2, t.kpi3_pct), (0.0, 0.0, Some(0.0)));
        let t = technical_kpis(&network(10.0, 0.0), &econ()).unwrap();
        assert_eq!(t.kpi3_pct, None);
        let e = economic_kpis(&network(0.0, 5.0), &econ()).unwrap();
        assert_eq!(e.kpi8, None);
    }

    #[test]
    fn flexibility_income_only() {
        let mut m = econ();
        m.fi = 1000.0;
        let e = economic_kpis(&network(0.0, 1.0), &m).unwrap();
        assert!((e.kpi5 - discounted_annuity(0.01, 25) * 1000.0).abs() < 1e-9);
        assert_eq!(e.kpi6, 0.0);
        assert_eq!(payback(&network(0.0, 1.0), &m).unwrap(), Payback::Years(1));
    }

    #[test]
    fn payback_serializes_as_number_or_never() {
        assert_eq!(serde_json::to_string(&Payback::Years(17)).unwrap(), "17");
        assert_eq!(serde_json::to_string(&Payback::Never).unwrap(), "\"Never\"");
        let p: Payback = serde_json::from_str("\"never\"").unwrap();
        assert_eq!(p, Payback::Never);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let mut m = econ();
        m.useful_life_years = 0;
        assert!(m.validate().is_err());
        let mut m = econ();
        m.hours_per_year = 0.0;
        assert!(m.validate().is_err());
    }
}
