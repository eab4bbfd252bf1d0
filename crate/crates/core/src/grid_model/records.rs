//! Network element records.
//!
//! Field values are physical (kV, km, Ω/km, nF/km, kA, kVA, kW, kVAr) in a
//! model read from a document, and per-unit after
//! [`per_unit_normalize`](super::per_unit_normalize). The serde names are the
//! network file's field names.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurrentKind {
    Ac,
    Dc,
}

impl std::fmt::Display for CurrentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurrentKind::Ac => "AC",
            CurrentKind::Dc => "DC",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// Imposes nominal voltage at the output bus.
    GridForming,
    GridFollowing,
}

/// Which direction an external grid may exchange active power in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    ConsumeOnly,
    SupplyOnly,
    Either,
}

fn default_v_max() -> f64 {
    1.05
}

fn default_v_min() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: usize,
    /// Nominal voltage, kV.
    #[serde(rename = "v_n_kv")]
    pub v_nominal: f64,
    pub kind: CurrentKind,
    #[serde(default = "default_v_max")]
    pub v_max_pu: f64,
    #[serde(default = "default_v_min")]
    pub v_min_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub length_km: f64,
    /// Ω/km.
    #[serde(rename = "r_ohm_per_km")]
    pub r_per_km: f64,
    /// Ω/km, AC only.
    #[serde(rename = "x_ohm_per_km", default, skip_serializing_if = "Option::is_none")]
    pub x_per_km: Option<f64>,
    /// nF/km, AC only.
    #[serde(rename = "c_nf_per_km", default, skip_serializing_if = "Option::is_none")]
    pub c_per_km: Option<f64>,
    /// kA.
    #[serde(rename = "i_max_ka")]
    pub i_max: f64,
    pub kind: CurrentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transformer {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    /// kVA.
    #[serde(rename = "s_n_kva")]
    pub s_n: f64,
    /// Short-circuit voltage, % of rated.
    pub v_ccl_pct: f64,
    /// Resistive part of the short-circuit voltage, %.
    pub v_rccl_pct: f64,
    /// Voltage of the winding the impedance is referred to, kV.
    #[serde(rename = "v_ln_kv")]
    pub v_ln: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Converter {
    pub id: usize,
    /// Input bus.
    pub from: usize,
    /// Output bus.
    pub to: usize,
    /// kVA.
    #[serde(rename = "s_n_kva")]
    pub s_n: f64,
    #[serde(rename = "eta")]
    pub efficiency: f64,
    pub control: ControlMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEconomics {
    /// Investment cost, currency.
    pub ic: f64,
    /// Residual value, currency.
    pub rv: f64,
    #[serde(rename = "mc_per_year")]
    pub mc: f64,
    #[serde(rename = "oc_per_kwh")]
    pub oc: f64,
    pub cf_pct: f64,
    #[serde(rename = "ghg_kg_per_kwh")]
    pub ghg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: usize,
    pub bus: usize,
    #[serde(rename = "p_gen_nom_kw")]
    pub p_nom: f64,
    #[serde(rename = "p_gen_min_kw")]
    pub p_min: f64,
    #[serde(rename = "q_gen_nom_kvar")]
    pub q_nom: f64,
    #[serde(rename = "q_gen_min_kvar")]
    pub q_min: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub economics: Option<GeneratorEconomics>,
}

/// A fixed demand. Stored as positive magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub id: usize,
    pub bus: usize,
    #[serde(rename = "p_load_kw")]
    pub p: f64,
    #[serde(rename = "q_load_kvar", default)]
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Storage {
    pub id: usize,
    pub bus: usize,
    #[serde(rename = "p_stor_kw")]
    pub p_stor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalGrid {
    pub id: usize,
    pub bus: usize,
    pub mode: GridMode,
}
