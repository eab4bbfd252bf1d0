use serde::{Deserialize, Serialize};

use super::per_unit::denormalize;
use super::records::{Bus, Converter, ExternalGrid, Generator, Line, Load, Storage, Transformer};
use super::{NetworkModel, NetworkParts, DEFAULT_OMEGA, DEFAULT_S_BASE};
use crate::error::{Error, Result};

pub const NETWORK_FORMAT_VERSION: u32 = 1;

fn default_s_base() -> f64 {
    DEFAULT_S_BASE
}

fn default_omega() -> f64 {
    DEFAULT_OMEGA
}

/// On-disk layout of a network file. All values physical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_s_base")]
    pub s_base_kva: f64,
    #[serde(default = "default_omega")]
    pub omega_rad_s: f64,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<Line>,
    #[serde(default)]
    pub transformers: Vec<Transformer>,
    #[serde(default)]
    pub converters: Vec<Converter>,
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub storages: Vec<Storage>,
    #[serde(default)]
    pub external_grids: Vec<ExternalGrid>,
}

impl From<NetworkDocument> for NetworkParts {
    fn from(d: NetworkDocument) -> Self {
        NetworkParts {
            name: d.name,
            s_base: d.s_base_kva,
            omega: d.omega_rad_s,
            buses: d.buses,
            lines: d.lines,
            transformers: d.transformers,
            converters: d.converters,
            generators: d.generators,
            loads: d.loads,
            storages: d.storages,
            external_grids: d.external_grids,
        }
    }
}

impl From<NetworkParts> for NetworkDocument {
    fn from(p: NetworkParts) -> Self {
        NetworkDocument {
            format_version: NETWORK_FORMAT_VERSION,
            name: p.name,
            s_base_kva: p.s_base,
            omega_rad_s: p.omega,
            buses: p.buses,
            lines: p.lines,
            transformers: p.transformers,
            converters: p.converters,
            generators: p.generators,
            loads: p.loads,
            storages: p.storages,
            external_grids: p.external_grids,
        }
    }
}

/// Checks the `format_version` field of any versioned document.
pub(crate) fn check_format_version(value: &serde_json::Value, expected: u32) -> Result<()> {
    let found = value
        .get("format_version")
        .ok_or_else(|| Error::model("document", "missing format_version"))?;
    let found = found
        .as_u64()
        .ok_or_else(|| Error::model("document", "format_version must be an integer"))?;
    if found != u64::from(expected) {
        return Err(Error::FormatVersion {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected,
        });
    }
    Ok(())
}

/// Parses a network document into a physical-unit model.
pub fn parse_network(document: &str) -> Result<NetworkModel> {
    let value: serde_json::Value = serde_json::from_str(document)?;
    check_format_version(&value, NETWORK_FORMAT_VERSION)?;
    let doc: NetworkDocument = serde_json::from_value(value)?;
    NetworkModel::from_parts(doc.into())
}

/// Renders a model as a network document (physical units).
pub fn render_network(model: &NetworkModel) -> Result<String> {
    let parts = if model.is_per_unit() {
        denormalize(model)?.to_parts()
    } else {
        model.to_parts()
    };
    Ok(serde_json::to_string_pretty(&NetworkDocument::from(parts))?)
}
