//! Documents, reports, measurement comparison and the command-line front end.
//!
//! Every document is JSON with a top-level `format_version`. Networks use the
//! schema of [`NetworkDocument`](crate::grid_model::NetworkDocument); the
//! other documents are defined here.

mod cli;
mod compare;
mod report;

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_model::{parse_network, render_network, NetworkModel};
use crate::kpi::EconomicModel;
use crate::opf::OpfSolution;
use crate::scenario::{EconomicScenarioKind, OpfScenario};

pub use cli::{run_cli, run_cli_with};
pub use compare::{
    compare_measurements, CompareOptions, ErrorRow, ErrorTable, GroupRow, MeasuredBus, MeasurementFile,
    MeasurementSet, PowerUnit, Quantity, VoltageUnit,
};
pub use report::{render_kpis, render_report, render_solution, KpiRow, Report, ReportFormat};

/// Version written to and expected from every non-network document.
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable overriding the bundled fixture directory.
pub const FIXTURE_DIR_ENV: &str = "ACDC_OPF_FIXTURES";

/// Directory holding the bundled fixtures: `$ACDC_OPF_FIXTURES` when set,
/// otherwise the crate's own `fixtures/`.
pub fn fixture_dir() -> PathBuf {
    std::env::var_os(FIXTURE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixture_dir().join(name)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a versioned document of type `T`.
pub(crate) fn parse_versioned<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    crate::grid_model::document::check_format_version(&value, FORMAT_VERSION)?;
    Ok(serde_json::from_value(value)?)
}

pub fn read_network(path: impl AsRef<Path>) -> Result<NetworkModel> {
    parse_network(&read_text(path.as_ref())?)
}

pub fn write_network(path: impl AsRef<Path>, network: &NetworkModel) -> Result<()> {
    write_text(path.as_ref(), &(render_network(network)? + "\n"))
}

/// Economic data file: `{"format_version": 1, "economics": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicsDocument {
    pub format_version: u32,
    pub economics: EconomicModel,
}

pub fn parse_economics(text: &str) -> Result<EconomicModel> {
    let doc: EconomicsDocument = parse_versioned(text)?;
    doc.economics.validate()?;
    Ok(doc.economics)
}

pub fn render_economics(econ: &EconomicModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&EconomicsDocument {
        format_version: FORMAT_VERSION,
        economics: econ.clone(),
    })?)
}

pub fn read_economics(path: impl AsRef<Path>) -> Result<EconomicModel> {
    parse_economics(&read_text(path.as_ref())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledScenario {
    pub label: String,
    pub scenario: OpfScenario,
}

/// A set of named OPF scenarios and the economic scenarios to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    #[serde(default)]
    pub opf: Vec<LabeledScenario>,
    #[serde(default)]
    pub economic: Vec<EconomicScenarioKind>,
}

impl ScenarioFile {
    /// Case-insensitive lookup by label.
    pub fn opf_scenario(&self, label: &str) -> Option<&OpfScenario> {
        self.opf
            .iter()
            .find(|s| s.label.eq_ignore_ascii_case(label))
            .map(|s| &s.scenario)
    }
}

pub fn read_scenarios(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    parse_versioned(&read_text(path.as_ref())?)
}

/// A solved OPF as written by `solve --out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<OpfScenario>,
    pub solution: OpfSolution,
}

impl SolutionDocument {
    pub fn new(solution: OpfSolution) -> Self {
        SolutionDocument {
            format_version: FORMAT_VERSION,
            label: None,
            scenario: None,
            solution,
        }
    }

    pub fn render(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn parse_solution(text: &str) -> Result<SolutionDocument> {
    parse_versioned(text)
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<SolutionDocument> {
    parse_solution(&read_text(path.as_ref())?)
}

pub fn read_measurements(path: impl AsRef<Path>) -> Result<MeasurementFile> {
    parse_versioned(&read_text(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_parse() {
        let network = read_network(fixture_path("ceder.json")).unwrap();
        assert_eq!(network.buses().len(), 9);
        let econ = read_economics(fixture_path("ceder-econ.json")).unwrap();
        assert_eq!(econ.ic, 195_500.0);
        assert_eq!(econ.rv, 28_900.0);
        assert_eq!(econ.equipment.len(), 9);
        let investments: f64 = econ.equipment.iter().map(|e| e.investment).sum();
        assert_eq!(investments, econ.ic);
        let scenarios = read_scenarios(fixture_path("ceder-scenarios.json")).unwrap();
        assert_eq!(scenarios.opf.len(), 4);
        assert!(scenarios.opf_scenario("h3").is_some());
        let m = read_measurements(fixture_path("ceder-measurements.json")).unwrap();
        assert_eq!(m.sets.len(), 4);
        assert!(m.sets.iter().all(|s| s.buses.len() == 9));
    }

    #[test]
    fn economics_round_trip() {
        let econ = read_economics(fixture_path("ceder-econ.json")).unwrap();
        let again = parse_economics(&render_economics(&econ).unwrap()).unwrap();
        assert_eq!(econ, again);
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = r#"{"format_version": 7, "opf": []}"#;
        let err = parse_versioned::<ScenarioFile>(text).unwrap_err();
        assert!(matches!(err, Error::FormatVersion { found: 7, expected: 1 }));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = read_network("/nonexistent/net.json").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/net.json"));
    }
}
