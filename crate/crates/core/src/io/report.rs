use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::compare::{ErrorTable, Quantity};
use super::SolutionDocument;
use crate::error::{Error, Result};
use crate::kpi::KpiReport;
use crate::opf::OpfSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// Aligned columns for a terminal.
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Config(format!(
                "unknown report format {s:?} (expected text, json or csv)"
            ))),
        }
    }
}

/// KPIs of one economic scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiRow {
    pub scenario: String,
    #[serde(flatten)]
    pub report: KpiReport,
}

/// Anything the CLI prints.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Solution(&'a OpfSolution),
    Kpis(&'a [KpiRow]),
    Comparison(&'a [ErrorTable]),
}

pub fn render_report(report: Report<'_>, format: ReportFormat) -> Result<String> {
    match report {
        Report::Solution(s) => render_solution(s, format),
        Report::Kpis(rows) => render_kpis(rows, format),
        Report::Comparison(tables) => render_comparison(tables, format),
    }
}

const SOLUTION_CSV_HEADER: &str = "bus,kind,p_kw,q_kvar,v_kv,angle_rad";

/// Renders an OPF solution. Text and CSV list one row per bus (kW, kVAr, kV
/// with five decimals); JSON is a full [`SolutionDocument`].
pub fn render_solution(solution: &OpfSolution, format: ReportFormat) -> Result<String> {
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out = SolutionDocument::new(solution.clone()).render()?;
            out.push('\n');
        }
        ReportFormat::Csv => {
            out.push_str(SOLUTION_CSV_HEADER);
            out.push('\n');
            for b in &solution.buses {
                let _ = writeln!(
                    out,
                    "{},{},{:.5},{:.5},{:.5},{:.5}",
                    b.id,
                    b.kind,
                    b.p_kw,
                    b.q_kvar.unwrap_or(0.0),
                    b.v_kv,
                    b.angle_rad
                );
            }
        }
        ReportFormat::Text => {
            let r = &solution.residuals;
            let _ = writeln!(
                out,
                "objective {} = {:.5} {} ({:?}, {} outer / {} inner iterations, {:.1} ms)",
                solution.objective,
                solution.objective_value,
                solution.objective_unit,
                solution.status,
                solution.outer_iterations,
                solution.inner_iterations,
                solution.wall_time_s * 1e3
            );
            let _ = writeln!(
                out,
                "residuals: stationarity {:.1e}, equality {:.1e}, inequality {:.1e}, complementarity {:.1e}",
                r.stationarity, r.equality, r.inequality, r.complementarity
            );
            let _ = writeln!(
                out,
                "{:>4}  {:>12}  {:>12}  {:>12}  {:>12}",
                "bus", "P (kW)", "Q (kVAr)", "V (kV)", "delta (rad)"
            );
            for b in &solution.buses {
                let _ = writeln!(
                    out,
                    "{:>4}  {:>12.5}  {:>12.5}  {:>12.5}  {:>12.5}",
                    b.id,
                    b.p_kw,
                    b.q_kvar.unwrap_or(0.0),
                    b.v_kv,
                    b.angle_rad
                );
            }
            if !solution.buses.is_empty() {
                let _ = writeln!(
                    out,
                    "generation {:.5} kW, load {:.5} kW, losses {:.5} kW (series {:.5}, converters {:.5})",
                    solution.total_generation_kw,
                    solution.total_load_kw,
                    solution.total_losses_kw,
                    solution.series_losses_kw,
                    solution.converter_losses_kw
                );
                for g in &solution.external_grids {
                    let _ = writeln!(
                        out,
                        "external grid {} at bus {}: P {:.5} kW, Q {:.5} kVAr",
                        g.id, g.bus, g.p_kw, g.q_kvar
                    );
                }
            }
        }
    }
    Ok(out)
}

const KPI_CSV_HEADER: &str = "scenario,kpi1_kwh,kpi2_kg_co2,kpi3_pct,kpi4_kw,kpi5,kpi6,kpi7_years,kpi8";

fn optional(value: Option<f64>, decimals: usize) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{v:.decimals$}"))
}

/// Renders KPI results, one row per economic scenario. Currency amounts
/// carry two decimals, kW five.
pub fn render_kpis(rows: &[KpiRow], format: ReportFormat) -> Result<String> {
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(&serde_json::json!({
                "format_version": super::FORMAT_VERSION,
                "kpis": rows,
            }))?;
            out.push('\n');
        }
        ReportFormat::Csv => {
            out.push_str(KPI_CSV_HEADER);
            out.push('\n');
            for row in rows {
                let k = &row.report;
                let _ = writeln!(
                    out,
                    "{},{:.2},{:.2},{},{:.5},{:.2},{:.2},{},{}",
                    row.scenario,
                    k.kpi1_kwh,
                    k.kpi2_kg_co2,
                    optional(k.kpi3_pct, 2),
                    k.kpi4_kw,
                    k.kpi5,
                    k.kpi6,
                    k.kpi7,
                    optional(k.kpi8, 5)
                );
            }
        }
        ReportFormat::Text => {
            let currency = rows.first().map_or("EUR", |r| r.report.currency.as_str());
            let _ = writeln!(
                out,
                "{:<14} {:>12} {:>12} {:>9} {:>10} {:>14} {:>14} {:>8} {:>10}",
                "scenario",
                "kpi1 (kWh)",
                "kpi2 (kg)",
                "kpi3 (%)",
                "kpi4 (kW)",
                format!("kpi5 ({currency})"),
                format!("kpi6 ({currency})"),
                "kpi7",
                "kpi8"
            );
            for row in rows {
                let k = &row.report;
                let _ = writeln!(
                    out,
                    "{:<14} {:>12.2} {:>12.2} {:>9} {:>10.5} {:>14.2} {:>14.2} {:>8} {:>10}",
                    row.scenario,
                    k.kpi1_kwh,
                    k.kpi2_kg_co2,
                    optional(k.kpi3_pct, 2),
                    k.kpi4_kw,
                    k.kpi5,
                    k.kpi6,
                    k.kpi7.to_string(),
                    optional(k.kpi8, 5)
                );
            }
        }
    }
    Ok(out)
}

const COMPARISON_CSV_HEADER: &str = "scenario,bus,quantity,simulated,measured,error,error_kind,gated";

fn render_comparison(tables: &[ErrorTable], format: ReportFormat) -> Result<String> {
    let mut out = String::new();
    let kind = |relative: bool| if relative { "pct" } else { "abs" };
    let quantity = |q: Quantity| match q {
        Quantity::Power => "p_kw",
        Quantity::Voltage => "v_kv",
    };
    match format {
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(&serde_json::json!({
                "format_version": super::FORMAT_VERSION,
                "comparisons": tables,
            }))?;
            out.push('\n');
        }
        ReportFormat::Csv => {
            out.push_str(COMPARISON_CSV_HEADER);
            out.push('\n');
            for t in tables {
                for r in &t.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{:.5},{:.5},{:.5},{},{}",
                        t.label,
                        r.bus,
                        quantity(r.quantity),
                        r.simulated,
                        r.measured,
                        r.error,
                        kind(r.relative),
                        r.gated
                    );
                }
            }
        }
        ReportFormat::Text => {
            for t in tables {
                let _ = writeln!(
                    out,
                    "{}: max voltage error {:.2}%, max power error {:.2}% ({})",
                    t.label,
                    t.max_voltage_error_pct,
                    t.max_power_error_pct,
                    if t.pass { "pass" } else { "FAIL" }
                );
                let _ = writeln!(
                    out,
                    "{:>4}  {:<8} {:>12} {:>12} {:>10}  gated",
                    "bus", "quantity", "simulated", "measured", "error"
                );
                for r in &t.rows {
                    let error = if r.relative {
                        format!("{:.2}%", r.error)
                    } else {
                        format!("{:.5}", r.error)
                    };
                    let _ = writeln!(
                        out,
                        "{:>4}  {:<8} {:>12.5} {:>12.5} {:>10}  {}",
                        r.bus,
                        quantity(r.quantity),
                        r.simulated,
                        r.measured,
                        error,
                        if r.gated { "yes" } else { "no" }
                    );
                }
                for g in &t.groups {
                    let _ = writeln!(
                        out,
                        "sum of P at buses {:?}: simulated {:.5}, measured {:.5}, error {:.2}{}",
                        g.buses,
                        g.simulated,
                        g.measured,
                        g.error,
                        if g.relative { "%" } else { " kW" }
                    );
                }
            }
        }
    }
    Ok(out)
}
