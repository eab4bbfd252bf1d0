use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::compare::{compare_measurements, CompareOptions, ErrorTable};
use super::report::{render_kpis, render_report, render_solution, KpiRow, Report, ReportFormat};
use super::{
    fixture_dir, read_economics, read_measurements, read_network, read_scenarios, read_solution, write_text,
    SolutionDocument,
};
use crate::error::{Error, Result};
use crate::grid_model::{validate, GridMode};
use crate::kpi::compute_kpis;
use crate::nlp::{SolverConfig, SolverStatus};
use crate::opf::{solve_opf, ObjectiveKind};
use crate::scenario::{
    apply_economic_scenario, EconomicScenario, EconomicScenarioKind, FlexibilityMarket, OpfScenario,
};

#[derive(Debug, Parser)]
#[command(name = "acdc-opf", version, about = "Optimal power flow and KPIs for hybrid AC/DC microgrids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one optimal power flow.
    Solve(SolveArgs),
    /// Compute technical and economic KPIs.
    Kpi(KpiArgs),
    /// Solve the scenarios of a measurement file and compare.
    Compare(CompareArgs),
    /// Check a network for structural problems.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Network document. Relative names not found in the working directory
    /// are looked up in the fixture directory.
    #[arg(long)]
    network: PathBuf,
    #[arg(long, value_parser = parse_objective)]
    objective: Option<ObjectiveKind>,
    /// Share of each storage rating drawn as a fixed load.
    #[arg(long, default_value_t = 0.5)]
    storage_fraction: f64,
    /// consume, supply or either; defaults to each grid's own mode.
    #[arg(long, value_parser = parse_grid_mode)]
    grid_mode: Option<GridMode>,
    /// Take the scenario from a scenario file instead of the flags above.
    #[arg(long, requires = "label")]
    scenarios: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Write the solution document here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct KpiArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    econ: PathBuf,
    /// baseline, no-battery, battery-flex, vb-flex or all.
    #[arg(long, default_value = "all")]
    scenario: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    measurements: PathBuf,
    /// Network to solve; not needed with --solution.
    #[arg(long, required_unless_present = "solution")]
    network: Option<PathBuf>,
    /// Scenario file mapping measurement labels to OPF scenarios.
    #[arg(long, required_unless_present = "solution")]
    scenarios: Option<PathBuf>,
    /// Compare a stored solution document instead of solving.
    #[arg(long, conflicts_with_all = ["network", "scenarios"])]
    solution: Option<PathBuf>,
    /// Only this measurement set.
    #[arg(long)]
    label: Option<String>,
    /// Pass threshold, percent.
    #[arg(long, default_value_t = 3.0)]
    threshold: f64,
    /// Pass threshold where the measurement is zero, kW or kV.
    #[arg(long, default_value_t = 0.01)]
    absolute_tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    network: PathBuf,
}

fn parse_objective(s: &str) -> std::result::Result<ObjectiveKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid_mode(s: &str) -> std::result::Result<GridMode, String> {
    match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "consume" | "consume_only" => Ok(GridMode::ConsumeOnly),
        "supply" | "supply_only" => Ok(GridMode::SupplyOnly),
        "either" => Ok(GridMode::Either),
        _ => Err(format!("unknown grid mode {s:?} (expected consume, supply or either)")),
    }
}

/// Exit statuses.
const OK: i32 = 0;
const FAILED: i32 = 1;
const USAGE: i32 = 2;

/// Runs the command line (`args` includes the program name) with standard
/// output and error. Returns the exit status: 0 on success, 1 when a solve
/// does not converge or a check fails, 2 on usage or input errors.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] writing to the given streams.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { USAGE } else { OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return status;
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Kpi(a) => kpi(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Validate(a) => validate_network(a, out),
    };
    match outcome {
        Ok(Outcome::Success) => OK,
        Ok(Outcome::Failed(message)) => {
            let _ = writeln!(err, "acdc-opf: {message}");
            FAILED
        }
        Err(e) => {
            let _ = writeln!(err, "acdc-opf: {e}");
            USAGE
        }
    }
}

enum Outcome {
    Success,
    Failed(String),
}

/// `path` itself when it exists or is absolute, otherwise the same name in
/// the fixture directory if present there.
fn locate(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    let candidate = fixture_dir().join(path);
    if candidate.exists() {
        candidate
    } else {
        path.to_path_buf()
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => out.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<Outcome> {
    let network = read_network(locate(&a.network))?;
    let (label, scenario) = match &a.scenarios {
        Some(file) => {
            let label = a.label.clone().unwrap_or_default();
            let scenarios = read_scenarios(locate(file))?;
            let scenario = scenarios
                .opf_scenario(&label)
                .cloned()
                .ok_or_else(|| Error::Scenario(format!("no scenario labelled {label:?}")))?;
            (Some(label), scenario)
        }
        None => {
            let objective = a
                .objective
                .ok_or_else(|| Error::Config("--objective or --scenarios is required".into()))?;
            let mut scenario = OpfScenario::new(objective).with_storage_fraction(a.storage_fraction);
            scenario.grid_mode = a.grid_mode;
            (a.label.clone(), scenario)
        }
    };
    let run = solve_opf(&network, &scenario, &SolverConfig::default())?;
    if let Some(path) = &a.out {
        let doc = SolutionDocument {
            label,
            scenario: Some(scenario),
            ..SolutionDocument::new(run.solution.clone())
        };
        write_text(path, &(doc.render()? + "\n"))?;
    }
    emit(&render_solution(&run.solution, a.format)?, None, out)?;
    Ok(match run.solution.status {
        SolverStatus::Converged => Outcome::Success,
        status => Outcome::Failed(format!(
            "solver finished with status {status:?}: {}",
            run.solution.message.as_deref().unwrap_or("no message")
        )),
    })
}

fn kpi(a: KpiArgs, out: &mut dyn Write) -> Result<Outcome> {
    let network = read_network(locate(&a.network))?;
    let econ = read_economics(locate(&a.econ))?;
    let kinds: Vec<EconomicScenarioKind> = if a.scenario.eq_ignore_ascii_case("all") {
        EconomicScenarioKind::ALL.to_vec()
    } else {
        vec![a.scenario.parse()?]
    };
    let mut rows = Vec::new();
    for kind in kinds {
        let market = match (econ.flexibility_market, kind) {
            (Some(m), _) => m,
            (None, EconomicScenarioKind::BatteryFlex | EconomicScenarioKind::VbFlex) => {
                return Err(Error::Scenario(format!(
                    "scenario {kind} needs a flexibility_market in the economic document"
                )));
            }
            (None, _) => FlexibilityMarket {
                price_per_mwh: 0.0,
                hours_per_day: 0.0,
                days_per_year: 0.0,
            },
        };
        let (e, n) = apply_economic_scenario(&econ, &network, &EconomicScenario { kind, market })?;
        rows.push(KpiRow {
            scenario: kind.label().to_string(),
            report: compute_kpis(&n, &e)?,
        });
    }
    emit(&render_kpis(&rows, a.format)?, a.out.as_deref(), out)?;
    Ok(Outcome::Success)
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> Result<Outcome> {
    let file = read_measurements(locate(&a.measurements))?;
    let options = CompareOptions {
        threshold_pct: a.threshold,
        absolute_tolerance: a.absolute_tolerance,
    };
    let mut tables: Vec<ErrorTable> = Vec::new();
    let mut failures = Vec::new();

    if let Some(path) = &a.solution {
        let doc = read_solution(locate(path))?;
        let label = a
            .label
            .clone()
            .or(doc.label.clone())
            .unwrap_or_else(|| doc.solution.objective.label().to_string());
        let set = file
            .set(&label)
            .ok_or_else(|| Error::Compare(format!("no measurement set labelled {label:?}")))?;
        tables.push(compare_measurements(&doc.solution, &label, &set, &options)?);
    } else {
        let network = read_network(locate(a.network.as_deref().expect("required by clap")))?;
        let scenarios = read_scenarios(locate(a.scenarios.as_deref().expect("required by clap")))?;
        let sets = match &a.label {
            Some(label) => vec![file
                .set(label)
                .ok_or_else(|| Error::Compare(format!("no measurement set labelled {label:?}")))?],
            None => file.normalized_sets(),
        };
        for set in sets {
            let scenario = scenarios
                .opf_scenario(&set.label)
                .ok_or_else(|| Error::Scenario(format!("no scenario labelled {:?}", set.label)))?;
            let run = solve_opf(&network, scenario, &SolverConfig::default())?;
            if run.solution.status != SolverStatus::Converged {
                failures.push(format!("{}: solver status {:?}", set.label, run.solution.status));
            }
            tables.push(compare_measurements(&run.solution, &set.label, &set, &options)?);
        }
    }
    failures.extend(
        tables
            .iter()
            .filter(|t| !t.pass)
            .map(|t| format!("{}: errors above the threshold", t.label)),
    );
    emit(&render_report(Report::Comparison(&tables), a.format)?, a.out.as_deref(), out)?;
    Ok(if failures.is_empty() {
        Outcome::Success
    } else {
        Outcome::Failed(failures.join("; "))
    })
}

fn validate_network(a: ValidateArgs, out: &mut dyn Write) -> Result<Outcome> {
    let network = read_network(locate(&a.network))?;
    let diagnostics = validate(&network);
    let mut text = String::new();
    for d in &diagnostics {
        text.push_str(&format!("{d}\n"));
    }
    if diagnostics.is_empty() {
        text.push_str(&format!(
            "{}: {} buses, {} lines, {} transformers, {} converters: no problems found\n",
            network.name().unwrap_or("network"),
            network.buses().len(),
            network.lines().len(),
            network.transformers().len(),
            network.converters().len()
        ));
    }
    emit(&text, None, out)?;
    Ok(if diagnostics.is_empty() {
        Outcome::Success
    } else {
        Outcome::Failed(format!("{} diagnostic(s)", diagnostics.len()))
    })
}
