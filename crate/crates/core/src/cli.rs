//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on any input or validation error, 2 when
//! `reproduce` finds a check outside its tolerance.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Result;
use crate::fixtures::read_input;
use crate::fleet_plan::{kkt_verify, plan, KktCertificate, PlanResult, Scenario};
use crate::mc_oracle::{estimate_constants, RouteMetric};
use crate::reproduce::run_bundled_checks;
use crate::scenario_io::{compare_depots, emit_csv, emit_report, parse_partition, parse_scenario, ReportFormat};
use crate::sensitivity::{sweep, SweepParameter, SweepSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_REPRODUCTION: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "sdr-planner", version, about = "Sidewalk delivery robot fleet planner")]
pub struct Cli {
    /// Output format; json and csv are stable, text is for people.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub output: OutputFormat,
    /// Master seed for Monte Carlo runs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal fleet and costs for one scenario.
    Plan {
        scenario: PathBuf,
        /// Override a scenario field, e.g. policy.convention=single_leg.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Plan over a grid of one parameter.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Plan each depot of a partition and compare with one central depot.
    CompareDepots {
        partition: PathBuf,
        /// Scenario supplying the shared rates and robot.
        #[arg(long, default_value = "manhattan_lunch.json")]
        scenario: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Estimate routing constants by Monte Carlo.
    ValidateCa {
        #[arg(long, default_value_t = 100)]
        orders: usize,
        /// Square-region area.
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        #[arg(long, value_enum, default_value = "euclidean")]
        metric: MetricArg,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Re-run the case-study figures against their published values.
    Reproduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Manhattan,
}

impl From<MetricArg> for RouteMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => RouteMetric::Euclidean,
            MetricArg::Manhattan => RouteMetric::Manhattan,
        }
    }
}

/// Parses `args` (program name first), runs the command and writes its
/// output. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INVALID;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli) {
        Ok((bytes, code)) => {
            if let Err(e) = out.write_all(&bytes) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INVALID;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn load(path: &Path, overrides: &[String]) -> Result<Scenario> {
    parse_scenario(&read_input(path)?, overrides)
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn opt(value: Option<f64>, places: usize) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{v:.places$}"))
}

#[derive(Serialize)]
struct PlanOutput<'a> {
    plan: &'a PlanResult,
    kkt: &'a KktCertificate,
}

fn execute(cli: &Cli) -> Result<(Vec<u8>, u8)> {
    let bytes = match &cli.command {
        Command::Plan { scenario, overrides } => {
            let s = load(scenario, overrides)?;
            let p = plan(&s)?;
            let kkt = kkt_verify(&s, &p)?;
            match cli.output {
                OutputFormat::Json => json(&PlanOutput { plan: &p, kkt: &kkt })?,
                OutputFormat::Csv => emit_csv([&p])?,
                OutputFormat::Text => plan_text(&s, &p, &kkt).into_bytes(),
            }
        }
        Command::Sweep { scenario, param, from, to, steps, overrides } => {
            let spec = SweepSpec {
                parameter: param.parse::<SweepParameter>()?,
                from: *from,
                to: *to,
                steps: *steps,
                baseline: load(scenario, overrides)?,
            };
            let table = sweep(&spec)?;
            match cli.output {
                OutputFormat::Json => json(&table)?,
                OutputFormat::Csv => emit_csv(table.rows.iter().map(|r| SweepCsvRow {
                    value: r.value,
                    orders: r.orders,
                    fleet_size: r.plan.fleet_size,
                    total_cost: r.plan.total_cost,
                    average_cost: r.plan.average_cost,
                    avg_route_length: r.plan.avg_route_length,
                    feasible: r.plan.feasible,
                }))?,
                OutputFormat::Text => {
                    let mut t = format!(
                        "{:>12} {:>10} {:>8} {:>10} {:>8} {:>8}\n",
                        spec.parameter.name(),
                        "orders",
                        "fleet",
                        "total $",
                        "$/order",
                        "mi/robot"
                    );
                    for r in &table.rows {
                        let _ = writeln!(
                            t,
                            "{:>12.4} {:>10.2} {:>8.2} {:>10.2} {:>8} {:>8}",
                            r.value,
                            r.orders,
                            r.plan.fleet_size,
                            r.plan.total_cost,
                            opt(r.plan.average_cost, 3),
                            opt(r.plan.avg_route_length, 3)
                        );
                    }
                    let _ = writeln!(
                        t,
                        "average cost {:?}, total cost {:?}, fleet {:?}",
                        table.average_cost_trend, table.total_cost_trend, table.fleet_trend
                    );
                    t.into_bytes()
                }
            }
        }
        Command::CompareDepots { partition, scenario, overrides } => {
            let base = load(scenario, overrides)?;
            let partition = parse_partition(&read_input(partition)?, &base.region)?;
            let rows = compare_depots(&partition, &base)?.rows();
            match cli.output {
                OutputFormat::Json => emit_report(&rows, ReportFormat::Json)?,
                OutputFormat::Csv => emit_report(&rows, ReportFormat::Csv)?,
                OutputFormat::Text => {
                    let mut t = format!(
                        "{:<34} {:>8} {:>8} {:>8} {:>10} {:>8}\n",
                        "depot", "sq mi", "orders", "fleet", "total $", "$/order"
                    );
                    for r in &rows {
                        let _ = writeln!(
                            t,
                            "{:<34} {:>8.3} {:>8.2} {:>8.2} {:>10.2} {:>8}",
                            r.name,
                            r.area_sq_mi,
                            r.orders,
                            r.fleet_size,
                            r.total_cost,
                            opt(r.average_cost, 2)
                        );
                    }
                    t.into_bytes()
                }
            }
        }
        Command::ValidateCa { orders, area, metric, trials } => {
            let est = estimate_constants(*orders, *area, (*metric).into(), *trials, cli.seed)?;
            match cli.output {
                OutputFormat::Json => json(&est)?,
                OutputFormat::Csv => emit_csv(&est.trials)?,
                OutputFormat::Text => format!(
                    "orders {} | area {} | {:?} | trials {} | seed {}\n\
                     k_hat        {:.4}\n\
                     kplus_hat    {:.4}\n\
                     rho_quantile {:.4}\n\
                     mean single-leg tour {:.4}\n\
                     mean integrated tour {:.4}\n",
                    est.n_orders,
                    est.area,
                    est.metric,
                    est.trials.len(),
                    est.master_seed,
                    est.k_hat,
                    est.kplus_hat,
                    est.rho_quantile,
                    est.mean_single_leg,
                    est.mean_integrated
                )
                .into_bytes(),
            }
        }
        Command::Reproduce => {
            let checks = run_bundled_checks()?;
            let code = if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_REPRODUCTION };
            let bytes = match cli.output {
                OutputFormat::Json => json(&checks)?,
                OutputFormat::Csv => emit_csv(&checks)?,
                OutputFormat::Text => {
                    let mut t = String::new();
                    for c in &checks {
                        let _ = writeln!(
                            t,
                            "{} [{:<10}] {:<48} expected {:>10.4} got {:>10.4} (tol {})",
                            if c.passed { "PASS" } else { "FAIL" },
                            c.group,
                            c.name,
                            c.expected,
                            c.actual,
                            c.tolerance
                        );
                    }
                    let failed = checks.iter().filter(|c| !c.passed).count();
                    let _ = writeln!(t, "{} checks, {failed} failed", checks.len());
                    t.into_bytes()
                }
            };
            return Ok((bytes, code));
        }
    };
    Ok((bytes, EXIT_OK))
}

#[derive(Serialize)]
struct SweepCsvRow {
    value: f64,
    orders: f64,
    fleet_size: f64,
    total_cost: f64,
    average_cost: Option<f64>,
    avg_route_length: Option<f64>,
    feasible: bool,
}

fn plan_text(s: &Scenario, p: &PlanResult, kkt: &KktCertificate) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "orders            {:.2} over {:.3} sq mi ({:?})", s.orders, s.region.area(), s.convention);
    let _ = writeln!(t, "fleet size        {:.2} (deploy {})", p.fleet_size, p.fleet_size_ceil);
    let _ = writeln!(t, "tour length       {:.3} mi", p.tour_length);
    let _ = writeln!(t, "miles per robot   {}", opt(p.avg_route_length, 3));
    let _ = writeln!(t, "total cost        ${:.2}", p.total_cost);
    let _ = writeln!(t, "average cost      ${} per order", opt(p.average_cost, 2));
    let _ = writeln!(t, "binding           {:?}", p.binding);
    let _ = writeln!(t, "multipliers       time {:.4}, range {:.4}", p.lambda_time, p.lambda_range);
    let _ = writeln!(t, "feasible          {}", p.feasible);
    let _ = writeln!(t, "KKT certificate   {}", if kkt.passed { "pass" } else { "FAIL" });
    t
}
