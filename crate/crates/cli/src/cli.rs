use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use loattack_core::{LinkBudget, Reconciliation};

use crate::check::{run_check, CheckGrid};
use crate::error::{CliError, CliResult};
use crate::figure::figure_points;
use crate::output::{format_sig, write_stdout, Format};
use crate::point::{analytic_table, evaluate, Link};
use crate::sweep::{simulate_table, sweep_table, SweepConfig};

/// Key rates of Gaussian-modulated CV-QKD under an LO intensity attack.
#[derive(Debug, Parser)]
#[command(name = "loattack", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key-rate report for a single protocol point
    Keyrate(KeyrateArgs),
    /// Data series for figure 2, 3, 4 or 5
    Figure(FigureArgs),
    /// Analytic key rates along one parameter axis
    Sweep(SweepConfig),
    /// Monte Carlo estimates next to their analytic values
    Simulate(SweepConfig),
    /// Oracle-equivalence and physicality checks over a grid
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct KeyrateArgs {
    /// Modulation variance V_S
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub vs: f64,
    /// Channel transmission
    #[arg(long, conflicts_with = "distance_km", required_unless_present = "distance_km", allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub distance_km: Option<f64>,
    #[arg(long, default_value_t = loattack_core::channel::DEFAULT_LOSS_DB_PER_KM)]
    pub loss_db_per_km: f64,
    /// LO transmission
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub eta: f64,
    /// dr or rr
    #[arg(long, default_value = "rr")]
    pub direction: Reconciliation,
    /// Eve's noise variance; the zero-excess attack when absent
    #[arg(long, allow_negative_numbers = true)]
    pub noise: Option<f64>,
    /// Print JSON instead of `name: value` lines
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long)]
    pub id: u8,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 5.0, 20.0, 40.0])]
    pub vs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.85, 0.9, 0.95, 1.0])]
    pub eta: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub t_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub t_step: f64,
    /// Added to the cloner-side values; any nonzero value should fail
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb: f64,
}

/// Renders a report as `name: value` lines, 6 significant digits.
pub fn keyrate_text(args: &KeyrateArgs) -> CliResult<String> {
    let point = keyrate_point(args)?;
    if args.json {
        let mut s = serde_json::to_string_pretty(&point).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        return Ok(s);
    }
    let r = &point.report;
    let mut lines = vec![("direction", point.direction.to_string())];
    if let Some(d) = point.distance_km {
        lines.push(("distance_km", format_sig(d, 6)));
    }
    for (name, x) in [
        ("transmission", point.transmission),
        ("eta", point.eta),
        ("noise", point.noise),
        ("i_ab", r.i_ab),
        ("holevo_true", r.holevo_true),
        ("holevo_pseudo", r.holevo_pseudo),
        ("k_true", r.k_true),
        ("k_pseudo", r.k_pseudo),
        ("intercepted", r.intercepted),
    ] {
        lines.push((name, format_sig(x, 6)));
    }
    lines.push(("secure", r.secure.to_string()));
    Ok(lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect())
}

fn keyrate_point(args: &KeyrateArgs) -> CliResult<crate::point::AnalyticPoint> {
    let link = match (args.t, args.distance_km) {
        (Some(t), None) => Link::Transmission(t),
        (None, Some(d)) => Link::Fiber(LinkBudget::new(d, args.loss_db_per_km)?),
        _ => return Err(CliError::Config("give exactly one of --t and --distance-km".into())),
    };
    evaluate(args.vs, link, args.eta, args.noise, args.direction)
}

fn print(text: &str) -> CliResult<()> {
    write_stdout(text.as_bytes())
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Keyrate(args) => print(&keyrate_text(&args)?),
        Command::Figure(args) => {
            let table = analytic_table(&figure_points(args.id)?);
            table.write(args.out.as_deref(), args.format)
        }
        Command::Sweep(cfg) => {
            let cfg = cfg.resolve()?;
            sweep_table(&cfg)?.write(cfg.out.as_deref(), cfg.format())
        }
        Command::Simulate(cfg) => {
            let cfg = cfg.resolve()?;
            simulate_table(&cfg)?.write(cfg.out.as_deref(), cfg.format())
        }
        Command::Check(args) => {
            let grid = CheckGrid::new(args.vs, args.eta, args.t_min, args.t_max, args.t_step)?;
            let summary = run_check(&grid, args.perturb)?;
            print(&summary.report())?;
            if summary.passed() {
                Ok(())
            } else {
                Err(CliError::Invariant(format!(
                    "{} of {} grid points failed",
                    summary.failing().len(),
                    summary.points.len()
                )))
            }
        }
    }
}
