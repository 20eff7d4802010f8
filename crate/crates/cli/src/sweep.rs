//! `sweep` and `simulate`: a flat JSON config file, overridden field by field
//! by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use loattack_core::channel::{excess_noise, excess_noise_unmonitored, DEFAULT_LOSS_DB_PER_KM};
use loattack_core::sim::{simulate, MIN_ESTIMATION_SAMPLES};
use loattack_core::{keyrates, LinkBudget, Reconciliation};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::grid::{axis_values, Axis};
use crate::output::{Cell, Format, Table};
use crate::point::{analytic_table, evaluate, params, Link};

pub const SEED_ENV: &str = "LOATTACK_SEED";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_N_PULSES: u64 = 1_000_000;
pub const DEFAULT_VS: f64 = 20.0;

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Flat JSON file with these same field names; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub stop: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,

    /// Modulation variance V_S [default: 20]
    #[arg(long, allow_negative_numbers = true)]
    pub vs: Option<f64>,
    /// LO transmission [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Channel transmission (exclusive with --distance-km)
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub distance_km: Option<f64>,
    /// [default: 0.2]
    #[arg(long)]
    pub loss_db_per_km: Option<f64>,
    /// dr or rr [default: rr]
    #[arg(long)]
    pub direction: Option<Reconciliation>,
    /// Eve's noise variance; the zero-excess attack when absent
    #[arg(long, allow_negative_numbers = true)]
    pub noise: Option<f64>,

    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Pulses per simulated point [default: 1000000]
    #[arg(long)]
    pub n_pulses: Option<u64>,
    /// RNG seed [default: $LOATTACK_SEED, else 1]
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set in `self` win over those in `file`.
    pub fn overriding(self, file: SweepConfig) -> Self {
        Self {
            config: self.config.or(file.config),
            axis: self.axis.or(file.axis),
            start: self.start.or(file.start),
            stop: self.stop.or(file.stop),
            step: self.step.or(file.step),
            vs: self.vs.or(file.vs),
            eta: self.eta.or(file.eta),
            t: self.t.or(file.t),
            distance_km: self.distance_km.or(file.distance_km),
            loss_db_per_km: self.loss_db_per_km.or(file.loss_db_per_km),
            direction: self.direction.or(file.direction),
            noise: self.noise.or(file.noise),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            n_pulses: self.n_pulses.or(file.n_pulses),
            seed: self.seed.or(file.seed),
        }
    }

    /// Merges in the file named by `--config`, if any.
    pub fn resolve(self) -> CliResult<Self> {
        match &self.config {
            Some(path) => {
                let file = Self::load(path)?;
                Ok(self.overriding(file))
            }
            None => Ok(self),
        }
    }

    pub fn vs(&self) -> f64 {
        self.vs.unwrap_or(DEFAULT_VS)
    }

    pub fn direction(&self) -> Reconciliation {
        self.direction.unwrap_or(Reconciliation::Reverse)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    fn loss(&self) -> f64 {
        self.loss_db_per_km.unwrap_or(DEFAULT_LOSS_DB_PER_KM)
    }

    fn fiber(&self, distance_km: f64) -> CliResult<Link> {
        Ok(Link::Fiber(LinkBudget::new(distance_km, self.loss())?))
    }

    fn fixed_link(&self) -> CliResult<Link> {
        match (self.t, self.distance_km) {
            (Some(t), None) => Ok(Link::Transmission(t)),
            (None, Some(d)) => self.fiber(d),
            (Some(_), Some(_)) => Err(CliError::Config("set only one of t and distance_km".into())),
            (None, None) => Err(CliError::Config("one of t or distance_km is required".into())),
        }
    }

    fn axis_range(&self) -> CliResult<Vec<f64>> {
        match (self.start, self.stop, self.step) {
            (Some(a), Some(b), Some(s)) => axis_values(a, b, s),
            _ => Err(CliError::Config("an axis needs start, stop and step".into())),
        }
    }

    /// `(link, eta)` for every point in axis order. Without an axis this is
    /// the single fixed point.
    pub fn points(&self) -> CliResult<Vec<(Link, f64)>> {
        let Some(axis) = self.axis else {
            return Ok(vec![(self.fixed_link()?, self.eta.unwrap_or(1.0))]);
        };
        let values = self.axis_range()?;
        match axis {
            Axis::T | Axis::Distance => {
                if self.t.is_some() || self.distance_km.is_some() {
                    return Err(CliError::Config(
                        "t and distance_km are swept; do not fix them".into(),
                    ));
                }
                let eta = self.eta.unwrap_or(1.0);
                values
                    .into_iter()
                    .map(|x| {
                        let link = match axis {
                            Axis::T => Link::Transmission(x),
                            _ => self.fiber(x)?,
                        };
                        Ok((link, eta))
                    })
                    .collect()
            }
            Axis::OneMinusEta => {
                if self.eta.is_some() {
                    return Err(CliError::Config("eta is swept; do not fix it".into()));
                }
                let link = self.fixed_link()?;
                Ok(values.into_iter().map(|x| (link, 1.0 - x)).collect())
            }
        }
    }

    pub fn n_pulses(&self) -> CliResult<usize> {
        let n = self.n_pulses.unwrap_or(DEFAULT_N_PULSES);
        if n < MIN_ESTIMATION_SAMPLES as u64 {
            return Err(CliError::Config(format!(
                "n_pulses must be at least {MIN_ESTIMATION_SAMPLES}, got {n}"
            )));
        }
        usize::try_from(n).map_err(|_| CliError::Config(format!("n_pulses {n} too large")))
    }

    /// Flag or config value, then `$LOATTACK_SEED`, then 1.
    pub fn seed(&self) -> CliResult<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not a u64"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }
}

pub fn sweep_table(cfg: &SweepConfig) -> CliResult<Table> {
    if cfg.axis.is_none() {
        return Err(CliError::Config("sweep needs an axis (T, distance or one_minus_eta)".into()));
    }
    let (vs, direction) = (cfg.vs(), cfg.direction());
    let points = cfg
        .points()?
        .into_par_iter()
        .map(|(link, eta)| evaluate(vs, link, eta, cfg.noise, direction))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(analytic_table(&points))
}

pub const SIMULATE_HEADERS: [&str; 18] = [
    "direction",
    "distance_km",
    "transmission",
    "eta",
    "noise",
    "n_pulses",
    "seed",
    "t_hat",
    "eps_hat",
    "t_analytic",
    "eps_analytic",
    "t_hat_monitored",
    "eps_hat_monitored",
    "k_true_sim",
    "k_true_analytic",
    "k_pseudo_sim",
    "k_pseudo_analytic",
    "intercepted_sim",
];

/// Every point reuses the same seed, so points differ only by parameters.
pub fn simulate_table(cfg: &SweepConfig) -> CliResult<Table> {
    let n = cfg.n_pulses()?;
    let seed = cfg.seed()?;
    let (vs, direction) = (cfg.vs(), cfg.direction());
    let mut table = Table::new(SIMULATE_HEADERS.to_vec());
    // each point is already parallel across pulse chunks
    for (link, eta) in cfg.points()? {
        let t = link.transmission();
        let p = params(vs, t, eta, cfg.noise, direction)?;
        let sim = simulate(&p, n, seed)?;
        let analytic = keyrates(&p)?;
        let eps_w = excess_noise_unmonitored(excess_noise(t, p.noise())?, t, eta)?;
        table.push(vec![
            direction.short_name().into(),
            link.distance_km().into(),
            t.into(),
            eta.into(),
            p.noise().into(),
            Cell::Int(n as u64),
            Cell::Int(seed),
            sim.unmonitored.t_hat.into(),
            sim.unmonitored.eps_hat.into(),
            (eta * t).into(),
            eps_w.into(),
            sim.monitored.t_hat.into(),
            sim.monitored.eps_hat.into(),
            sim.report.k_true.into(),
            analytic.k_true.into(),
            sim.report.k_pseudo.into(),
            analytic.k_pseudo.into(),
            sim.report.intercepted.into(),
        ]);
    }
    Ok(table)
}
