//! One analytic evaluation point and its CSV row.

use loattack_core::channel::noise_for_zero_excess;
use loattack_core::{keyrates, KeyRateReport, LinkBudget, ProtocolParams, Reconciliation};
use serde::Serialize;

use crate::error::CliResult;
use crate::grid::round12;
use crate::output::{Cell, Table};

pub const ANALYTIC_HEADERS: [&str; 13] = [
    "direction",
    "distance_km",
    "transmission",
    "eta",
    "one_minus_eta",
    "noise",
    "i_ab",
    "holevo_true",
    "holevo_pseudo",
    "k_true",
    "k_pseudo",
    "intercepted",
    "secure",
];

/// Where the channel transmission comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link {
    Transmission(f64),
    Fiber(LinkBudget),
}

impl Link {
    pub fn transmission(&self) -> f64 {
        match self {
            Link::Transmission(t) => *t,
            Link::Fiber(b) => b.transmission(),
        }
    }

    pub fn distance_km(&self) -> Option<f64> {
        match self {
            Link::Transmission(_) => None,
            Link::Fiber(b) => Some(b.distance_km),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticPoint {
    pub direction: Reconciliation,
    pub distance_km: Option<f64>,
    pub transmission: f64,
    pub eta: f64,
    pub noise: f64,
    #[serde(flatten)]
    pub report: KeyRateReport,
}

/// Eve's noise when she tunes the attack so that Bob sees no excess noise.
/// Without LO attenuation she has nothing to hide, so `N = 1`.
pub fn attack_noise(eta: f64, t: f64) -> CliResult<f64> {
    if eta == 1.0 {
        return Ok(1.0);
    }
    Ok(noise_for_zero_excess(eta, t)?)
}

/// Builds the protocol point; `noise: None` means the zero-excess attack.
pub fn params(
    vs: f64,
    t: f64,
    eta: f64,
    noise: Option<f64>,
    direction: Reconciliation,
) -> CliResult<ProtocolParams> {
    // validate ranges before the tuning formula sees them
    let p = ProtocolParams::new(vs, t, eta, 1.0, direction)?;
    let n = match noise {
        Some(n) => n,
        None => attack_noise(eta, t)?,
    };
    Ok(p.with_noise(n)?)
}

pub fn evaluate(
    vs: f64,
    link: Link,
    eta: f64,
    noise: Option<f64>,
    direction: Reconciliation,
) -> CliResult<AnalyticPoint> {
    let t = link.transmission();
    let p = params(vs, t, eta, noise, direction)?;
    Ok(AnalyticPoint {
        direction,
        distance_km: link.distance_km(),
        transmission: t,
        eta,
        noise: p.noise(),
        report: keyrates(&p)?,
    })
}

impl AnalyticPoint {
    pub fn cells(&self) -> Vec<Cell> {
        let r = &self.report;
        vec![
            self.direction.short_name().into(),
            self.distance_km.into(),
            self.transmission.into(),
            self.eta.into(),
            round12(1.0 - self.eta).into(),
            self.noise.into(),
            r.i_ab.into(),
            r.holevo_true.into(),
            r.holevo_pseudo.into(),
            r.k_true.into(),
            r.k_pseudo.into(),
            r.intercepted.into(),
            r.secure.into(),
        ]
    }
}

pub fn analytic_table(points: &[AnalyticPoint]) -> Table {
    let mut table = Table::new(ANALYTIC_HEADERS.to_vec());
    for p in points {
        table.push(p.cells());
    }
    table
}
