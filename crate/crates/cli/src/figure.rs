//! Data series for the four key-rate figures.
//!
//! * 2, 4: rates against channel transmission T, one series per LO
//!   transmission η, reverse (2) and direct (4) reconciliation.
//! * 3, 5: rates against LO attenuation 1 - η, one series per fiber length,
//!   reverse (3) and direct (5) reconciliation.

use loattack_core::{LinkBudget, Reconciliation};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::grid::axis_values;
use crate::point::{evaluate, AnalyticPoint, Link};

pub const FIGURE_VS: f64 = 20.0;

/// LO transmissions of the T-axis figures. The last one is a control
/// series without attack.
pub const FIGURE_ETAS: [f64; 5] = [0.85, 0.90, 0.95, 0.99, 1.0];

pub const FIGURE_DISTANCES_KM: [f64; 5] = [10.0, 20.0, 30.0, 40.0, 50.0];

/// The zero-excess attack is singular at T = 1, so the axis stops at 0.99.
pub const T_AXIS: (f64, f64, f64) = (0.02, 0.99, 0.01);

pub const ONE_MINUS_ETA_AXIS: (f64, f64, f64) = (0.0, 0.3, 0.002);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    VersusTransmission,
    VersusLoAttenuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigureSpec {
    pub id: u8,
    pub kind: FigureKind,
    pub direction: Reconciliation,
}

impl FigureSpec {
    pub fn from_id(id: u8) -> CliResult<Self> {
        let (kind, direction) = match id {
            2 => (FigureKind::VersusTransmission, Reconciliation::Reverse),
            3 => (FigureKind::VersusLoAttenuation, Reconciliation::Reverse),
            4 => (FigureKind::VersusTransmission, Reconciliation::Direct),
            5 => (FigureKind::VersusLoAttenuation, Reconciliation::Direct),
            _ => {
                return Err(CliError::Config(format!(
                    "unknown figure id {id} (expected 2, 3, 4 or 5)"
                )))
            }
        };
        Ok(Self { id, kind, direction })
    }

    /// `(link, eta)` for every row, series by series, each in axis order.
    fn grid(&self) -> CliResult<Vec<(Link, f64)>> {
        let mut out = Vec::new();
        match self.kind {
            FigureKind::VersusTransmission => {
                let ts = axis_values(T_AXIS.0, T_AXIS.1, T_AXIS.2)?;
                for eta in FIGURE_ETAS {
                    out.extend(ts.iter().map(|&t| (Link::Transmission(t), eta)));
                }
            }
            FigureKind::VersusLoAttenuation => {
                let xs = axis_values(ONE_MINUS_ETA_AXIS.0, ONE_MINUS_ETA_AXIS.1, ONE_MINUS_ETA_AXIS.2)?;
                for d in FIGURE_DISTANCES_KM {
                    let link = Link::Fiber(LinkBudget::with_default_loss(d)?);
                    out.extend(xs.iter().map(|&x| (link, 1.0 - x)));
                }
            }
        }
        Ok(out)
    }

    pub fn points(&self) -> CliResult<Vec<AnalyticPoint>> {
        self.grid()?
            .into_par_iter()
            .map(|(link, eta)| evaluate(FIGURE_VS, link, eta, None, self.direction))
            .collect()
    }
}

pub fn figure_points(id: u8) -> CliResult<Vec<AnalyticPoint>> {
    FigureSpec::from_id(id)?.points()
}
