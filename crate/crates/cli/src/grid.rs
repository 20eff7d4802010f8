use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Swept parameter of a `sweep` or `simulate` run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Axis {
    #[serde(rename = "T", alias = "t")]
    #[value(name = "T", alias = "t")]
    T,
    #[serde(rename = "distance")]
    #[value(name = "distance")]
    Distance,
    #[serde(rename = "one_minus_eta")]
    #[value(name = "one_minus_eta")]
    OneMinusEta,
}

pub(crate) fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Points `start, start + step, ...` up to and including `stop`. Each value
/// is computed as `start + i*step` and rounded to 12 decimals so that grids
/// hit their nominal values exactly.
pub fn axis_values(start: f64, stop: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(CliError::Config("axis bounds and step must be finite".into()));
    }
    if step <= 0.0 {
        return Err(CliError::Config(format!("step must be > 0, got {step}")));
    }
    if stop < start {
        return Err(CliError::Config(format!(
            "empty range: stop {stop} is below start {start}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| round12(start + i as f64 * step)).collect())
}
