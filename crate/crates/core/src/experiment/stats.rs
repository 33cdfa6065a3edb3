use serde::Serialize;

use super::runner::TrialSummary;
use crate::error::{Error, Result};

/// Sample statistics; `std` uses the `n - 1` denominator and is zero for a
/// single sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("statistics of an empty sample".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Stats { mean, std, min, max })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub f_opt: Stats,
    pub wall_time_s: Stats,
}

pub fn summarize_trials(trials: &[TrialSummary]) -> Result<Aggregate> {
    if trials.is_empty() {
        return Err(Error::InvalidArgument("no trials to summarize".into()));
    }
    let f: Vec<f64> = trials.iter().map(|t| t.f_opt).collect();
    let w: Vec<f64> = trials.iter().map(|t| t.wall_time_s).collect();
    Ok(Aggregate {
        f_opt: Stats::of(&f)?,
        wall_time_s: Stats::of(&w)?,
    })
}
