use std::collections::BTreeMap;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::runner::{execute, write_reports, TrialOutcome};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub stepsize: String,
    /// Trials where this solver alone had the best `f_opt`.
    pub wins: usize,
    /// Trials where this solver shared the best `f_opt`.
    pub ties: usize,
    pub losses: usize,
    pub mean_f_opt: f64,
    pub mean_wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub maximize: bool,
    pub trials: usize,
    pub rows: Vec<ComparisonRow>,
}

/// Paired comparison of the outcomes of every configured solver; errored
/// runs never win.
pub fn comparison_table(cfg: &ExperimentConfig, outcomes: &[TrialOutcome]) -> Result<ComparisonTable> {
    let k = cfg.solvers.len();
    if k < 2 {
        return Err(Error::Configuration("solvers: comparison needs at least two solvers".into()));
    }
    let better = |a: f64, b: f64| if cfg.maximizes() { a > b } else { a < b };
    let mut by_trial: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
    for o in outcomes {
        let slot = by_trial.entry(o.summary.trial_index).or_insert_with(|| vec![None; k]);
        if o.summary.status != "error" && o.summary.f_opt.is_finite() {
            slot[o.solver_index] = Some(o.summary.f_opt);
        }
    }
    let mut wins = vec![0; k];
    let mut ties = vec![0; k];
    let mut losses = vec![0; k];
    for values in by_trial.values() {
        let best = values.iter().flatten().copied().reduce(|a, b| if better(b, a) { b } else { a });
        let holders: Vec<usize> = (0..k).filter(|&j| best.is_some() && values[j] == best).collect();
        for j in 0..k {
            if holders.contains(&j) {
                if holders.len() == 1 {
                    wins[j] += 1;
                } else {
                    ties[j] += 1;
                }
            } else {
                losses[j] += 1;
            }
        }
    }
    let rows = (0..k)
        .map(|j| {
            let mine: Vec<_> = outcomes.iter().filter(|o| o.solver_index == j && o.summary.status != "error").collect();
            let mean = |f: &dyn Fn(&TrialOutcome) -> f64| {
                if mine.is_empty() {
                    f64::NAN
                } else {
                    mine.iter().map(|o| f(o)).sum::<f64>() / mine.len() as f64
                }
            };
            ComparisonRow {
                algorithm: cfg.solvers[j].algorithm.as_str().to_string(),
                stepsize: cfg.solver_label(j),
                wins: wins[j],
                ties: ties[j],
                losses: losses[j],
                mean_f_opt: mean(&|o| o.summary.f_opt),
                mean_wall_time_s: mean(&|o| o.summary.wall_time_s),
            }
        })
        .collect();
    Ok(ComparisonTable {
        maximize: cfg.maximizes(),
        trials: by_trial.len(),
        rows,
    })
}

/// Runs the experiment, writes its reports plus `comparison.json`, and
/// returns the comparison.
pub fn compare_algorithms(cfg: &ExperimentConfig) -> Result<ComparisonTable> {
    if cfg.solvers.len() < 2 {
        return Err(Error::Configuration("solvers: comparison needs at least two solvers".into()));
    }
    let outcomes = execute(cfg)?;
    write_reports(cfg, &outcomes)?;
    let table = comparison_table(cfg, &outcomes)?;
    std::fs::write(cfg.output.directory.join("comparison.json"), serde_json::to_string_pretty(&table)? + "\n")?;
    Ok(table)
}
