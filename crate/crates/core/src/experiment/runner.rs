use std::fs;
use std::path::Path;
use std::sync::Arc;

use log::{info, warn};
use ndarray::ArrayView1;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig, ProblemKind, Selector};
use super::stats::{summarize_trials, Aggregate};
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::problem::SumProblem;
use crate::problems::examples::example3_adversarial_selector;
use crate::problems::feasibility::{random_halfspace_system, RandomSystemSpec};
use crate::problems::mcdpe::{
    default_targets, estimate_all_lipschitz, generate_mcdpe, mcdpe_start, sor_direct_problem, sor_to_sum_problem, McdpeInstance,
};
use crate::problems::{make_example3, make_example4};
use crate::rng::derive_seed;
use crate::solvers::{classical_run, incsgm_run, randsgm_run, sgpm_run, IncSgmOptions, RunResult};

/// Ascent steps per ratio when estimating targets.
pub const DEFAULT_TARGET_BUDGET: usize = 200;
/// Random pairs used for each Lipschitz estimate.
pub const LIPSCHITZ_SAMPLES: usize = 256;

pub const TRIALS_HEADER: [&str; 9] = [
    "trial",
    "seed",
    "algorithm",
    "stepsize",
    "f_opt",
    "iterations",
    "subgrad_evals",
    "wall_time_s",
    "status",
];

pub const TRAJECTORY_HEADER: [&str; 5] = ["k", "f_value", "stepsize", "dist", "evals"];

/// One row of `trials.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub trial_index: usize,
    pub seed: u64,
    pub algorithm: String,
    pub stepsize: String,
    /// Best objective value, or the best efficiency for Cobb-Douglas runs.
    pub f_opt: f64,
    pub iterations: usize,
    pub subgradient_evals: usize,
    pub wall_time_s: f64,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub k: usize,
    pub f_value: f64,
    pub stepsize: f64,
    pub dist: Option<f64>,
    pub evals: usize,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub solver_index: usize,
    pub summary: TrialSummary,
    pub trajectory: Vec<TrajectoryRow>,
}

/// Which formulation a solver ran on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// The configured problem as is.
    Plain,
    /// Sum of negated ratios, maximizing the efficiency directly.
    Direct,
    /// Ratio shortfalls below estimated targets.
    Feasibility,
}

impl ExperimentConfig {
    /// Whether `f_opt` is maximized (efficiency) rather than minimized.
    pub fn maximizes(&self) -> bool {
        self.problem.kind == ProblemKind::Mcdpe
    }

    pub fn solve_mode(&self, j: usize) -> SolveMode {
        match (self.problem.kind, self.solvers[j].algorithm) {
            (ProblemKind::Mcdpe, Algorithm::Sgpm) => SolveMode::Feasibility,
            (ProblemKind::Mcdpe, _) => SolveMode::Direct,
            _ => SolveMode::Plain,
        }
    }

    /// Label of solver `j` in reports.
    pub fn solver_label(&self, j: usize) -> String {
        let s = &self.solvers[j];
        match s.algorithm {
            Algorithm::Sgpm => format!("gamma={}", s.gamma.unwrap_or(1.0)),
            _ => self.stepsize_rule(j).map(|r| r.label()).unwrap_or_default(),
        }
    }
}

/// A trial's problem in every formulation the configured solvers need.
struct TrialInstance {
    plain: Option<SumProblem>,
    mcdpe: Option<(Arc<McdpeInstance>, SumProblem, SumProblem)>,
    x0: Point,
}

impl TrialInstance {
    fn problem(&self, mode: SolveMode) -> &SumProblem {
        match (mode, &self.plain, &self.mcdpe) {
            (SolveMode::Plain, Some(p), _) => p,
            (SolveMode::Direct, _, Some((_, d, _))) => d,
            (SolveMode::Feasibility, _, Some((_, _, f))) => f,
            _ => unreachable!("mode matches problem type"),
        }
    }

    fn report_value(&self, x: ArrayView1<f64>, f: f64) -> f64 {
        match &self.mcdpe {
            Some((inst, _, _)) => inst.efficiency(x).unwrap_or(f64::NAN),
            None => f,
        }
    }
}

fn build_instance(cfg: &ExperimentConfig, seed: u64) -> Result<TrialInstance> {
    let p = &cfg.problem;
    let given = p.x0.as_ref().map(|v| Point::from(v.clone()));
    let plain = |problem: SumProblem, default_x0: Point| TrialInstance {
        plain: Some(problem),
        mcdpe: None,
        x0: given.clone().unwrap_or(default_x0),
    };
    Ok(match p.kind {
        ProblemKind::Example3 => plain(make_example3(), Point::from_elem(1, 5.0)),
        ProblemKind::Example4 => plain(make_example4(), Point::zeros(1)),
        ProblemKind::Feasibility => {
            let (m, n) = (p.m.unwrap_or(1), p.n.unwrap_or(1));
            let sys = random_halfspace_system(&RandomSystemSpec::new(n, m), seed)?;
            plain(sys.problem, Point::from_elem(n, 5.0))
        }
        ProblemKind::Mcdpe => {
            let inst = generate_mcdpe(p.m.unwrap_or(1), p.n.unwrap_or(1), p.s.unwrap_or(1), seed)?;
            let targets = default_targets(&inst, p.target_budget.unwrap_or(DEFAULT_TARGET_BUDGET))?;
            let l = estimate_all_lipschitz(&inst, LIPSCHITZ_SAMPLES, seed)?;
            let inst = Arc::new(inst);
            let direct = sor_direct_problem(inst.clone(), &targets, &l, 1.0)?;
            let feasibility = sor_to_sum_problem(inst.clone(), &targets, &l, 1.0)?;
            let x0 = match given {
                Some(x) => x,
                None => mcdpe_start(&inst, direct.projector())?,
            };
            TrialInstance {
                plain: None,
                mcdpe: Some((inst, direct, feasibility)),
                x0,
            }
        }
    })
}

fn solve(cfg: &ExperimentConfig, j: usize, problem: &SumProblem, x0: &Point, seed: u64) -> Result<RunResult> {
    let spec = &cfg.solvers[j];
    let stop = cfg.stop_criteria()?;
    match spec.algorithm {
        Algorithm::Incsgm => {
            let opts = IncSgmOptions {
                tol_opt: spec.tol_opt,
                reorder: spec.reorder,
                seed: Some(seed),
            };
            incsgm_run(problem, x0.view(), &cfg.stepsize_rule(j)?, &stop, &opts)
        }
        Algorithm::Randsgm => randsgm_run(problem, x0.view(), &cfg.stepsize_rule(j)?, &stop, spec.tol_opt, seed),
        Algorithm::Sgpm => sgpm_run(problem, x0.view(), &cfg.sgpm_gamma(j)?, &stop, spec.tol_opt),
        Algorithm::Classical => {
            let rule = cfg.stepsize_rule(j)?;
            match spec.selector {
                Selector::Adversarial => classical_run(problem, x0.view(), &rule, &stop, &example3_adversarial_selector),
                Selector::Canonical => {
                    let canonical = |i: usize, z: ArrayView1<f64>| match problem.component(i).unit_quasi_subgradient(z) {
                        Err(Error::DegenerateDirection) => Ok(Point::zeros(z.len())),
                        other => other,
                    };
                    classical_run(problem, x0.view(), &rule, &stop, &canonical)
                }
            }
        }
    }
}

fn error_row(cfg: &ExperimentConfig, trial: usize, seed: u64, j: usize, err: &Error) -> TrialOutcome {
    warn!("trial {trial}, solver {j} ({}): {err}", cfg.solvers[j].algorithm.as_str());
    TrialOutcome {
        solver_index: j,
        summary: TrialSummary {
            trial_index: trial,
            seed,
            algorithm: cfg.solvers[j].algorithm.as_str().to_string(),
            stepsize: cfg.solver_label(j),
            f_opt: f64::NAN,
            iterations: 0,
            subgradient_evals: 0,
            wall_time_s: 0.0,
            status: "error".into(),
        },
        trajectory: Vec::new(),
    }
}

/// Runs every configured solver on the instance of trial `trial`.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Vec<TrialOutcome> {
    let seed = derive_seed(cfg.problem.master_seed, trial as u64);
    let instance = match build_instance(cfg, seed) {
        Ok(inst) => inst,
        Err(e) => return (0..cfg.solvers.len()).map(|j| error_row(cfg, trial, seed, j, &e)).collect(),
    };
    (0..cfg.solvers.len())
        .map(|j| {
            let problem = instance.problem(cfg.solve_mode(j));
            match solve(cfg, j, problem, &instance.x0, seed) {
                Err(e) => error_row(cfg, trial, seed, j, &e),
                Ok(run) => {
                    let trajectory: Vec<TrajectoryRow> = run
                        .trajectory
                        .iter()
                        .map(|r| TrajectoryRow {
                            k: r.k,
                            f_value: instance.report_value(r.x.view(), r.f_value),
                            stepsize: r.stepsize_used,
                            dist: r.dist_to_known_solution,
                            evals: r.subgradient_evals,
                        })
                        .collect();
                    // The point a run returns is its best point under its own
                    // objective; Cobb-Douglas runs report the efficiency there.
                    let f_opt = instance.report_value(run.best_point.view(), run.best_value);
                    TrialOutcome {
                        solver_index: j,
                        summary: TrialSummary {
                            trial_index: trial,
                            seed,
                            algorithm: cfg.solvers[j].algorithm.as_str().to_string(),
                            stepsize: cfg.solver_label(j),
                            f_opt,
                            iterations: run.iterations,
                            subgradient_evals: run.subgradient_evals,
                            wall_time_s: run.wall_time,
                            status: run.status.as_str().to_string(),
                        },
                        trajectory: if cfg.output.emit_trajectories { trajectory } else { Vec::new() },
                    }
                }
            }
        })
        .collect()
}

fn thread_cap() -> Option<usize> {
    std::env::var("QSUM_THREADS").ok()?.trim().parse::<usize>().ok().filter(|n| *n >= 1)
}

/// Runs all trials (in parallel if configured) and returns the outcomes
/// sorted by trial, algorithm and solver position.
pub fn execute(cfg: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    let trials = cfg.run.trials;
    let mut outcomes: Vec<TrialOutcome> = if cfg.run.parallel_trials {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap() {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
        pool.install(|| (0..trials).into_par_iter().flat_map_iter(|t| run_trial(cfg, t)).collect())
    } else {
        (0..trials).flat_map(|t| run_trial(cfg, t)).collect()
    };
    outcomes.sort_by(|a, b| {
        (a.summary.trial_index, &a.summary.algorithm, a.solver_index).cmp(&(b.summary.trial_index, &b.summary.algorithm, b.solver_index))
    });
    Ok(outcomes)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

pub fn write_trials_csv(path: &Path, outcomes: &[TrialOutcome]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TRIALS_HEADER)?;
    for o in outcomes {
        let s = &o.summary;
        w.write_record([
            s.trial_index.to_string(),
            s.seed.to_string(),
            s.algorithm.clone(),
            s.stepsize.clone(),
            s.f_opt.to_string(),
            s.iterations.to_string(),
            s.subgradient_evals.to_string(),
            s.wall_time_s.to_string(),
            s.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.f_value.to_string(),
            r.stepsize.to_string(),
            r.dist.map(|d| d.to_string()).unwrap_or_default(),
            r.evals.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-solver aggregate in `summary.json`.
#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub algorithm: String,
    pub stepsize: String,
    pub mode: SolveMode,
    pub completed: usize,
    pub failed: usize,
    pub aggregate: Option<Aggregate>,
    pub mean_iterations: f64,
    pub mean_time_per_iteration_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub problem: ProblemKind,
    pub trials: usize,
    pub maximize: bool,
    pub solvers: Vec<SolverReport>,
}

pub fn summarize(cfg: &ExperimentConfig, outcomes: &[TrialOutcome]) -> ExperimentSummary {
    let solvers = (0..cfg.solvers.len())
        .map(|j| {
            let rows: Vec<&TrialSummary> = outcomes.iter().filter(|o| o.solver_index == j).map(|o| &o.summary).collect();
            let ok: Vec<TrialSummary> = rows.iter().filter(|s| s.status != "error").map(|s| (*s).clone()).collect();
            let mean = |f: &dyn Fn(&TrialSummary) -> f64| {
                if ok.is_empty() {
                    0.0
                } else {
                    ok.iter().map(f).sum::<f64>() / ok.len() as f64
                }
            };
            SolverReport {
                algorithm: cfg.solvers[j].algorithm.as_str().to_string(),
                stepsize: cfg.solver_label(j),
                mode: cfg.solve_mode(j),
                completed: ok.len(),
                failed: rows.len() - ok.len(),
                aggregate: summarize_trials(&ok).ok(),
                mean_iterations: mean(&|s| s.iterations as f64),
                mean_time_per_iteration_s: mean(&|s| if s.iterations == 0 { 0.0 } else { s.wall_time_s / s.iterations as f64 }),
            }
        })
        .collect();
    ExperimentSummary {
        problem: cfg.problem.kind,
        trials: cfg.run.trials,
        maximize: cfg.maximizes(),
        solvers,
    }
}

/// Writes `trials.csv`, `summary.json` and, if enabled, one trajectory file
/// per trial and solver under `trajectories/`.
pub fn write_reports(cfg: &ExperimentConfig, outcomes: &[TrialOutcome]) -> Result<ExperimentSummary> {
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir)?;
    write_trials_csv(&dir.join("trials.csv"), outcomes)?;
    if cfg.output.emit_trajectories {
        let tdir = dir.join("trajectories");
        fs::create_dir_all(&tdir)?;
        for o in outcomes {
            let name = format!("trial_{:04}_{}_{}.csv", o.summary.trial_index, o.solver_index, o.summary.algorithm);
            write_trajectory_csv(&tdir.join(name), &o.trajectory)?;
        }
    }
    let summary = summarize(cfg, outcomes);
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

/// Runs the experiment and writes its reports.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<TrialOutcome>, ExperimentSummary)> {
    let outcomes = execute(cfg)?;
    let summary = write_reports(cfg, &outcomes)?;
    info!("wrote {} rows to {}", outcomes.len(), cfg.output.directory.display());
    Ok((outcomes, summary))
}
