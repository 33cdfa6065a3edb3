use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{Reorder, StopCriteria, DEFAULT_TOL_OPT};
use crate::stepsize::{Gamma, Schedule, StepsizeRule};

/// Constant stepsize used when none is configured.
pub const DEFAULT_CONSTANT_V: f64 = 1.5;
/// Initial value of the diminishing schedule when none is configured.
pub const DEFAULT_DIMINISHING_V: f64 = 3.0;
/// Rate of the diminishing schedule `v / (1 + rate k)`.
pub const DEFAULT_DIMINISHING_RATE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverSpec>,
    pub run: RunSpec,
    pub output: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Mcdpe,
    Feasibility,
    Example3,
    Example4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "type")]
    pub kind: ProblemKind,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
    /// Starting point; each problem type has its own default.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Ascent steps per ratio when estimating Cobb-Douglas targets.
    #[serde(default)]
    pub target_budget: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Incsgm,
    Randsgm,
    Sgpm,
    Classical,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Incsgm => "incsgm",
            Algorithm::Randsgm => "randsgm",
            Algorithm::Sgpm => "sgpm",
            Algorithm::Classical => "classical",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Constant,
    Diminishing,
    DynamicI,
    DynamicIi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsizeSpec {
    pub rule: RuleKind,
    #[serde(default)]
    pub v: Option<f64>,
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub f_star: Option<f64>,
}

impl Default for StepsizeSpec {
    fn default() -> Self {
        StepsizeSpec {
            rule: RuleKind::Diminishing,
            v: None,
            rate: None,
            gamma: None,
            f_star: None,
        }
    }
}

/// Cone-element choice of the classical method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    /// The components' own unit oracles.
    #[default]
    Canonical,
    /// Example 3 only: `-1` for the second component at `x >= 0`.
    Adversarial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub stepsize: StepsizeSpec,
    #[serde(default = "default_tol_opt")]
    pub tol_opt: f64,
    #[serde(default)]
    pub reorder: Reorder,
    /// Relaxation of the baseline's dynamic step.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub selector: Selector,
}

fn default_tol_opt() -> f64 {
    DEFAULT_TOL_OPT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub max_iterations: usize,
    #[serde(default = "default_target_gap")]
    pub target_gap: Option<f64>,
    #[serde(default)]
    pub stall_window: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub parallel_trials: bool,
}

fn default_target_gap() -> Option<f64> {
    Some(0.0)
}

fn default_trials() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub directory: PathBuf,
    #[serde(default)]
    pub emit_trajectories: bool,
}

fn field_error(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Configuration(format!("{path}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            field_error(&path, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Checks every field that serde cannot; errors name the field path.
    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        let dims = |name: &str, v: Option<usize>| -> Result<usize> {
            match v {
                Some(d) if d >= 1 => Ok(d),
                Some(_) => Err(field_error(&format!("problem.{name}"), "must be at least 1")),
                None => Err(field_error(&format!("problem.{name}"), "is required for this problem type")),
            }
        };
        match p.kind {
            ProblemKind::Mcdpe => {
                dims("m", p.m)?;
                let n = dims("n", p.n)?;
                dims("s", p.s)?;
                if n > 1000 || p.m.unwrap_or(0) > 100 || p.s.unwrap_or(0) > 1000 {
                    return Err(field_error("problem", "dimensions are capped at (m, n, s) = (100, 1000, 1000)"));
                }
            }
            ProblemKind::Feasibility => {
                dims("m", p.m)?;
                dims("n", p.n)?;
            }
            ProblemKind::Example3 | ProblemKind::Example4 => {}
        }
        if let Some(x0) = &p.x0 {
            if let Some(n) = self.dimension() {
                if x0.len() != n {
                    return Err(field_error("problem.x0", format!("has {} entries, expected {n}", x0.len())));
                }
            }
            if x0.iter().any(|v| !v.is_finite()) {
                return Err(field_error("problem.x0", "must be finite"));
            }
        }
        if p.target_budget == Some(0) {
            return Err(field_error("problem.target_budget", "must be at least 1"));
        }
        if self.solvers.is_empty() {
            return Err(field_error("solvers", "at least one solver is required"));
        }
        for (j, s) in self.solvers.iter().enumerate() {
            let path = format!("solvers[{j}]");
            self.stepsize_rule(j).map_err(|e| field_error(&format!("{path}.stepsize"), strip(e)))?;
            if !(s.tol_opt >= 0.0 && s.tol_opt.is_finite()) {
                return Err(field_error(&format!("{path}.tol_opt"), "must be a nonnegative number"));
            }
            if s.algorithm == Algorithm::Sgpm {
                self.sgpm_gamma(j).map_err(|e| field_error(&format!("{path}.gamma"), strip(e)))?;
            }
            if s.selector == Selector::Adversarial && (s.algorithm != Algorithm::Classical || p.kind != ProblemKind::Example3) {
                return Err(field_error(&format!("{path}.selector"), "adversarial selection exists only for the classical method on example3"));
            }
        }
        if self.run.max_iterations == 0 {
            return Err(field_error("run.max_iterations", "must be at least 1"));
        }
        if self.run.trials == 0 {
            return Err(field_error("run.trials", "must be at least 1"));
        }
        if let Some(g) = self.run.target_gap {
            if !(g >= 0.0) {
                return Err(field_error("run.target_gap", "must be nonnegative"));
            }
        }
        if self.run.stall_window == Some(0) {
            return Err(field_error("run.stall_window", "must be at least 1"));
        }
        Ok(())
    }

    /// Decision-space dimension, when fixed by the problem spec.
    pub fn dimension(&self) -> Option<usize> {
        match self.problem.kind {
            ProblemKind::Example3 | ProblemKind::Example4 => Some(1),
            _ => self.problem.n,
        }
    }

    pub fn stop_criteria(&self) -> Result<StopCriteria> {
        StopCriteria::new(self.run.max_iterations)?
            .with_target_gap(self.run.target_gap)?
            .with_stall_window(self.run.stall_window)
    }

    /// The stepsize rule of solver `j`.
    pub fn stepsize_rule(&self, j: usize) -> Result<StepsizeRule> {
        let s = &self.solvers[j].stepsize;
        let gamma = || -> Result<Gamma> { s.gamma.map_or(Ok(Gamma::default()), Gamma::constant) };
        match s.rule {
            RuleKind::Constant => StepsizeRule::constant(s.v.unwrap_or(DEFAULT_CONSTANT_V)),
            RuleKind::Diminishing => Ok(StepsizeRule::diminishing(Schedule::harmonic(
                s.v.unwrap_or(DEFAULT_DIMINISHING_V),
                s.rate.unwrap_or(DEFAULT_DIMINISHING_RATE),
            )?)),
            RuleKind::DynamicI => Ok(StepsizeRule::dynamic_i(gamma()?, s.f_star)),
            RuleKind::DynamicIi => Ok(StepsizeRule::dynamic_ii(gamma()?, s.f_star)),
        }
    }

    pub fn sgpm_gamma(&self, j: usize) -> Result<Gamma> {
        self.solvers[j].gamma.map_or(Ok(Gamma::default()), Gamma::constant)
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Configuration(msg) => msg,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra_solver: &str) -> String {
        format!(
            r#"{{
                "problem": {{"type": "example3"}},
                "solvers": [{{"algorithm": "incsgm", "stepsize": {{"rule": "constant", "v": 1.0}}}}{extra_solver}],
                "run": {{"max_iterations": 10, "trials": 1}},
                "output": {{"directory": "out"}}
            }}"#
        )
    }

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json_str(&minimal("")).unwrap();
        assert_eq!(cfg.problem.kind, ProblemKind::Example3);
        assert_eq!(cfg.solvers[0].tol_opt, DEFAULT_TOL_OPT);
        assert_eq!(cfg.run.target_gap, Some(0.0));
        assert!(!cfg.output.emit_trajectories);
    }

    #[test]
    fn type_errors_name_the_field() {
        let text = minimal(r#", {"algorithm": "randsgm", "stepsize": {"rule": "constant", "v": "big"}}"#);
        let msg = ExperimentConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(msg.contains("solvers[1].stepsize.v"), "{msg}");
    }

    #[test]
    fn validation_errors_name_the_field() {
        let text = minimal(r#", {"algorithm": "randsgm", "stepsize": {"rule": "constant", "v": -1.0}}"#);
        let msg = ExperimentConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(msg.contains("solvers[1].stepsize"), "{msg}");
        let text = minimal("").replace("\"trials\": 1", "\"trials\": 0");
        let msg = ExperimentConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(msg.contains("run.trials"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = minimal("").replace("\"trials\": 1", "\"trials\": 1, \"speed\": 3");
        let msg = ExperimentConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(msg.contains("speed"), "{msg}");
    }

    #[test]
    fn mcdpe_needs_dimensions() {
        let text = minimal("").replace(r#"{"type": "example3"}"#, r#"{"type": "mcdpe", "m": 2, "n": 3}"#);
        let msg = ExperimentConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(msg.contains("problem.s"), "{msg}");
    }

    #[test]
    fn default_stepsizes() {
        let text = minimal(r#", {"algorithm": "randsgm", "stepsize": {"rule": "diminishing"}}"#);
        let cfg = ExperimentConfig::from_json_str(&text).unwrap();
        let StepsizeRule::Diminishing(Schedule::Harmonic { v, rate }) = cfg.stepsize_rule(1).unwrap() else {
            panic!("expected a harmonic schedule");
        };
        assert_eq!((v, rate), (DEFAULT_DIMINISHING_V, DEFAULT_DIMINISHING_RATE));
        assert!((1.0..=2.0).contains(&DEFAULT_CONSTANT_V));
        assert!((2.0..=5.0).contains(&DEFAULT_DIMINISHING_V));
    }
}
