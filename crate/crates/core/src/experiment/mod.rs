//! Configuration-driven multi-trial experiments with CSV and JSON reports.

pub mod compare;
pub mod config;
pub mod runner;
pub mod stats;

pub use compare::{compare_algorithms, comparison_table, ComparisonRow, ComparisonTable};
pub use config::{Algorithm, ExperimentConfig, ProblemKind, RuleKind, Selector, SolverSpec, StepsizeSpec};
pub use runner::{execute, run_experiment, run_trial, write_reports, SolveMode, TrialOutcome, TrialSummary, TRIALS_HEADER};
pub use stats::{summarize_trials, Aggregate, Stats};

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &std::path::Path, problem: &str, solvers: &str, trials: usize, iters: usize) -> ExperimentConfig {
        let text = format!(
            r#"{{
                "problem": {problem},
                "solvers": {solvers},
                "run": {{"max_iterations": {iters}, "trials": {trials}}},
                "output": {{"directory": {dir:?}, "emit_trajectories": true}}
            }}"#,
        );
        ExperimentConfig::from_json_str(&text).unwrap()
    }

    #[test]
    fn example4_stalls_at_four() {
        let dir = tempfile::tempdir().unwrap();
        for rule in [r#"{"rule": "constant", "v": 0.2}"#, r#"{"rule": "diminishing"}"#] {
            let solvers = format!(r#"[{{"algorithm": "incsgm", "stepsize": {rule}}}]"#);
            let cfg = config(dir.path(), r#"{"type": "example4"}"#, &solvers, 1, 50);
            let (out, _) = run_experiment(&cfg).unwrap();
            assert_eq!(out[0].summary.f_opt, 4.0);
        }
    }

    #[test]
    fn example3_within_error_bound() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            r#"{"type": "example3", "x0": [5.0]}"#,
            r#"[{"algorithm": "incsgm", "stepsize": {"rule": "constant", "v": 1.0}}]"#,
            1,
            100,
        );
        let (out, _) = run_experiment(&cfg).unwrap();
        assert!(out[0].summary.f_opt <= 2.0);
    }

    #[test]
    fn incsgm_beats_adversarial_classical() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            r#"{"type": "example3"}"#,
            r#"[{"algorithm": "incsgm", "stepsize": {"rule": "constant", "v": 1.0}},
                {"algorithm": "classical", "stepsize": {"rule": "constant", "v": 1.0}, "selector": "adversarial"}]"#,
            3,
            100,
        );
        let table = compare_algorithms(&cfg).unwrap();
        assert_eq!(table.rows[0].wins, 3);
        assert_eq!(table.rows[1].losses, 3);
        assert!(dir.path().join("comparison.json").exists());
    }

    #[test]
    fn single_solver_comparison_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), r#"{"type": "example3"}"#, r#"[{"algorithm": "incsgm"}]"#, 1, 10);
        assert!(matches!(compare_algorithms(&cfg), Err(crate::Error::Configuration(_))));
    }

    #[test]
    fn trials_csv_is_deterministic() {
        let solvers = r#"[{"algorithm": "incsgm", "stepsize": {"rule": "constant", "v": 0.3}},
                          {"algorithm": "randsgm", "stepsize": {"rule": "diminishing"}},
                          {"algorithm": "sgpm"}]"#;
        let read = |parallel: bool| {
            let dir = tempfile::tempdir().unwrap();
            let mut cfg = config(dir.path(), r#"{"type": "feasibility", "m": 5, "n": 3, "master_seed": 9}"#, solvers, 4, 200);
            cfg.run.parallel_trials = parallel;
            run_experiment(&cfg).unwrap();
            let text = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
            let stripped: Vec<String> = text
                .lines()
                .map(|l| {
                    let mut cols: Vec<&str> = l.split(',').collect();
                    cols.remove(7);
                    cols.join(",")
                })
                .collect();
            (text, stripped)
        };
        let (a, sa) = read(false);
        let (_, sb) = read(true);
        assert_eq!(sa, sb);
        assert_eq!(a.lines().next().unwrap(), TRIALS_HEADER.join(","));
        assert_eq!(a.lines().count(), 1 + 4 * 3);
        assert!(!a.contains('\r'));
    }
}
