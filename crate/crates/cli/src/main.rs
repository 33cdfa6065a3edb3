use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use qsum_core::experiment::{compare_algorithms, run_experiment, ExperimentConfig};
use qsum_core::problems::generate_mcdpe;

#[derive(Parser)]
#[command(name = "qsum", version, about = "Incremental quasi-subgradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceType {
    Mcdpe,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of an experiment and write trials.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a random Cobb-Douglas instance as JSON.
    Generate {
        #[arg(long = "type", value_enum)]
        kind: InstanceType,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment with two or more solvers and print win counts.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_path(path).with_context(|| format!("loading {}", path.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let (_, summary) = run_experiment(&cfg)?;
            println!("algorithm,stepsize,mode,completed,failed,mean_f_opt,std_f_opt,mean_wall_time_s");
            for s in &summary.solvers {
                let (mean, std, wall) = s
                    .aggregate
                    .map(|a| (a.f_opt.mean, a.f_opt.std, a.wall_time_s.mean))
                    .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                println!(
                    "{},{},{},{},{},{mean},{std},{wall}",
                    s.algorithm,
                    s.stepsize,
                    serde_mode(&s.mode),
                    s.completed,
                    s.failed
                );
            }
            info!("reports in {}", cfg.output.directory.display());
        }
        Command::Generate { kind, m, n, s, seed, out } => {
            let InstanceType::Mcdpe = kind;
            if m == 0 || n == 0 || s == 0 {
                bail!("--m, --n and --s must be at least 1");
            }
            let inst = generate_mcdpe(m, n, s, seed)?;
            std::fs::write(&out, inst.to_json()? + "\n").with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Compare { config } => {
            let cfg = load(&config)?;
            let table = compare_algorithms(&cfg)?;
            println!("algorithm,stepsize,wins,ties,losses,mean_f_opt,mean_wall_time_s");
            for r in &table.rows {
                println!(
                    "{},{},{},{},{},{},{}",
                    r.algorithm, r.stepsize, r.wins, r.ties, r.losses, r.mean_f_opt, r.mean_wall_time_s
                );
            }
        }
    }
    Ok(())
}

fn serde_mode(mode: &qsum_core::experiment::SolveMode) -> &'static str {
    use qsum_core::experiment::SolveMode;
    match mode {
        SolveMode::Plain => "plain",
        SolveMode::Direct => "direct",
        SolveMode::Feasibility => "feasibility",
    }
}
