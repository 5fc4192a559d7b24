//! `vqmps` command line: experiment runner and result comparison.

mod config;
mod record;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Result, bail};
use clap::{Parser, Subcommand};

use vqmps::canonical::{default_depth, qsvd, recommended_qsvd_depth, variational_reshape};
use vqmps::oracle::{classical_dmrg, exact_ground, full_vqe_baseline};
use vqmps::sweep::{CanonMode, SiteSolver, SweepOptions, run_vqmps};
use vqmps::variational::AnsatzCircuit;
use vqmps::{OptimizerConfig, StateVector, build_xxz};

use config::{Experiment, RunConfig, SolverKind};
use record::{RepeatOutcome, ResultRecord};

#[derive(Parser)]
#[command(name = "vqmps", version, about = "qMPS ground-state experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a key-value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare result files against a baseline and oracle energies.
    Compare {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = RunConfig::parse(&text)?;
            let rec = run(&cfg)?;
            rec.write_json(&cfg.output_path)?;
            rec.write_csv(&cfg.output_path.with_extension("csv"))?;
            println!(
                "{}: mean {:.6} min {:.6} max {:.6} ({} repeats, {} ms) -> {}",
                rec.config.experiment,
                rec.summary.mean,
                rec.summary.min,
                rec.summary.max,
                rec.outcomes.len(),
                rec.total_wallclock_ms,
                cfg.output_path.display()
            );
            Ok(())
        }
        Command::Compare { files } => compare(&files),
    }
}

fn run(cfg: &RunConfig) -> Result<ResultRecord> {
    let start = Instant::now();
    let mut outcomes = Vec::with_capacity(cfg.repeats);
    for repeat in 0..cfg.repeats {
        let seed = cfg.seed.wrapping_add(repeat as u64);
        let t0 = Instant::now();
        let (value, oracle_energy, details) = run_repeat(cfg, seed)?;
        outcomes.push(RepeatOutcome {
            repeat,
            seed,
            value,
            oracle_energy,
            wallclock_ms: t0.elapsed().as_millis() as u64,
            details,
        });
    }
    Ok(ResultRecord::new(
        cfg,
        outcomes,
        start.elapsed().as_millis() as u64,
    ))
}

fn optimizer(cfg: &RunConfig, seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        max_iterations: cfg.iterations,
        learning_rate: cfg.learning_rate,
        seed,
        ..Default::default()
    }
}

/// One repeat of the configured experiment: the headline value, the dense
/// oracle ground energy where applicable, and per-point details.
fn run_repeat(cfg: &RunConfig, seed: u64) -> Result<(f64, Option<f64>, Vec<f64>)> {
    match cfg.experiment {
        Experiment::QsvdFidelity => {
            // one random (real-amplitude) state per repeat, decomposed over
            // every bipartition; headline is the worst bipartition.
            let n = cfg.n;
            let prep = AnsatzCircuit::new(n, 2 * n);
            let state = prep.prepare(&prep.random_params(seed), &StateVector::zero_state(n))?;
            let mut fids = Vec::new();
            for n_a in 1..n {
                let depth = if cfg.ansatz_depth > 0 {
                    cfg.ansatz_depth
                } else {
                    recommended_qsvd_depth(n_a, n - n_a)
                };
                let r = qsvd(&state, n_a, n - n_a, depth, &optimizer(cfg, seed))?;
                fids.push(r.recon_fidelity);
            }
            let worst = fids.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((worst, None, fids))
        }
        Experiment::ReshapeFidelity => {
            let gen = AnsatzCircuit::new(cfg.n, cfg.n);
            let u = gen.unitary(&gen.random_params(seed))?;
            let depth = if cfg.ansatz_depth > 0 {
                cfg.ansatz_depth
            } else {
                default_depth(2 * cfg.n)
            };
            let (_, fid) = variational_reshape(&u, depth, &optimizer(cfg, seed))?;
            Ok((fid, None, vec![]))
        }
        Experiment::Vqmps => {
            let h = build_xxz(cfg.n, cfg.j, cfg.delta, cfg.h)?;
            let options = sweep_options(cfg, seed);
            let report = run_vqmps(&h, cfg.n_chi, seed, &options)?;
            let (oracle, _) = exact_ground(&h)?;
            Ok((report.energy, Some(oracle), report.sweep_energies))
        }
        Experiment::VqeBaseline => {
            let h = build_xxz(cfg.n, cfg.j, cfg.delta, cfg.h)?;
            let res = full_vqe_baseline(&h, &optimizer(cfg, seed))?;
            let (oracle, _) = exact_ground(&h)?;
            Ok((res.energy, Some(oracle), vec![]))
        }
        Experiment::ClassicalDmrg => {
            let h = build_xxz(cfg.n, cfg.j, cfg.delta, cfg.h)?;
            let chi = 1usize << cfg.n_chi;
            let out = classical_dmrg(&h, chi, cfg.sweeps.max(10), seed)?;
            let (oracle, _) = exact_ground(&h)?;
            Ok((out.energy, Some(oracle), vec![]))
        }
    }
}

fn sweep_options(cfg: &RunConfig, seed: u64) -> SweepOptions {
    let mut options = match cfg.solver {
        SolverKind::Exact => SweepOptions::exact(),
        SolverKind::Vqe => SweepOptions::variational(seed),
    };
    options.max_sweeps = cfg.sweeps;
    if let SiteSolver::Vqe {
        depth_factor,
        config,
    } = &mut options.solver
    {
        // default configuration: ansatz depth equals the site qubit count.
        *depth_factor = if cfg.ansatz_depth > 0 { cfg.ansatz_depth } else { 1 };
        config.max_iterations = cfg.iterations;
        config.learning_rate = cfg.learning_rate;
        config.seed = seed;
    }
    if let CanonMode::Variational { config, .. } = &mut options.canon {
        config.max_iterations = cfg.iterations;
        config.learning_rate = cfg.learning_rate;
    }
    options
}

fn compare(files: &[PathBuf]) -> Result<()> {
    let records: Vec<ResultRecord> = files
        .iter()
        .map(|p| ResultRecord::load(p))
        .collect::<Result<_>>()?;
    let first = match records.first() {
        Some(r) => r,
        None => bail!("no result files given"),
    };
    let compatible: Vec<&ResultRecord> = records
        .iter()
        .filter(|r| r.config.model == first.config.model && r.config.n == first.config.n)
        .collect();
    if compatible.len() != records.len() {
        bail!(
            "incompatible result files: all records must share model={} N={}",
            first.config.model,
            first.config.n
        );
    }
    let baselines: Vec<&&ResultRecord> = compatible
        .iter()
        .filter(|r| r.config.experiment == "vqe_baseline")
        .collect();
    let subjects: Vec<&&ResultRecord> = compatible
        .iter()
        .filter(|r| r.config.experiment != "vqe_baseline")
        .collect();
    if subjects.is_empty() {
        bail!("nothing to compare: every record is a baseline");
    }

    println!("model={} N={}", first.config.model, first.config.n);
    println!("delta\tn_chi\texperiment\tmean\tgap_vs_baseline\tgap_vs_oracle");
    for r in &subjects {
        let baseline = baselines
            .iter()
            .find(|b| b.config.delta == r.config.delta && b.config.j == r.config.j);
        let gap_base = baseline
            .map(|b| format!("{:+.6}", r.summary.mean - b.summary.mean))
            .unwrap_or_else(|| "-".into());
        let oracle = r.outcomes.iter().find_map(|o| o.oracle_energy);
        let gap_oracle = oracle
            .map(|e| format!("{:+.6}", r.summary.mean - e))
            .unwrap_or_else(|| "-".into());
        println!(
            "{}\t{}\t{}\t{:.6}\t{}\t{}",
            r.config.delta,
            r.config.n_chi,
            r.config.experiment,
            r.summary.mean,
            gap_base,
            gap_oracle
        );
    }
    Ok(())
}
