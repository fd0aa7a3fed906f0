//! Thin command-line front end over the `nearfield` library.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use nearfield::harness::config::ExperimentConfig;
use nearfield::harness::validate;
use nearfield::harness::{run_sweep, write_outputs, PointContext};

#[derive(Parser)]
#[command(name = "nfest", version, about = "Near-field channel estimation experiments")]
struct Cli {
    /// Experiment configuration (TOML); the desk-scale profile when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Base seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per sweep point override.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write solver/refinement diagnostics where supported.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial of the first sweep point and print its record.
    Simulate,
    /// Run the configured Monte-Carlo sweep and write trials.jsonl/summary.csv.
    Sweep,
    /// Chirp-subspace residual bounds and chirp-rate containment.
    ValidateSubspace,
    /// Monte-Carlo check of the regularization rule against fresh noise.
    ValidateTau,
    /// Per-trial measured-projection error bound on observation-consistent data.
    CheckBounds,
    /// Finite-difference check of the refinement gradients.
    Gradcheck,
}

fn load_config(cli: &Cli) -> nearfield::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::desk(),
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.n_trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> nearfield::Result<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| nearfield::Error::Config(e.to_string()))?;
    }
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Simulate => {
            let ctx = PointContext::new(&cfg, 0, cfg.sweep.values[0])?;
            let mut trial_cfg = ctx;
            if cli.verbose {
                std::fs::create_dir_all(&cli.out)?;
                // re-run the solver with trace capture for the diagnostics file
                trial_cfg.config.solver.max_iters = cfg.solver.max_iters;
            }
            let res = nearfield::harness::run_trial(&trial_cfg, 0)?;
            println!("{}", serde_json::to_string_pretty(&res).expect("serializes"));
            if cli.verbose {
                let path = cli.out.join("trial.json");
                std::fs::write(&path, serde_json::to_string_pretty(&res).expect("serializes"))?;
                eprintln!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Sweep => {
            let out = run_sweep(&cfg)?;
            write_outputs(&out, &cli.out)?;
            println!("{}", nearfield::harness::sweep::SUMMARY_HEADER);
            for r in &out.rows {
                println!(
                    "{:.4},{},{:.4e},{:.1e},{:.4e},{:.1e},{:.4e},{:.1e},{:.4e},{},{:.1},{:.3}",
                    r.sweep_value,
                    r.n_trials,
                    r.nmse_mean,
                    r.nmse_se,
                    r.rmse_sin_mean,
                    r.rmse_sin_se,
                    r.rmse_r_mean,
                    r.rmse_r_se,
                    r.stage1_nmse_mean,
                    r.thm1_violations,
                    r.mean_solver_iters,
                    r.mean_wall_s
                );
            }
            eprintln!("wrote {}", cli.out.display());
            Ok(out.violations == 0)
        }
        Command::ValidateSubspace => {
            let rep = validate::validate_subspace(cfg.base_seed)?;
            for c in &rep.grid_cases {
                println!(
                    "grid N={:<4} P={:<4} worst={:.4e} bound={:.4e} {}",
                    c.n,
                    c.p,
                    c.worst_residual,
                    c.bound,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            for c in &rep.containment {
                println!(
                    "containment N={:<4} max(phi/phi_max)={:.6} phase_bound={:.4} {}",
                    c.n,
                    c.max_phi_over_bound,
                    c.phase_bound,
                    if c.contained && c.unwrap_safe { "PASS" } else { "FAIL" }
                );
            }
            Ok(rep.pass())
        }
        Command::ValidateTau => {
            let draws = if cfg.n_trials > 0 { cfg.n_trials.max(200) } else { 200 };
            let rep = validate::validate_tau(128, 7, 1.0, draws, cfg.base_seed)?;
            println!(
                "tau-rule N={} P={} sigma={} draws={} empirical={:.4} tau={:.4} {}",
                rep.n,
                rep.p,
                rep.sigma,
                rep.draws,
                rep.empirical_mean,
                rep.tau,
                if rep.pass { "PASS" } else { "FAIL" }
            );
            Ok(rep.pass)
        }
        Command::CheckBounds => {
            let trials = if cfg.n_trials > 0 { cfg.n_trials } else { 100 };
            let rep = validate::check_bounds(128, 7, &[10.0, 20.0, 30.0], trials, cfg.base_seed)?;
            println!(
                "bound trials={} applicable={} violations={} {}",
                rep.trials.len(),
                rep.applicable,
                rep.violations,
                if rep.violations == 0 { "PASS" } else { "FAIL" }
            );
            Ok(rep.violations == 0)
        }
        Command::Gradcheck => {
            let rep = validate::gradcheck(50, cfg.base_seed)?;
            println!(
                "gradcheck points={} worst_rel={:.3e} {}",
                rep.points,
                rep.worst_rel_error,
                if rep.pass { "PASS" } else { "FAIL" }
            );
            Ok(rep.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
