//! A small seeded Monte-Carlo sweep writing the two output files.
//!
//! Uses the desk-scale profile with a reduced trial count so it finishes in
//! a few minutes; the `nfest sweep` command drives the same machinery from a
//! TOML config.
//!
//! ```bash
//! cargo run --release --example snr_sweep
//! ```

use nearfield::harness::config::{ExperimentConfig, SweepAxis};
use nearfield::harness::{run_sweep, write_outputs};

fn main() -> nearfield::Result<()> {
    let mut cfg = ExperimentConfig::desk();
    cfg.sweep.axis = SweepAxis::SnrDb;
    cfg.sweep.values = vec![10.0, 20.0, 30.0];
    cfg.n_trials = 5;
    cfg.base_seed = 1;

    let t0 = std::time::Instant::now();
    let out = run_sweep(&cfg)?;
    println!("{} trials in {:.1?}", out.trials.len(), t0.elapsed());
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "SNR", "NMSE", "stage-I", "RMSE sinθ", "RMSE r");
    for row in &out.rows {
        println!(
            "{:>8.1} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            row.sweep_value, row.nmse_mean, row.stage1_nmse_mean, row.rmse_sin_mean, row.rmse_r_mean
        );
    }
    let dir = std::env::temp_dir().join("nearfield-snr-sweep");
    write_outputs(&out, &dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
