//! Monte-Carlo sweeps: a worker pool over seeded trials, deterministic
//! aggregation, and the two output files (per-trial JSON lines plus an
//! aggregated CSV table).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use super::config::ExperimentConfig;
use super::trial::{run_trial, PointContext, TrialResult};
use crate::error::{Error, Result};

/// Aggregated row for one sweep point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub n_trials: usize,
    pub nmse_mean: f64,
    pub nmse_se: f64,
    pub rmse_sin_mean: f64,
    pub rmse_sin_se: f64,
    pub rmse_r_mean: f64,
    pub rmse_r_se: f64,
    pub stage1_nmse_mean: f64,
    pub thm1_violations: usize,
    pub mean_solver_iters: f64,
    pub mean_wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialResult>,
    pub config_hash: String,
    /// Total bound violations across all trials where the premise held.
    pub violations: usize,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(value: f64, trials: &[TrialResult]) -> SweepRow {
    let nmse: Vec<f64> = trials.iter().map(|t| t.nmse).collect();
    let rs: Vec<f64> = trials.iter().map(|t| t.rmse_sin_theta).collect();
    let rr: Vec<f64> = trials.iter().map(|t| t.rmse_r).collect();
    let s1: Vec<f64> = trials.iter().map(|t| t.stage1_nmse).collect();
    let (nmse_mean, nmse_se) = mean_se(&nmse);
    let (rmse_sin_mean, rmse_sin_se) = mean_se(&rs);
    let (rmse_r_mean, rmse_r_se) = mean_se(&rr);
    SweepRow {
        sweep_value: value,
        n_trials: trials.len(),
        nmse_mean,
        nmse_se,
        rmse_sin_mean,
        rmse_sin_se,
        rmse_r_mean,
        rmse_r_se,
        stage1_nmse_mean: mean_se(&s1).0,
        thm1_violations: trials.iter().filter(|t| t.thm1_violated).count(),
        mean_solver_iters: trials.iter().map(|t| t.solver_iters as f64).sum::<f64>()
            / trials.len().max(1) as f64,
        mean_wall_s: trials.iter().map(|t| t.wall_s).sum::<f64>() / trials.len().max(1) as f64,
    }
}

/// Run every sweep point. Trials execute in a worker pool with per-trial
/// seeds; aggregation is a deterministic reduction in trial order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let hash = config.hash();
    let mut all_trials = Vec::with_capacity(config.sweep.values.len() * config.n_trials);
    let mut rows = Vec::with_capacity(config.sweep.values.len());
    for (pi, &value) in config.sweep.values.iter().enumerate() {
        let ctx = PointContext::new(config, pi, value)?;
        let mut results: Vec<TrialResult> = (0..config.n_trials)
            .into_par_iter()
            .map(|ti| run_trial(&ctx, ti))
            .collect::<Result<Vec<_>>>()?;
        results.sort_by_key(|t| t.trial_index);
        rows.push(aggregate(value, &results));
        all_trials.extend(results);
    }
    let violations = all_trials.iter().filter(|t| t.thm1_violated).count();
    Ok(SweepOutput { rows, trials: all_trials, config_hash: hash, violations })
}

pub const SUMMARY_HEADER: &str = "sweep_value,n_trials,nmse_mean,nmse_se,rmse_sin_mean,rmse_sin_se,rmse_r_mean,rmse_r_se,stage1_nmse_mean,thm1_violations,mean_solver_iters,mean_wall_s";

/// Write `trials.jsonl` and `summary.csv` into `out_dir`.
pub fn write_outputs(out: &SweepOutput, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut jl = std::io::BufWriter::new(std::fs::File::create(out_dir.join("trials.jsonl"))?);
    for t in &out.trials {
        let line = serde_json::to_string(t).map_err(|e| Error::Config(e.to_string()))?;
        writeln!(jl, "{line}")?;
    }
    let mut csv = std::io::BufWriter::new(std::fs::File::create(out_dir.join("summary.csv"))?);
    writeln!(csv, "# config_hash={}", out.config_hash)?;
    writeln!(csv, "{SUMMARY_HEADER}")?;
    for r in &out.rows {
        writeln!(
            csv,
            "{:.10e},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{},{:.3},{:.4}",
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
        )?;
    }
    Ok(())
}

/// Load per-trial records back from `trials.jsonl`.
pub fn read_trials(path: &Path) -> Result<Vec<TrialResult>> {
    let data = std::fs::read_to_string(path)?;
    data.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Config(e.to_string())))
        .collect()
}
