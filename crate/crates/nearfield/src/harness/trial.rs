//! One end-to-end Monte-Carlo trial: scene → measurement → SDP → Stage-I →
//! Stage-II → metrics.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::scene::{sample_scene, snr_db_to_noise_var};
use crate::channel::synth_channel;
use crate::error::Result;
use crate::geometry::ArrayGeometry;
use crate::lifting::{apply_p, apply_py, lift_ground_truth};
use crate::measure::{gen_combiners, measure};
use crate::metrics::{match_paths, nmse, rmse_metrics};
use crate::recovery::stage_one;
use crate::refine::{finalize, refine};
use crate::seeds::{derive, Stream};
use crate::solver::{atomic_norm_upper_bound, dual_atomic_norm, solve, tau_rule};
use crate::subspace::DcrSubspace;

/// Deviations and fallbacks recorded along the pipeline.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct TrialFlags {
    pub solver_converged: bool,
    pub stage1_rank_deficient: bool,
    pub stage1_merged: bool,
    pub stage1_theta_clamped: bool,
    pub stage1_ls_ridge: bool,
    pub stage1_range_clamped: bool,
    pub refine_range_clamped: bool,
    pub refine_line_search_failures: usize,
    pub refine_degenerate: bool,
}

/// Per-trial record; serialized as one JSON line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub config_hash: String,
    pub point_index: usize,
    pub trial_index: usize,
    pub sweep_value: f64,
    pub snr_db: f64,
    pub noise_var: f64,
    pub scene_seed: u64,
    pub combiner_seed: u64,
    pub noise_seed: u64,
    /// Final (Stage-II) channel NMSE.
    pub nmse: f64,
    /// Channel NMSE of the lifted solver estimate P(X̂).
    pub stage1_nmse: f64,
    pub rmse_sin_theta: f64,
    pub rmse_r: f64,
    pub stage1_rmse_sin_theta: f64,
    pub stage1_rmse_r: f64,
    /// Dual atomic norm of the realized noise.
    pub noise_dual_norm: f64,
    pub tau: f64,
    /// (1/N)·‖P_y(X̂ − X_h)‖₂².
    pub thm1_lhs: f64,
    /// (2τ/N)·Σ|α_l|·‖v_l‖₂.
    pub thm1_rhs: f64,
    /// The premise dual ≤ τ held, so the bound applies.
    pub thm1_applicable: bool,
    pub thm1_violated: bool,
    pub solver_iters: usize,
    pub refine_iters: usize,
    pub flags: TrialFlags,
    pub wall_s: f64,
}

/// Immutable per-point state shared across trials.
pub struct PointContext {
    pub config: ExperimentConfig,
    pub geom: ArrayGeometry,
    pub subspace: DcrSubspace,
    pub point_index: usize,
    pub sweep_value: f64,
    pub config_hash: String,
}

impl PointContext {
    pub fn new(base: &ExperimentConfig, point_index: usize, value: f64) -> Result<Self> {
        let config = base.at_point(value);
        let geom = config.geometry.to_geometry()?;
        let p = config.subspace_dim(&geom);
        let subspace = DcrSubspace::pca(&geom, p, config.dense_dim(p))?;
        Ok(Self {
            config,
            geom,
            subspace,
            point_index,
            sweep_value: value,
            config_hash: base.hash(),
        })
    }
}

/// Run a single seeded trial. Pipeline faults surface as flags on the
/// result, not as errors, so a sweep never aborts on one bad trial.
pub fn run_trial(ctx: &PointContext, trial_index: usize) -> Result<TrialResult> {
    let t0 = std::time::Instant::now();
    let cfg = &ctx.config;
    let geom = &ctx.geom;
    let sub = &ctx.subspace;
    let n = geom.n_antennas;
    let l = cfg.scene.n_paths;

    let scene_seed = derive(cfg.base_seed, Stream::Scene, ctx.point_index as u64, trial_index as u64);
    let combiner_seed =
        derive(cfg.base_seed, Stream::Combiner, ctx.point_index as u64, trial_index as u64);
    let noise_seed = derive(cfg.base_seed, Stream::Noise, ctx.point_index as u64, trial_index as u64);

    let paths = sample_scene(geom, &cfg.scene, scene_seed)?;
    let h = synth_channel(geom, &paths, cfg.scene.model)?;
    let h_energy: f64 = h.iter().map(|v| v.norm_sqr()).sum();
    let noise_var = snr_db_to_noise_var(cfg.sweep.snr_db, h_energy, n);

    let setup = gen_combiners(n, cfg.measurement.n_rf, cfg.measurement.n_slots, noise_var, combiner_seed)?;
    let rec = measure(&setup, &h.view(), noise_var, noise_seed)?;
    let y_norm: f64 = rec.y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();

    let tau_nominal = tau_rule(&setup, sub, noise_var.sqrt())? * cfg.solver.tau_scale;
    let tau = tau_nominal.max(cfg.solver.tau_floor_rel * y_norm);
    let sol = solve(&setup, sub, &rec.y.view(), &cfg.solver.to_solver_config(tau))?;

    // Stage-I
    let est = stage_one(geom, &setup, sub, &rec.y.view(), &sol.u_hat.view(), l)?;
    let h_stage1 = apply_p(sub, &sol.x_hat.view())?;
    let stage1_nmse = nmse(&h_stage1.view(), &h.view())?;
    let perm1 = match_paths(&est.thetas, &est.ranges_m, &paths, geom.rayleigh_distance_m())?;
    let (s1_rs, s1_rr) = rmse_metrics(&est.thetas, &est.ranges_m, &paths, &perm1);

    // Stage-II under the scene's steering law, with the coarse ranges
    // dropped onto their cost basins first
    let opts = cfg.refine.to_options(cfg.scene.model);
    let init_ranges = crate::refine::range_basin_scan(
        &setup,
        geom,
        cfg.scene.model,
        &est.thetas,
        &est.ranges_m,
        &rec.y.view(),
        48,
    )?;
    let state = refine(&setup, geom, &rec.y.view(), &est.thetas, &init_ranges, &opts)?;
    let (_alphas, h_hat) =
        finalize(&setup, geom, cfg.scene.model, &state.thetas, &state.ranges, &rec.y.view())?;
    let final_nmse = nmse(&h_hat.view(), &h.view())?;
    let perm2 = match_paths(&state.thetas, &state.ranges, &paths, geom.rayleigh_distance_m())?;
    let (rs, rr) = rmse_metrics(&state.thetas, &state.ranges, &paths, &perm2);

    // error bound bookkeeping on the realized noise
    let noise_dual = dual_atomic_norm(&setup, sub, &rec.effective_noise.view())?;
    let x_truth = lift_ground_truth(geom, sub, &paths)?;
    let diff = &sol.x_hat - &x_truth;
    let proj = apply_py(&setup, sub, &diff.view())?;
    let thm1_lhs = proj.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    let thm1_rhs = 2.0 * tau / n as f64 * atomic_norm_upper_bound(geom, sub, &paths);
    let thm1_applicable = noise_dual <= tau;
    let thm1_violated = thm1_applicable && thm1_lhs > thm1_rhs;

    Ok(TrialResult {
        config_hash: ctx.config_hash.clone(),
        point_index: ctx.point_index,
        trial_index,
        sweep_value: ctx.sweep_value,
        snr_db: cfg.sweep.snr_db,
        noise_var,
        scene_seed,
        combiner_seed,
        noise_seed,
        nmse: final_nmse,
        stage1_nmse,
        rmse_sin_theta: rs,
        rmse_r: rr,
        stage1_rmse_sin_theta: s1_rs,
        stage1_rmse_r: s1_rr,
        noise_dual_norm: noise_dual,
        tau,
        thm1_lhs,
        thm1_rhs,
        thm1_applicable,
        thm1_violated,
        solver_iters: sol.iterations,
        refine_iters: state.iterations,
        flags: TrialFlags {
            solver_converged: sol.converged,
            stage1_rank_deficient: est.rank_deficient,
            stage1_merged: est.merged_duplicates,
            stage1_theta_clamped: est.theta_clamped,
            stage1_ls_ridge: est.ls_ridge,
            stage1_range_clamped: est.range_flags.iter().any(|f| f.clamped),
            refine_range_clamped: state.range_clamped,
            refine_line_search_failures: state.line_search_failures,
            refine_degenerate: state.degenerate,
        },
        wall_s: t0.elapsed().as_secs_f64(),
    })
}
