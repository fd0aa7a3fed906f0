//! Validation suites behind the `validate-*`, `check-bounds` and `gradcheck`
//! verbs. Each suite pins its own thresholds and reports one pass/fail line
//! per case; the acceptance tests drive the same entry points.

use ndarray::prelude::*;
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::SceneConfig;
use super::scene::{sample_scene, snr_db_to_noise_var};
use crate::channel::{synth_channel, PathParams, SteeringModel};
use crate::error::Result;
use crate::geometry::ArrayGeometry;
use crate::lifting::{apply_p, apply_py, lift_ground_truth};
use crate::measure::{complex_gaussian, gen_combiners};
use crate::recovery::ratio_phase_bound;
use crate::refine::{cost_and_gradients, projection_cost, RefineOptions};
use crate::seeds::{derive, Stream};
use crate::solver::{
    atomic_norm_upper_bound, dual_atomic_norm, solve, tau_rule, SolverConfig,
};
use crate::subspace::{phi_max, subspace_error, uniform_grid_bound, DcrSubspace};

fn geom(n: usize) -> Result<ArrayGeometry> {
    ArrayGeometry::half_wavelength(n, 3.0e-3)
}

/// One uniform-grid residual case.
#[derive(Debug, Clone)]
pub struct GridResidualCase {
    pub n: usize,
    pub p: usize,
    pub worst_residual: f64,
    pub bound: f64,
    pub pass: bool,
}

/// One chirp-rate containment case.
#[derive(Debug, Clone)]
pub struct ContainmentCase {
    pub n: usize,
    pub max_phi_over_bound: f64,
    pub phase_bound: f64,
    pub contained: bool,
    pub unwrap_safe: bool,
}

#[derive(Debug, Clone)]
pub struct SubspaceReport {
    pub grid_cases: Vec<GridResidualCase>,
    pub containment: Vec<ContainmentCase>,
}

impl SubspaceReport {
    pub fn pass(&self) -> bool {
        self.grid_cases.iter().all(|c| c.pass)
            && self.containment.iter().all(|c| c.contained && c.unwrap_safe)
    }
}

/// Residual-bound suite: untruncated uniform grids, N ∈ {32, 64, 128} ×
/// P ∈ {8, 32, 128}, 10³ rates each; plus chirp-rate containment over 10⁴
/// random radiating-region paths per geometry and the phase-unwrap margin.
pub fn validate_subspace(seed: u64) -> Result<SubspaceReport> {
    let mut grid_cases = Vec::new();
    for &n in &[32usize, 64, 128] {
        let g = geom(n)?;
        for &p in &[8usize, 32, 128] {
            let sub = DcrSubspace::uniform_grid(&g, p)?;
            let delta = sub.phi_max / (p as f64 - 1.0);
            let bound = uniform_grid_bound(n, delta);
            let mut worst: f64 = 0.0;
            for i in 0..1000 {
                let phi = sub.phi_max * i as f64 / 999.0;
                worst = worst.max(subspace_error(&sub, phi)?);
            }
            grid_cases.push(GridResidualCase { n, p, worst_residual: worst, bound, pass: worst <= bound });
        }
    }
    let mut containment = Vec::new();
    for &n in &[32usize, 64, 128, 256] {
        let g = geom(n)?;
        let pm = phi_max(&g);
        let (zfr, zra) = (g.fresnel_distance_m(), g.rayleigh_distance_m());
        let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, Stream::Aux, n as u64, 0));
        let mut max_ratio: f64 = 0.0;
        for _ in 0..10_000 {
            let theta = (rng.random::<f64>() - 0.5) * std::f64::consts::PI * 0.999;
            let r = zfr + rng.random::<f64>() * (zra - zfr);
            let phi =
                g.spacing_m * g.spacing_m * theta.cos().powi(2) / (2.0 * g.wavelength_m * r);
            max_ratio = max_ratio.max(phi / pm);
        }
        let phase_bound = ratio_phase_bound(&g);
        containment.push(ContainmentCase {
            n,
            max_phi_over_bound: max_ratio,
            phase_bound,
            contained: max_ratio <= 1.0,
            unwrap_safe: phase_bound < std::f64::consts::PI,
        });
    }
    Ok(SubspaceReport { grid_cases, containment })
}

#[derive(Debug, Clone)]
pub struct TauReport {
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub draws: usize,
    pub empirical_mean: f64,
    pub tau: f64,
    pub pass: bool,
}

/// Noise-calibration suite: empirical mean of the dual atomic norm over
/// fresh i.i.d. CN(0, σ²) draws against the τ rule.
pub fn validate_tau(n: usize, p: usize, sigma: f64, draws: usize, seed: u64) -> Result<TauReport> {
    let g = geom(n)?;
    let sub = DcrSubspace::pca(&g, p, DcrSubspace::default_dense(p))?;
    let setup = gen_combiners(n, 4, 16, sigma * sigma, derive(seed, Stream::Combiner, 0, 0))?;
    let tau = tau_rule(&setup, &sub, sigma)?;
    let m = setup.n_measurements();
    let mut acc = 0.0;
    for i in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, Stream::Noise, 1, i as u64));
        let noise = complex_gaussian(&mut rng, m, sigma * sigma);
        acc += dual_atomic_norm(&setup, &sub, &noise.view())?;
    }
    let empirical_mean = acc / draws as f64;
    Ok(TauReport { n, p, sigma, draws, empirical_mean, tau, pass: empirical_mean <= tau })
}

#[derive(Debug, Clone)]
pub struct BoundsTrial {
    pub snr_db: f64,
    pub trial: usize,
    pub noise_dual: f64,
    pub tau: f64,
    pub applicable: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub trials: Vec<BoundsTrial>,
    pub applicable: usize,
    pub violations: usize,
}

/// Recovery-bound suite on observation-consistent data: the ground truth is
/// the lifted matrix itself (y = P_y(X_h) + n), matching the premise of the
/// measured-projection error bound.
pub fn check_bounds(
    n: usize,
    p: usize,
    snrs_db: &[f64],
    trials_per_snr: usize,
    seed: u64,
) -> Result<BoundsReport> {
    let g = geom(n)?;
    let sub = DcrSubspace::pca(&g, p, DcrSubspace::default_dense(p))?;
    let law = SceneConfig::default();
    let mut out = Vec::new();
    for (si, &snr_db) in snrs_db.iter().enumerate() {
        for trial in 0..trials_per_snr {
            let scene_seed = derive(seed, Stream::Scene, si as u64, trial as u64);
            let comb_seed = derive(seed, Stream::Combiner, si as u64, trial as u64);
            let noise_seed = derive(seed, Stream::Noise, si as u64, trial as u64);
            let paths = sample_scene(&g, &law, scene_seed)?;
            let x_truth = lift_ground_truth(&g, &sub, &paths)?;
            let h = apply_p(&sub, &x_truth.view())?;
            let h_energy: f64 = h.iter().map(|v| v.norm_sqr()).sum();
            let noise_var = snr_db_to_noise_var(snr_db, h_energy, n);
            let setup = gen_combiners(n, 4, 16, noise_var, comb_seed)?;
            let clean = apply_py(&setup, &sub, &x_truth.view())?;
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            let noise = complex_gaussian(&mut rng, setup.n_measurements(), noise_var);
            let y = &clean + &noise;
            let tau = tau_rule(&setup, &sub, noise_var.sqrt())?;
            let mut cfg = SolverConfig::with_tau(tau);
            cfg.tol_primal = 1e-4;
            cfg.tol_dual = 1e-4;
            let sol = solve(&setup, &sub, &y.view(), &cfg)?;
            let noise_dual = dual_atomic_norm(&setup, &sub, &noise.view())?;
            let diff = &sol.x_hat - &x_truth;
            let proj = apply_py(&setup, &sub, &diff.view())?;
            let lhs = proj.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
            let rhs = 2.0 * tau / n as f64 * atomic_norm_upper_bound(&g, &sub, &paths);
            let applicable = noise_dual <= tau;
            out.push(BoundsTrial {
                snr_db,
                trial,
                noise_dual,
                tau,
                applicable,
                lhs,
                rhs,
                violated: applicable && lhs > rhs,
            });
        }
    }
    let applicable = out.iter().filter(|t| t.applicable).count();
    let violations = out.iter().filter(|t| t.violated).count();
    Ok(BoundsReport { trials: out, applicable, violations })
}

#[derive(Debug, Clone)]
pub struct GradReport {
    pub points: usize,
    pub worst_rel_error: f64,
    pub pass: bool,
}

/// Finite-difference check of the refinement gradients at random points.
pub fn gradcheck(points: usize, seed: u64) -> Result<GradReport> {
    let n = 64;
    let g = geom(n)?;
    let law = SceneConfig { n_paths: 2, ..Default::default() };
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = SteeringModel::Exact;
    let (zfr, zra) = (g.fresnel_distance_m(), g.rayleigh_distance_m());
    let mut checked = 0usize;
    let mut scene_idx = 0u64;
    while checked < points {
        let paths = sample_scene(&g, &law, derive(seed, Stream::Scene, scene_idx, 0))?;
        let setup = gen_combiners(n, 4, 8, 0.0, derive(seed, Stream::Combiner, scene_idx, 0))?;
        let h = synth_channel(&g, &paths, model)?;
        let rec = crate::measure::measure(&setup, &h.view(), 0.0, 0)?;
        scene_idx += 1;
        for _ in 0..5 {
            if checked >= points {
                break;
            }
            let thetas: Vec<f64> = (0..2).map(|_| (rng.random::<f64>() - 0.5) * 1.4).collect();
            let ranges: Vec<f64> =
                (0..2).map(|_| zfr * 1.5 + rng.random::<f64>() * (0.5 * zra - zfr * 1.5)).collect();
            let (_, gt, gr) =
                cost_and_gradients(&setup, &g, model, &thetas, &ranges, &rec.y.view())?;
            for j in 0..2 {
                let h_th = 6.0e-6 * (1.0 + thetas[j].abs());
                let mut tp = thetas.clone();
                tp[j] = thetas[j] + h_th;
                let cp = projection_cost(&setup, &g, model, &tp, &ranges, &rec.y.view())?;
                tp[j] = thetas[j] - h_th;
                let cm = projection_cost(&setup, &g, model, &tp, &ranges, &rec.y.view())?;
                let fd = (cp - cm) / (2.0 * h_th);
                worst = worst.max((gt[j] - fd).abs() / fd.abs().max(1e-9));

                let h_r = 6.0e-6 * (1.0 + ranges[j].abs());
                let mut rp = ranges.clone();
                rp[j] = ranges[j] + h_r;
                let cp = projection_cost(&setup, &g, model, &thetas, &rp, &rec.y.view())?;
                rp[j] = ranges[j] - h_r;
                let cm = projection_cost(&setup, &g, model, &thetas, &rp, &rec.y.view())?;
                let fd = (cp - cm) / (2.0 * h_r);
                worst = worst.max((gr[j] - fd).abs() / fd.abs().max(1e-9));
            }
            checked += 1;
        }
    }
    Ok(GradReport { points: checked, worst_rel_error: worst, pass: worst <= 1e-5 })
}

/// One toy denoising instance used to pin the splitting solver against an
/// external interior-point reference.
pub struct ToyInstance {
    pub setup: crate::measure::MeasurementSetup,
    pub sub: DcrSubspace,
    pub y: Array1<c64>,
    pub tau: f64,
}

/// Deterministic small instance (N = 32, P = 4, M = 32): two radiating-band
/// paths observed at 20 dB.
pub fn toy_instance(index: u64) -> Result<ToyInstance> {
    let n = 32;
    let g = geom(n)?;
    let sub = DcrSubspace::pca(&g, 4, 64)?;
    let law = SceneConfig { n_paths: 2, ..Default::default() };
    let paths = sample_scene(&g, &law, derive(0xf1f1, Stream::Scene, index, 0))?;
    let x_truth = lift_ground_truth(&g, &sub, &paths)?;
    let h = apply_p(&sub, &x_truth.view())?;
    let h_energy: f64 = h.iter().map(|v| v.norm_sqr()).sum();
    let noise_var = snr_db_to_noise_var(20.0, h_energy, n);
    let setup = gen_combiners(n, 4, 8, noise_var, derive(0xf1f1, Stream::Combiner, index, 0))?;
    let clean = apply_py(&setup, &sub, &x_truth.view())?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive(0xf1f1, Stream::Noise, index, 0));
    let noise = complex_gaussian(&mut rng, setup.n_measurements(), noise_var);
    let y = &clean + &noise;
    let tau = tau_rule(&setup, &sub, noise_var.sqrt())?;
    Ok(ToyInstance { setup, sub, y, tau })
}

/// Fixed lifted matrix built from two orthogonal atoms; its atomic norm
/// equals the sum of the atom magnitudes (2.0 here), which the feasible
/// decomposition bound attains.
pub fn atomic_toy_matrix() -> (Array2<c64>, f64) {
    let n = 16;
    let p = 3;
    let a0 = crate::channel::tone_vector(n, 0.0);
    let ahalf = crate::channel::tone_vector(n, 0.5);
    let mut v1 = Array1::<c64>::zeros(p);
    v1[0] = c64::new(1.0, 0.0);
    let mut v2 = Array1::<c64>::zeros(p);
    v2[1] = c64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v2[2] = c64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let c1 = c64::from_polar(1.3, 0.4);
    let c2 = c64::from_polar(0.7, -1.1);
    let mut x = Array2::<c64>::zeros((p, n));
    for i in 0..p {
        for j in 0..n {
            x[[i, j]] += c1 * v1[i] * a0[j] + c2 * v2[i] * ahalf[j];
        }
    }
    (x, 2.0)
}

/// Noiseless two-path recovery outcome used by the recovery suite.
#[derive(Debug, Clone)]
pub struct NoiselessRecovery {
    pub stage1_max_sin_err: f64,
    pub stage1_max_range_rel_err: f64,
    pub stage2_nmse: f64,
}

/// Noiseless end-to-end run with two well-separated paths. Stage-I accuracy
/// is reported against a second-order ground truth; Stage-II NMSE against an
/// exact-model ground truth.
pub fn noiseless_recovery(n: usize, p: usize, seed: u64) -> Result<NoiselessRecovery> {
    let g = geom(n)?;
    let sub = DcrSubspace::pca(&g, p, DcrSubspace::default_dense(p))?;
    let zra = g.rayleigh_distance_m();
    // wrap separation of the two frequencies ≈ 0.3 ≫ 4/N
    let paths = vec![
        PathParams::new((-0.22f64).asin() / 1.0, 0.12 * zra, c64::new(0.9, 0.3))?,
        PathParams::new(0.38f64.asin(), 0.20 * zra, c64::new(0.5, -0.7))?,
    ];
    let setup = gen_combiners(n, 4, 16, 0.0, derive(seed, Stream::Combiner, 0, 0))?;

    let run = |model: SteeringModel| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let h = synth_channel(&g, &paths, model)?;
        let rec = crate::measure::measure(&setup, &h.view(), 0.0, 0)?;
        let y_norm: f64 = rec.y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let cfg = SolverConfig::with_tau(1e-3 * y_norm);
        let sol = solve(&setup, &sub, &rec.y.view(), &cfg)?;
        let est = crate::recovery::stage_one(&g, &setup, &sub, &rec.y.view(), &sol.u_hat.view(), 2)?;
        let opts = RefineOptions { model, max_iters: 2000, ..Default::default() };
        let state = crate::refine::refine(&setup, &g, &rec.y.view(), &est.thetas, &est.ranges_m, &opts)?;
        let (_, h_hat) =
            crate::refine::finalize(&setup, &g, model, &state.thetas, &state.ranges, &rec.y.view())?;
        let nm = crate::metrics::nmse(&h_hat.view(), &h.view())?;
        Ok((est.thetas, est.ranges_m, nm))
    };

    // Stage-I accuracy on second-order data (only truncation error remains)
    let (thetas1, ranges1, _) = run(SteeringModel::SecondOrder)?;
    let perm = crate::metrics::match_paths(&thetas1, &ranges1, &paths, zra)?;
    let mut sin_err: f64 = 0.0;
    let mut rng_err: f64 = 0.0;
    for (i, p) in paths.iter().enumerate() {
        sin_err = sin_err.max((thetas1[perm[i]].sin() - p.theta_rad.sin()).abs());
        rng_err = rng_err.max((ranges1[perm[i]] - p.range_m).abs() / p.range_m);
    }
    // Stage-II consistency on exact-model data
    let (_, _, stage2_nmse) = run(SteeringModel::Exact)?;
    Ok(NoiselessRecovery {
        stage1_max_sin_err: sin_err,
        stage1_max_range_rel_err: rng_err,
        stage2_nmse,
    })
}
