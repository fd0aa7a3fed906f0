//! Stage-II refinement: alternating gradient descent on the projection cost
//! under the spherical steering model, with Armijo backtracking.
//!
//! For parameters (θ, r) the steering matrix W has columns b(θ_l, r_l) and
//! S = A·W; eliminating the gains leaves L(θ, r) = ‖Π⊥_S·y‖₂². Each iteration
//! updates all angles, then all ranges, along the analytic gradient
//! ∂L = −2·Re((Π⊥y)ᴴ·∂S·S†y) with a backtracked step, so the accepted cost
//! sequence is non-increasing. Internally the descent runs in (sinθ, ln r) to
//! balance gradient magnitudes; ranges are clamped to the radiating band with
//! a small margin.

use ndarray::prelude::*;
use ndarray_linalg::LeastSquaresSvd;
use num_complex::Complex64 as c64;
use std::io::Write;

use crate::channel::{steering, steering_jacobian, SteeringModel};
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::measure::MeasurementSetup;

#[derive(Debug, Clone)]
pub struct RefineOptions {
    pub max_iters: usize,
    /// Stop when the relative cost decrease over one iteration falls below
    /// this.
    pub cost_tol: f64,
    /// Stop when the scaled gradient norm falls below `grad_tol_rel·‖y‖₂²`.
    pub grad_tol_rel: f64,
    pub armijo_c1: f64,
    pub backtrack: f64,
    pub step_min: f64,
    /// Fractional margin around [Z_fr, Z_ra] for the range clamp.
    pub range_margin: f64,
    pub model: SteeringModel,
    pub capture_trace: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            cost_tol: 1e-10,
            grad_tol_rel: 1e-8,
            armijo_c1: 1e-4,
            backtrack: 0.5,
            step_min: 1e-12,
            range_margin: 0.05,
            model: SteeringModel::Exact,
            capture_trace: false,
        }
    }
}

/// One refinement iteration record.
#[derive(Debug, Clone, Copy)]
pub struct RefineIter {
    pub iter: usize,
    pub cost: f64,
    pub grad_theta_norm: f64,
    pub grad_r_norm: f64,
    pub step_theta: f64,
    pub step_r: f64,
}

#[derive(Debug, Clone)]
pub struct RefineState {
    pub thetas: Vec<f64>,
    pub ranges: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    /// Accepted (θ-block, r-block) step sizes per iteration.
    pub steps: Vec<(f64, f64)>,
    pub trace: Vec<RefineIter>,
    /// A range hit the clamp at least once.
    pub range_clamped: bool,
    /// Line search bottomed out on at least one block.
    pub line_search_failures: usize,
    /// The steering matrix went rank-deficient at some visited point.
    pub degenerate: bool,
}

impl RefineState {
    pub fn write_trace(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "iter cost grad_theta grad_r step_theta step_r")?;
        for s in &self.trace {
            writeln!(
                f,
                "{} {:.9e} {:.3e} {:.3e} {:.3e} {:.3e}",
                s.iter, s.cost, s.grad_theta_norm, s.grad_r_norm, s.step_theta, s.step_r
            )?;
        }
        Ok(())
    }
}

struct EvalPoint {
    cost: f64,
    alpha: Array1<c64>,
    /// Residual y − S·α̂ = Π⊥y at the least-squares optimum.
    residual: Array1<c64>,
    degenerate: bool,
}

fn eval_point(
    setup: &MeasurementSetup,
    geom: &ArrayGeometry,
    model: SteeringModel,
    thetas: &[f64],
    ranges: &[f64],
    y: &ArrayView1<c64>,
) -> Result<EvalPoint> {
    let l = thetas.len();
    let m = setup.n_measurements();
    let mut s = Array2::<c64>::zeros((m, l));
    for (j, (&th, &r)) in thetas.iter().zip(ranges.iter()).enumerate() {
        let b = steering(geom, model, th, r)?;
        s.column_mut(j).assign(&setup.stacked.dot(&b));
    }
    let y_owned = y.to_owned();
    let fit = s.least_squares(&y_owned)?;
    let alpha = fit.solution;
    let degenerate = (fit.rank as usize) < l;
    let fitted = s.dot(&alpha);
    let residual = &y_owned - &fitted;
    let cost = residual.iter().map(|v| v.norm_sqr()).sum();
    Ok(EvalPoint { cost, alpha, residual, degenerate })
}

/// Projection cost L(θ, r) = min_α ‖y − S·α‖₂².
pub fn projection_cost(
    setup: &MeasurementSetup,
    geom: &ArrayGeometry,
    model: SteeringModel,
    thetas: &[f64],
    ranges: &[f64],
    y: &ArrayView1<c64>,
) -> Result<f64> {
    if thetas.len() != ranges.len() || thetas.is_empty() {
        return Err(Error::Parameter("need matching nonempty angle/range lists".into()));
    }
    Ok(eval_point(setup, geom, model, thetas, ranges, y)?.cost)
}

struct GradInfo {
    cost: f64,
    g_theta: Vec<f64>,
    g_r: Vec<f64>,
    /// Gauss-type diagonal curvatures 2|α̂_j|²·‖A·∂b_j‖², used only to scale
    /// the descent direction per coordinate.
    d_theta: Vec<f64>,
    d_r: Vec<f64>,
}

fn grad_info(
    setup: &MeasurementSetup,
    geom: &ArrayGeometry,
    model: SteeringModel,
    thetas: &[f64],
    ranges: &[f64],
    y: &ArrayView1<c64>,
) -> Result<GradInfo> {
    let ev = eval_point(setup, geom, model, thetas, ranges, y)?;
    let l = thetas.len();
    let mut info = GradInfo {
        cost: ev.cost,
        g_theta: vec![0.0; l],
        g_r: vec![0.0; l],
        d_theta: vec![0.0; l],
        d_r: vec![0.0; l],
    };
    for j in 0..l {
        let (db_dth, db_dr) = steering_jacobian(geom, model, thetas[j], ranges[j])?;
        let col_th = setup.stacked.dot(&db_dth);
        let col_r = setup.stacked.dot(&db_dr);
        // ∂L/∂p = −2·Re(α̂_j · (Π⊥y)ᴴ·A·∂b_j)
        let inner_th: c64 =
            ev.residual.iter().zip(col_th.iter()).map(|(r, c)| r.conj() * c).sum();
        let inner_r: c64 = ev.residual.iter().zip(col_r.iter()).map(|(r, c)| r.conj() * c).sum();
        let a2 = ev.alpha[j].norm_sqr();
        info.g_theta[j] = -2.0 * (ev.alpha[j] * inner_th).re;
        info.g_r[j] = -2.0 * (ev.alpha[j] * inner_r).re;
        info.d_theta[j] = 2.0 * a2 * col_th.iter().map(|v| v.norm_sqr()).sum::<f64>();
        info.d_r[j] = 2.0 * a2 * col_r.iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    Ok(info)
}

/// Analytic gradients of the projection cost w.r.t. each θ_l and r_l
/// (physical coordinates).
pub fn cost_and_gradients(
    setup: &MeasurementSetup,
    geom: &ArrayGeometry,
    model: SteeringModel,
    thetas: &[f64],
    ranges: &[f64],
    y: &ArrayView1<c64>,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let info = grad_info(setup, geom, model, thetas, ranges, y)?;
    Ok((info.cost, info.g_theta, info.g_r))
}

const SIN_LIMIT: f64 = 1.0 - 1e-9;

fn to_params(sines: &[f64], logr: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (
        sines.iter().map(|s| s.clamp(-SIN_LIMIT, SIN_LIMIT).asin()).collect(),
        logr.iter().map(|t| t.exp()).collect(),
    )
}

/// Alternating-block Armijo descent from a Stage-I initialization.
pub fn refine(
    setup: &MeasurementSetup,
    geom: &ArrayGeometry,
    y: &ArrayView1<c64>,
    init_thetas: &[f64],
    init_ranges: &[f64],
    opts: &RefineOptions,
) -> Result<RefineState> {
    let l = init_thetas.len();
    if l == 0 || init_ranges.len() != l {
        return Err(Error::Parameter("need matching nonempty initial angle/range lists".into()));
    }
    let y_energy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let (r_lo, r_hi) = (
        geom.fresnel_distance_m() * (1.0 - opts.range_margin),
        geom.rayleigh_distance_m() * (1.0 + opts.range_margin),
    );
    let mut range_clamped = false;
    let clamp_r = |t: f64, hit: &mut bool| -> f64 {
        let r = t.exp();
        if r < r_lo || r > r_hi {
            *hit = true;
            r.clamp(r_lo, r_hi).ln()
        } else {
            t
        }
    };

    let mut sines: Vec<f64> =
        init_thetas.iter().map(|t| t.sin().clamp(-SIN_LIMIT, SIN_LIMIT)).collect();
    let mut logr: Vec<f64> = init_ranges
        .iter()
        .map(|&r| clamp_r(r.max(1e-9).ln(), &mut range_clamped))
        .collect();

    let (thetas0, ranges0) = to_params(&sines, &logr);
    let mut current = eval_point(setup, geom, opts.model, &thetas0, &ranges0, y)?;
    let mut degenerate = current.degenerate;
    let mut line_search_failures = 0usize;
    let mut steps = Vec::new();
    let mut trace = Vec::new();
    let mut step_theta = f64::NAN; // bootstrapped from the first gradient
    let mut step_r = f64::NAN;
    let mut iterations = 0;

    for it in 0..opts.max_iters {
        iterations = it + 1;
        let cost_before = current.cost;

        // ---- θ block --------------------------------------------------------
        let (thetas, ranges) = to_params(&sines, &logr);
        let info = grad_info(setup, geom, opts.model, &thetas, &ranges, y)?;
        // chain rule into sinθ coordinates, with per-coordinate curvature
        // scaling of the descent direction
        let g_s: Vec<f64> = info
            .g_theta
            .iter()
            .zip(thetas.iter())
            .map(|(g, th)| g / th.cos().max(1e-9))
            .collect();
        let d_s: Vec<f64> = info
            .d_theta
            .iter()
            .zip(thetas.iter())
            .map(|(d, th)| d / th.cos().max(1e-9).powi(2))
            .collect();
        let d_floor = 1e-9 * d_s.iter().cloned().fold(0.0, f64::max) + 1e-300;
        let dir_s: Vec<f64> = g_s.iter().zip(d_s.iter()).map(|(g, d)| g / (d + d_floor)).collect();
        let g_s_norm_sq: f64 = g_s.iter().map(|v| v * v).sum();
        let slope_s: f64 = g_s.iter().zip(dir_s.iter()).map(|(g, d)| g * d).sum();
        let mut accepted_theta = 0.0;
        if slope_s > 0.0 {
            let mut xi = if step_theta.is_nan() { 1.0 } else { step_theta };
            loop {
                let trial: Vec<f64> = sines
                    .iter()
                    .zip(dir_s.iter())
                    .map(|(s, g)| (s - xi * g).clamp(-SIN_LIMIT, SIN_LIMIT))
                    .collect();
                let (t_th, t_r) = to_params(&trial, &logr);
                let ev = eval_point(setup, geom, opts.model, &t_th, &t_r, y)?;
                if ev.cost <= current.cost - opts.armijo_c1 * xi * slope_s {
                    sines = trial;
                    degenerate |= ev.degenerate;
                    current = ev;
                    accepted_theta = xi;
                    step_theta = (xi * 2.0).min(4.0);
                    break;
                }
                xi *= opts.backtrack;
                if xi < opts.step_min {
                    line_search_failures += 1;
                    step_theta = f64::NAN;
                    break;
                }
            }
        }

        // ---- r block --------------------------------------------------------
        let (thetas, ranges) = to_params(&sines, &logr);
        let info_r = grad_info(setup, geom, opts.model, &thetas, &ranges, y)?;
        let g_t: Vec<f64> =
            info_r.g_r.iter().zip(ranges.iter()).map(|(g, r)| g * r).collect();
        let d_t: Vec<f64> =
            info_r.d_r.iter().zip(ranges.iter()).map(|(d, r)| d * r * r).collect();
        let d_floor = 1e-9 * d_t.iter().cloned().fold(0.0, f64::max) + 1e-300;
        let dir_t: Vec<f64> = g_t.iter().zip(d_t.iter()).map(|(g, d)| g / (d + d_floor)).collect();
        let g_t_norm_sq: f64 = g_t.iter().map(|v| v * v).sum();
        let slope_t: f64 = g_t.iter().zip(dir_t.iter()).map(|(g, d)| g * d).sum();
        let mut accepted_r = 0.0;
        if slope_t > 0.0 {
            let mut xi = if step_r.is_nan() { 1.0 } else { step_r };
            loop {
                let mut hit = false;
                let trial: Vec<f64> = logr
                    .iter()
                    .zip(dir_t.iter())
                    .map(|(t, g)| clamp_r(t - xi * g, &mut hit))
                    .collect();
                let (t_th, t_r) = to_params(&sines, &trial);
                let ev = eval_point(setup, geom, opts.model, &t_th, &t_r, y)?;
                if ev.cost <= current.cost - opts.armijo_c1 * xi * slope_t {
                    logr = trial;
                    range_clamped |= hit;
                    degenerate |= ev.degenerate;
                    current = ev;
                    accepted_r = xi;
                    step_r = (xi * 2.0).min(4.0);
                    break;
                }
                xi *= opts.backtrack;
                if xi < opts.step_min {
                    line_search_failures += 1;
                    step_r = f64::NAN;
                    break;
                }
            }
        }

        steps.push((accepted_theta, accepted_r));
        if opts.capture_trace {
            trace.push(RefineIter {
                iter: it,
                cost: current.cost,
                grad_theta_norm: g_s_norm_sq.sqrt(),
                grad_r_norm: g_t_norm_sq.sqrt(),
                step_theta: accepted_theta,
                step_r: accepted_r,
            });
        }

        let grad_norm = (g_s_norm_sq + g_t_norm_sq).sqrt();
        if grad_norm < opts.grad_tol_rel * y_energy.max(1e-300) {
            break;
        }
        let decrease = cost_before - current.cost;
        if decrease <= opts.cost_tol * cost_before.max(1e-300) {
            break;
        }
    }

    let (thetas, ranges) = to_params(&sines, &logr);
    Ok(RefineState {
        thetas,
        ranges,
        cost: current.cost,
        iterations,
        steps,
        trace,
        range_clamped,
        line_search_failures,
        degenerate,
    })
}

/// Coordinate-wise scan dropping each range onto the best basin of the
/// projection cost over a log-spaced grid spanning the radiating band.
/// Coarse closed-form ranges can land outside the attraction basin of the
/// descent; two passes of this scan fix that for a few dozen cost
/// evaluations per path.
pub fn range_basin_scan(
    setup: &MeasurementSetup,
    geom: &ArrayGeometry,
    model: SteeringModel,
    thetas: &[f64],
    ranges: &[f64],
    y: &ArrayView1<c64>,
    grid_points: usize,
) -> Result<Vec<f64>> {
    let l = thetas.len();
    let mut best = ranges.to_vec();
    let (lo, hi) = (geom.fresnel_distance_m(), geom.rayleigh_distance_m());
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut cost = eval_point(setup, geom, model, thetas, &best, y)?.cost;
    for _pass in 0..2 {
        for j in 0..l {
            let mut local = (best[j], cost);
            for k in 0..grid_points {
                let r = (llo + (lhi - llo) * k as f64 / (grid_points as f64 - 1.0)).exp();
                let mut cand = best.clone();
                cand[j] = r;
                let c = eval_point(setup, geom, model, thetas, &cand, y)?.cost;
                if c < local.1 {
                    local = (r, c);
                }
            }
            best[j] = local.0;
            cost = local.1;
        }
    }
    Ok(best)
}

/// Final gains by pseudoinverse and channel synthesis from the refined
/// parameters: α̂ = S†y, ĥ = W·α̂.
pub fn finalize(
    setup: &MeasurementSetup,
    geom: &ArrayGeometry,
    model: SteeringModel,
    thetas: &[f64],
    ranges: &[f64],
    y: &ArrayView1<c64>,
) -> Result<(Vec<c64>, Array1<c64>)> {
    let ev = eval_point(setup, geom, model, thetas, ranges, y)?;
    let mut h = Array1::<c64>::zeros(geom.n_antennas);
    for (j, (&th, &r)) in thetas.iter().zip(ranges.iter()).enumerate() {
        let b = steering(geom, model, th, r)?;
        h.zip_mut_with(&b, |hv, bv| *hv += ev.alpha[j] * bv);
    }
    Ok((ev.alpha.to_vec(), h))
}
