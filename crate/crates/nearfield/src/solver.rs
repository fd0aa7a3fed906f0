//! Regularized atomic-norm denoising via a first-order splitting method.
//!
//! The estimation problem
//!
//! ```text
//!   minimize  ½‖y − P_y(X)‖₂² + τ·( tr(Toep(u))/(2N) + tr(V)/2 )
//!   subject to  [[Toep(u), Xᴴ], [X, V]] ⪰ 0
//! ```
//!
//! is solved with a consensus split between the structured variables
//! (X, u, V) and a PSD-cone copy Z of the (N+P)×(N+P) block matrix. The
//! (X, u, V) update is a closed-form quadratic solve — diagonal averaging for
//! the Toeplitz block, a shift for V, and one factored N×N linear system for
//! X — and the Z update is a projection onto the PSD cone via a Hermitian
//! eigendecomposition. Over-relaxation and residual balancing follow standard
//! practice.
//!
//! Data are normalized by ‖y‖₂ internally (the minimizer scales linearly in
//! (y, τ), so this is exact) to keep the penalty well-scaled across noise
//! levels.

use ndarray::prelude::*;
use ndarray_linalg::solve::{Factorize, Solve};
use num_complex::Complex64 as c64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::io::Write;

use crate::channel::PathParams;
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::lifting::{apply_p, apply_py, apply_py_adjoint};
use crate::linalg::{hermitize, spectral_norm, HermitianEig};
use crate::measure::MeasurementSetup;
use crate::subspace::DcrSubspace;

/// Splitting-solver knobs.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Regularization weight τ > 0.
    pub tau: f64,
    /// Initial penalty ρ.
    pub penalty: f64,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    /// Over-relaxation factor α ∈ [1, 2).
    pub over_relaxation: f64,
    /// Residual balancing (factor 2, ratio threshold 10).
    pub adapt_penalty: bool,
    /// Keep a per-iteration residual/objective trace.
    pub capture_trace: bool,
}

impl SolverConfig {
    pub fn with_tau(tau: f64) -> Self {
        Self {
            tau,
            penalty: 1.0,
            max_iters: 20_000,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            // plain splitting beats over-relaxation on this cone split
            over_relaxation: 1.0,
            adapt_penalty: true,
            capture_trace: false,
        }
    }
}

/// One trace row: (iteration, relative primal residual, relative dual
/// residual, objective on normalized data).
#[derive(Debug, Clone, Copy)]
pub struct IterStat {
    pub iter: usize,
    pub primal_rel: f64,
    pub dual_rel: f64,
    pub objective: f64,
}

/// Solver output triple plus convergence diagnostics.
#[derive(Debug, Clone)]
pub struct LiftedSolution {
    /// X̂, P×N.
    pub x_hat: Array2<c64>,
    /// û, length N, first entry real; parameterizes Toep(û).
    pub u_hat: Array1<c64>,
    /// V̂, P×P Hermitian.
    pub v_hat: Array2<c64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub converged: bool,
    pub trace: Vec<IterStat>,
}

impl LiftedSolution {
    /// Write the residual/objective trajectory as a plain-text table.
    pub fn write_trace(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "iter primal_rel dual_rel objective")?;
        for s in &self.trace {
            writeln!(f, "{} {:.6e} {:.6e} {:.9e}", s.iter, s.primal_rel, s.dual_rel, s.objective)?;
        }
        Ok(())
    }
}

/// Hermitian Toeplitz matrix with first column `u`.
pub fn toeplitz(u: &ArrayView1<c64>) -> Array2<c64> {
    let n = u.len();
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i >= j {
            u[i - j]
        } else {
            u[j - i].conj()
        }
    })
}

/// Assemble the PSD block matrix [[Toep(u), Xᴴ], [X, V]].
pub fn assemble_block(u: &ArrayView1<c64>, x: &ArrayView2<c64>, v: &ArrayView2<c64>) -> Array2<c64> {
    let n = u.len();
    let p = x.nrows();
    let k = n + p;
    let mut b = Array2::zeros((k, k));
    for i in 0..n {
        for j in 0..=i {
            let val = u[i - j];
            b[[i, j]] = val;
            b[[j, i]] = val.conj();
        }
        b[[i, i]] = c64::new(u[0].re, 0.0);
    }
    for i in 0..p {
        for j in 0..n {
            b[[n + i, j]] = x[[i, j]];
            b[[j, n + i]] = x[[i, j]].conj();
        }
    }
    for i in 0..p {
        for j in 0..p {
            b[[n + i, n + j]] = v[[i, j]];
        }
    }
    b
}

/// Regularization rule τ = √(1+1/ln N)·√(ln N + ln(4π·ln N) + 1)·‖A‖₂·‖G‖_F·σ,
/// which dominates the expected dual norm of i.i.d. CN(0, σ²) noise.
pub fn tau_rule(setup: &MeasurementSetup, sub: &DcrSubspace, sigma: f64) -> Result<f64> {
    let n = sub.n_antennas() as f64;
    if sub.n_antennas() < 3 {
        return Err(Error::Parameter("tau rule needs N ≥ 3".into()));
    }
    if sigma < 0.0 {
        return Err(Error::Parameter("sigma must be nonnegative".into()));
    }
    let ln_n = n.ln();
    let factor = (1.0 + 1.0 / ln_n).sqrt() * (ln_n + (4.0 * PI * ln_n).ln() + 1.0).sqrt();
    let a_norm = spectral_norm(&setup.stacked.view())?;
    let g_fro: f64 = sub.basis.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    Ok(factor * a_norm * g_fro * sigma)
}

/// Grid size T = ⌈4πN·ln N⌉ used to evaluate the dual atomic norm.
pub fn dual_norm_grid_len(n: usize) -> usize {
    let nf = n as f64;
    let t = (4.0 * PI * nf * nf.ln()).ceil() as usize;
    t.max((4.0 * PI * nf).ceil() as usize + 1)
}

/// sup over the frequency grid of ‖P_y*(z)·conj(a(ω))‖₂, evaluated with
/// length-`t_len` transforms of the P rows of the adjoint image.
pub fn dual_atomic_norm_with_grid(
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    z: &ArrayView1<c64>,
    t_len: usize,
) -> Result<f64> {
    let zmat = apply_py_adjoint(setup, sub, z)?;
    Ok(dual_norm_of_matrix(&zmat.view(), t_len))
}

/// Dual norm of an already-lifted P×N matrix on a T-point grid.
pub fn dual_norm_of_matrix(zmat: &ArrayView2<c64>, t_len: usize) -> f64 {
    dual_norm_argmax(zmat, t_len).0
}

/// Grid maximum plus the frequency attaining it.
pub fn dual_norm_argmax(zmat: &ArrayView2<c64>, t_len: usize) -> (f64, f64) {
    let acc = dual_spectrum(zmat, t_len);
    let (best_t, best) = acc
        .iter()
        .enumerate()
        .fold((0usize, 0.0f64), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    (best.sqrt(), best_t as f64 / t_len as f64)
}

/// Squared column norms ‖Z·conj(a(t/T))‖₂² over the T-point grid.
pub fn dual_spectrum(zmat: &ArrayView2<c64>, t_len: usize) -> Vec<f64> {
    let (p, n) = zmat.dim();
    debug_assert!(t_len >= n);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(t_len);
    let mut acc = vec![0.0f64; t_len];
    let mut buf = vec![c64::new(0.0, 0.0); t_len];
    for row in 0..p {
        buf.iter_mut().for_each(|v| *v = c64::new(0.0, 0.0));
        for (j, v) in zmat.row(row).iter().enumerate() {
            buf[j] = *v;
        }
        fft.process(&mut buf);
        for (a, v) in acc.iter_mut().zip(buf.iter()) {
            *a += v.norm_sqr();
        }
    }
    acc
}

/// Dual atomic norm on the default grid.
pub fn dual_atomic_norm(
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    z: &ArrayView1<c64>,
) -> Result<f64> {
    dual_atomic_norm_with_grid(setup, sub, z, dual_norm_grid_len(sub.n_antennas()))
}

/// Feasible-decomposition bound Σ_l |α_l|·‖v_l‖₂ on the atomic norm of the
/// ground-truth lift.
pub fn atomic_norm_upper_bound(
    geom: &ArrayGeometry,
    sub: &DcrSubspace,
    paths: &[PathParams],
) -> f64 {
    paths
        .iter()
        .map(|p| {
            let v = sub.coefficients(p.phi(geom));
            let vn: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            p.gain.norm() * vn
        })
        .sum()
}

fn frob(a: &Array2<c64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve the regularized atomic-norm SDP. Non-convergence within the
/// iteration budget is reported through `converged = false`, never as an
/// error.
pub fn solve(
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    y: &ArrayView1<c64>,
    config: &SolverConfig,
) -> Result<LiftedSolution> {
    let n = sub.n_antennas();
    let p = sub.p;
    let m = setup.n_measurements();
    if y.len() != m {
        return Err(Error::Shape(format!("observation length {} vs M={m}", y.len())));
    }
    if !(config.tau > 0.0) {
        return Err(Error::Parameter(format!("tau must be positive, got {}", config.tau)));
    }
    let y_norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if y_norm == 0.0 {
        return Ok(LiftedSolution {
            x_hat: Array2::zeros((p, n)),
            u_hat: Array1::zeros(n),
            v_hat: Array2::zeros((p, p)),
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            objective: 0.0,
            converged: true,
            trace: Vec::new(),
        });
    }
    let y_s = y.mapv(|v| v / y_norm);
    let tau = config.tau / y_norm;
    let k = n + p;

    // fixed per-solve data
    let a_h = setup.stacked.t().mapv(|v| v.conj());
    let r_mat = a_h.dot(&setup.stacked); // AᴴA, N×N
    let d_q = sub.row_norms_sq();
    let adj_y = apply_py_adjoint(setup, sub, &y_s.view())?; // P×N
    let q_conj = sub.basis.mapv(|v| v.conj()); // q_n as rows: q_conj[n, p]

    let mut rho = config.penalty.max(1e-8);
    let factorize = |rho: f64| -> Result<_> {
        let mut mat = r_mat.clone();
        for i in 0..n {
            let scale = c64::new(d_q[i], 0.0);
            for j in 0..n {
                mat[[i, j]] *= scale;
            }
            mat[[i, i]] += c64::new(2.0 * rho, 0.0);
        }
        Ok(mat.factorize()?)
    };
    let mut lu = factorize(rho)?;

    let mut z = Array2::<c64>::zeros((k, k));
    let mut dual = Array2::<c64>::zeros((k, k)); // scaled dual U
    let mut z_old = Array2::<c64>::zeros((k, k));
    let mut u_vec = Array1::<c64>::zeros(n);
    let mut x = Array2::<c64>::zeros((p, n));
    let mut v_mat = Array2::<c64>::zeros((p, p));
    let mut eig = HermitianEig::new(k)?;
    let mut trace = Vec::new();

    let alpha = config.over_relaxation.clamp(1.0, 1.99);
    let mut iterations = 0;
    let mut converged = false;
    let mut primal_rel = f64::INFINITY;
    let mut dual_rel = f64::INFINITY;

    for it in 0..config.max_iters {
        iterations = it + 1;
        // ---- structured update: C = Z − U ----------------------------------
        // (blocks of C read on the fly to avoid materializing it)

        // Toeplitz block: averages along subdiagonals of C_T
        for kk in 0..n {
            let mut acc = c64::new(0.0, 0.0);
            for i in 0..(n - kk) {
                acc += z[[i + kk, i]] - dual[[i + kk, i]];
            }
            let mean = acc / (n - kk) as f64;
            u_vec[kk] = if kk == 0 {
                c64::new(mean.re - tau / (2.0 * rho * n as f64), 0.0)
            } else {
                mean
            };
        }
        // V block
        for i in 0..p {
            for j in 0..p {
                v_mat[[i, j]] = z[[n + i, n + j]] - dual[[n + i, n + j]];
            }
        }
        hermitize(&mut v_mat);
        for i in 0..p {
            v_mat[[i, i]] -= c64::new(tau / (2.0 * rho), 0.0);
        }
        // X block: normal equations through the factored system
        let mut b = adj_y.clone();
        for i in 0..p {
            for j in 0..n {
                b[[i, j]] += 2.0 * rho * (z[[n + i, j]] - dual[[n + i, j]]);
            }
        }
        let beta = apply_p(sub, &b.view())?;
        let p_vec = lu.solve(&beta)?;
        let w = r_mat.dot(&p_vec);
        for j in 0..n {
            let wj = w[j];
            for i in 0..p {
                x[[i, j]] = (b[[i, j]] - wj * q_conj[[j, i]]) / (2.0 * rho);
            }
        }

        // ---- cone update ----------------------------------------------------
        let b_new = assemble_block(&u_vec.view(), &x.view(), &v_mat.view());
        std::mem::swap(&mut z_old, &mut z);
        // H = α·B + (1−α)·Z_old + U
        let mut h = Array2::<c64>::zeros((k, k));
        for i in 0..k {
            for j in 0..k {
                h[[i, j]] = alpha * b_new[[i, j]] + (1.0 - alpha) * z_old[[i, j]] + dual[[i, j]];
            }
        }
        hermitize(&mut h);
        eig.compute(&h.view())?;
        let vals = eig.eigenvalues();
        let vecs = eig.vectors();
        let n_neg = vals.iter().take_while(|&&v| v < 0.0).count();
        let n_pos = k - n_neg;
        if n_neg <= n_pos {
            // Z = H − Σ_{λ<0} λ·qqᴴ
            z.assign(&h);
            if n_neg > 0 {
                let mut s = Array2::<c64>::zeros((k, n_neg));
                for (col, idx) in (0..n_neg).enumerate() {
                    let scale = (-vals[idx]).sqrt();
                    for i in 0..k {
                        s[[i, col]] = vecs[idx * k + i] * scale;
                    }
                }
                let sh = s.t().mapv(|v| v.conj());
                let neg_part = s.dot(&sh);
                z += &neg_part;
            }
        } else {
            let mut s = Array2::<c64>::zeros((k, n_pos));
            for (col, idx) in (n_neg..k).enumerate() {
                let scale = vals[idx].max(0.0).sqrt();
                for i in 0..k {
                    s[[i, col]] = vecs[idx * k + i] * scale;
                }
            }
            let sh = s.t().mapv(|v| v.conj());
            z = s.dot(&sh);
        }
        hermitize(&mut z);

        // ---- dual update and residuals --------------------------------------
        let mut primal_sq = 0.0f64;
        let mut dual_sq = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let relaxed = alpha * b_new[[i, j]] + (1.0 - alpha) * z_old[[i, j]];
                dual[[i, j]] += relaxed - z[[i, j]];
                primal_sq += (b_new[[i, j]] - z[[i, j]]).norm_sqr();
                dual_sq += (z[[i, j]] - z_old[[i, j]]).norm_sqr();
            }
        }
        let b_norm = frob(&b_new);
        let z_norm = frob(&z);
        let lam_norm = rho * frob(&dual);
        primal_rel = primal_sq.sqrt() / b_norm.max(z_norm).max(1.0);
        dual_rel = rho * dual_sq.sqrt() / lam_norm.max(1.0);

        if config.capture_trace && (it % 10 == 0 || it + 1 == config.max_iters) {
            let fit = {
                let py = apply_py(setup, sub, &x.view())?;
                y_s.iter().zip(py.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
            };
            let tr_t = n as f64 * u_vec[0].re;
            let tr_v: f64 = (0..p).map(|i| v_mat[[i, i]].re).sum();
            trace.push(IterStat {
                iter: it,
                primal_rel,
                dual_rel,
                objective: 0.5 * fit + tau * (tr_t / (2.0 * n as f64) + 0.5 * tr_v),
            });
        }

        if primal_rel <= config.tol_primal && dual_rel <= config.tol_dual {
            converged = true;
            break;
        }

        // residual balancing on relative scales
        if config.adapt_penalty && it % 10 == 9 {
            if primal_rel > 10.0 * dual_rel && rho < 1e6 {
                rho *= 2.0;
                dual.mapv_inplace(|v| v / 2.0);
                lu = factorize(rho)?;
            } else if dual_rel > 10.0 * primal_rel && rho > 1e-6 {
                rho /= 2.0;
                dual.mapv_inplace(|v| v * 2.0);
                lu = factorize(rho)?;
            }
        }
    }

    // scale back to the original data
    let scale = c64::new(y_norm, 0.0);
    let x_hat = x.mapv(|v| v * scale);
    let u_hat = u_vec.mapv(|v| v * scale);
    let v_hat = v_mat.mapv(|v| v * scale);
    let objective = {
        let py = apply_py(setup, sub, &x_hat.view())?;
        let fit: f64 = y.iter().zip(py.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let tr_t = n as f64 * u_hat[0].re;
        let tr_v: f64 = (0..p).map(|i| v_hat[[i, i]].re).sum();
        0.5 * fit + config.tau * (tr_t / (2.0 * n as f64) + 0.5 * tr_v)
    };
    Ok(LiftedSolution {
        x_hat,
        u_hat,
        v_hat,
        iterations,
        primal_residual: primal_rel,
        dual_residual: dual_rel,
        objective,
        converged,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PathParams;
    use crate::lifting::lift_ground_truth;
    use crate::measure::{complex_gaussian, gen_combiners};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(n: usize, p: usize, n_rf: usize, q: usize) -> (ArrayGeometry, DcrSubspace, MeasurementSetup) {
        let geom = ArrayGeometry::half_wavelength(n, 3.0e-3).unwrap();
        let sub = DcrSubspace::pca(&geom, p, DcrSubspace::default_dense(p)).unwrap();
        let setup = gen_combiners(n, n_rf, q, 0.0, 42).unwrap();
        (geom, sub, setup)
    }

    #[test]
    fn tau_rule_reference_value() {
        // N=256, orthonormal G with P=10 so ‖G‖_F = √10, σ=1:
        // hand evaluation of the closed form gives 11.2850·‖A‖₂
        let (_, sub, setup) = fixture(256, 10, 2, 4);
        let tau = tau_rule(&setup, &sub, 1.0).unwrap();
        let a_norm = spectral_norm(&setup.stacked.view()).unwrap();
        assert_relative_eq!(tau / a_norm, 11.2850, max_relative = 1e-4);
    }

    #[test]
    fn tau_rule_is_linear_in_sigma() {
        let (_, sub, setup) = fixture(64, 5, 2, 4);
        let t1 = tau_rule(&setup, &sub, 1.0).unwrap();
        let t2 = tau_rule(&setup, &sub, 2.0).unwrap();
        assert_relative_eq!(t2, 2.0 * t1, epsilon = 1e-12);
        assert_abs_diff_eq!(tau_rule(&setup, &sub, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn dual_norm_of_zero_is_zero() {
        let (_, sub, setup) = fixture(32, 4, 2, 4);
        let z = Array1::<c64>::zeros(setup.n_measurements());
        assert_eq!(dual_atomic_norm(&setup, &sub, &z.view()).unwrap(), 0.0);
    }

    #[test]
    fn dual_norm_peaks_at_planted_frequency() {
        // plant P_y*(z) = v·aᵀ(ω₀) shape directly on the matrix evaluator and
        // compare against a 16× finer grid scan
        let (_, _sub, _) = fixture(64, 5, 2, 8);
        let omega0 = 0.25; // on the default grid only approximately
        let v = Array1::from_shape_fn(5, |i| c64::new((i + 1) as f64, -0.3));
        let a = crate::channel::tone_vector(64, omega0);
        let mut zmat = Array2::zeros((5, 64));
        for i in 0..5 {
            for j in 0..64 {
                zmat[[i, j]] = v[i] * a[j];
            }
        }
        let t = dual_norm_grid_len(64);
        let coarse = dual_norm_of_matrix(&zmat.view(), t);
        let (fine, omega_star) = dual_norm_argmax(&zmat.view(), 16 * t);
        // aᵀ(ω₀)·conj(a(ω₀)) = N, so the peak is ‖v‖₂·N at ω₀
        let vnorm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let peak = vnorm * 64.0;
        assert_relative_eq!(fine, peak, max_relative = 1e-6);
        assert!((omega_star - omega0).abs() <= 1.0 / (16 * t) as f64, "peak at {omega_star}");
        // Bernstein-step factor between the grids
        let factor = 1.0 + 4.0 * PI * 64.0 / t as f64;
        assert!(fine <= factor * coarse, "fine {fine} vs coarse {coarse} (factor {factor})");
        assert!(coarse <= peak * (1.0 + 1e-9));
    }

    #[test]
    fn atomic_bound_scales_with_gains() {
        let (geom, sub, _) = fixture(32, 4, 2, 4);
        let p1 = PathParams::new(0.2, 2.0, c64::new(0.6, 0.8)).unwrap();
        let base = atomic_norm_upper_bound(&geom, &sub, &[p1]);
        let scaled = atomic_norm_upper_bound(
            &geom,
            &sub,
            &[PathParams { gain: p1.gain * c64::new(3.0, 0.0), ..p1 }],
        );
        assert_relative_eq!(scaled, 3.0 * base, epsilon = 1e-12);
        // unit gain and (implicitly) unit-normalized v gives ‖v‖ itself
        let v = sub.coefficients(p1.phi(&geom));
        let vn: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert_relative_eq!(base, p1.gain.norm() * vn, epsilon = 1e-12);
    }

    #[test]
    fn solve_zero_observation_returns_zeros() {
        let (_, sub, setup) = fixture(32, 4, 2, 4);
        let y = Array1::<c64>::zeros(setup.n_measurements());
        let sol = solve(&setup, &sub, &y.view(), &SolverConfig::with_tau(1.0)).unwrap();
        assert!(sol.converged);
        assert_eq!(frob(&sol.x_hat), 0.0);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn solve_rejects_nonpositive_tau() {
        let (_, sub, setup) = fixture(32, 4, 2, 4);
        let y = Array1::<c64>::zeros(setup.n_measurements());
        assert!(solve(&setup, &sub, &y.view(), &SolverConfig::with_tau(0.0)).is_err());
    }

    fn noiseless_single_path(
    ) -> (ArrayGeometry, DcrSubspace, MeasurementSetup, Array1<c64>, Array2<c64>) {
        let (geom, sub, setup) = fixture(32, 4, 4, 8);
        let path = PathParams::new(0.3, 1.2, c64::new(1.0, 0.4)).unwrap();
        assert!(geom.in_radiating_near_field(path.range_m));
        let xh = lift_ground_truth(&geom, &sub, &[path]).unwrap();
        let y = apply_py(&setup, &sub, &xh.view()).unwrap();
        (geom, sub, setup, y, xh)
    }

    #[test]
    fn fit_residual_decreases_along_tau_sweep() {
        let (_, sub, setup, y, _) = noiseless_single_path();
        let ynorm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let mut last = f64::INFINITY;
        for tau_rel in [1e-1, 1e-2, 1e-3] {
            let sol = solve(&setup, &sub, &y.view(), &SolverConfig::with_tau(tau_rel * ynorm)).unwrap();
            let py = apply_py(&setup, &sub, &sol.x_hat.view()).unwrap();
            let fit =
                y.iter().zip(py.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / ynorm;
            assert!(
                fit < last * (1.0 + 1e-9),
                "fit {fit} did not decrease from {last} at tau_rel {tau_rel}"
            );
            last = fit;
        }
        assert!(last < 5e-3, "final relative fit {last} too large");
    }

    #[test]
    fn solution_block_is_psd_within_tolerance() {
        let (_, sub, setup, y, _) = noiseless_single_path();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = complex_gaussian(&mut rng, setup.n_measurements(), 1e-2);
        let yn = &y + &noise;
        let tau = tau_rule(&setup, &sub, 0.1).unwrap();
        let sol = solve(&setup, &sub, &yn.view(), &SolverConfig::with_tau(tau)).unwrap();
        assert!(sol.converged, "solver did not converge: {:?}", (sol.primal_residual, sol.dual_residual));
        let block = assemble_block(&sol.u_hat.view(), &sol.x_hat.view(), &sol.v_hat.view());
        let (vals, _) = crate::linalg::eigh(&block.view()).unwrap();
        let lam_min = vals[0];
        let lam_max = vals[vals.len() - 1];
        assert!(lam_min >= -1e-6 * lam_max.max(1e-12), "λ_min {lam_min} vs λ_max {lam_max}");
        // first entry of û stays real by construction
        assert_eq!(sol.u_hat[0].im, 0.0);
    }

    #[test]
    fn toeplitz_parameterization_is_hermitian() {
        let u = Array1::from_vec(vec![
            c64::new(2.0, 0.0),
            c64::new(0.5, -0.3),
            c64::new(-0.1, 0.2),
        ]);
        let t = toeplitz(&u.view());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t[[i, j]], t[[j, i]].conj());
            }
        }
        assert_eq!(t[[2, 0]], u[2]);
        assert_eq!(t[[0, 2]], u[2].conj());
    }
}
