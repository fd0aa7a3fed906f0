//! Stage-I extraction: gridless angles from the Toeplitz block, least-squares
//! gain vectors, and closed-form coarse ranges.
//!
//! Angles come from a Vandermonde decomposition of Toep(û) (rank decision on
//! the eigenvalues, then rotational invariance on the signal subspace). With
//! the frequencies fixed, the measurement model becomes linear in the stacked
//! products α_l·v_l, solved by least squares. Each reconstructed waveform
//! α_l·G·v_l is then a gain-scaled chirp whose consecutive-entry ratios have
//! phases −2π(2n−1)·φ_l; a weighted slope fit of those phases inverts to the
//! range. The chirp-rate bound keeps every ratio phase inside (−π, π), so no
//! unwrapping is required.

use ndarray::prelude::*;
use ndarray_linalg::{Eig, LeastSquaresSvd};
use num_complex::Complex64 as c64;
use std::f64::consts::TAU;

use crate::channel::tone_vector;
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::measure::MeasurementSetup;
use crate::solver::toeplitz;
use crate::subspace::{phi_max, DcrSubspace};

/// Wrap-distance between frequencies on the unit torus.
fn wrap_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Map a torus frequency to [−1/2, 1/2).
fn to_centered(omega: f64) -> f64 {
    let mut w = omega.rem_euclid(1.0);
    if w >= 0.5 {
        w -= 1.0;
    }
    w
}

/// Largest possible ratio-phase magnitude 2π(2N−3)·φ_max; staying below π
/// makes the phase-slope fit unwrap-free for every radiating-region path.
pub fn ratio_phase_bound(geom: &ArrayGeometry) -> f64 {
    TAU * (2.0 * geom.n_antennas as f64 - 3.0) * phi_max(geom)
}

#[derive(Debug, Clone, Default)]
pub struct VandermondeResult {
    /// Frequencies in [−1/2, 1/2), ascending.
    pub omegas: Vec<f64>,
    /// Numerical rank fell short of the requested order.
    pub rank_deficient: bool,
    /// Near-duplicate frequencies were merged and re-split.
    pub merged: bool,
}

/// Vandermonde decomposition of the Hermitian Toeplitz matrix Toep(u):
/// rank decision by eigenvalue threshold, then frequency extraction by
/// shift invariance of the signal subspace.
pub fn vandermonde_decompose(u: &ArrayView1<c64>, l: usize) -> Result<VandermondeResult> {
    let n = u.len();
    if l > n - 1 {
        return Err(Error::Parameter(format!("order {l} exceeds N−1 = {}", n - 1)));
    }
    let u_scale: f64 = u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if u_scale == 0.0 {
        return Ok(VandermondeResult { omegas: Vec::new(), rank_deficient: true, merged: false });
    }
    let t = toeplitz(u);
    let (vals, vecs) = crate::linalg::eigh(&t.view())?;
    let lam_max = vals[n - 1].max(0.0);
    let thr = (1e-6 * lam_max).max(1e-14 * u_scale);
    let rank = vals.iter().filter(|&&v| v >= thr).count();
    let keep = rank.min(l);
    let rank_deficient = keep < l;
    if keep == 0 {
        return Ok(VandermondeResult { omegas: Vec::new(), rank_deficient: true, merged: false });
    }
    // signal subspace = eigenvectors of the `keep` largest eigenvalues
    let us = vecs.slice(ndarray::s![.., n - keep..]).to_owned();
    let u1 = us.slice(ndarray::s![..n - 1, ..]).to_owned();
    let u2 = us.slice(ndarray::s![1.., ..]).to_owned();
    // shift invariance: U1·Φ ≈ U2
    let sol = u1.least_squares(&u2)?.solution;
    // rebuild with fresh strides; tiny solutions can come back degenerate
    let phi_mat = Array2::from_shape_fn((keep, keep), |(i, j)| sol[[i, j]]);
    let (eigs, _) = phi_mat.eig()?;
    let mut omegas: Vec<f64> = eigs.iter().map(|z| to_centered(z.arg() / TAU)).collect();
    omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // merge near-duplicates, then re-split by perturbation to keep the count
    let mut merged = false;
    let mut unique: Vec<f64> = Vec::with_capacity(omegas.len());
    for w in omegas {
        match unique.last() {
            Some(&prev) if wrap_dist(prev, w) < 1e-4 => {
                merged = true;
                let last = unique.last_mut().unwrap();
                *last = (*last + w) / 2.0;
            }
            _ => unique.push(w),
        }
    }
    let mut k = 1;
    while unique.len() < keep {
        merged = true;
        let base = unique[(k - 1) % unique.len()];
        unique.push(to_centered(base + k as f64 * 1e-6));
        k += 1;
    }
    unique.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(VandermondeResult { omegas: unique, rank_deficient, merged })
}

/// Angle from a frequency: θ = arcsin(ω·λc/d). Arguments outside [−1, 1] are
/// clamped and flagged.
pub fn omega_to_theta(omega: f64, geom: &ArrayGeometry) -> (f64, bool) {
    let arg = omega / geom.spacing_ratio();
    if arg.abs() <= 1.0 {
        (arg.asin(), false)
    } else {
        (arg.signum() * std::f64::consts::FRAC_PI_2, true)
    }
}

#[derive(Debug, Clone)]
pub struct LsGains {
    /// Column l holds α_l·v_l (only the product is identifiable).
    pub alpha_v: Array2<c64>,
    /// Ridge fallback was used for a rank-deficient design.
    pub ridge: bool,
    /// ‖y − Θc‖₂/‖y‖₂.
    pub residual_rel: f64,
    /// Fit residual y − Θc.
    pub residual: Array1<c64>,
}

/// Design matrix A·[diag(a(ω_1))·G, …, diag(a(ω_L))·G]. With `derivative`,
/// the tone in each block is replaced by its frequency derivative j2πk·a_k.
fn assemble_design(
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    omegas: &[f64],
    derivative: bool,
) -> Array2<c64> {
    let n = sub.n_antennas();
    let p = sub.p;
    let m = setup.n_measurements();
    let mut design = Array2::<c64>::zeros((m, omegas.len() * p));
    for (li, &w) in omegas.iter().enumerate() {
        let a = tone_vector(n, w);
        let mut block = Array2::<c64>::zeros((n, p));
        for i in 0..n {
            let tone = if derivative {
                a[i] * c64::new(0.0, TAU * i as f64)
            } else {
                a[i]
            };
            for j in 0..p {
                block[[i, j]] = tone * sub.basis[[i, j]];
            }
        }
        let ab = setup.stacked.dot(&block);
        design.slice_mut(ndarray::s![.., li * p..(li + 1) * p]).assign(&ab);
    }
    design
}

/// Least-squares fit of the stacked products [α_1·v_1; …; α_L·v_L] from
/// y ≈ A·[diag(a(ω̂_1))·G, …, diag(a(ω̂_L))·G]·c.
pub fn ls_gain_vectors(
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    y: &ArrayView1<c64>,
    omegas: &[f64],
) -> Result<LsGains> {
    let p = sub.p;
    let l = omegas.len();
    let m = setup.n_measurements();
    if l == 0 {
        return Err(Error::Parameter("need at least one frequency".into()));
    }
    if m < l * p {
        return Err(Error::Parameter(format!(
            "system is underdetermined: M = {m} < L·P = {}",
            l * p
        )));
    }
    let design = assemble_design(setup, sub, omegas, false);
    let y_owned = y.to_owned();
    let fit = design.least_squares(&y_owned)?;
    let mut coeffs = fit.solution;
    let mut ridge = false;
    if (fit.rank as usize) < l * p || coeffs.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        // ridge fallback on the normal equations, scaled to the design energy
        ridge = true;
        let dh = design.t().mapv(|v| v.conj());
        let mut gram = dh.dot(&design);
        let trace: f64 = (0..l * p).map(|i| gram[[i, i]].re).sum();
        let lam = 1e-10 * trace / (l * p) as f64;
        for i in 0..l * p {
            gram[[i, i]] += c64::new(lam, 0.0);
        }
        let rhs = dh.dot(&y_owned);
        use ndarray_linalg::Solve;
        coeffs = gram.solve(&rhs)?;
    }
    let y_norm: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let fitted = design.dot(&coeffs);
    let residual = &y.to_owned() - &fitted;
    let residual_rel = if y_norm > 0.0 {
        residual.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / y_norm
    } else {
        0.0
    };
    let mut alpha_v = Array2::zeros((p, l));
    for li in 0..l {
        for j in 0..p {
            alpha_v[[j, li]] = coeffs[li * p + j];
        }
    }
    Ok(LsGains { alpha_v, ridge, residual_rel, residual })
}

/// Variable-projection polish of the frequency support: joint Armijo descent
/// on F(ω) = min_c ‖y − Θ(ω)·c‖₂², where each path keeps its full chirp
/// block. Tightens supports blurred by finite solver precision and re-splits
/// merged near-pairs.
pub fn polish_omegas(
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    y: &ArrayView1<c64>,
    omegas: &mut [f64],
    max_iters: usize,
) -> Result<()> {
    let l = omegas.len();
    let p = sub.p;
    if l == 0 {
        return Ok(());
    }
    let y_owned = y.to_owned();
    let cost_of = |w: &[f64]| -> Result<(f64, Array1<c64>, Array1<c64>)> {
        let design = assemble_design(setup, sub, w, false);
        let fit = design.least_squares(&y_owned)?;
        let res = &y_owned - &design.dot(&fit.solution);
        let cost = res.iter().map(|v| v.norm_sqr()).sum();
        Ok((cost, fit.solution, res))
    };
    let (mut cost, mut coeffs, mut res) = cost_of(omegas)?;
    let mut step = f64::NAN;
    for _ in 0..max_iters {
        let deriv = assemble_design(setup, sub, omegas, true);
        let mut grad = vec![0.0f64; l];
        let mut curv = vec![0.0f64; l];
        for li in 0..l {
            let mut inner = c64::new(0.0, 0.0);
            let mut dsq = 0.0f64;
            for mi in 0..res.len() {
                let mut dcol = c64::new(0.0, 0.0);
                for j in 0..p {
                    dcol += deriv[[mi, li * p + j]] * coeffs[li * p + j];
                }
                inner += res[mi].conj() * dcol;
                dsq += dcol.norm_sqr();
            }
            grad[li] = -2.0 * inner.re;
            curv[li] = 2.0 * dsq;
        }
        let gsq: f64 = grad.iter().map(|g| g * g).sum();
        if gsq <= 1e-18 * cost.max(1e-300) {
            break;
        }
        // curvature-normalized descent direction
        let d_floor = 1e-9 * curv.iter().cloned().fold(0.0, f64::max) + 1e-300;
        let dir: Vec<f64> = grad.iter().zip(curv.iter()).map(|(g, d)| g / (d + d_floor)).collect();
        let slope: f64 = grad.iter().zip(dir.iter()).map(|(g, d)| g * d).sum();
        if slope <= 0.0 {
            break;
        }
        let mut xi = if step.is_nan() { 1.0 } else { step };
        let mut accepted = false;
        while xi >= 1e-16 {
            let trial: Vec<f64> =
                omegas.iter().zip(dir.iter()).map(|(w, g)| to_centered(w - xi * g)).collect();
            let (c_t, co_t, r_t) = cost_of(&trial)?;
            if c_t <= cost - 1e-4 * xi * slope {
                omegas.copy_from_slice(&trial);
                cost = c_t;
                coeffs = co_t;
                res = r_t;
                step = (xi * 2.0).min(4.0);
                accepted = true;
                break;
            }
            xi *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RangeFlags {
    /// Some ratio entries were dropped near zero crossings.
    pub dropped_entries: bool,
    /// Slope was nonpositive or the inverted range left the radiating band.
    pub out_of_band: bool,
    /// Result was clamped into [Z_fr, Z_ra].
    pub clamped: bool,
}

/// Coarse range from a reconstructed waveform w ≈ α·g(φ): ratio phases give
/// the chirp rate, which inverts to r = d²cos²θ/(2λc·φ).
pub fn range_from_waveform(
    geom: &ArrayGeometry,
    w: &ArrayView1<c64>,
    theta: f64,
) -> (f64, Array1<c64>, RangeFlags) {
    let n = w.len();
    let mut flags = RangeFlags::default();
    let (zfr, zra) = (geom.fresnel_distance_m(), geom.rayleigh_distance_m());
    let max_mod = w.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let mut rho = Array1::<c64>::zeros(n.saturating_sub(1));
    if max_mod == 0.0 {
        flags.out_of_band = true;
        flags.clamped = true;
        return (zra, rho, flags);
    }
    let floor = 1e-8 * max_mod;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for k in 0..n - 1 {
        let (a, b) = (w[k], w[k + 1]);
        if a.norm() > floor && b.norm() > floor {
            let r = b / a;
            rho[k] = r;
            let weight = (2 * k + 1) as f64;
            num += weight * r.arg();
            den += weight * weight;
        } else {
            flags.dropped_entries = true;
            rho[k] = c64::new(f64::NAN, f64::NAN);
        }
    }
    if den == 0.0 {
        flags.out_of_band = true;
        flags.clamped = true;
        return (zra, rho, flags);
    }
    let slope = num / den;
    let phi_hat = -slope / TAU;
    if !(phi_hat > 0.0) {
        flags.out_of_band = true;
        flags.clamped = true;
        return (zra, rho, flags);
    }
    let c = theta.cos();
    let mut r = geom.spacing_m * geom.spacing_m * c * c / (2.0 * geom.wavelength_m * phi_hat);
    if !r.is_finite() || r < zfr || r > zra {
        flags.clamped = true;
        if !r.is_finite() {
            flags.out_of_band = true;
            r = zra;
        } else {
            r = r.clamp(zfr, zra);
        }
    }
    (r, rho, flags)
}

/// Coarse range for one path from its fitted product α_l·v_l.
pub fn coarse_range(
    geom: &ArrayGeometry,
    sub: &DcrSubspace,
    alpha_v: &ArrayView1<c64>,
    theta: f64,
) -> (f64, Array1<c64>, RangeFlags) {
    let w = sub.basis.dot(alpha_v);
    range_from_waveform(geom, &w.view(), theta)
}

/// Aggregate Stage-I output, sorted by ascending angle.
#[derive(Debug, Clone)]
pub struct StageOneEstimate {
    pub omegas: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Column l holds α_l·v_l.
    pub alpha_v: Array2<c64>,
    /// Ratio vectors (length N−1) per path.
    pub rhos: Vec<Array1<c64>>,
    pub ranges_m: Vec<f64>,
    pub rank_deficient: bool,
    pub merged_duplicates: bool,
    /// Frequencies appended by greedy residual completion.
    pub completed: usize,
    pub theta_clamped: bool,
    pub ls_ridge: bool,
    pub ls_residual_rel: f64,
    pub range_flags: Vec<RangeFlags>,
}

/// Collapse frequencies closer than `radius` (wrap distance) into their
/// cluster means.
fn merge_clusters(mut omegas: Vec<f64>, radius: f64) -> (Vec<f64>, bool) {
    omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged = false;
    let mut out: Vec<f64> = Vec::with_capacity(omegas.len());
    let mut cluster: Vec<f64> = Vec::new();
    for w in omegas {
        match cluster.last() {
            Some(&prev) if wrap_dist(prev, w) < radius => {
                merged = true;
                cluster.push(w);
            }
            Some(_) => {
                out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
                cluster = vec![w];
            }
            None => cluster = vec![w],
        }
    }
    if !cluster.is_empty() {
        out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    }
    (out, merged)
}

/// Run the complete Stage-I chain on the solver output.
///
/// Before full convergence of the splitting solver the Toeplitz block tends
/// to smear the dominant path across near-duplicate frequencies and to drop
/// atoms near the shrinkage threshold, so the raw decomposition is cleaned in
/// two steps: frequencies within one resolution cell are merged, and
/// missing ones are appended greedily at the peak of the measurement
/// residual's dual spectrum (where the dual polynomial of a remaining atom
/// peaks).
pub fn stage_one(
    geom: &ArrayGeometry,
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    y: &ArrayView1<c64>,
    u_hat: &ArrayView1<c64>,
    l: usize,
) -> Result<StageOneEstimate> {
    let n = geom.n_antennas;
    let vd = vandermonde_decompose(u_hat, l)?;
    // For atoms v·aᵀ(ω) the PSD block certifies Toep(û) = Σ c_l·ā(ω_l)āᴴ(ω_l),
    // so the decomposition returns the conjugate tones; flip back to ω.
    let raw: Vec<f64> = vd.omegas.iter().map(|w| to_centered(-w)).collect();
    let (mut omegas, cluster_merged) = merge_clusters(raw, 1.0 / n as f64);
    let mut completed = 0usize;
    while omegas.len() < l {
        // greedy completion at the dual-spectrum peak of the fit residual
        let residual = if omegas.is_empty() {
            y.to_owned()
        } else {
            ls_gain_vectors(setup, sub, y, &omegas)?.residual
        };
        let zmat = crate::lifting::apply_py_adjoint(setup, sub, &residual.view())?;
        let t_len = crate::solver::dual_norm_grid_len(n);
        let spectrum = crate::solver::dual_spectrum(&zmat.view(), t_len);
        // mask out bins near the support already found
        let guard = t_len as f64 * 0.5 / n as f64;
        let mut best = (0usize, -1.0f64);
        for (t, &v) in spectrum.iter().enumerate() {
            let w = to_centered(t as f64 / t_len as f64);
            let near = omegas.iter().any(|&o| wrap_dist(o, w) * t_len as f64 <= guard);
            if !near && v > best.1 {
                best = (t, v);
            }
        }
        omegas.push(to_centered(best.0 as f64 / t_len as f64));
        completed += 1;
        omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    polish_omegas(setup, sub, y, &mut omegas, 30)?;
    omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gains = ls_gain_vectors(setup, sub, y, &omegas)?;
    let mut items: Vec<(f64, f64, bool, Array1<c64>)> = Vec::with_capacity(l);
    for (i, &w) in omegas.iter().enumerate() {
        let (theta, clamped) = omega_to_theta(w, geom);
        items.push((w, theta, clamped, gains.alpha_v.column(i).to_owned()));
    }
    items.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut est = StageOneEstimate {
        omegas: Vec::with_capacity(l),
        thetas: Vec::with_capacity(l),
        alpha_v: Array2::zeros((sub.p, l)),
        rhos: Vec::with_capacity(l),
        ranges_m: Vec::with_capacity(l),
        rank_deficient: vd.rank_deficient || completed > 0,
        merged_duplicates: vd.merged || cluster_merged,
        completed,
        theta_clamped: false,
        ls_ridge: gains.ridge,
        ls_residual_rel: gains.residual_rel,
        range_flags: Vec::with_capacity(l),
    };
    for (i, (w, theta, clamped, av)) in items.into_iter().enumerate() {
        let (r, rho, fl) = coarse_range(geom, sub, &av.view(), theta);
        est.omegas.push(w);
        est.thetas.push(theta);
        est.theta_clamped |= clamped;
        est.alpha_v.column_mut(i).assign(&av);
        est.rhos.push(rho);
        est.ranges_m.push(r);
        est.range_flags.push(fl);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{chirp_vector, PathParams};
    use crate::lifting::{apply_py, lift_ground_truth};
    use crate::measure::gen_combiners;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom(n: usize) -> ArrayGeometry {
        ArrayGeometry::half_wavelength(n, 3.0e-3).unwrap()
    }

    #[test]
    fn single_tone_toeplitz_recovers_frequency() {
        let n = 32;
        let u = tone_vector(n, 0.25);
        let res = vandermonde_decompose(&u.view(), 1).unwrap();
        assert!(!res.rank_deficient);
        assert_eq!(res.omegas.len(), 1);
        assert_abs_diff_eq!(res.omegas[0], 0.25, epsilon = 1e-10);
    }

    #[test]
    fn two_tone_toeplitz_recovers_both_with_wrapping() {
        // Toep(u) = a(0.2)a(0.2)ᴴ + 2·a(0.7)a(0.7)ᴴ; 0.7 wraps to −0.3.
        let n = 48;
        let u = tone_vector(n, 0.2) + tone_vector(n, 0.7).mapv(|v| v * 2.0);
        let res = vandermonde_decompose(&u.view(), 2).unwrap();
        assert_eq!(res.omegas.len(), 2);
        assert_abs_diff_eq!(res.omegas[0], -0.3, epsilon = 1e-8);
        assert_abs_diff_eq!(res.omegas[1], 0.2, epsilon = 1e-8);
    }

    #[test]
    fn zero_toeplitz_flags_rank_deficiency() {
        let u = Array1::<c64>::zeros(16);
        let res = vandermonde_decompose(&u.view(), 2).unwrap();
        assert!(res.omegas.is_empty());
        assert!(res.rank_deficient);
    }

    #[test]
    fn synthesis_round_trip_on_separated_frequencies() {
        // wrap separation ≥ 2/N keeps extraction at 1e−8
        let n = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let w1 = rng.random::<f64>() - 0.5;
            let mut w2 = rng.random::<f64>() - 0.5;
            while wrap_dist(w1, w2) < 2.0 / n as f64 {
                w2 = rng.random::<f64>() - 0.5;
            }
            let p1 = 0.5 + rng.random::<f64>();
            let p2 = 0.5 + rng.random::<f64>();
            let u = tone_vector(n, w1).mapv(|v| v * p1) + tone_vector(n, w2).mapv(|v| v * p2);
            let res = vandermonde_decompose(&u.view(), 2).unwrap();
            let mut expect = [to_centered(w1), to_centered(w2)];
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (got, want) in res.omegas.iter().zip(expect.iter()) {
                assert!(wrap_dist(*got, *want) < 1e-8, "got {got}, want {want}");
            }
        }
    }

    #[test]
    fn omega_theta_round_trip() {
        let g = geom(16);
        let (theta, clamped) = omega_to_theta(0.25, &g);
        assert!(!clamped);
        assert_relative_eq!(theta, std::f64::consts::FRAC_PI_6, epsilon = 1e-12);
        assert_eq!(omega_to_theta(0.0, &g).0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t = (rng.random::<f64>() - 0.5) * std::f64::consts::PI * 0.999;
            let w = g.spacing_ratio() * t.sin();
            let (back, fl) = omega_to_theta(w, &g);
            assert!(!fl);
            assert_abs_diff_eq!(back, t, epsilon = 1e-12);
        }
        // out-of-band argument clamps with a flag
        let (t, fl) = omega_to_theta(0.6, &g);
        assert!(fl);
        assert_abs_diff_eq!(t, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    struct Scene {
        geom: ArrayGeometry,
        sub: DcrSubspace,
        setup: crate::measure::MeasurementSetup,
        paths: Vec<PathParams>,
        y: Array1<c64>,
    }

    fn noiseless_scene(n: usize, p: usize, paths: Vec<PathParams>) -> Scene {
        let geom = geom(n);
        let sub = DcrSubspace::pca(&geom, p, DcrSubspace::default_dense(p)).unwrap();
        let setup = gen_combiners(n, 4, 2 * p.max(4), 0.0, 11).unwrap();
        let xh = lift_ground_truth(&geom, &sub, &paths).unwrap();
        let y = apply_py(&setup, &sub, &xh.view()).unwrap();
        Scene { geom, sub, setup, paths, y }
    }

    #[test]
    fn ls_recovers_alpha_v_products_noiselessly() {
        let g = geom(64);
        let paths = vec![PathParams::new(0.35, 2.5, c64::new(0.8, -0.2)).unwrap()];
        assert!(g.in_radiating_near_field(2.5));
        let sc = noiseless_scene(64, 6, paths);
        let omega = sc.paths[0].omega(&sc.geom);
        let gains = ls_gain_vectors(&sc.setup, &sc.sub, &sc.y.view(), &[omega]).unwrap();
        assert!(!gains.ridge);
        // only the product α·v is identifiable
        let alpha = sc.paths[0].absorbed_gain(&sc.geom);
        let v = sc.sub.coefficients(sc.paths[0].phi(&sc.geom));
        for i in 0..sc.sub.p {
            let expect = alpha * v[i];
            assert!((gains.alpha_v[[i, 0]] - expect).norm() < 1e-8, "component {i}");
        }
        // residual bounded by the subspace truncation
        assert!(gains.residual_rel < 1e-6, "residual {}", gains.residual_rel);
    }

    #[test]
    fn ls_zero_observation_gives_zero_coefficients() {
        let sc = noiseless_scene(32, 4, vec![PathParams::new(0.2, 1.2, c64::new(1.0, 0.0)).unwrap()]);
        let y = Array1::<c64>::zeros(sc.setup.n_measurements());
        let gains = ls_gain_vectors(&sc.setup, &sc.sub, &y.view(), &[0.1]).unwrap();
        for v in gains.alpha_v.iter() {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn ls_rejects_underdetermined_system() {
        let sc = noiseless_scene(32, 4, vec![PathParams::new(0.2, 1.2, c64::new(1.0, 0.0)).unwrap()]);
        // 3 paths × P=4 = 12 unknowns > M=8 with a trimmed setup
        let setup = gen_combiners(32, 1, 8, 0.0, 3).unwrap();
        assert!(ls_gain_vectors(&setup, &sc.sub, &sc.y.view(), &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn range_inversion_is_exact_on_clean_chirps() {
        // algebraic identity, no subspace truncation
        let g = geom(64);
        for (theta, r) in [(0.0f64, 2.0f64), (0.5, 4.0), (-0.7, 1.0)] {
            assert!(g.in_radiating_near_field(r), "r {r}");
            let phi = g.spacing_m * g.spacing_m * theta.cos().powi(2)
                / (2.0 * g.wavelength_m * r);
            let w = chirp_vector(64, phi).mapv(|v| v * c64::new(0.3, -0.8));
            let (r_hat, _, flags) = range_from_waveform(&g, &w.view(), theta);
            assert!(!flags.clamped, "unexpected clamp at theta {theta}");
            assert_relative_eq!(r_hat, r, max_relative = 1e-6);
        }
    }

    #[test]
    fn flat_waveform_is_flagged_out_of_band() {
        let g = geom(32);
        let w = Array1::from_elem(32, c64::new(1.0, 0.0));
        let (r, _, flags) = range_from_waveform(&g, &w.view(), 0.0);
        assert!(flags.out_of_band);
        assert_relative_eq!(r, g.rayleigh_distance_m(), epsilon = 1e-12);
    }

    #[test]
    fn range_is_invariant_to_gain_scaling() {
        let g = geom(48);
        let sub = DcrSubspace::pca(&g, 5, 64).unwrap();
        let phi = 0.4 * sub.phi_max;
        let alpha_v = sub.coefficients(phi).mapv(|v| v * c64::new(0.2, 0.7));
        let (r1, _, _) = coarse_range(&g, &sub, &alpha_v.view(), 0.3);
        let scaled = alpha_v.mapv(|v| v * c64::new(-3.0, 1.5));
        let (r2, _, _) = coarse_range(&g, &sub, &scaled.view(), 0.3);
        assert_relative_eq!(r1, r2, epsilon = 1e-12);
    }

    #[test]
    fn ratio_phase_stays_unwrap_free_for_configured_sizes() {
        for n in [32, 64, 128, 256] {
            let g = geom(n);
            assert!(ratio_phase_bound(&g) < std::f64::consts::PI, "N = {n}");
        }
    }

    #[test]
    fn subspace_range_recovery_within_five_percent() {
        // reference-scale noiseless path through the truncated subspace
        let g = geom(256);
        let sub = DcrSubspace::pca(&g, 10, 64).unwrap();
        let path = PathParams::new(0.4, 8.0, c64::new(1.0, 0.3)).unwrap();
        assert!(g.in_radiating_near_field(path.range_m));
        let alpha_v = sub.coefficients(path.phi(&g)).mapv(|v| v * path.absorbed_gain(&g));
        let (r_hat, _, _) = coarse_range(&g, &sub, &alpha_v.view(), path.theta_rad);
        assert!(
            (r_hat - path.range_m).abs() / path.range_m <= 0.05,
            "range {r_hat} vs {} off by more than 5%",
            path.range_m
        );
    }

    #[test]
    fn stage_one_end_to_end_on_two_paths() {
        let g = geom(128);
        let paths = vec![
            PathParams::new(-0.45, 1.6, c64::new(1.0, 0.1)).unwrap(),
            PathParams::new(0.5, 2.5, c64::new(0.4, -0.6)).unwrap(),
        ];
        for p in &paths {
            assert!(g.in_radiating_near_field(p.range_m));
        }
        let sc = noiseless_scene(128, 10, paths.clone());
        // synthesize û in the solver's convention: conjugate tones of the
        // true frequencies (powers are arbitrary positive weights)
        let u = tone_vector(128, -paths[0].omega(&g))
            + tone_vector(128, -paths[1].omega(&g)).mapv(|v| v * 0.5);
        let est = stage_one(&g, &sc.setup, &sc.sub, &sc.y.view(), &u.view(), 2).unwrap();
        assert_eq!(est.thetas.len(), 2);
        assert!(est.thetas[0] < est.thetas[1]);
        for (i, p) in paths.iter().enumerate() {
            assert!((est.thetas[i] - p.theta_rad).abs() < 1e-6, "theta {i}");
            let rel = (est.ranges_m[i] - p.range_m).abs() / p.range_m;
            assert!(rel < 0.05, "range {i} rel err {rel}");
        }
    }
}
