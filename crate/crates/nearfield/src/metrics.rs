//! Estimation-quality metrics and truth-to-estimate path matching.

use ndarray::prelude::*;
use num_complex::Complex64 as c64;

use crate::channel::PathParams;
use crate::error::{Error, Result};

/// Normalized squared channel error ‖ĥ−h‖₂²/‖h‖₂².
pub fn nmse(h_hat: &ArrayView1<c64>, h: &ArrayView1<c64>) -> Result<f64> {
    if h_hat.len() != h.len() {
        return Err(Error::Shape(format!("length mismatch {} vs {}", h_hat.len(), h.len())));
    }
    let denom: f64 = h.iter().map(|v| v.norm_sqr()).sum();
    if denom <= 0.0 {
        return Err(Error::Parameter("reference channel has zero energy".into()));
    }
    let num: f64 = h_hat.iter().zip(h.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(num / denom)
}

/// Matching weight on the relative range residual.
const RANGE_WEIGHT: f64 = 0.1;

fn match_cost(est: (f64, f64), truth: &PathParams, z_ra: f64) -> f64 {
    let (sin_e, r_e) = est;
    (sin_e - truth.theta_rad.sin()).abs() + RANGE_WEIGHT * (r_e - truth.range_m).abs() / z_ra
}

/// Minimum-total-cost assignment of estimates to ground-truth paths.
///
/// Returns `perm` with `perm[l]` = index of the estimate assigned to truth
/// path `l`. Cost per pair is |sinθ̂−sinθ| + 0.1·|r̂−r|/Z_ra; ties break
/// deterministically toward lower estimate index. Counts must agree.
pub fn match_paths(
    est_thetas: &[f64],
    est_ranges: &[f64],
    true_paths: &[PathParams],
    rayleigh_m: f64,
) -> Result<Vec<usize>> {
    let l = true_paths.len();
    if est_thetas.len() != l || est_ranges.len() != l {
        return Err(Error::Shape(format!(
            "need {l} estimates to match {l} paths, got {}/{}",
            est_thetas.len(),
            est_ranges.len()
        )));
    }
    if l == 0 {
        return Ok(Vec::new());
    }
    let cost = Array2::from_shape_fn((l, l), |(i, j)| {
        match_cost((est_thetas[j].sin(), est_ranges[j]), &true_paths[i], rayleigh_m)
    });
    Ok(hungarian(&cost))
}

/// O(L³) assignment via shortest augmenting paths (rows = truth, cols =
/// estimates). Deterministic for tied costs.
fn hungarian(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    // potentials and matching in 1-based internal indexing
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    perm
}

/// Root-mean-square errors of sinθ and r over matched paths.
pub fn rmse_metrics(
    est_thetas: &[f64],
    est_ranges: &[f64],
    true_paths: &[PathParams],
    perm: &[usize],
) -> (f64, f64) {
    let l = true_paths.len();
    let mut sin_acc = 0.0;
    let mut r_acc = 0.0;
    for (i, truth) in true_paths.iter().enumerate() {
        let j = perm[i];
        sin_acc += (est_thetas[j].sin() - truth.theta_rad.sin()).powi(2);
        r_acc += (est_ranges[j] - truth.range_m).powi(2);
    }
    ((sin_acc / l as f64).sqrt(), (r_acc / l as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path(theta: f64, r: f64) -> PathParams {
        PathParams { theta_rad: theta, range_m: r, gain: c64::new(1.0, 0.0) }
    }

    #[test]
    fn nmse_basic_identities() {
        let h = Array1::from_vec(vec![c64::new(1.0, 2.0), c64::new(-0.5, 0.3)]);
        assert_abs_diff_eq!(nmse(&h.view(), &h.view()).unwrap(), 0.0, epsilon = 1e-15);
        let zero = Array1::<c64>::zeros(2);
        assert_abs_diff_eq!(nmse(&zero.view(), &h.view()).unwrap(), 1.0, epsilon = 1e-15);
        let twice = h.mapv(|v| v * 2.0);
        assert_abs_diff_eq!(nmse(&twice.view(), &h.view()).unwrap(), 1.0, epsilon = 1e-15);
        assert!(nmse(&h.view(), &zero.view()).is_err());
    }

    #[test]
    fn matching_recovers_shuffle() {
        let truths =
            [path(0.1, 5.0), path(-0.4, 8.0), path(0.5, 3.0), path(0.3, 12.0)];
        // estimates are the truths in shuffled order
        let order = [2usize, 0, 3, 1];
        let thetas: Vec<f64> = order.iter().map(|&i| truths[i].theta_rad).collect();
        let ranges: Vec<f64> = order.iter().map(|&i| truths[i].range_m).collect();
        let perm = match_paths(&thetas, &ranges, &truths, 100.0).unwrap();
        for (i, &j) in perm.iter().enumerate() {
            assert_eq!(order[j], i);
        }
        let (rs, rr) = rmse_metrics(&thetas, &ranges, &truths, &perm);
        assert_abs_diff_eq!(rs, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rr, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_path_matches_identity() {
        let truths = [path(0.2, 6.0)];
        let perm = match_paths(&[0.21], &[6.4], &truths, 100.0).unwrap();
        assert_eq!(perm, vec![0]);
    }

    fn brute_force(cost: &Array2<f64>) -> f64 {
        fn go(cost: &Array2<f64>, row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.nrows() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cost.ncols() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[[row, j]] + go(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        go(cost, 0, &mut vec![false; cost.ncols()])
    }

    #[test]
    fn assignment_matches_exhaustive_search() {
        // adversarial near-ties against brute force over all permutations
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for l in 2..=6 {
            for _ in 0..40 {
                let cost = Array2::from_shape_fn((l, l), |_| {
                    let base: f64 = rng.random();
                    // quantize to force frequent ties
                    (base * 8.0).round() / 8.0
                });
                let perm = hungarian(&cost);
                let total: f64 = (0..l).map(|i| cost[[i, perm[i]]]).sum();
                let best = brute_force(&cost);
                assert_abs_diff_eq!(total, best, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rmse_single_path_values() {
        let truths = [path(0.0, 10.0)];
        // sinθ̂ = 0.01, r̂ = 10.5
        let (rs, rr) = rmse_metrics(&[0.01f64.asin()], &[10.5], &truths, &[0]);
        assert_abs_diff_eq!(rs, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(rr, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rmse_matches_direct_formula_for_l4() {
        let truths = [path(0.1, 5.0), path(-0.2, 7.0), path(0.4, 9.0), path(0.0, 11.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let thetas: Vec<f64> =
            truths.iter().map(|p| p.theta_rad + 0.01 * (rng.random::<f64>() - 0.5)).collect();
        let ranges: Vec<f64> =
            truths.iter().map(|p| p.range_m + 0.3 * (rng.random::<f64>() - 0.5)).collect();
        let perm: Vec<usize> = (0..4).collect();
        let (rs, rr) = rmse_metrics(&thetas, &ranges, &truths, &perm);
        let mut sacc = 0.0;
        let mut racc = 0.0;
        for i in 0..4 {
            sacc += (thetas[i].sin() - truths[i].theta_rad.sin()).powi(2);
            racc += (ranges[i] - truths[i].range_m).powi(2);
        }
        assert_abs_diff_eq!(rs, (sacc / 4.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(rr, (racc / 4.0).sqrt(), epsilon = 1e-14);
    }
}
