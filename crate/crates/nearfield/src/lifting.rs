//! Lifting between the P×N coefficient matrix and the channel/measurements.
//!
//! With q_nᴴ the n-th row of the subspace basis G, the channel entry is the
//! matrix inner product [h]_n = ⟨X, q_n e_nᴴ⟩ (⟨X, Y⟩ = tr(YᴴX)), so the
//! whole channel is a linear image h = P(X) of the lifted matrix
//! X = Σ_l α_l·v_l·aᵀ(ω_l), and the pilot observation is P_y(X) = A·P(X).

use ndarray::prelude::*;
use num_complex::Complex64 as c64;

use crate::channel::{tone_vector, PathParams};
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::measure::MeasurementSetup;
use crate::subspace::DcrSubspace;

/// Ground-truth lift X = Σ_l α_l·v_l·aᵀ(ω_l) with v_l = Gᴴ·g(φ_l) and the
/// carrier phase absorbed into α_l.
pub fn lift_ground_truth(
    geom: &ArrayGeometry,
    sub: &DcrSubspace,
    paths: &[PathParams],
) -> Result<Array2<c64>> {
    if sub.n_antennas() != geom.n_antennas {
        return Err(Error::Shape("subspace and geometry disagree on N".into()));
    }
    let (p, n) = (sub.p, geom.n_antennas);
    let mut x = Array2::<c64>::zeros((p, n));
    for path in paths {
        let alpha = path.absorbed_gain(geom);
        let v = sub.coefficients(path.phi(geom));
        let a = tone_vector(n, path.omega(geom));
        for i in 0..p {
            let vi = alpha * v[i];
            for j in 0..n {
                x[[i, j]] += vi * a[j];
            }
        }
    }
    Ok(x)
}

/// Channel map [P(X)]_n = q_nᴴ·X·e_n = Σ_p G[n,p]·X[p,n].
pub fn apply_p(sub: &DcrSubspace, x: &ArrayView2<c64>) -> Result<Array1<c64>> {
    let (p, n) = (sub.p, sub.n_antennas());
    if x.dim() != (p, n) {
        return Err(Error::Shape(format!("expected {p}×{n} lifted matrix, got {:?}", x.dim())));
    }
    let mut h = Array1::zeros(n);
    for j in 0..n {
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..p {
            acc += sub.basis[[j, i]] * x[[i, j]];
        }
        h[j] = acc;
    }
    Ok(h)
}

/// Measurement map P_y(X) = A·P(X).
pub fn apply_py(
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    x: &ArrayView2<c64>,
) -> Result<Array1<c64>> {
    let h = apply_p(sub, x)?;
    if setup.n_antennas != h.len() {
        return Err(Error::Shape("combiner and subspace disagree on N".into()));
    }
    Ok(setup.stacked.dot(&h))
}

/// Adjoint P_y*(z) = Σ_n [Aᴴz]_n·q_n·e_nᴴ, i.e. column n equals [Aᴴz]_n·q_n.
pub fn apply_py_adjoint(
    setup: &MeasurementSetup,
    sub: &DcrSubspace,
    z: &ArrayView1<c64>,
) -> Result<Array2<c64>> {
    if z.len() != setup.n_measurements() {
        return Err(Error::Shape(format!(
            "expected length-{} measurement vector, got {}",
            setup.n_measurements(),
            z.len()
        )));
    }
    let w = setup.stacked.t().mapv(|v| v.conj()).dot(z);
    Ok(adjoint_from_weights(sub, &w.view()))
}

/// P*(w) for an antenna-domain weight vector w: column n is w_n·q_n.
pub fn adjoint_from_weights(sub: &DcrSubspace, w: &ArrayView1<c64>) -> Array2<c64> {
    let (p, n) = (sub.p, sub.n_antennas());
    let mut out = Array2::zeros((p, n));
    for j in 0..n {
        for i in 0..p {
            out[[i, j]] = w[j] * sub.basis[[j, i]].conj();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{complex_gaussian, gen_combiners};
    use approx::assert_abs_diff_eq;
    use ndarray_linalg::{JobSvd, SVDDC};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn fixture(n: usize, p: usize) -> (ArrayGeometry, DcrSubspace, MeasurementSetup) {
        let geom = ArrayGeometry::half_wavelength(n, 3.0e-3).unwrap();
        let sub = DcrSubspace::pca(&geom, p, 4 * p.max(8)).unwrap();
        let setup = gen_combiners(n, 2, 4, 0.0, 9).unwrap();
        (geom, sub, setup)
    }

    fn frob(x: &Array2<c64>) -> f64 {
        x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn single_path_lift_is_rank_one() {
        let (geom, sub, _) = fixture(32, 4);
        let path = PathParams::new(0.3, 2.0, c64::new(1.0, 0.0)).unwrap();
        let x = lift_ground_truth(&geom, &sub, &[path]).unwrap();
        let (_, s, _) = x.clone().svddc(JobSvd::None).unwrap();
        assert!(s[1] / s[0] < 1e-12, "second singular value {} not negligible", s[1]);
    }

    #[test]
    fn lift_rank_bounded_by_path_count() {
        let (geom, sub, _) = fixture(64, 6);
        let paths = [
            PathParams::new(0.2, 3.0, c64::new(0.8, 0.1)).unwrap(),
            PathParams::new(-0.4, 5.0, c64::new(0.2, -0.7)).unwrap(),
            PathParams::new(0.6, 8.0, c64::new(-0.3, 0.3)).unwrap(),
        ];
        let x = lift_ground_truth(&geom, &sub, &paths).unwrap();
        let (_, s, _) = x.clone().svddc(JobSvd::None).unwrap();
        assert!(s[3] / s[0] < 1e-10, "fourth singular value {} not negligible", s[3]);
    }

    #[test]
    fn zero_gains_lift_to_zero() {
        let (geom, sub, _) = fixture(16, 3);
        let path = PathParams::new(0.1, 1.0, c64::new(0.0, 0.0)).unwrap();
        let x = lift_ground_truth(&geom, &sub, &[path]).unwrap();
        assert_eq!(frob(&x), 0.0);
    }

    #[test]
    fn lifted_channel_matches_second_order_model_within_residual() {
        // per-path projection residual bounds the reconstruction gap
        let (geom, sub, _) = fixture(128, 7);
        let paths = [
            PathParams::new(0.25, 3.0, c64::new(1.0, 0.0)).unwrap(),
            PathParams::new(-0.5, 7.0, c64::new(0.3, 0.4)).unwrap(),
        ];
        let x = lift_ground_truth(&geom, &sub, &paths).unwrap();
        let h_lift = apply_p(&sub, &x.view()).unwrap();
        let h_model =
            crate::channel::synth_channel(&geom, &paths, crate::channel::SteeringModel::SecondOrder)
                .unwrap();
        let gap: f64 =
            h_lift.iter().zip(h_model.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let mut budget = 0.0;
        for p in &paths {
            let res = crate::subspace::subspace_error(&sub, p.phi(&geom)).unwrap();
            // chirp has norm √N, the normalized residual scales up by √N
            budget += p.gain.norm() * res * (geom.n_antennas as f64).sqrt();
        }
        assert!(gap <= budget + 1e-12, "gap {gap} exceeds residual budget {budget}");
    }

    #[test]
    fn apply_p_on_rank_one_matches_closed_form() {
        let (_, sub, _) = fixture(8, 3);
        let omega = 0.21;
        let v = Array1::from_vec(vec![c64::new(0.3, 0.5), c64::new(-0.2, 0.1), c64::new(0.9, 0.0)]);
        let a = tone_vector(8, omega);
        let mut x = Array2::zeros((3, 8));
        for i in 0..3 {
            for j in 0..8 {
                x[[i, j]] = v[i] * a[j];
            }
        }
        let h = apply_p(&sub, &x.view()).unwrap();
        for nidx in 0..8 {
            let qn_h_v: c64 = (0..3).map(|i| sub.basis[[nidx, i]] * v[i]).sum();
            assert_abs_diff_eq!((h[nidx] - a[nidx] * qn_h_v).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn apply_p_matches_entrywise_trace_oracle() {
        // oracle: explicit tr((q_n e_nᴴ)ᴴ X) loop
        let (_, sub, _) = fixture(8, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let flat = complex_gaussian(&mut rng, 24, 1.0);
        let x = Array2::from_shape_vec((3, 8), flat.to_vec()).unwrap();
        let h = apply_p(&sub, &x.view()).unwrap();
        for nidx in 0..8 {
            // q_n e_nᴴ is P×N; ⟨X, q_n e_nᴴ⟩ = Σ_{p,m} conj(q_n e_nᴴ)[p,m]·X[p,m]
            let mut acc = c64::new(0.0, 0.0);
            for pown in 0..3 {
                for m in 0..8 {
                    let qen = if m == nidx { sub.q(nidx)[pown] } else { c64::new(0.0, 0.0) };
                    acc += qen.conj() * x[[pown, m]];
                }
            }
            assert_abs_diff_eq!((h[nidx] - acc).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn operators_are_linear() {
        let (_, sub, setup) = fixture(16, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xa = Array2::from_shape_vec((4, 16), complex_gaussian(&mut rng, 64, 1.0).to_vec()).unwrap();
        let xb = Array2::from_shape_vec((4, 16), complex_gaussian(&mut rng, 64, 1.0).to_vec()).unwrap();
        let sum = &xa + &xb;
        let lhs = apply_py(&setup, &sub, &sum.view()).unwrap();
        let rhs = apply_py(&setup, &sub, &xa.view()).unwrap()
            + apply_py(&setup, &sub, &xb.view()).unwrap();
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
        let zero = Array2::<c64>::zeros((4, 16));
        let z = apply_py(&setup, &sub, &zero.view()).unwrap();
        assert!(z.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn measurement_map_reduces_to_channel_map_under_identity_rows() {
        // test-only combiner made of identity rows, bypassing the modulus law
        let (_, sub, _) = fixture(8, 3);
        let mut setup = gen_combiners(8, 1, 3, 0.0, 0).unwrap();
        setup.stacked = Array2::from_shape_fn((3, 8), |(i, j)| {
            if j == 2 * i { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Array2::from_shape_vec((3, 8), complex_gaussian(&mut rng, 24, 1.0).to_vec()).unwrap();
        let h = apply_p(&sub, &x.view()).unwrap();
        let y = apply_py(&setup, &sub, &x.view()).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!((y[i] - h[2 * i]).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn adjoint_identity_holds_over_random_probes() {
        // ⟨P_y(X), z⟩ = ⟨X, P_y*(z)⟩ with ⟨a,b⟩ = bᴴa
        let (_, sub, setup) = fixture(16, 4);
        let m = setup.n_measurements();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let x = Array2::from_shape_vec((4, 16), complex_gaussian(&mut rng, 64, 1.0).to_vec())
                .unwrap();
            let z = complex_gaussian(&mut rng, m, 1.0);
            let py = apply_py(&setup, &sub, &x.view()).unwrap();
            let lhs: c64 = py.iter().zip(z.iter()).map(|(a, b)| b.conj() * a).sum();
            let adj = apply_py_adjoint(&setup, &sub, &z.view()).unwrap();
            let rhs: c64 = x.iter().zip(adj.iter()).map(|(a, b)| b.conj() * a).sum();
            let scale = frob(&x) * z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!((lhs - rhs).norm() <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn adjoint_of_basis_vector_is_rank_limited_row_readout() {
        let (_, sub, setup) = fixture(8, 3);
        let m = setup.n_measurements();
        let mut z = Array1::<c64>::zeros(m);
        z[2] = c64::new(1.0, 0.0);
        let adj = apply_py_adjoint(&setup, &sub, &z.view()).unwrap();
        // closed form from row 2 of A: column n = conj(A[2,n])·q_n
        for nidx in 0..8 {
            let w = setup.stacked[[2, nidx]].conj();
            for p in 0..3 {
                let expect = w * sub.q(nidx)[p];
                assert_abs_diff_eq!((adj[[p, nidx]] - expect).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn normal_operator_is_positive_semidefinite() {
        // random quadratic forms of P_y*∘P_y are real and nonnegative
        let (_, sub, setup) = fixture(16, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let x = Array2::from_shape_vec((4, 16), complex_gaussian(&mut rng, 64, 1.0).to_vec())
                .unwrap();
            let py = apply_py(&setup, &sub, &x.view()).unwrap();
            let forward = apply_py_adjoint(&setup, &sub, &py.view()).unwrap();
            let quad: c64 = x.iter().zip(forward.iter()).map(|(a, b)| b.conj() * a).sum();
            assert!(quad.im.abs() < 1e-10 * quad.re.abs().max(1.0));
            assert!(quad.re >= -1e-12);
        }
    }

    #[test]
    fn lift_supports_absorbed_gain_convention() {
        // the absorbed gain carries exp(−j2πr/λ); verify against manual value
        let (geom, sub, _) = fixture(16, 3);
        let path = PathParams::new(0.0, 2.0, c64::new(1.0, 0.0)).unwrap();
        let x = lift_ground_truth(&geom, &sub, &[path]).unwrap();
        let alpha = c64::from_polar(1.0, -TAU * 2.0 / geom.wavelength_m);
        let v = sub.coefficients(path.phi(&geom));
        assert_abs_diff_eq!((x[[0, 0]] - alpha * v[0]).norm(), 0.0, epsilon = 1e-13);
    }
}
