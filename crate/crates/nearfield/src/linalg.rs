//! Dense complex linear-algebra kernels.
//!
//! The splitting solver spends nearly all of its time projecting a Hermitian
//! block matrix onto the PSD cone, so the eigendecomposition goes straight to
//! LAPACK `zheevd` with a reusable workspace instead of the generic
//! `ndarray-linalg` path. Everything else (SVD, least squares) uses
//! `ndarray-linalg`.

use ndarray::prelude::*;
use ndarray_linalg::{JobSvd, SVDDC};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

/// Reusable workspace for repeated Hermitian eigendecompositions of a fixed
/// size. `compute` overwrites the internal buffers; eigenvalues come back in
/// ascending order, eigenvector `k` occupies `vectors()[k*n..(k+1)*n]`.
pub struct HermitianEig {
    n: usize,
    a: Vec<c64>,
    w: Vec<f64>,
    work: Vec<c64>,
    rwork: Vec<f64>,
    iwork: Vec<i32>,
}

impl HermitianEig {
    pub fn new(n: usize) -> Result<Self> {
        let ni = n as i32;
        let mut w = vec![0.0f64; n];
        let mut a = vec![c64::new(0.0, 0.0); n * n];
        let mut info = 0i32;
        let (mut work_q, mut rwork_q, mut iwork_q) = ([c64::new(0.0, 0.0)], [0.0f64], [0i32]);
        let m1 = -1i32;
        unsafe {
            lapack_sys::zheevd_(
                &(b'V' as i8),
                &(b'L' as i8),
                &ni,
                a.as_mut_ptr() as *mut _,
                &ni,
                w.as_mut_ptr(),
                work_q.as_mut_ptr() as *mut _,
                &m1,
                rwork_q.as_mut_ptr(),
                &m1,
                iwork_q.as_mut_ptr(),
                &m1,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Linalg(format!("zheevd workspace query failed: info={info}")));
        }
        Ok(Self {
            n,
            a,
            w,
            work: vec![c64::new(0.0, 0.0); work_q[0].re as usize],
            rwork: vec![0.0f64; rwork_q[0] as usize],
            iwork: vec![0i32; iwork_q[0] as usize],
        })
    }

    /// Eigendecomposition of a Hermitian matrix. Only the lower triangle of
    /// `h` is referenced.
    pub fn compute(&mut self, h: &ArrayView2<c64>) -> Result<()> {
        let n = self.n;
        assert_eq!(h.nrows(), n);
        assert_eq!(h.ncols(), n);
        // column-major copy for LAPACK
        for j in 0..n {
            for i in 0..n {
                self.a[j * n + i] = h[[i, j]];
            }
        }
        let ni = n as i32;
        let mut info = 0i32;
        let (lw, lrw, liw) = (
            self.work.len() as i32,
            self.rwork.len() as i32,
            self.iwork.len() as i32,
        );
        unsafe {
            lapack_sys::zheevd_(
                &(b'V' as i8),
                &(b'L' as i8),
                &ni,
                self.a.as_mut_ptr() as *mut _,
                &ni,
                self.w.as_mut_ptr(),
                self.work.as_mut_ptr() as *mut _,
                &lw,
                self.rwork.as_mut_ptr(),
                &lrw,
                self.iwork.as_mut_ptr(),
                &liw,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Linalg(format!("zheevd failed: info={info}")));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.w
    }

    /// Column-major eigenvector storage.
    pub fn vectors(&self) -> &[c64] {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// One-shot Hermitian eigendecomposition, ascending eigenvalues.
/// Returns `(values, vectors)` with eigenvector `k` in column `k`.
pub fn eigh(h: &ArrayView2<c64>) -> Result<(Array1<f64>, Array2<c64>)> {
    let n = h.nrows();
    let mut ws = HermitianEig::new(n)?;
    ws.compute(h)?;
    let vals = Array1::from_vec(ws.w.clone());
    let mut vecs = Array2::zeros((n, n));
    for k in 0..n {
        for i in 0..n {
            vecs[[i, k]] = ws.a[k * n + i];
        }
    }
    Ok((vals, vecs))
}

/// Largest singular value.
pub fn spectral_norm(a: &ArrayView2<c64>) -> Result<f64> {
    let (_, s, _) = a.to_owned().svddc(JobSvd::None)?;
    Ok(s.iter().cloned().fold(0.0, f64::max))
}

/// Force exact Hermitian symmetry: `(A + A^H)/2` in place.
pub fn hermitize(a: &mut Array2<c64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    for i in 0..n {
        a[[i, i]] = c64::new(a[[i, i]].re, 0.0);
        for j in 0..i {
            let m = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            a[[i, j]] = m;
            a[[j, i]] = m.conj();
        }
    }
}
