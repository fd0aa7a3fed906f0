//! Discrete chirp rate (DCR) subspace construction.
//!
//! Range curvature enters the second-order steering vector only through the
//! chirp rate φ = d²cos²θ/(2λc·r), and restricting sources to the radiating
//! near field confines φ to a short interval [0, φ_max] that shrinks like
//! N^{-3/2}. Sampling that interval and compressing the sampled chirps with a
//! PCA yields a low-dimensional orthonormal basis G that represents every
//! admissible chirp to small relative error; the dimension needed for a given
//! error grows like √N.

use ndarray::prelude::*;
use ndarray_linalg::{JobSvd, SVDDC};
use num_complex::Complex64 as c64;
use std::f64::consts::PI;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::channel::chirp_vector;
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

/// Scale constant c = √(d/λc)/1.24 in the chirp-rate bound.
pub fn chirp_rate_constant(geom: &ArrayGeometry) -> f64 {
    geom.spacing_ratio().sqrt() / 1.24
}

/// Upper bound φ_max = c/(N−1)^{3/2} on the chirp rate of any path in the
/// radiating near field.
pub fn phi_max(geom: &ArrayGeometry) -> f64 {
    chirp_rate_constant(geom) / (geom.n_antennas as f64 - 1.0).powf(1.5)
}

/// Uniform-grid residual bound √(π·δ·(N−1)(2N−1)/3) for grid spacing δ.
pub fn uniform_grid_bound(n: usize, delta: f64) -> f64 {
    let nf = n as f64;
    (PI * delta * (nf - 1.0) * (2.0 * nf - 1.0) / 3.0).sqrt()
}

/// Chirp step bound ‖u(φ)−u(φ+Δφ)‖₂ ≤ √(4π|Δφ|(N−1)(2N−1)/6).
pub fn chirp_step_bound(n: usize, dphi: f64) -> f64 {
    let nf = n as f64;
    (4.0 * PI * dphi.abs() * (nf - 1.0) * (2.0 * nf - 1.0) / 6.0).sqrt()
}

/// Smallest grid size P guaranteeing relative representation error ≤ ε
/// uniformly over [0, φ_max]; never less than 2.
pub fn min_grid_points(geom: &ArrayGeometry, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let nf = geom.n_antennas as f64;
    let bound = 1.0 + PI * phi_max(geom) * (nf - 1.0) * (2.0 * nf - 1.0) / (3.0 * epsilon * epsilon);
    Ok((bound.ceil() as usize).max(2))
}

/// Normalized chirp u(φ) = g(φ)/√N.
pub fn normalized_chirp(n: usize, phi: f64) -> Array1<c64> {
    let scale = c64::new(1.0 / (n as f64).sqrt(), 0.0);
    chirp_vector(n, phi).mapv(|v| v * scale)
}

/// Dense chirp dictionary: columns u(φ̃_i) on a uniform grid over [0, φ_max].
pub fn build_dense(geom: &ArrayGeometry, p_dense: usize) -> Result<(Array2<c64>, Vec<f64>)> {
    if p_dense < 2 {
        return Err(Error::Parameter(format!("dense grid needs at least 2 points, got {p_dense}")));
    }
    let pm = phi_max(geom);
    let n = geom.n_antennas;
    let grid: Vec<f64> =
        (0..p_dense).map(|i| pm * i as f64 / (p_dense as f64 - 1.0)).collect();
    let mut dict = Array2::zeros((n, p_dense));
    for (i, &phi) in grid.iter().enumerate() {
        dict.column_mut(i).assign(&normalized_chirp(n, phi));
    }
    Ok((dict, grid))
}

/// How the orthonormal basis was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceKind {
    /// Leading singular vectors of a dense dictionary.
    Pca,
    /// Numerical-rank basis of the raw uniform grid (no truncation); this is
    /// the variant certified by the analytic residual bound.
    UniformGrid,
}

/// Orthonormal chirp subspace basis plus the provenance of its construction.
#[derive(Debug, Clone)]
pub struct DcrSubspace {
    pub phi_max: f64,
    /// Sampled chirp rates that generated the subspace.
    pub grid: Vec<f64>,
    /// Orthonormal basis, N×P.
    pub basis: Array2<c64>,
    /// Retained dimension P = basis.ncols().
    pub p: usize,
    /// Singular values of the generating dictionary.
    pub spectrum: Vec<f64>,
    pub kind: SubspaceKind,
}

/// PCA truncation of a dense dictionary to its leading `p` singular vectors.
pub fn truncate_pca(
    geom: &ArrayGeometry,
    dense: &Array2<c64>,
    grid: &[f64],
    p: usize,
) -> Result<DcrSubspace> {
    let p_dense = dense.ncols();
    if p < 1 || p > p_dense {
        return Err(Error::Parameter(format!(
            "retained dimension must satisfy 1 ≤ P ≤ {p_dense}, got {p}"
        )));
    }
    let (u, s, _) = dense.to_owned().svddc(JobSvd::Some)?;
    let u = u.ok_or_else(|| Error::Linalg("svd did not return singular vectors".into()))?;
    let basis = u.slice(ndarray::s![.., ..p]).to_owned();
    Ok(DcrSubspace {
        phi_max: phi_max(geom),
        grid: grid.to_vec(),
        basis,
        p,
        spectrum: s.to_vec(),
        kind: SubspaceKind::Pca,
    })
}

impl DcrSubspace {
    /// Dense dictionary of `p_dense` rates, truncated to the leading `p`
    /// principal directions.
    pub fn pca(geom: &ArrayGeometry, p: usize, p_dense: usize) -> Result<Self> {
        let (dense, grid) = build_dense(geom, p_dense)?;
        truncate_pca(geom, &dense, &grid, p)
    }

    /// Span of the raw `p`-point uniform grid, orthonormalized to numerical
    /// rank.
    pub fn uniform_grid(geom: &ArrayGeometry, p: usize) -> Result<Self> {
        let (dense, grid) = build_dense(geom, p)?;
        let (u, s, _) = dense.to_owned().svddc(JobSvd::Some)?;
        let u = u.ok_or_else(|| Error::Linalg("svd did not return singular vectors".into()))?;
        let cutoff = s[0] * 1e-12;
        let rank = s.iter().take_while(|&&v| v > cutoff).count().max(1);
        Ok(DcrSubspace {
            phi_max: phi_max(geom),
            grid,
            basis: u.slice(ndarray::s![.., ..rank]).to_owned(),
            p: rank,
            spectrum: s.to_vec(),
            kind: SubspaceKind::UniformGrid,
        })
    }

    /// Default retained dimension: 10 at N = 256, scaled by √(N/256).
    pub fn default_dim(geom: &ArrayGeometry) -> usize {
        ((10.0 * (geom.n_antennas as f64 / 256.0).sqrt()).round() as usize).max(2)
    }

    /// Default dense grid size for a target dimension.
    pub fn default_dense(p: usize) -> usize {
        (4 * p).max(64)
    }

    pub fn n_antennas(&self) -> usize {
        self.basis.nrows()
    }

    /// Representation coefficients of a chirp: v = Gᴴ·g(φ).
    pub fn coefficients(&self, phi: f64) -> Array1<c64> {
        let g = chirp_vector(self.n_antennas(), phi);
        self.basis.t().mapv(|z| z.conj()).dot(&g)
    }

    /// Row n of the basis as the column vector q_n (so q_nᴴ is the row).
    pub fn q(&self, n: usize) -> Array1<c64> {
        self.basis.row(n).mapv(|z| z.conj())
    }

    /// Squared row norms ‖q_n‖², used by the solver's normal equations.
    pub fn row_norms_sq(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n_antennas(), |n| {
            self.basis.row(n).iter().map(|z| z.norm_sqr()).sum()
        })
    }
}

/// Relative error of representing u(φ) in the subspace via orthogonal
/// projection. `phi` must lie in [0, φ_max].
pub fn subspace_error(sub: &DcrSubspace, phi: f64) -> Result<f64> {
    if !(0.0 <= phi && phi <= sub.phi_max * (1.0 + 1e-12)) {
        return Err(Error::Parameter(format!(
            "chirp rate {phi} outside [0, {}]",
            sub.phi_max
        )));
    }
    let u = normalized_chirp(sub.n_antennas(), phi);
    let coeff = sub.basis.t().mapv(|z| z.conj()).dot(&u);
    let proj = sub.basis.dot(&coeff);
    let mut res = 0.0f64;
    for (a, b) in u.iter().zip(proj.iter()) {
        res += (a - b).norm_sqr();
    }
    Ok(res.sqrt())
}

/// Write the basis and spectrum: `<stem>.hdr` (plain text) plus `<stem>.bin`
/// (row-major interleaved re/im little-endian f64).
pub fn export_subspace(sub: &DcrSubspace, stem: &Path, seed: u64) -> Result<()> {
    let hdr_path = stem.with_extension("hdr");
    let bin_path = stem.with_extension("bin");
    let mut hdr = BufWriter::new(std::fs::File::create(hdr_path)?);
    writeln!(hdr, "nearfield-dcr-subspace v1")?;
    writeln!(hdr, "n={}", sub.n_antennas())?;
    writeln!(hdr, "p={}", sub.p)?;
    writeln!(hdr, "grid_len={}", sub.grid.len())?;
    writeln!(hdr, "phi_max={:.17e}", sub.phi_max)?;
    writeln!(
        hdr,
        "kind={}",
        match sub.kind {
            SubspaceKind::Pca => "pca",
            SubspaceKind::UniformGrid => "uniform",
        }
    )?;
    writeln!(hdr, "seed={seed}")?;
    let spec: Vec<String> = sub.spectrum.iter().map(|v| format!("{v:.17e}")).collect();
    writeln!(hdr, "spectrum={}", spec.join(","))?;
    let mut bin = BufWriter::new(std::fs::File::create(bin_path)?);
    for v in sub.basis.iter() {
        bin.write_all(&v.re.to_le_bytes())?;
        bin.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

/// Read a subspace written by [`export_subspace`]. Returns the subspace and
/// the recorded seed.
pub fn import_subspace(stem: &Path) -> Result<(DcrSubspace, u64)> {
    let hdr = BufReader::new(std::fs::File::open(stem.with_extension("hdr"))?);
    let mut fields = std::collections::HashMap::new();
    for (i, line) in hdr.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "nearfield-dcr-subspace v1" {
                return Err(Error::Config(format!("unrecognized subspace header: {line}")));
            }
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            fields.insert(k.to_string(), v.to_string());
        }
    }
    let get = |k: &str| -> Result<&String> {
        fields.get(k).ok_or_else(|| Error::Config(format!("subspace header missing `{k}`")))
    };
    let parse_err = |k: &str| Error::Config(format!("bad value for `{k}` in subspace header"));
    let n: usize = get("n")?.parse().map_err(|_| parse_err("n"))?;
    let p: usize = get("p")?.parse().map_err(|_| parse_err("p"))?;
    let grid_len: usize = get("grid_len")?.parse().map_err(|_| parse_err("grid_len"))?;
    let pm: f64 = get("phi_max")?.parse().map_err(|_| parse_err("phi_max"))?;
    let seed: u64 = get("seed")?.parse().map_err(|_| parse_err("seed"))?;
    let kind = match get("kind")?.as_str() {
        "pca" => SubspaceKind::Pca,
        "uniform" => SubspaceKind::UniformGrid,
        other => return Err(Error::Config(format!("unknown subspace kind `{other}`"))),
    };
    let spectrum: Vec<f64> = get("spectrum")?
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| parse_err("spectrum")))
        .collect::<Result<_>>()?;
    let mut raw = Vec::new();
    std::fs::File::open(stem.with_extension("bin"))?.read_to_end(&mut raw)?;
    if raw.len() != n * p * 16 {
        return Err(Error::Config(format!(
            "subspace data has {} bytes, expected {}",
            raw.len(),
            n * p * 16
        )));
    }
    let mut basis = Array2::zeros((n, p));
    for (idx, chunk) in raw.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        basis[[idx / p, idx % p]] = c64::new(re, im);
    }
    let grid: Vec<f64> =
        (0..grid_len).map(|i| pm * i as f64 / (grid_len as f64 - 1.0)).collect();
    Ok((DcrSubspace { phi_max: pm, grid, basis, p, spectrum, kind }, seed))
}
