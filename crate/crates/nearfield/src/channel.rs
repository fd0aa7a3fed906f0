//! Spherical-wave channel synthesis.
//!
//! The exact per-antenna response of a point source at angle θ and range r is
//! a phase profile in the antenna-to-source distance; in the radiating near
//! field a second-order expansion of that distance factors the response into
//! a complex tone (angle) Hadamard-multiplied by a chirp (range curvature).
//! Sign convention used throughout: tone entries `exp(+j2π(n-1)ω)`, chirp
//! entries `exp(-j2π(n-1)²φ)` with ω = d·sinθ/λc and φ = d²cos²θ/(2λc·r);
//! this is the factorization of the exact phase and keeps the closed-form
//! range inversion in `recovery` an identity on noiseless data.

use ndarray::prelude::*;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

/// One propagation path. `gain` is the pre-phase gain; the range-dependent
/// carrier phase is absorbed via [`PathParams::absorbed_gain`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    /// Angle θ in radians, in (−π/2, π/2).
    pub theta_rad: f64,
    /// Range r in meters, > 0.
    pub range_m: f64,
    /// Complex gain before carrier-phase absorption.
    pub gain: c64,
}

impl PathParams {
    pub fn new(theta_rad: f64, range_m: f64, gain: c64) -> Result<Self> {
        if !(range_m > 0.0) {
            return Err(Error::Parameter(format!("path range must be positive, got {range_m}")));
        }
        if !(theta_rad.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Parameter(format!(
                "path angle must lie in (−π/2, π/2), got {theta_rad}"
            )));
        }
        Ok(Self { theta_rad, range_m, gain })
    }

    /// Gain with the carrier phase of the reference antenna absorbed:
    /// α = α̃·exp(−j2π r/λc).
    pub fn absorbed_gain(&self, geom: &ArrayGeometry) -> c64 {
        let ph = -TAU * self.range_m / geom.wavelength_m;
        self.gain * c64::from_polar(1.0, ph)
    }

    /// Angular frequency ω = d·sinθ/λc.
    pub fn omega(&self, geom: &ArrayGeometry) -> f64 {
        geom.spacing_ratio() * self.theta_rad.sin()
    }

    /// Chirp rate φ = d²·cos²θ/(2λc·r).
    pub fn phi(&self, geom: &ArrayGeometry) -> f64 {
        let c = self.theta_rad.cos();
        geom.spacing_m * geom.spacing_m * c * c / (2.0 * geom.wavelength_m * self.range_m)
    }

    /// Radiating near field check plus range-identifiability guard on cosθ.
    pub fn validate(&self, geom: &ArrayGeometry) -> Result<()> {
        if !geom.in_radiating_near_field(self.range_m) {
            return Err(Error::Parameter(format!(
                "range {} m outside radiating near field ({:.3}, {:.3}) m",
                self.range_m,
                geom.fresnel_distance_m(),
                geom.rayleigh_distance_m()
            )));
        }
        if self.theta_rad.cos() <= 0.0 {
            return Err(Error::Parameter("cosθ must be positive for range identifiability".into()));
        }
        Ok(())
    }
}

/// Which steering law to synthesize with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SteeringModel {
    /// Exact spherical phase from per-antenna distances.
    #[default]
    Exact,
    /// Second-order (Fresnel) expansion: tone ⊙ chirp.
    SecondOrder,
}

/// Complex tone a(ω): entries exp(+j2π(n−1)ω).
pub fn tone_vector(n: usize, omega: f64) -> Array1<c64> {
    Array1::from_shape_fn(n, |k| c64::from_polar(1.0, TAU * k as f64 * omega))
}

/// Chirp g(φ): entries exp(−j2π(n−1)²φ).
pub fn chirp_vector(n: usize, phi: f64) -> Array1<c64> {
    Array1::from_shape_fn(n, |k| {
        let k = k as f64;
        c64::from_polar(1.0, -TAU * k * k * phi)
    })
}

/// Distance from antenna `k` (0-based) to a source at (θ, r).
#[inline]
fn antenna_distance(geom: &ArrayGeometry, theta: f64, r: f64, k: usize) -> f64 {
    let yk = k as f64 * geom.spacing_m;
    (r * r + yk * yk - 2.0 * r * yk * theta.sin()).sqrt()
}

/// Exact spherical steering vector; entry n is exp(−j2π(r⁽ⁿ⁾−r)/λc), so the
/// first entry is 1.
pub fn steering_exact(geom: &ArrayGeometry, theta: f64, r: f64) -> Result<Array1<c64>> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("steering range must be positive, got {r}")));
    }
    Ok(Array1::from_shape_fn(geom.n_antennas, |k| {
        let rk = antenna_distance(geom, theta, r, k);
        c64::from_polar(1.0, -TAU * (rk - r) / geom.wavelength_m)
    }))
}

/// Second-order steering vector a(ω) ⊙ g(φ).
pub fn steering_approx(geom: &ArrayGeometry, theta: f64, r: f64) -> Result<Array1<c64>> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("steering range must be positive, got {r}")));
    }
    let omega = geom.spacing_ratio() * theta.sin();
    let c = theta.cos();
    let phi = geom.spacing_m * geom.spacing_m * c * c / (2.0 * geom.wavelength_m * r);
    Ok(Array1::from_shape_fn(geom.n_antennas, |k| {
        let k = k as f64;
        c64::from_polar(1.0, TAU * (k * omega - k * k * phi))
    }))
}

/// Dispatch on the steering law.
pub fn steering(geom: &ArrayGeometry, model: SteeringModel, theta: f64, r: f64) -> Result<Array1<c64>> {
    match model {
        SteeringModel::Exact => steering_exact(geom, theta, r),
        SteeringModel::SecondOrder => steering_approx(geom, theta, r),
    }
}

/// Partial derivatives of the steering vector w.r.t. θ and r.
pub fn steering_jacobian(
    geom: &ArrayGeometry,
    model: SteeringModel,
    theta: f64,
    r: f64,
) -> Result<(Array1<c64>, Array1<c64>)> {
    let b = steering(geom, model, theta, r)?;
    let n = geom.n_antennas;
    let jtau = c64::new(0.0, TAU);
    let mut dtheta = Array1::zeros(n);
    let mut dr = Array1::zeros(n);
    match model {
        SteeringModel::Exact => {
            // phase_n = −2π(r⁽ⁿ⁾ − r)/λ
            for k in 0..n {
                let yk = k as f64 * geom.spacing_m;
                let rk = antenna_distance(geom, theta, r, k);
                let drk_dtheta = -r * yk * theta.cos() / rk;
                let drk_dr = (r - yk * theta.sin()) / rk;
                dtheta[k] = b[k] * (-jtau / geom.wavelength_m) * drk_dtheta;
                dr[k] = b[k] * (-jtau / geom.wavelength_m) * (drk_dr - 1.0);
            }
        }
        SteeringModel::SecondOrder => {
            // phase_n = 2π(kω − k²φ)
            let domega_dtheta = geom.spacing_ratio() * theta.cos();
            let phi = geom.spacing_m * geom.spacing_m * theta.cos() * theta.cos()
                / (2.0 * geom.wavelength_m * r);
            let dphi_dtheta =
                -geom.spacing_m * geom.spacing_m * theta.cos() * theta.sin() / (geom.wavelength_m * r);
            let dphi_dr = -phi / r;
            for k in 0..n {
                let kf = k as f64;
                dtheta[k] = b[k] * jtau * (kf * domega_dtheta - kf * kf * dphi_dtheta);
                dr[k] = b[k] * jtau * (-kf * kf * dphi_dr);
            }
        }
    }
    Ok((dtheta, dr))
}

/// Channel synthesis h = Σ_l α_l·b(θ_l, r_l) with absorbed gains.
pub fn synth_channel(
    geom: &ArrayGeometry,
    paths: &[PathParams],
    model: SteeringModel,
) -> Result<Array1<c64>> {
    if paths.is_empty() {
        return Err(Error::Parameter("channel synthesis needs at least one path".into()));
    }
    let mut h = Array1::<c64>::zeros(geom.n_antennas);
    for p in paths {
        let b = steering(geom, model, p.theta_rad, p.range_m)?;
        let alpha = p.absorbed_gain(geom);
        h.zip_mut_with(&b, |hv, bv| *hv += alpha * bv);
    }
    Ok(h)
}
