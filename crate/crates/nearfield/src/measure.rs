//! Analog combining and pilot observation.
//!
//! Per slot q the receiver applies a constant-modulus combining matrix A_q
//! (N_RF × N, entries of magnitude 1/√N); stacking Q slots gives the M×N
//! sensing matrix A with M = N_RF·Q. Pilot symbols are fixed to 1 so the
//! per-slot pilot normalization is the identity, and the stacked observation
//! is y = A·h + n with n i.i.d. circular complex Gaussian.

use ndarray::prelude::*;
use num_complex::Complex64 as c64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Measurement configuration: combiners plus nominal noise level.
#[derive(Debug, Clone)]
pub struct MeasurementSetup {
    pub n_antennas: usize,
    pub n_rf: usize,
    pub n_slots: usize,
    /// Stacked combining matrix A, shape M×N with M = N_RF·Q.
    pub stacked: Array2<c64>,
    /// Nominal noise variance σ².
    pub noise_var: f64,
    pub rng_seed: u64,
}

impl MeasurementSetup {
    pub fn n_measurements(&self) -> usize {
        self.n_rf * self.n_slots
    }

    /// View of the slot-q combiner A_q.
    pub fn combiner(&self, q: usize) -> ArrayView2<'_, c64> {
        self.stacked.slice(ndarray::s![q * self.n_rf..(q + 1) * self.n_rf, ..])
    }
}

/// One stacked pilot observation y = A·h + n. The noise realization is kept
/// for validation.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub y: Array1<c64>,
    pub effective_noise: Array1<c64>,
    pub noise_var: f64,
}

/// Draw i.i.d. CN(0, var) samples.
pub fn complex_gaussian(rng: &mut impl Rng, len: usize, var: f64) -> Array1<c64> {
    let s = (var / 2.0).sqrt();
    Array1::from_shape_fn(len, |_| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c64::new(s * re, s * im)
    })
}

/// Generate seeded constant-modulus combiners with i.i.d. uniform phases.
pub fn gen_combiners(
    n_antennas: usize,
    n_rf: usize,
    n_slots: usize,
    noise_var: f64,
    rng_seed: u64,
) -> Result<MeasurementSetup> {
    if n_rf < 1 || n_slots < 1 {
        return Err(Error::Parameter(format!(
            "need N_RF ≥ 1 and Q ≥ 1, got N_RF={n_rf}, Q={n_slots}"
        )));
    }
    if n_antennas < 1 {
        return Err(Error::Parameter("need at least one antenna".into()));
    }
    let m = n_rf * n_slots;
    let amp = 1.0 / (n_antennas as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let stacked = Array2::from_shape_fn((m, n_antennas), |_| {
        c64::from_polar(amp, rng.random::<f64>() * TAU)
    });
    Ok(MeasurementSetup { n_antennas, n_rf, n_slots, stacked, noise_var, rng_seed })
}

/// Observe a channel through the stacked combiner: y = A·h + n with
/// n ~ CN(0, σ²·I_M), drawn from the given seed.
pub fn measure(
    setup: &MeasurementSetup,
    h: &ArrayView1<c64>,
    noise_var: f64,
    rng_seed: u64,
) -> Result<MeasurementRecord> {
    if h.len() != setup.n_antennas {
        return Err(Error::Shape(format!(
            "channel length {} does not match {} antennas",
            h.len(),
            setup.n_antennas
        )));
    }
    if noise_var < 0.0 {
        return Err(Error::Parameter(format!("noise variance must be nonnegative, got {noise_var}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let m = setup.n_measurements();
    let noise = if noise_var > 0.0 {
        complex_gaussian(&mut rng, m, noise_var)
    } else {
        Array1::zeros(m)
    };
    let y = setup.stacked.dot(h) + &noise;
    Ok(MeasurementRecord { y, effective_noise: noise, noise_var })
}
