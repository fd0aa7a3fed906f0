//! Random scene generation: one unit-magnitude LOS path plus weaker NLOS
//! paths, angles separated in frequency, ranges inside the radiating band.

use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;

use super::config::SceneConfig;
use crate::channel::PathParams;
use crate::error::Result;
use crate::geometry::ArrayGeometry;

/// Convert an SNR in dB to the noise variance for a given channel energy:
/// SNR = ‖h‖²/(N·σ²).
pub fn snr_db_to_noise_var(snr_db: f64, channel_energy: f64, n_antennas: usize) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    channel_energy / (n_antennas as f64 * snr)
}

/// Draw a path list under the scene law. Deterministic per seed.
pub fn sample_scene(geom: &ArrayGeometry, law: &SceneConfig, seed: u64) -> Result<Vec<PathParams>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zra = geom.rayleigh_distance_m();
    let zfr = geom.fresnel_distance_m();
    let lo = (law.range_band_rel[0] * zra).max(zfr * 1.001);
    let hi = (law.range_band_rel[1] * zra).min(zra * 0.999).max(lo);
    let min_sep = law.min_omega_sep_rel / geom.n_antennas as f64;

    // rejection-sample separated sines; separation measured in ω
    let mut sines: Vec<f64> = Vec::with_capacity(law.n_paths);
    let mut attempts = 0;
    while sines.len() < law.n_paths {
        let cand = (2.0 * rng.random::<f64>() - 1.0) * law.sin_theta_max;
        let omega = geom.spacing_ratio() * cand;
        let ok = sines.iter().all(|s| (geom.spacing_ratio() * s - omega).abs() >= min_sep);
        if ok || attempts > 5000 {
            sines.push(cand);
        }
        attempts += 1;
    }

    let mut paths = Vec::with_capacity(law.n_paths);
    for (i, &s) in sines.iter().enumerate() {
        let theta = s.asin();
        let r = lo + rng.random::<f64>() * (hi - lo);
        let gain = if i == 0 {
            c64::from_polar(1.0, rng.random::<f64>() * TAU)
        } else {
            let sd = (law.nlos_gain_var / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            c64::new(sd * re, sd * im)
        };
        paths.push(PathParams::new(theta, r, gain)?);
    }
    Ok(paths)
}
