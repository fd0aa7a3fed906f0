//! Uniform linear array geometry and the classical field-region boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-wavelength ULA along the y-axis; antenna `n` (1-based) sits at
/// `(0, (n-1)d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Number of antenna elements N.
    pub n_antennas: usize,
    /// Element spacing d in meters.
    pub spacing_m: f64,
    /// Carrier wavelength λc in meters.
    pub wavelength_m: f64,
}

impl ArrayGeometry {
    pub fn new(n_antennas: usize, spacing_m: f64, wavelength_m: f64) -> Result<Self> {
        if n_antennas < 2 {
            return Err(Error::Geometry(format!("need at least 2 antennas, got {n_antennas}")));
        }
        if !(spacing_m > 0.0) || !(wavelength_m > 0.0) {
            return Err(Error::Geometry(format!(
                "spacing and wavelength must be positive (d={spacing_m}, lambda={wavelength_m})"
            )));
        }
        Ok(Self { n_antennas, spacing_m, wavelength_m })
    }

    /// Standard d = λc/2 spacing.
    pub fn half_wavelength(n_antennas: usize, wavelength_m: f64) -> Result<Self> {
        Self::new(n_antennas, wavelength_m / 2.0, wavelength_m)
    }

    /// Array aperture D = (N−1)·d.
    pub fn aperture_m(&self) -> f64 {
        (self.n_antennas as f64 - 1.0) * self.spacing_m
    }

    /// Rayleigh (Fraunhofer) distance 2D²/λc; beyond it the planar-wave model
    /// holds.
    pub fn rayleigh_distance_m(&self) -> f64 {
        let d = self.aperture_m();
        2.0 * d * d / self.wavelength_m
    }

    /// Fresnel distance 0.62·√(D³/λc); below it the reactive near field
    /// begins.
    pub fn fresnel_distance_m(&self) -> f64 {
        let d = self.aperture_m();
        0.62 * (d * d * d / self.wavelength_m).sqrt()
    }

    /// Radiating near field: Fresnel < r < Rayleigh.
    pub fn in_radiating_near_field(&self, range_m: f64) -> bool {
        range_m > self.fresnel_distance_m() && range_m < self.rayleigh_distance_m()
    }

    /// Spacing in wavelengths, d/λc.
    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_m / self.wavelength_m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_geometry() -> ArrayGeometry {
        // 256 elements, 100 GHz carrier (λ = 3 mm), half-wavelength spacing
        ArrayGeometry::half_wavelength(256, 3.0e-3).unwrap()
    }

    #[test]
    fn rayleigh_distance_reference_config() {
        let g = reference_geometry();
        assert_relative_eq!(g.rayleigh_distance_m(), 97.5375, max_relative = 1e-4);
    }

    #[test]
    fn rayleigh_distance_two_elements() {
        let g = ArrayGeometry::new(2, 1.5e-3, 3.0e-3).unwrap();
        // D = d for N = 2
        assert_relative_eq!(g.rayleigh_distance_m(), 2.0 * 1.5e-3 * 1.5e-3 / 3.0e-3);
    }

    #[test]
    fn rayleigh_distance_matches_direct_formula_n64() {
        let g = ArrayGeometry::new(64, 1.5e-3, 3.0e-3).unwrap();
        // independent hand evaluation of 2((N−1)d)²/λc
        let d: f64 = 63.0 * 1.5e-3;
        assert_relative_eq!(g.rayleigh_distance_m(), 2.0 * d * d / 3.0e-3, epsilon = 1e-15);
    }

    #[test]
    fn fresnel_distance_reference_config() {
        let g = reference_geometry();
        // direct evaluation of 0.62·√(D³/λc)
        let d: f64 = 255.0 * 1.5e-3;
        let expect = 0.62 * (d.powi(3) / 3.0e-3).sqrt();
        assert_relative_eq!(g.fresnel_distance_m(), expect, epsilon = 1e-15);
        assert_relative_eq!(g.fresnel_distance_m(), 2.678, max_relative = 1e-3);
    }

    #[test]
    fn fresnel_distance_matches_direct_formula_n64() {
        let g = ArrayGeometry::new(64, 1.5e-3, 3.0e-3).unwrap();
        let d: f64 = 63.0 * 1.5e-3;
        assert_relative_eq!(g.fresnel_distance_m(), 0.62 * (d.powi(3) / 3.0e-3).sqrt());
    }

    #[test]
    fn fresnel_vanishes_with_aperture() {
        // D → 0 limit via a tiny spacing
        let g = ArrayGeometry::new(2, 1e-12, 3.0e-3).unwrap();
        assert!(g.fresnel_distance_m() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(ArrayGeometry::new(1, 1.5e-3, 3.0e-3).is_err());
        assert!(ArrayGeometry::new(8, 0.0, 3.0e-3).is_err());
        assert!(ArrayGeometry::new(8, 1.5e-3, -1.0).is_err());
    }
}
