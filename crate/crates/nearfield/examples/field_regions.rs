//! Field-region boundaries and steering-model accuracy.
//!
//! Prints the Fresnel/Rayleigh distances for a few array sizes, then sweeps
//! a source through the radiating near field and reports the worst per-antenna
//! phase gap between the exact spherical response and its second-order
//! (tone × chirp) factorization.
//!
//! ```bash
//! cargo run --release --example field_regions
//! ```

use nearfield::channel::{steering_approx, steering_exact};
use nearfield::geometry::ArrayGeometry;

fn main() -> nearfield::Result<()> {
    println!("{:>5} {:>12} {:>12}", "N", "Fresnel [m]", "Rayleigh [m]");
    for n in [64usize, 128, 256, 512] {
        let g = ArrayGeometry::half_wavelength(n, 3.0e-3)?;
        println!("{n:>5} {:>12.3} {:>12.2}", g.fresnel_distance_m(), g.rayleigh_distance_m());
    }

    let g = ArrayGeometry::half_wavelength(256, 3.0e-3)?;
    let theta = 0.35f64;
    println!("\nsecond-order model accuracy at θ = {theta:.2} rad (N = 256):");
    println!("{:>10} {:>16} {:>10}", "r [m]", "max |Δphase| [rad]", "< π/8?");
    let zfr = g.fresnel_distance_m();
    let zra = g.rayleigh_distance_m();
    for frac in [0.03f64, 0.05, 0.1, 0.2, 0.4, 0.8, 1.0] {
        let r = (frac * zra).max(zfr * 1.01);
        let exact = steering_exact(&g, theta, r)?;
        let approx = steering_approx(&g, theta, r)?;
        let gap = exact
            .iter()
            .zip(approx.iter())
            .map(|(a, b)| (a * b.conj()).arg().abs())
            .fold(0.0f64, f64::max);
        println!("{r:>10.2} {gap:>16.4} {:>10}", gap < std::f64::consts::PI / 8.0);
    }
    Ok(())
}
