//! Building the chirp-rate subspace and measuring its approximation power.
//!
//! Shows the singular-value spectrum of the dense chirp dictionary, the
//! worst representation residual of the PCA-truncated basis over the
//! admissible rate band, the analytic bound for the raw uniform grid, and a
//! round trip through the binary export format.
//!
//! ```bash
//! cargo run --release --example chirp_subspace
//! ```

use nearfield::geometry::ArrayGeometry;
use nearfield::subspace::{
    export_subspace, import_subspace, min_grid_points, subspace_error, uniform_grid_bound,
    DcrSubspace,
};

fn main() -> nearfield::Result<()> {
    let n = 128;
    let g = ArrayGeometry::half_wavelength(n, 3.0e-3)?;
    println!("φ_max = {:.4e}", nearfield::subspace::phi_max(&g));
    println!("grid size for ε = 0.1: {}", min_grid_points(&g, 0.1)?);

    let sub = DcrSubspace::pca(&g, 10, 64)?;
    print!("leading singular values:");
    for s in sub.spectrum.iter().take(14) {
        print!(" {s:.2e}");
    }
    println!();

    for p in [7usize, 10, 12] {
        let sub = DcrSubspace::pca(&g, p, DcrSubspace::default_dense(p))?;
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let phi = sub.phi_max * i as f64 / 999.0;
            worst = worst.max(subspace_error(&sub, phi)?);
        }
        println!("PCA P = {p:>2}: worst relative residual over the band = {worst:.3e}");
    }

    let uni = DcrSubspace::uniform_grid(&g, 32)?;
    let delta = uni.phi_max / 31.0;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let phi = uni.phi_max * i as f64 / 999.0;
        worst = worst.max(subspace_error(&uni, phi)?);
    }
    println!(
        "uniform grid P = 32: worst residual {worst:.3e} vs analytic bound {:.3e}",
        uniform_grid_bound(n, delta)
    );

    let dir = std::env::temp_dir().join("nearfield-example");
    std::fs::create_dir_all(&dir)?;
    let stem = dir.join("dcr128");
    export_subspace(&sub, &stem, 0)?;
    let (back, _) = import_subspace(&stem)?;
    println!("export/import round trip: P = {} basis preserved = {}", back.p, back.basis == sub.basis);
    Ok(())
}
