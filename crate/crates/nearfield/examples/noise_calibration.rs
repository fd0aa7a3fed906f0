//! Empirical check of the regularization rule against fresh noise draws.
//!
//! The rule τ = √(1+1/ln N)·√(ln N + ln(4π·ln N) + 1)·‖A‖₂·‖G‖_F·σ should
//! dominate the mean dual atomic norm of i.i.d. circular Gaussian noise;
//! this example reports the ratio over a quick Monte-Carlo run.
//!
//! ```bash
//! cargo run --release --example noise_calibration
//! ```

use nearfield::harness::validate::validate_tau;

fn main() -> nearfield::Result<()> {
    println!("{:>5} {:>4} {:>10} {:>10} {:>8}", "N", "P", "mean dual", "tau", "ratio");
    for (n, p) in [(64usize, 5usize), (128, 7), (256, 10)] {
        let rep = validate_tau(n, p, 1.0, 50, 7)?;
        println!(
            "{n:>5} {p:>4} {:>10.4} {:>10.4} {:>8.3}",
            rep.empirical_mean,
            rep.tau,
            rep.empirical_mean / rep.tau
        );
    }
    Ok(())
}
