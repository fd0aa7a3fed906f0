// temporary probe for FD accuracy
use nearfield::channel::{synth_channel, PathParams, SteeringModel};
use nearfield::geometry::ArrayGeometry;
use nearfield::measure::{gen_combiners, measure};
use nearfield::refine::{cost_and_gradients, projection_cost};
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let model = SteeringModel::Exact;
    let seed = 13;
    let paths = [
        PathParams::new(0.35, 2.0, c64::new(1.0, 0.3)).unwrap(),
        PathParams::new(-0.3, 5.0, c64::new(0.4, -0.2)).unwrap(),
    ];
    let g = ArrayGeometry::half_wavelength(48, 3.0e-3).unwrap();
    let setup = gen_combiners(48, 4, 8, 0.0, seed).unwrap();
    let h = synth_channel(&g, &paths, model).unwrap();
    let rec = measure(&setup, &h.view(), 0.0, seed + 7).unwrap();
    let y = rec.y;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for pt in 0..12 {
        let thetas: Vec<f64> = (0..2).map(|_| (rng.random::<f64>() - 0.5) * 1.2).collect();
        let ranges: Vec<f64> = (0..2).map(|_| 1.5 + 6.0 * rng.random::<f64>()).collect();
        let (c0, gt, gr) = cost_and_gradients(&setup, &g, model, &thetas, &ranges, &y.view()).unwrap();
        for j in 0..2 {
            let h_th = 6.0e-6 * (1.0 + thetas[j].abs());
            let mut tp = thetas.clone();
            tp[j] = thetas[j] + h_th;
            let cp = projection_cost(&setup, &g, model, &tp, &ranges, &y.view()).unwrap();
            tp[j] = thetas[j] - h_th;
            let cm = projection_cost(&setup, &g, model, &tp, &ranges, &y.view()).unwrap();
            let fd = (cp - cm) / (2.0 * h_th);
            let rel = (gt[j] - fd).abs() / fd.abs().max(1e-9);
            if rel > 1e-6 {
                println!("pt {pt} theta[{j}] cost {c0:.6e} dtheta {:.3} analytic {:.8e} fd {:.8e} rel {rel:.2e}", (thetas[0]-thetas[1]).abs(), gt[j], fd);
            }
            let h_r = 6.0e-6 * (1.0 + ranges[j].abs());
            let mut rp = ranges.clone();
            rp[j] = ranges[j] + h_r;
            let cp = projection_cost(&setup, &g, model, &thetas, &rp, &y.view()).unwrap();
            rp[j] = ranges[j] - h_r;
            let cm = projection_cost(&setup, &g, model, &thetas, &rp, &y.view()).unwrap();
            let fd = (cp - cm) / (2.0 * h_r);
            let rel = (gr[j] - fd).abs() / fd.abs().max(1e-9);
            if rel > 1e-6 {
                println!("pt {pt} r[{j}] analytic {:.8e} fd {:.8e} rel {rel:.2e}", gr[j], fd);
            }
        }
    }
}
