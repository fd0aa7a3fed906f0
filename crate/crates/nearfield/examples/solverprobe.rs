// temporary probe: distance trend at L=2 and Q trend at L=4
use nearfield::harness::config::{ExperimentConfig, SweepAxis};
use nearfield::harness::{run_trial, PointContext};

fn main() {
    let mut dcfg = ExperimentConfig::desk();
    dcfg.scene.n_paths = 2;
    dcfg.sweep.axis = SweepAxis::Distance;
    let zra = dcfg.geometry.to_geometry().unwrap().rayleigh_distance_m();
    for frac in [0.05, 0.2, 0.4, 0.6] {
        let ctx = PointContext::new(&dcfg, 0, frac * zra).unwrap();
        let n = 20;
        let (mut s2, mut rr, mut fails) = (0.0, 0.0, 0);
        for trial in 0..n {
            let res = run_trial(&ctx, trial).unwrap();
            s2 += res.nmse / n as f64;
            rr += res.rmse_r / n as f64;
            if res.nmse > 0.01 { fails += 1; }
        }
        println!("L=2 dist {frac}: nmse {s2:.3e} rmse_r {rr:.3e} fails {fails}/20");
    }
    let mut qcfg = ExperimentConfig::desk();
    qcfg.sweep.axis = SweepAxis::Q;
    for q in [8.0, 16.0, 32.0] {
        let ctx = PointContext::new(&qcfg, 0, q).unwrap();
        let n = 20;
        let mut s2 = 0.0;
        for trial in 0..n {
            let res = run_trial(&ctx, trial).unwrap();
            s2 += res.nmse / n as f64;
        }
        println!("L=4 Q {q}: nmse {s2:.3e}");
    }
}
