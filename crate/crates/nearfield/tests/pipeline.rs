//! Integration tests for the Monte-Carlo harness: single-trial behavior,
//! sweep aggregation, file round trips, and config loading.

use nearfield::harness::config::{ExperimentConfig, SweepAxis};
use nearfield::harness::{read_trials, run_sweep, run_trial, write_outputs, PointContext};

fn tiny_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk();
    cfg.geometry.n_antennas = 64;
    cfg.measurement.n_slots = 8;
    cfg.scene.n_paths = 2;
    cfg.subspace.p = Some(5);
    cfg.sweep.values = vec![30.0];
    cfg.n_trials = 2;
    cfg
}

#[test]
fn noiseless_single_path_trial_reconstructs_channel() {
    // σ = 0 via a huge SNR and a second-order ground truth makes the whole
    // pipeline self-consistent up to optimizer tolerance
    let mut cfg = tiny_config();
    cfg.scene.n_paths = 1;
    cfg.scene.model = nearfield::SteeringModel::SecondOrder;
    cfg.sweep.values = vec![300.0]; // effectively noiseless
    cfg.subspace.p = Some(8);
    let ctx = PointContext::new(&cfg, 0, 300.0).expect("context");
    let res = run_trial(&ctx, 0).expect("trial");
    assert!(res.nmse <= 1e-6, "noiseless single-path NMSE {}", res.nmse);
}

#[test]
fn trials_are_bitwise_deterministic() {
    let cfg = tiny_config();
    let ctx = PointContext::new(&cfg, 0, 30.0).expect("context");
    let a = run_trial(&ctx, 1).expect("trial");
    let b = run_trial(&ctx, 1).expect("trial");
    assert_eq!(a.nmse.to_bits(), b.nmse.to_bits());
    assert_eq!(a.rmse_sin_theta.to_bits(), b.rmse_sin_theta.to_bits());
    assert_eq!(a.rmse_r.to_bits(), b.rmse_r.to_bits());
    assert_eq!(a.noise_dual_norm.to_bits(), b.noise_dual_norm.to_bits());
    assert_eq!(a.solver_iters, b.solver_iters);
}

#[test]
fn sweep_aggregates_match_stored_trials() {
    let out = run_sweep(&tiny_config()).expect("sweep");
    assert_eq!(out.rows.len(), 1);
    assert_eq!(out.trials.len(), 2);
    let mean: f64 = out.trials.iter().map(|t| t.nmse).sum::<f64>() / 2.0;
    assert!((out.rows[0].nmse_mean - mean).abs() < 1e-15);
    // single-point sweep with one trial equals that trial's record
    let mut one = tiny_config();
    one.n_trials = 1;
    let out1 = run_sweep(&one).expect("sweep");
    assert_eq!(out1.rows[0].n_trials, 1);
    assert!((out1.rows[0].nmse_mean - out1.trials[0].nmse).abs() < 1e-15);
    assert_eq!(out1.rows[0].nmse_se, 0.0);
}

#[test]
fn output_files_round_trip() {
    let out = run_sweep(&tiny_config()).expect("sweep");
    let dir = std::env::temp_dir().join("nearfield-pipeline-test");
    let _ = std::fs::remove_dir_all(&dir);
    write_outputs(&out, &dir).expect("write");
    let back = read_trials(&dir.join("trials.jsonl")).expect("read");
    assert_eq!(back.len(), out.trials.len());
    for (a, b) in back.iter().zip(out.trials.iter()) {
        assert_eq!(a.nmse.to_bits(), b.nmse.to_bits());
        assert_eq!(a.config_hash, b.config_hash);
    }
    let csv = std::fs::read_to_string(dir.join("summary.csv")).expect("summary");
    let mut lines = csv.lines();
    let hash_line = lines.next().expect("hash line");
    assert!(hash_line.starts_with("# config_hash="));
    assert!(hash_line.contains(&out.config_hash));
    assert_eq!(lines.next().expect("header"), nearfield::harness::sweep::SUMMARY_HEADER);
    assert_eq!(lines.count(), out.rows.len());
}

#[test]
fn config_files_in_repo_parse() {
    for name in ["desk.toml", "reference.toml"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../configs")
            .join(name);
        let cfg = ExperimentConfig::load(&path).expect("config loads");
        cfg.validate().expect("config valid");
    }
    let desk = ExperimentConfig::load(
        &std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml"),
    )
    .unwrap();
    assert_eq!(desk.geometry.n_antennas, 128);
    assert_eq!(desk.measurement.n_slots, 16);
    assert_eq!(desk.sweep.axis, SweepAxis::SnrDb);
}

#[test]
fn sweep_point_specialization_changes_subspace_dimension() {
    let mut cfg = tiny_config();
    cfg.sweep.axis = SweepAxis::P;
    cfg.sweep.values = vec![4.0];
    let ctx = PointContext::new(&cfg, 0, 4.0).expect("context");
    assert_eq!(ctx.subspace.p, 4);
}
