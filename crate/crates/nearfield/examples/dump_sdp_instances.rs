//! Write the toy solver-reference instances as JSON for the offline
//! interior-point solve that produces `tests/fixtures/sdp_reference.json`.
//!
//! ```bash
//! cargo run --example dump_sdp_instances -- out_dir
//! python3 tools/make_sdp_fixtures.py out_dir crates/nearfield/tests/fixtures/sdp_reference.json
//! ```

use nearfield::harness::validate::{atomic_toy_matrix, toy_instance};
use num_complex::Complex64 as c64;
use serde_json::json;

fn cvec(v: impl Iterator<Item = c64>) -> Vec<[f64; 2]> {
    v.map(|z| [z.re, z.im]).collect()
}

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "sdp_instances".into());
    std::fs::create_dir_all(&out).expect("create output dir");
    for idx in 0..10u64 {
        let inst = toy_instance(idx).expect("instance");
        let doc = json!({
            "kind": "denoise",
            "index": idx,
            "n": inst.sub.n_antennas(),
            "p": inst.sub.p,
            "m": inst.setup.n_measurements(),
            "tau": inst.tau,
            "a": cvec(inst.setup.stacked.iter().cloned()),
            "g": cvec(inst.sub.basis.iter().cloned()),
            "y": cvec(inst.y.iter().cloned()),
        });
        let path = format!("{out}/denoise_{idx:02}.json");
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).expect("write");
        eprintln!("wrote {path}");
    }
    let (x0, expected) = atomic_toy_matrix();
    let doc = json!({
        "kind": "atomic_norm",
        "index": 0,
        "p": x0.nrows(),
        "n": x0.ncols(),
        "expected": expected,
        "x0": cvec(x0.iter().cloned()),
    });
    let path = format!("{out}/atomic_00.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).expect("write");
    eprintln!("wrote {path}");
}
