//! Scratch probe for the outer-loop objective landscape. Run explicitly:
//! `cargo test --release -p seirpinn --test probe_landscape -- --ignored --nocapture`

use seirpinn::pipeline::{prepare_data, proposed_objective, ExperimentConfig};

#[test]
#[ignore]
fn objective_landscape_full_scale() {
    let cfg = ExperimentConfig::default();
    let data = prepare_data(&cfg).unwrap();
    for eps in [0.116, 0.15, 0.19, 0.20, 0.21, 0.25, 0.3, 0.4356] {
        let t0 = std::time::Instant::now();
        let obj = proposed_objective(&data, &cfg, eps).unwrap();
        println!("eps = {eps:.4}  objective = {obj:.6e}  ({:.1?})", t0.elapsed());
    }
}

#[test]
#[ignore]
fn objective_landscape_reduced_scale() {
    let cfg = ExperimentConfig { epochs: 5000, ..ExperimentConfig::default() };
    let data = prepare_data(&cfg).unwrap();
    for eps in [0.05, 0.10, 0.15, 0.18, 0.20, 0.22, 0.25, 0.30, 0.40, 0.45] {
        let t0 = std::time::Instant::now();
        let obj = proposed_objective(&data, &cfg, eps).unwrap();
        println!("eps = {eps:.3}  objective = {obj:.6e}  ({:.1?})", t0.elapsed());
    }
}
