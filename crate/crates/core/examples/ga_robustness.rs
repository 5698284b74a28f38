//! Full protocol runs with 60% Gaussian attackers and 60% label flippers,
//! next to an attack-free baseline.
//!
//! cargo run --release --example ga_robustness

use fedseg::attacks::{AttackKind, AttackSpec};
use fedseg::harness::{run_experiment, ExperimentConfig};

fn main() -> fedseg::Result<()> {
    let base = ExperimentConfig::default();
    // clustering rates at epoch 1 and averaged over the run
    println!(
        "{:<6} {:>10} {:>10} {:>6} {:>6} {:>9} {:>9}",
        "attack", "honest", "malicious", "tpr@1", "tnr@1", "mean tpr", "mean tnr"
    );
    for (kind, xi) in [(AttackKind::None, 0.0), (AttackKind::Ga, 0.6), (AttackKind::Lfa, 0.6)] {
        let cfg = ExperimentConfig {
            xi,
            attack: AttackSpec::new(kind),
            ..base.clone()
        };
        let records = run_experiment(&cfg)?;
        let last = records.last().expect("epochs > 0");
        let mean = |rate: fn(&fedseg::harness::MetricsRecord) -> f64| {
            records.iter().map(rate).sum::<f64>() / records.len() as f64
        };
        println!(
            "{:<6} {:>10.4} {:>10.4} {:>6.2} {:>6.2} {:>9.2} {:>9.2}",
            format!("{kind:?}"),
            last.acc_honest,
            last.acc_malicious,
            records[0].tpr,
            records[0].tnr,
            mean(|r| r.tpr),
            mean(|r| r.tnr)
        );
    }
    Ok(())
}
