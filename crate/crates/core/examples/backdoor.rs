//! Backdoor attack at 60% malicious clients: segmentation keeps the honest
//! models clean, plain FedAvg over the same signs learns the trigger.
//!
//! cargo run --release --example backdoor

use fedseg::attacks::{AttackKind, AttackSpec};
use fedseg::harness::{run_experiment, Aggregator, ExperimentConfig};

fn main() -> fedseg::Result<()> {
    for aggregator in [Aggregator::Segmentation, Aggregator::Fedavg, Aggregator::Median, Aggregator::Krum] {
        let cfg = ExperimentConfig {
            xi: 0.6,
            attack: AttackSpec::new(AttackKind::Ba),
            aggregator,
            ..Default::default()
        };
        let last = run_experiment(&cfg)?.pop().expect("epochs > 0");
        println!("{aggregator:?}: honest accuracy {:.4}, ASR {:.4}", last.acc_honest, last.asr);
    }
    Ok(())
}
