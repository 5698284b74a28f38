//! Round-synchronous simulation of clients, servers and dealer, with
//! metrics output and the vote-error bound checker.

mod bound;
mod config;
mod demo;
mod output;
mod run;

pub use bound::{cantelli_bound, empirical_vote_error, ConvergenceBoundParams};
pub use config::{Aggregator, DpConfig, ExperimentConfig, ServerBehavior};
pub use demo::{cluster_demo, synthetic_signs, ClusterDemo};
pub use output::{metrics_csv, summary_json, write_outputs, METRICS_HEADER};
pub use run::{
    clustering_rates, run_experiment, run_traced, MetricsRecord, RoundBytes, RoundTrace, RunOutput, BYTES_PER_MS,
    DIGEST_BYTES, LATENCY_MS,
};
