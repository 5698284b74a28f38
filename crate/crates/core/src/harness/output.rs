use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{MetricsRecord, RunOutput};
use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "epoch,acc_honest,acc_malicious,asr,tpr,tnr,verif_failures,bytes,ms";

/// `metrics.csv` contents: reals with six fractional digits, LF endings.
pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{:.6}",
            r.epoch, r.acc_honest, r.acc_malicious, r.asr, r.tpr, r.tnr, r.verif_failures, r.bytes, r.sim_ms
        )
        .expect("writing to a String");
    }
    out
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    #[serde(rename = "final")]
    last: Option<&'a MetricsRecord>,
    epochs: usize,
    malicious_clients: Vec<usize>,
    total_verif_failures: usize,
    total_bytes: u64,
    wall_ms: f64,
    config: &'a ExperimentConfig,
}

/// `summary.json`: final-epoch metrics, totals, wall time and the config.
pub fn summary_json(cfg: &ExperimentConfig, run: &RunOutput) -> Result<String> {
    let summary = Summary {
        last: run.records.last(),
        epochs: run.records.len(),
        malicious_clients: (0..run.malicious.len()).filter(|&i| run.malicious[i]).collect(),
        total_verif_failures: run.records.iter().map(|r| r.verif_failures).sum(),
        total_bytes: run.records.iter().map(|r| r.bytes).sum(),
        wall_ms: run.wall_ms,
        config: cfg,
    };
    serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))
}

/// Writes `metrics.csv` and `summary.json` into `dir`, creating it.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, run: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("metrics.csv"), metrics_csv(&run.records))?;
    std::fs::write(dir.join("summary.json"), summary_json(cfg, run)? + "\n")?;
    Ok(())
}
