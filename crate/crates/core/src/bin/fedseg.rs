use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use fedseg::attacks::AttackKind;
use fedseg::harness::{
    cantelli_bound, cluster_demo, empirical_vote_error, run_traced, write_outputs, ConvergenceBoundParams,
    ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "fedseg", version, about = "Secure clustering and model segmentation for federated learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write metrics.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Compare the Cantelli vote-error bound with a Monte Carlo estimate.
    BoundCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// One secure clustering round over synthetic sign vectors.
    ClusterDemo {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value = "GA")]
        attack: String,
        #[arg(long, default_value_t = 0.6)]
        xi: f64,
        #[arg(long, default_value_t = 1024)]
        np: usize,
        #[arg(long, default_value_t = 3)]
        servers: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// The bound parameters plus optional `trials` (default 10^5) and `seed`.
fn bound_config(text: &str) -> Result<(ConvergenceBoundParams, u64, u64), Box<dyn std::error::Error>> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value.as_object_mut().ok_or("bound-check config must be a JSON object")?;
    let mut take = |key: &str, default: u64| -> Result<u64, Box<dyn std::error::Error>> {
        match obj.remove(key) {
            Some(v) => Ok(u64::deserialize(v)?),
            None => Ok(default),
        }
    };
    let trials = take("trials", 100_000)?;
    let seed = take("seed", 0)?;
    Ok((ConvergenceBoundParams::deserialize(value)?, trials, seed))
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            epochs,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(e) = epochs {
                cfg.epochs = e;
            }
            if let Some(o) = out {
                cfg.output = Some(o);
            }
            let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"));
            let result = run_traced(&cfg)?;
            write_outputs(&dir, &cfg, &result)?;
            if let Some(last) = result.records.last() {
                println!(
                    "epoch {}: acc_honest {:.4} acc_malicious {:.4} asr {:.4} tpr {:.3} tnr {:.3}",
                    last.epoch, last.acc_honest, last.acc_malicious, last.asr, last.tpr, last.tnr
                );
            }
            println!("wrote {}", dir.display());
        }
        Command::BoundCheck { config } => {
            let text = std::fs::read_to_string(&config)?;
            let (params, trials, seed) = bound_config(&text)?;
            let bound = cantelli_bound(&params)?;
            let empirical = empirical_vote_error(&params, trials, seed)?;
            println!("bound {bound:.6}");
            println!("empirical {empirical:.6} over {trials} trials");
            println!("holds {}", empirical <= bound);
        }
        Command::ClusterDemo {
            n,
            attack,
            xi,
            np,
            servers,
            seed,
        } => {
            let kind: AttackKind = serde_json::from_value(serde_json::Value::String(attack.to_uppercase()))?;
            let demo = cluster_demo(n, servers, np, xi, kind, seed)?;
            println!("IndM:\n{:?}", demo.ind);
            let labels: Vec<String> = demo
                .labels
                .labels
                .iter()
                .zip(&demo.malicious)
                .map(|(l, bad)| {
                    let tag = if *bad { "m" } else { "h" };
                    l.map_or(format!("{tag}:-"), |z| format!("{tag}:{z}"))
                })
                .collect();
            println!("labels: {}", labels.join(" "));
            println!("tpr {:.3} tnr {:.3}", demo.tpr, demo.tnr);
            println!("server traffic {} bytes in {} rounds", demo.traffic.bytes, demo.traffic.rounds);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
