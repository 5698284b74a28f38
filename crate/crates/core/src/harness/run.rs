use std::time::Instant;

use rand::seq::index::sample;
use serde::Serialize;

use super::config::{Aggregator, ExperimentConfig, ServerBehavior};
use crate::aggregation::{fedavg, krum, median, model_segmentation, trim_mean};
use crate::attacks::{adaptive_attack, ga_update, krum_attack, poison_batch, trim_attack, triggered_set, AttackKind};
use crate::clustering::{
    compare_pairs, cosine_from_xor, dbscan_labels, euclid_rows, indicator_from_bits, ClusterAssignment, IndMatrix,
};
use crate::dp::{inject_noise, ks_denoise, DpParams};
use crate::error::{Error, Result};
use crate::hhf::{hhf_hash, indm_majority_vote, verify_aggregate, Digest, HhfKey};
use crate::mpc::{share_binary, Mpc};
use crate::seed::{self, tag};
use crate::training::{
    evaluate, evaluate_asr, gen_synthetic, local_grad, partition_noniid, Batch, Dataset, Partition, SoftmaxShape,
    DEFAULT_SPREAD,
};
use crate::updates::{apply_majority_step, decode_sign, encode_sign, GradientVector, ModelParams, SignVector};

/// Simulated one-way message latency per communication round.
pub const LATENCY_MS: f64 = 0.5;

/// Simulated link throughput (1 Gbit/s).
pub const BYTES_PER_MS: f64 = 125_000.0;

/// Wire size of one digest: two group elements of 17 bytes.
pub const DIGEST_BYTES: u64 = 34;

/// Byte counts for one round, split by leg.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RoundBytes {
    /// Client shares sent to the servers.
    pub upload: u64,
    /// Server-to-server openings.
    pub servers: u64,
    /// Digests and indicator matrices sent to clients.
    pub broadcast: u64,
    /// Aggregate shares returned to clients.
    pub download: u64,
}

impl RoundBytes {
    pub fn total(&self) -> u64 {
        self.upload + self.servers + self.broadcast + self.download
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean test accuracy of each cluster's members, by cluster id.
    pub cluster_acc: Vec<f64>,
    pub acc_honest: f64,
    /// 0 when there are no malicious clients.
    pub acc_malicious: f64,
    pub asr: f64,
    pub tpr: f64,
    pub tnr: f64,
    /// Clients that refused this round's aggregate, or every client when
    /// the round was aborted.
    pub verif_failures: usize,
    pub bytes: u64,
    pub traffic: RoundBytes,
    /// Simulated network time for the round.
    pub sim_ms: f64,
    pub clusters: usize,
    pub noise: usize,
    pub aborted: bool,
    #[serde(skip)]
    pub wall_ms: f64,
}

/// What happened in one round, for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    /// IndM opened by honest servers.
    pub indm_true: Option<IndMatrix>,
    /// IndM after the clients' majority vote.
    pub indm_voted: Option<IndMatrix>,
    pub labels: Option<ClusterAssignment>,
    /// Aggregate each client reconstructed, if it got one.
    pub received: Vec<Option<Vec<i64>>>,
    /// Plaintext sum of the decoded signs over the client's cluster.
    pub expected: Vec<Option<Vec<i64>>>,
    pub accepted: Vec<bool>,
    pub aborted: bool,
}

impl RoundTrace {
    /// Clients that received an aggregate and refused it.
    pub fn rejections(&self) -> usize {
        self.received
            .iter()
            .zip(&self.accepted)
            .filter(|(r, ok)| r.is_some() && !**ok)
            .count()
    }
}

/// Full output of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<MetricsRecord>,
    pub traces: Vec<RoundTrace>,
    pub malicious: Vec<bool>,
    pub wall_ms: f64,
}

/// TPR: honest clients in a cluster with no malicious member. TNR:
/// malicious clients in no cluster with an honest member. Noise counts as
/// separated for malicious clients and not for honest ones. A rate with no
/// clients to score is 1.
pub fn clustering_rates(labels: &ClusterAssignment, malicious: &[bool]) -> (f64, f64) {
    let mut has_honest = vec![false; labels.clusters];
    let mut has_malicious = vec![false; labels.clusters];
    for (l, &bad) in labels.labels.iter().zip(malicious) {
        if let Some(z) = *l {
            if bad {
                has_malicious[z] = true;
            } else {
                has_honest[z] = true;
            }
        }
    }
    let (mut tp, mut h, mut tn, mut m) = (0usize, 0usize, 0usize, 0usize);
    for (l, &bad) in labels.labels.iter().zip(malicious) {
        if bad {
            m += 1;
            if l.is_none_or(|z| !has_honest[z]) {
                tn += 1;
            }
        } else {
            h += 1;
            if l.is_some_and(|z| !has_malicious[z]) {
                tp += 1;
            }
        }
    }
    let rate = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    (rate(tp, h), rate(tn, m))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

fn flipped(ind: &IndMatrix) -> IndMatrix {
    let n = ind.n();
    IndMatrix::from_upper(n, |i, j| !ind.get(i, j))
}

struct Setup {
    cfg: ExperimentConfig,
    shape: SoftmaxShape,
    train: Dataset,
    test: Dataset,
    triggered: Batch,
    partition: Partition,
    malicious: Vec<bool>,
    key: HhfKey,
    dp: DpParams,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let shape = SoftmaxShape::new(cfg.d, cfg.classes);
        let train = gen_synthetic(cfg.classes, cfg.d, cfg.per_class, DEFAULT_SPREAD, cfg.seed)?;
        let test = gen_synthetic(
            cfg.classes,
            cfg.d,
            cfg.test_per_class,
            DEFAULT_SPREAD,
            seed::derive(cfg.seed, &[tag::TEST]),
        )?;
        let triggered = triggered_set(&test.all(), &cfg.attack)?;
        let partition = partition_noniid(&train, cfg.n, cfg.q, cfg.seed)?;
        let mut malicious = vec![false; cfg.n];
        let mut rng = seed::rng(cfg.seed, &[tag::ROLES]);
        for i in sample(&mut rng, cfg.n, cfg.malicious_count()) {
            malicious[i] = true;
        }
        Ok(Self {
            cfg: cfg.clone(),
            shape,
            key: HhfKey::generate(shape.num_params(), cfg.seed),
            dp: cfg.dp.params()?,
            train,
            test,
            triggered,
            partition,
            malicious,
        })
    }

    fn minibatch(&self, client: usize, epoch: usize) -> Option<Batch> {
        let own = &self.partition.clients[client];
        if own.is_empty() {
            return None;
        }
        let take = self.cfg.batch_size.min(own.len());
        let mut rng = seed::rng(self.cfg.seed, &[tag::BATCH, epoch as u64, client as u64]);
        let idx: Vec<usize> = sample(&mut rng, own.len(), take).into_iter().map(|k| own[k]).collect();
        Some(self.train.batch(&idx))
    }

    fn benign(&self, model: &ModelParams, batch: Option<&Batch>) -> Result<GradientVector> {
        match batch {
            Some(b) => local_grad(&self.shape, model, b),
            None => Ok(GradientVector::zeros(self.shape.num_params())),
        }
    }

    /// Raw local updates before privacy noise.
    fn local_updates(&self, models: &[ModelParams], epoch: usize) -> Result<Vec<GradientVector>> {
        let cfg = &self.cfg;
        let np = self.shape.num_params();
        let batches: Vec<Option<Batch>> = (0..cfg.n).map(|i| self.minibatch(i, epoch)).collect();
        let mut out = Vec::with_capacity(cfg.n);
        for i in 0..cfg.n {
            let model = &models[i];
            let batch = batches[i].as_ref();
            if !self.malicious[i] {
                out.push(self.benign(model, batch)?);
                continue;
            }
            let path = [epoch as u64, i as u64];
            let g = match cfg.attack.kind {
                AttackKind::None | AttackKind::Krum | AttackKind::Trim => self.benign(model, batch)?,
                AttackKind::Ga => ga_update(&mut seed::rng(cfg.seed, &[tag::ATTACK, path[0], path[1]]), np),
                AttackKind::Lfa | AttackKind::Ba => match batch {
                    Some(b) => {
                        let mut rng = seed::rng(cfg.seed, &[tag::POISON, path[0], path[1]]);
                        let poisoned = poison_batch(b, &cfg.attack, cfg.classes, &mut rng)?;
                        local_grad(&self.shape, model, &poisoned)?
                    }
                    None => GradientVector::zeros(np),
                },
                AttackKind::Aa => match batch {
                    Some(b) => adaptive_attack(&self.shape, model, b, cfg.attack.aa_steps, cfg.attack.aa_lr)?,
                    None => GradientVector::zeros(np),
                },
                AttackKind::Ea => return Err(Error::UnsupportedAttack("EA".into())),
            };
            out.push(g);
        }
        // directed-deviation attacks share one crafted update
        if matches!(cfg.attack.kind, AttackKind::Krum | AttackKind::Trim) {
            let members: Vec<usize> = (0..cfg.n).filter(|&i| self.malicious[i]).collect();
            if !members.is_empty() {
                let coalition: Vec<GradientVector> = members.iter().map(|&i| out[i].clone()).collect();
                let crafted = if cfg.attack.kind == AttackKind::Krum {
                    krum_attack(&coalition)?
                } else {
                    trim_attack(&coalition)?
                };
                for &i in &members {
                    out[i] = crafted.clone();
                }
            }
        }
        Ok(out)
    }

    fn privatize(&self, g: &GradientVector, epoch: usize, client: usize) -> Result<SignVector> {
        let noised = inject_noise(
            g,
            &self.dp,
            seed::derive(self.cfg.seed, &[tag::NOISE, epoch as u64, client as u64]),
        );
        encode_sign(&ks_denoise(&noised, &self.dp))
    }

    fn accuracy(&self, model: &ModelParams) -> f64 {
        evaluate(&self.shape, model, &self.test)
    }

    fn asr(&self, model: &ModelParams) -> f64 {
        evaluate_asr(&self.shape, model, &self.triggered, self.cfg.attack.target_label)
    }
}

struct SegmentedRound {
    trace: RoundTrace,
    bytes: RoundBytes,
    mpc_rounds: u64,
}

fn segmented_round(
    st: &Setup,
    signs: &[SignVector],
    models: &mut [ModelParams],
    epoch: usize,
) -> Result<SegmentedRound> {
    let cfg = &st.cfg;
    let (n, s) = (cfg.n, cfg.servers);
    let np = st.shape.num_params();
    let corrupt = |server: usize| server < cfg.malicious_server_count;
    let behavior = cfg.malicious_server_behavior;
    let mut bytes = RoundBytes {
        upload: (n * s * np.div_ceil(8)) as u64,
        broadcast: (n * n) as u64 * DIGEST_BYTES,
        ..Default::default()
    };

    let mut shares = Vec::with_capacity(n);
    let mut digests: Vec<Digest> = Vec::with_capacity(n);
    for (i, sv) in signs.iter().enumerate() {
        let mut rng = seed::rng(cfg.seed, &[tag::SHARE, epoch as u64, i as u64]);
        shares.push(share_binary(sv, s, &mut rng)?);
        digests.push(hhf_hash(&st.key, &sv.to_i64())?);
    }

    let mut mpc = Mpc::new(s, seed::derive(cfg.seed, &[tag::DEALER, epoch as u64]))?;
    let cos = cosine_from_xor(&shares, &mut mpc)?;
    let euc = euclid_rows(&cos, &mut mpc)?;
    let mut cmp = compare_pairs(&euc, cfg.alpha, &mut mpc)?;
    if behavior == ServerBehavior::CorruptCompare {
        for server in (0..s).filter(|&v| corrupt(v)) {
            let e = &mut cmp.bits.share_mut(server).elems[0];
            *e = e.wrapping_add(7);
        }
    }
    let aborted_trace = |bytes: RoundBytes, mpc: &Mpc| SegmentedRound {
        trace: RoundTrace {
            indm_true: None,
            indm_voted: None,
            labels: None,
            received: vec![None; n],
            expected: vec![None; n],
            accepted: vec![false; n],
            aborted: true,
        },
        bytes: RoundBytes {
            servers: mpc.traffic.bytes,
            ..bytes
        },
        mpc_rounds: mpc.traffic.rounds,
    };
    let opened = match cmp.check_and_open(&mut mpc) {
        Ok(bits) => bits.clone(),
        Err(Error::BitCheckFailed) => return Ok(aborted_trace(bytes, &mpc)),
        Err(e) => return Err(e),
    };
    let honest_ind = indicator_from_bits(n, &opened)?;
    let broadcasts: Vec<IndMatrix> = (0..s)
        .map(|v| {
            if corrupt(v) && behavior == ServerBehavior::CorruptIndm {
                flipped(&honest_ind)
            } else {
                honest_ind.clone()
            }
        })
        .collect();
    bytes.broadcast += (s * n * (n * n).div_ceil(8)) as u64;
    let voted = indm_majority_vote(&broadcasts)?;
    let labels = dbscan_labels(&voted, cfg.m_pts());

    let mut seg = model_segmentation(&shares, &labels, &mut mpc)?;
    if behavior == ServerBehavior::CorruptAgg {
        let coord = epoch % np;
        for agg in &mut seg.aggregates {
            for server in (0..s).filter(|&v| corrupt(v)) {
                let e = &mut agg.share_mut(server).elems[coord];
                *e = e.wrapping_add(1);
            }
        }
    }
    let revealed = seg.reveal();
    let plain: Vec<Vec<i64>> = signs.iter().map(|sv| sv.to_i64()).collect();

    let mut received = vec![None; n];
    let mut expected = vec![None; n];
    let mut accepted = vec![false; n];
    for (z, members) in seg.routing.iter().enumerate() {
        let truth: Vec<i64> = (0..np).map(|k| members.iter().map(|&i| plain[i][k]).sum()).collect();
        let member_digests: Vec<Digest> = members.iter().map(|&i| digests[i].clone()).collect();
        let ok = verify_aggregate(&st.key, &member_digests, &revealed[z])?;
        let step = GradientVector::new(revealed[z].iter().map(|&v| v as f64).collect())?;
        for &i in members {
            bytes.download += (s * np * 8) as u64;
            received[i] = Some(revealed[z].clone());
            expected[i] = Some(truth.clone());
            accepted[i] = ok;
            if ok {
                models[i] = apply_majority_step(&models[i], &step)?;
            }
        }
    }
    bytes.servers = mpc.traffic.bytes;
    Ok(SegmentedRound {
        trace: RoundTrace {
            indm_true: Some(honest_ind),
            indm_voted: Some(voted),
            labels: Some(labels),
            received,
            expected,
            accepted,
            aborted: false,
        },
        bytes,
        mpc_rounds: mpc.traffic.rounds,
    })
}

/// One global step with a plaintext baseline rule over the decoded signs.
fn baseline_round(st: &Setup, signs: &[SignVector], global: &mut ModelParams) -> Result<RoundTrace> {
    let cfg = &st.cfg;
    let n = cfg.n;
    let decoded: Vec<GradientVector> = signs.iter().map(decode_sign).collect();
    let f = cfg.malicious_count();
    let agg = match cfg.aggregator {
        Aggregator::Fedavg => fedavg(&decoded, &vec![1.0; n])?,
        Aggregator::Median => median(&decoded)?,
        Aggregator::TrimMean => trim_mean(&decoded, f.min((n - 1) / 2))?,
        Aggregator::Krum => krum(&decoded, f.min(n.saturating_sub(3) / 2))?,
        Aggregator::Segmentation => unreachable!("handled by segmented_round"),
    };
    *global = apply_majority_step(global, &agg)?;
    Ok(RoundTrace {
        indm_true: None,
        indm_voted: None,
        labels: Some(ClusterAssignment {
            labels: vec![Some(0); n],
            clusters: 1,
            m_pts: 1,
        }),
        received: vec![None; n],
        expected: vec![None; n],
        accepted: vec![true; n],
        aborted: false,
    })
}

/// Runs every round and keeps the per-round traces.
pub fn run_traced(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let st = Setup::new(cfg)?;
    let n = cfg.n;
    let np = st.shape.num_params();
    let segmented = cfg.aggregator == Aggregator::Segmentation;
    let mut models = vec![ModelParams::zeros(np, cfg.eta)?; n];
    let mut global = ModelParams::zeros(np, cfg.eta)?;
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut traces = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let round_start = Instant::now();
        let current: Vec<ModelParams> = if segmented { models.clone() } else { vec![global.clone(); n] };
        let raw = st.local_updates(&current, epoch)?;
        let signs = raw
            .iter()
            .enumerate()
            .map(|(i, g)| st.privatize(g, epoch, i))
            .collect::<Result<Vec<_>>>()?;

        let (trace, bytes, rounds) = if segmented {
            let r = segmented_round(&st, &signs, &mut models, epoch)?;
            (r.trace, r.bytes, r.mpc_rounds + 3)
        } else {
            let t = baseline_round(&st, &signs, &mut global)?;
            models = vec![global.clone(); n];
            let bytes = RoundBytes {
                upload: (n * np * 8) as u64,
                download: (n * np * 8) as u64,
                ..Default::default()
            };
            (t, bytes, 2)
        };

        let acc: Vec<f64> = if segmented {
            models.iter().map(|m| st.accuracy(m)).collect()
        } else {
            vec![st.accuracy(&global); n]
        };
        let labels = trace.labels.clone().unwrap_or(ClusterAssignment {
            labels: vec![None; n],
            clusters: 0,
            m_pts: cfg.m_pts(),
        });
        let (tpr, tnr) = clustering_rates(&labels, &st.malicious);
        let cluster_acc = (0..labels.clusters)
            .map(|z| mean(labels.members(z).into_iter().map(|i| acc[i])))
            .collect();
        let honest_asr = if segmented {
            mean((0..n).filter(|&i| !st.malicious[i]).map(|i| st.asr(&models[i])))
        } else {
            st.asr(&global)
        };
        let total = bytes.total();
        records.push(MetricsRecord {
            epoch,
            cluster_acc,
            acc_honest: mean((0..n).filter(|&i| !st.malicious[i]).map(|i| acc[i])),
            acc_malicious: mean((0..n).filter(|&i| st.malicious[i]).map(|i| acc[i])),
            asr: honest_asr,
            tpr,
            tnr,
            verif_failures: if trace.aborted { n } else { trace.rejections() },
            bytes: total,
            traffic: bytes,
            sim_ms: rounds as f64 * LATENCY_MS + total as f64 / BYTES_PER_MS,
            clusters: labels.clusters,
            noise: labels.noise_count(),
            aborted: trace.aborted,
            wall_ms: round_start.elapsed().as_secs_f64() * 1e3,
        });
        traces.push(trace);
    }
    Ok(RunOutput {
        records,
        traces,
        malicious: st.malicious,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every round; errors on an invalid config before any round.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRecord>> {
    Ok(run_traced(cfg)?.records)
}
