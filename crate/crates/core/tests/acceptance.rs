//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//!
//! Reference values are recomputed here from first principles rather than
//! through the library's own plaintext helpers.

use std::process::ExitCode;
use std::time::Instant;

use fedseg::aggregation::{krum_index, median, model_segmentation, trim_mean};
use fedseg::attacks::{AttackKind, AttackSpec};
use fedseg::bits::BitVector;
use fedseg::clustering::{
    cosine_from_xor, dbscan_labels, euclid_rows, indicator_matrix, ClusterAssignment, IndMatrix,
};
use fedseg::dp::{derive_sigma, inject_noise, ks_denoise, DpParams};
use fedseg::harness::{
    cantelli_bound, clustering_rates, empirical_vote_error, run_experiment, run_traced,
    write_outputs, Aggregator, ConvergenceBoundParams, ExperimentConfig, ServerBehavior,
};
use fedseg::hhf::{hhf_hash, verify_aggregate, HhfKey};
use fedseg::mpc::{share_binary, Mpc};
use fedseg::updates::{encode_sign, GradientVector, SignVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

// ---- reference clustering -------------------------------------------------

struct Reference {
    cos: Vec<Vec<f64>>,
    euc: Vec<Vec<f64>>,
    ind: Vec<Vec<bool>>,
    labels: Vec<Option<usize>>,
}

fn cubic_sqrt(x: f64) -> f64 {
    let u = x - 1.0;
    1.0 + u / 2.0 - u * u / 8.0 + u * u * u / 16.0
}

/// Cores have at least `m_pts` neighbours counting themselves; clusters are
/// grown breadth-first from cores in index order; border points take the
/// smallest adjacent cluster id.
fn reference_dbscan(ind: &[Vec<bool>], m_pts: usize) -> Vec<Option<usize>> {
    let n = ind.len();
    let core: Vec<bool> = (0..n).map(|i| ind[i].iter().filter(|b| **b).count() >= m_pts).collect();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for start in 0..n {
        if !core[start] || label[start].is_some() {
            continue;
        }
        let mut queue = vec![start];
        label[start] = Some(next);
        while let Some(p) = queue.pop() {
            for q in 0..n {
                if core[q] && ind[p][q] && label[q].is_none() {
                    label[q] = Some(next);
                    queue.push(q);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if !core[i] {
            label[i] = (0..n).filter(|&j| core[j] && ind[i][j]).filter_map(|j| label[j]).min();
        }
    }
    label
}

fn reference(signs: &[Vec<i64>], alpha: f64, m_pts: usize) -> Reference {
    let n = signs.len();
    let np = signs[0].len() as f64;
    let cos: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| signs[i].iter().zip(&signs[j]).map(|(a, b)| a * b).sum::<i64>() as f64 / np).collect())
        .collect();
    let euc: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| cubic_sqrt((0..n).map(|k| (cos[i][k] - cos[j][k]).powi(2)).sum()))
                .collect()
        })
        .collect();
    let ind: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || euc[i][j] <= alpha).collect()).collect();
    let labels = reference_dbscan(&ind, m_pts);
    Reference { cos, euc, ind, labels }
}

fn to_sign(v: &[i64]) -> SignVector {
    SignVector::from_bits(BitVector::from_bools(v.iter().map(|x| *x > 0)))
}

/// Clients drawn around a few random centres with per-group flip rates, so
/// distances land on both sides of α.
fn grouped_signs(rng: &mut ChaCha8Rng, n: usize, np: usize) -> Vec<Vec<i64>> {
    let groups = rng.random_range(1..=4);
    let centres: Vec<Vec<i64>> = (0..groups)
        .map(|_| (0..np).map(|_| if rng.random() { 1 } else { -1 }).collect())
        .collect();
    let flips: Vec<f64> = (0..groups).map(|_| rng.random_range(0.0..0.5)).collect();
    (0..n)
        .map(|_| {
            let g = rng.random_range(0..groups);
            centres[g]
                .iter()
                .map(|&c| if rng.random_bool(flips[g]) { -c } else { c })
                .collect()
        })
        .collect()
}

fn secure_pipeline(
    signs: &[Vec<i64>],
    servers: usize,
    alpha: f64,
    m_pts: usize,
    seed: u64,
) -> fedseg::Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, IndMatrix, ClusterAssignment)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shares = signs
        .iter()
        .map(|s| share_binary(&to_sign(s), servers, &mut rng))
        .collect::<fedseg::Result<Vec<_>>>()?;
    let mut mpc = Mpc::new(servers, seed ^ 0x5eed)?;
    let cos = cosine_from_xor(&shares, &mut mpc)?;
    let euc = euclid_rows(&cos, &mut mpc)?;
    let ind = indicator_matrix(&euc, alpha, &mut mpc)?;
    let labels = dbscan_labels(&ind, m_pts);
    let n = signs.len();
    let c = cos.reveal();
    let e = euc.reveal();
    let cos_m = (0..n).map(|i| (0..n).map(|j| c.get(i, j)).collect()).collect();
    let euc_m = (0..n).map(|i| (0..n).map(|j| e.get(i, j)).collect()).collect();
    Ok((cos_m, euc_m, ind, labels))
}

// ---- criteria ---------------------------------------------------------------

fn mpc_equivalence() -> fedseg::Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut mismatches, mut banded, mut label_checks) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    for inst in 0..100u64 {
        let n: usize = rng.random_range(2..=16);
        let np = rng.random_range(8..=512);
        let servers = rng.random_range(3..=5);
        let alpha = rng.random_range(0.3..1.6);
        let m_pts = rng.random_range(1..=n.div_ceil(2));
        let tau = 4.0 * servers as f64 * 2f64.powi(-20);
        let signs = grouped_signs(&mut rng, n, np);
        let r = reference(&signs, alpha, m_pts);
        let (cos, euc, ind, labels) = secure_pipeline(&signs, servers, alpha, m_pts, 1000 + inst)?;
        let mut in_band = false;
        for i in 0..n {
            for j in 0..n {
                let dc = (cos[i][j] - r.cos[i][j]).abs();
                let de = if i == j { 0.0 } else { (euc[i][j] - r.euc[i][j]).abs() };
                worst = worst.max(dc).max(de);
                if dc > tau || de > tau {
                    mismatches += 1;
                }
                if i != j && (r.euc[i][j] - alpha).abs() <= tau {
                    in_band = true;
                    continue;
                }
                if ind.get(i, j) != r.ind[i][j] {
                    mismatches += 1;
                }
            }
        }
        if in_band {
            banded += 1;
        } else {
            label_checks += 1;
            if labels.labels != r.labels {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        mismatches == 0 && secs < 60.0,
        format!(
            "100 instances, {mismatches} mismatches, max |Δ| {worst:.2e}, labels compared on {label_checks} ({banded} had a pair inside τ), {secs:.1} s"
        ),
    ))
}

fn ga_separation() -> fedseg::Result<Outcome> {
    let (n, np, bad) = (20, 4096, 12);
    let mut perfect = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
        let base: Vec<i64> = (0..np).map(|_| if rng.random() { 1 } else { -1 }).collect();
        let mut malicious = vec![false; n];
        for i in rand::seq::index::sample(&mut rng, n, bad) {
            malicious[i] = true;
        }
        let signs: Vec<Vec<i64>> = malicious
            .iter()
            .map(|&m| {
                if m {
                    (0..np).map(|_| if rng.random() { 1 } else { -1 }).collect()
                } else {
                    base.iter().map(|&b| if rng.random_bool(0.15) { -b } else { b }).collect()
                }
            })
            .collect();
        let (_, _, _, labels) = secure_pipeline(&signs, 3, 1.2, 6, 300 + seed)?;
        let (_, tnr) = clustering_rates(&labels, &malicious);
        if tnr == 1.0 {
            perfect += 1;
        }
    }
    Ok((perfect >= 99, format!("TNR = 1.0 in {perfect}/100 rounds (np = 4096, 12 of 20 GA, α = 1.2)")))
}

fn final_record(cfg: &ExperimentConfig) -> fedseg::Result<fedseg::harness::MetricsRecord> {
    Ok(run_experiment(cfg)?.pop().expect("epochs > 0"))
}

fn robustness_trend() -> fedseg::Result<Outcome> {
    let base = ExperimentConfig::default();
    let clean = final_record(&base)?;
    let attacked = |kind| ExperimentConfig {
        xi: 0.6,
        attack: AttackSpec::new(kind),
        ..base.clone()
    };
    let ga = final_record(&attacked(AttackKind::Ga))?;
    let lfa = final_record(&attacked(AttackKind::Lfa))?;
    let l = 1.0 / base.classes as f64;
    let ok = (ga.acc_honest - clean.acc_honest).abs() <= 0.02
        && (lfa.acc_honest - clean.acc_honest).abs() <= 0.02
        && (ga.acc_malicious - l).abs() <= 0.05
        && lfa.acc_malicious < 0.05;
    Ok((
        ok,
        format!(
            "honest acc baseline {:.4}, GA {:.4}, LFA {:.4}; malicious acc GA {:.4} (1/L = {l}), LFA {:.4}",
            clean.acc_honest, ga.acc_honest, lfa.acc_honest, ga.acc_malicious, lfa.acc_malicious
        ),
    ))
}

fn backdoor_suppression() -> fedseg::Result<Outcome> {
    let cfg = ExperimentConfig {
        xi: 0.6,
        attack: AttackSpec::new(AttackKind::Ba),
        ..Default::default()
    };
    let defended = final_record(&cfg)?;
    let control = final_record(&ExperimentConfig {
        aggregator: Aggregator::Fedavg,
        ..cfg.clone()
    })?;
    Ok((
        defended.asr <= 0.05 && control.asr >= 0.5,
        format!("ASR with segmentation {:.4}, undefended FedAvg {:.4}", defended.asr, control.asr),
    ))
}

fn hhf_soundness() -> fedseg::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let np = 64;
    let key = HhfKey::generate(np, 501);
    let mut false_rejections = 0;
    let mut detected = 0;
    let trials = 1000;
    for t in 0..trials {
        let k = rng.random_range(1..=8);
        let members: Vec<Vec<i64>> = (0..k).map(|_| (0..np).map(|_| if rng.random() { 1 } else { -1 }).collect()).collect();
        let digests = members.iter().map(|m| hhf_hash(&key, m)).collect::<fedseg::Result<Vec<_>>>()?;
        let shares = members
            .iter()
            .map(|m| share_binary(&to_sign(m), 3, &mut rng))
            .collect::<fedseg::Result<Vec<_>>>()?;
        let labels = ClusterAssignment {
            labels: vec![Some(0); k],
            clusters: 1,
            m_pts: 1,
        };
        let mut mpc = Mpc::new(3, 600 + t)?;
        let mut seg = model_segmentation(&shares, &labels, &mut mpc)?;
        if !verify_aggregate(&key, &digests, &seg.reveal()[0])? {
            false_rejections += 1;
        }
        let coord = rng.random_range(0..np);
        let delta = rng.random_range(1..u64::MAX);
        let e = &mut seg.aggregates[0].share_mut(rng.random_range(0..3)).elems[coord];
        *e = e.wrapping_add(delta);
        if !verify_aggregate(&key, &digests, &seg.reveal()[0])? {
            detected += 1;
        }
    }
    // the same fault injected by a server inside full runs
    let mut run_rounds = 0;
    let mut run_detected = 0;
    for seed in 0..3 {
        let out = run_traced(&ExperimentConfig {
            epochs: 10,
            seed,
            servers: 5,
            malicious_server_count: 2,
            malicious_server_behavior: ServerBehavior::CorruptAgg,
            ..Default::default()
        })?;
        for t in &out.traces {
            for (r, ok) in t.received.iter().zip(&t.accepted) {
                if r.is_some() {
                    run_rounds += 1;
                    if !ok {
                        run_detected += 1;
                    }
                }
            }
        }
    }
    Ok((
        false_rejections == 0 && detected == trials && run_detected == run_rounds && run_rounds > 0,
        format!(
            "{false_rejections} false rejections / {trials}, {detected}/{trials} tampered aggregates caught, {run_detected}/{run_rounds} deliveries refused under CORRUPT_AGG"
        ),
    ))
}

fn bound_check() -> fedseg::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut violations = 0;
    let mut sets = 0;
    while sets < 50 {
        let h = rng.random_range(1..=60u64);
        let m = rng.random_range(0..=40u64);
        let p_h = rng.random_range(0.5..0.99);
        let p_m = rng.random_range(0.01..0.99);
        let total = (h + m) as f64;
        if h as f64 * p_h + m as f64 * p_m <= total / 2.0 {
            continue;
        }
        sets += 1;
        let p = ConvergenceBoundParams::new(h, m, p_h, p_m);
        if empirical_vote_error(&p, 100_000, sets)? > cantelli_bound(&p)? {
            violations += 1;
        }
    }
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let h = rng.random_range(1..=200u64);
        let p: f64 = rng.random_range(0.51..0.99);
        let honest_only = (p * (1.0 - p)).sqrt() / ((h as f64).sqrt() * (2.0 * p - 1.0));
        worst = worst.max((cantelli_bound(&ConvergenceBoundParams::new(h, 0, p, 0.5))? - honest_only).abs());
    }
    Ok((
        violations == 0 && worst <= 1e-12,
        format!("{violations} violations over 50 sets × 10^5 trials; h = M reduction off by at most {worst:.1e}"),
    ))
}

fn dp_mechanism() -> fedseg::Result<Outcome> {
    let sigma = derive_sigma(1e-5)?;
    let p = DpParams::new(5.0, 1e-5, 0.3)?;
    let zero = GradientVector::zeros(100_000);
    let noise = inject_noise(&zero, &p, 700);
    let n = noise.dim() as f64;
    let mean = noise.values().iter().sum::<f64>() / n;
    let std = (noise.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let rel = (std / (0.3 * sigma) - 1.0).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    let mut broken = 0;
    for t in 0..10_000u64 {
        let dim = rng.random_range(1..64);
        let g = GradientVector::new((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())?;
        let noised = inject_noise(&g, &p, t);
        if encode_sign(&ks_denoise(&noised, &p))? != encode_sign(&noised)? {
            broken += 1;
        }
    }
    Ok((
        (sigma - 4.8445).abs() <= 1e-3 && rel <= 0.02 && broken == 0,
        format!("σ(1e-5) = {sigma:.4}, noise std off by {:.2}%, {broken} sign changes over 10^4 vectors", rel * 100.0),
    ))
}

fn brute_median(col: &[f64]) -> f64 {
    // the value(s) with as many entries on each side
    let n = col.len();
    let rank = |r: usize| {
        *col.iter()
            .find(|&&v| {
                let below = col.iter().filter(|&&w| w < v).count();
                let equal = col.iter().filter(|&&w| w == v).count();
                below <= r && r < below + equal
            })
            .expect("some value has rank r")
    };
    if n % 2 == 1 {
        rank(n / 2)
    } else {
        (rank(n / 2 - 1) + rank(n / 2)) / 2.0
    }
}

fn brute_trim(col: &[f64], z: usize) -> f64 {
    let mut left: Vec<f64> = col.to_vec();
    for _ in 0..z {
        let (i, _) = left.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
        left.remove(i);
        let (i, _) = left.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        left.remove(i);
    }
    left.iter().sum::<f64>() / left.len() as f64
}

fn brute_krum(u: &[Vec<f64>], m: usize) -> usize {
    let n = u.len();
    let k = n - m - 2;
    let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let score = |i: usize| {
        // minimum over every k-subset of the other updates
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << others.len()) {
            if mask.count_ones() as usize == k {
                let s: f64 = (0..others.len()).filter(|b| mask >> b & 1 == 1).map(|b| d(&u[i], &u[others[b]])).sum();
                best = best.min(s);
            }
        }
        best
    };
    let scores: Vec<f64> = (0..n).map(score).collect();
    (0..n).fold(0, |b, i| if scores[i] < scores[b] { i } else { b })
}

fn baseline_aggregators() -> fedseg::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(3..=9);
        let np = rng.random_range(1..=32);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..np).map(|_| rng.random_range(-20..=20) as f64).collect())
            .collect();
        let updates = rows.iter().map(|r| GradientVector::new(r.clone())).collect::<fedseg::Result<Vec<_>>>()?;
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
        let med = median(&updates)?;
        let z = rng.random_range(0..=(n - 1) / 2);
        let tm = trim_mean(&updates, z)?;
        for k in 0..np {
            if med.values()[k] != brute_median(&col(k)) || tm.values()[k] != brute_trim(&col(k), z) {
                mismatches += 1;
            }
        }
        let m = rng.random_range(0..=(n - 3) / 2);
        if krum_index(&updates, m)? != brute_krum(&rows, m) {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, format!("{mismatches} mismatches over 10^3 instances (median, trimmed mean, Krum)")))
}

fn determinism() -> fedseg::Result<Outcome> {
    let configs = [
        ExperimentConfig {
            epochs: 8,
            ..Default::default()
        },
        ExperimentConfig {
            epochs: 8,
            xi: 0.6,
            attack: AttackSpec::new(AttackKind::Ga),
            seed: 9,
            ..Default::default()
        },
        ExperimentConfig {
            epochs: 8,
            xi: 0.3,
            attack: AttackSpec::new(AttackKind::Krum),
            servers: 5,
            malicious_server_count: 2,
            malicious_server_behavior: ServerBehavior::CorruptIndm,
            ..Default::default()
        },
        ExperimentConfig {
            epochs: 8,
            xi: 0.6,
            attack: AttackSpec::new(AttackKind::Ba),
            aggregator: Aggregator::Fedavg,
            ..Default::default()
        },
    ];
    let dir = tempfile::tempdir().map_err(|e| fedseg::Error::Io(e.to_string()))?;
    let mut identical = 0;
    for (k, cfg) in configs.iter().enumerate() {
        let mut files = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{k}-{rep}"));
            write_outputs(&out, cfg, &run_traced(cfg)?)?;
            files.push(std::fs::read(out.join("metrics.csv"))?);
        }
        if files[0] == files[1] && !files[0].is_empty() {
            identical += 1;
        }
    }
    Ok((identical == configs.len(), format!("{identical}/{} configs gave byte-identical metrics.csv", configs.len())))
}

fn traffic() -> fedseg::Result<Outcome> {
    let cfg = ExperimentConfig {
        epochs: 1,
        ..Default::default()
    };
    let rec = &run_experiment(&cfg)?[0];
    let np = cfg.num_params();
    let arithmetic = (cfg.n * cfg.servers * np * 8) as u64;
    let binary = rec.traffic.upload;
    let expected = (cfg.n * cfg.servers * np.div_ceil(8)) as u64;
    Ok((
        binary == expected && 8 * binary <= arithmetic,
        format!(
            "binary-share upload {binary} B vs arithmetic {arithmetic} B (ratio {:.4}); whole epoch {} B",
            binary as f64 / arithmetic as f64,
            rec.bytes
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> fedseg::Result<Outcome>); 10] = [
        ("MPC/plaintext equivalence", mpc_equivalence),
        ("GA separation at np = 4096", ga_separation),
        ("robustness trend", robustness_trend),
        ("backdoor suppression", backdoor_suppression),
        ("HHF soundness and completeness", hhf_soundness),
        ("vote-error bound", bound_check),
        ("DP mechanism", dp_mechanism),
        ("baseline aggregators", baseline_aggregators),
        ("determinism", determinism),
        ("traffic accounting", traffic),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {}: {name}: {detail}", k + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
