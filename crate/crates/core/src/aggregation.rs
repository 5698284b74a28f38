//! Per-cluster aggregation over shares, and plaintext baselines.

use crate::clustering::ClusterAssignment;
use crate::error::{invalid, Error, Result};
use crate::mpc::{ArithShared, BoolShared, Mpc};
use crate::updates::GradientVector;

/// Shared per-cluster sums of decoded sign vectors.
#[derive(Debug, Clone)]
pub struct SegmentedAggregate {
    /// `aggregates[z]` holds integer shares of `Σ_{i ∈ z} (2ḡ_i - 1)`.
    pub aggregates: Vec<ArithShared>,
    /// `routing[z]` lists the clients labelled `z`.
    pub routing: Vec<Vec<usize>>,
}

impl SegmentedAggregate {
    /// Cluster whose aggregate goes back to `client`, if any.
    pub fn cluster_of(&self, client: usize) -> Option<usize> {
        self.routing.iter().position(|r| r.contains(&client))
    }

    /// Reconstructed integer sums per cluster.
    pub fn reveal(&self) -> Vec<Vec<i64>> {
        self.aggregates
            .iter()
            .map(|a| a.reveal_raw().into_iter().map(|v| v as i64).collect())
            .collect()
    }
}

/// Lifts each client's sign bits to the ring, decodes `b ↦ 2b - 1`, and sums
/// within each cluster. Noise clients contribute nothing and receive
/// nothing; empty clusters are skipped.
pub fn model_segmentation(
    clients: &[BoolShared],
    labels: &ClusterAssignment,
    mpc: &mut Mpc,
) -> Result<SegmentedAggregate> {
    if clients.len() != labels.labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.labels.len(),
            actual: clients.len(),
        });
    }
    let mut aggregates = Vec::new();
    let mut routing = Vec::new();
    for z in 0..labels.clusters {
        let members = labels.members(z);
        if members.is_empty() {
            continue;
        }
        let parts: Vec<BoolShared> = members.iter().map(|&i| clients[i].clone()).collect();
        let np = parts[0].len();
        if let Some(p) = parts.iter().find(|p| p.len() != np) {
            return Err(Error::DimensionMismatch {
                expected: np,
                actual: p.len(),
            });
        }
        let lifted = mpc.b2a(&BoolShared::concat(&parts), 0)?;
        // Σ (2b - 1) = 2·Σb - |z|
        let mut sum = ArithShared::public(&vec![0; np], 0, mpc.servers());
        for m in 0..members.len() {
            let idx: Vec<usize> = (m * np..(m + 1) * np).collect();
            sum = sum.add(&lifted.select(&idx))?;
        }
        let decoded = sum.scale(2).add_public_scalar((members.len() as u64).wrapping_neg());
        aggregates.push(decoded);
        routing.push(members);
    }
    Ok(SegmentedAggregate {
        aggregates,
        routing,
    })
}

fn check_updates(updates: &[GradientVector]) -> Result<usize> {
    let first = updates.first().ok_or(Error::Empty("updates"))?;
    let dim = first.dim();
    if let Some(u) = updates.iter().find(|u| u.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: u.dim(),
        });
    }
    Ok(dim)
}

fn coordinatewise(updates: &[GradientVector], f: impl Fn(&mut [f64]) -> f64) -> Result<GradientVector> {
    let dim = check_updates(updates)?;
    let mut column = vec![0.0; updates.len()];
    let values = (0..dim)
        .map(|k| {
            for (c, u) in column.iter_mut().zip(updates) {
                *c = u.values()[k];
            }
            f(&mut column)
        })
        .collect();
    GradientVector::new(values)
}

/// `Σ w_i·u_i`, with weights normalised to sum to one.
pub fn fedavg(updates: &[GradientVector], weights: &[f64]) -> Result<GradientVector> {
    check_updates(updates)?;
    if weights.len() != updates.len() {
        return Err(Error::DimensionMismatch {
            expected: updates.len(),
            actual: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(*w >= 0.0)) || !(total > 0.0) {
        return Err(invalid("weights", "must be non-negative with a positive sum"));
    }
    let norm: Vec<f64> = weights.iter().map(|w| w / total).collect();
    coordinatewise(updates, |col| col.iter().zip(&norm).map(|(v, w)| v * w).sum())
}

/// Coordinatewise median; the mean of the two middle values for even `n`.
pub fn median(updates: &[GradientVector]) -> Result<GradientVector> {
    coordinatewise(updates, |col| {
        col.sort_by(f64::total_cmp);
        let n = col.len();
        if n % 2 == 1 {
            col[n / 2]
        } else {
            (col[n / 2 - 1] + col[n / 2]) / 2.0
        }
    })
}

/// Coordinatewise mean after dropping the `z` largest and `z` smallest
/// values.
pub fn trim_mean(updates: &[GradientVector], z: usize) -> Result<GradientVector> {
    if updates.len() <= 2 * z {
        return Err(invalid("z", format!("need n > 2z, got n = {}, z = {z}", updates.len())));
    }
    coordinatewise(updates, |col| {
        col.sort_by(f64::total_cmp);
        let kept = &col[z..col.len() - z];
        kept.iter().sum::<f64>() / kept.len() as f64
    })
}

fn squared_distance(a: &GradientVector, b: &GradientVector) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Index chosen by Krum: the update with the smallest sum of squared
/// distances to its `n - m - 2` nearest neighbours (lowest index on ties).
pub fn krum_index(updates: &[GradientVector], m: usize) -> Result<usize> {
    check_updates(updates)?;
    let n = updates.len();
    if n < 2 * m + 3 {
        return Err(invalid("m", format!("need n ≥ 2m + 3, got n = {n}, m = {m}")));
    }
    let k = n - m - 2;
    let mut best = (f64::INFINITY, 0);
    for i in 0..n {
        let mut d: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| squared_distance(&updates[i], &updates[j]))
            .collect();
        d.sort_by(f64::total_cmp);
        let score: f64 = d[..k].iter().sum();
        if score < best.0 {
            best = (score, i);
        }
    }
    Ok(best.1)
}

/// The update selected by [`krum_index`].
pub fn krum(updates: &[GradientVector], m: usize) -> Result<GradientVector> {
    Ok(updates[krum_index(updates, m)?].clone())
}
