//! Byzantine client behaviours.
//!
//! Every function here sees only the attacking coalition's own data and
//! updates; none takes honest clients' state.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::aggregation::krum_index;
use crate::error::{invalid, Error, Result};
use crate::training::{local_grad, Batch, SoftmaxShape};
use crate::updates::{sign, GradientVector, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AttackKind {
    None,
    /// Gaussian noise in place of a gradient.
    Ga,
    /// Label flipping `c → L-1-c`.
    Lfa,
    /// Directed deviation tuned against Krum.
    Krum,
    /// Directed deviation placed beyond the coalition's extremes.
    Trim,
    /// Gradient ascent on the local loss.
    Aa,
    /// Backdoor: trigger patch plus target label.
    Ba,
    /// Edge-case attack; needs an external dataset and is rejected.
    Ea,
}

/// Fixed-value patch on a set of feature indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trigger {
    pub indices: Vec<usize>,
    pub fill: f64,
}

impl Trigger {
    /// The last `min(4, d)` features set to `+3`.
    pub fn default_for(d: usize) -> Self {
        Self {
            indices: (d.saturating_sub(4)..d).collect(),
            fill: 3.0,
        }
    }
}

fn default_pdr() -> f64 {
    1.0
}

fn default_aa_steps() -> usize {
    5
}

fn default_aa_lr() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Fraction of a poisoning client's samples that are poisoned.
    #[serde(default = "default_pdr")]
    pub pdr: f64,
    /// Backdoor trigger; defaults to [`Trigger::default_for`].
    #[serde(default)]
    pub trigger: Option<Trigger>,
    #[serde(default)]
    pub target_label: usize,
    #[serde(default = "default_aa_steps")]
    pub aa_steps: usize,
    #[serde(default = "default_aa_lr")]
    pub aa_lr: f64,
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self::new(AttackKind::None)
    }
}

impl AttackSpec {
    pub fn new(kind: AttackKind) -> Self {
        Self {
            kind,
            pdr: default_pdr(),
            trigger: None,
            target_label: 0,
            aa_steps: default_aa_steps(),
            aa_lr: default_aa_lr(),
        }
    }

    pub fn trigger_for(&self, d: usize) -> Trigger {
        self.trigger.clone().unwrap_or_else(|| Trigger::default_for(d))
    }

    pub fn validate(&self, d: usize, classes: usize) -> Result<()> {
        if self.kind == AttackKind::Ea {
            return Err(Error::UnsupportedAttack(
                "EA needs an external edge-case dataset".into(),
            ));
        }
        if !(self.pdr > 0.0 && self.pdr <= 1.0) {
            return Err(invalid("pdr", format!("{} is outside (0, 1]", self.pdr)));
        }
        if self.target_label >= classes {
            return Err(invalid("target_label", format!("{} is not below {classes}", self.target_label)));
        }
        if self.kind == AttackKind::Ba {
            let t = self.trigger_for(d);
            if t.indices.is_empty() {
                return Err(invalid("trigger", "no feature indices"));
            }
            if let Some(i) = t.indices.iter().find(|i| **i >= d) {
                return Err(invalid("trigger", format!("index {i} is not below {d}")));
            }
        }
        if self.kind == AttackKind::Aa && !(self.aa_lr > 0.0) {
            return Err(invalid("aa_lr", "must be positive"));
        }
        Ok(())
    }
}

/// I.i.d. standard normal vector.
pub fn ga_update<R: Rng + ?Sized>(rng: &mut R, np: usize) -> GradientVector {
    let v = (0..np).map(|_| StandardNormal.sample(rng)).collect();
    GradientVector::new(v).expect("normal samples are finite")
}

/// `c → L - 1 - c`.
pub fn lfa_relabel(c: usize, classes: usize) -> Result<usize> {
    if c >= classes {
        return Err(invalid("label", format!("{c} is not below {classes}")));
    }
    Ok(classes - 1 - c)
}

fn coalition_mean(coalition: &[GradientVector]) -> Result<Vec<f64>> {
    let first = coalition.first().ok_or(Error::Empty("coalition"))?;
    let dim = first.dim();
    let mut mean = vec![0.0; dim];
    for g in coalition {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: g.dim(),
            });
        }
        for (m, v) in mean.iter_mut().zip(g.values()) {
            *m += v / coalition.len() as f64;
        }
    }
    Ok(mean)
}

/// Largest deviation scale tried by the Krum attack.
pub const KRUM_LAMBDA_MAX: f64 = 1024.0;

/// `-λ·sign(mean)` over the coalition's benign gradients.
///
/// `λ` doubles from 1 while Krum, run over the coalition's benign gradients
/// plus one crafted copy per member, still selects a crafted update; the
/// last such `λ` is used.
pub fn krum_attack(coalition: &[GradientVector]) -> Result<GradientVector> {
    let direction: Vec<f64> = coalition_mean(coalition)?.into_iter().map(|m| -sign(m)).collect();
    let c = coalition.len();
    let craft = |lambda: f64| GradientVector::new(direction.iter().map(|d| d * lambda).collect());
    let mut chosen = 1.0;
    let mut lambda = 1.0;
    while lambda <= KRUM_LAMBDA_MAX {
        let crafted = craft(lambda)?;
        let mut pool: Vec<GradientVector> = coalition.to_vec();
        pool.extend(std::iter::repeat_n(crafted, c));
        let m = (pool.len().saturating_sub(3)) / 2;
        if krum_index(&pool, m)? < c {
            break;
        }
        chosen = lambda;
        lambda *= 2.0;
    }
    craft(chosen)
}

/// Per coordinate, a value on the opposite side of the coalition mean and
/// beyond the coalition's largest magnitude:
/// `-s_j·(max(|min_j|, |max_j|) + λ·(max_j - min_j + ε))` with `λ = 1`.
pub fn trim_attack(coalition: &[GradientVector]) -> Result<GradientVector> {
    const EPS: f64 = 1e-3;
    let mean = coalition_mean(coalition)?;
    let values = (0..mean.len())
        .map(|j| {
            let col = coalition.iter().map(|g| g.values()[j]);
            let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            -sign(mean[j]) * (lo.abs().max(hi.abs()) + (hi - lo + EPS))
        })
        .collect();
    GradientVector::new(values)
}

/// Runs `steps` of gradient ascent on the local loss and submits the
/// negated mean ascent step, so the server's descent climbs the loss.
/// `steps = 0` submits the benign gradient.
pub fn adaptive_attack(
    shape: &SoftmaxShape,
    model: &ModelParams,
    batch: &Batch,
    steps: usize,
    lr: f64,
) -> Result<GradientVector> {
    if steps == 0 {
        return local_grad(shape, model, batch);
    }
    let mut w = model.clone();
    for _ in 0..steps {
        let g = local_grad(shape, &w, batch)?;
        for (wi, gi) in w.weights.iter_mut().zip(g.values()) {
            *wi += lr * gi;
        }
    }
    let scale = lr * steps as f64;
    GradientVector::new(
        w.weights
            .iter()
            .zip(&model.weights)
            .map(|(a, b)| -(a - b) / scale)
            .collect(),
    )
}

/// Stamps the trigger onto one sample and relabels it.
pub fn ba_poison(x: &[f64], spec: &AttackSpec) -> Result<(Vec<f64>, usize)> {
    let t = spec.trigger_for(x.len());
    let mut out = x.to_vec();
    for &i in &t.indices {
        if i >= out.len() {
            return Err(invalid("trigger", format!("index {i} is not below {}", out.len())));
        }
        out[i] = t.fill;
    }
    Ok((out, spec.target_label))
}

/// Applies a data-poisoning attack (LFA or BA) to each sample with
/// probability `pdr`; other kinds leave the batch unchanged.
pub fn poison_batch<R: Rng + ?Sized>(batch: &Batch, spec: &AttackSpec, classes: usize, rng: &mut R) -> Result<Batch> {
    let mut out = batch.clone();
    for i in 0..out.len() {
        if spec.pdr < 1.0 && !rng.random_bool(spec.pdr) {
            continue;
        }
        match spec.kind {
            AttackKind::Lfa => out.y[i] = lfa_relabel(out.y[i], classes)?,
            AttackKind::Ba => (out.x[i], out.y[i]) = ba_poison(&out.x[i], spec)?,
            _ => {}
        }
    }
    Ok(out)
}

/// The test set with the trigger stamped on every sample and true labels
/// kept, for ASR measurement.
pub fn triggered_set(test: &Batch, spec: &AttackSpec) -> Result<Batch> {
    let mut out = test.clone();
    for x in &mut out.x {
        *x = ba_poison(x, spec)?.0;
    }
    Ok(out)
}
