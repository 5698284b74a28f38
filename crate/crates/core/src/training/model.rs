use super::data::{Batch, Dataset};
use crate::error::{Error, Result};
use crate::updates::{GradientVector, ModelParams};

/// Shape of a softmax-linear classifier: `L × d` weights followed by `L`
/// biases, flattened row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoftmaxShape {
    pub d: usize,
    pub classes: usize,
}

impl SoftmaxShape {
    pub fn new(d: usize, classes: usize) -> Self {
        Self { d, classes }
    }

    pub fn num_params(&self) -> usize {
        self.d * self.classes + self.classes
    }

    pub fn logits(&self, w: &[f64], x: &[f64]) -> Vec<f64> {
        let (d, l) = (self.d, self.classes);
        (0..l)
            .map(|c| {
                let row = &w[c * d..(c + 1) * d];
                row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d * l + c]
            })
            .collect()
    }

    pub fn probabilities(&self, w: &[f64], x: &[f64]) -> Vec<f64> {
        let z = self.logits(w, x);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    }

    /// Arg-max class, lowest index on ties.
    pub fn predict(&self, w: &[f64], x: &[f64]) -> usize {
        let z = self.logits(w, x);
        let mut best = 0;
        for c in 1..z.len() {
            if z[c] > z[best] {
                best = c;
            }
        }
        best
    }

    fn check(&self, model: &ModelParams, batch: &Batch) -> Result<()> {
        if model.dim() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                actual: model.dim(),
            });
        }
        if batch.is_empty() {
            return Err(Error::Empty("batch"));
        }
        if let Some(x) = batch.x.iter().find(|x| x.len() != self.d) {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: x.len(),
            });
        }
        Ok(())
    }
}

/// Mean cross-entropy over the batch.
pub fn loss(shape: &SoftmaxShape, model: &ModelParams, batch: &Batch) -> Result<f64> {
    shape.check(model, batch)?;
    let total: f64 = batch
        .x
        .iter()
        .zip(&batch.y)
        .map(|(x, &y)| {
            let z = shape.logits(&model.weights, x);
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - z[y]
        })
        .sum();
    Ok(total / batch.len() as f64)
}

/// Gradient of [`loss`]: `(p - onehot(y))·[x, 1]` averaged over the batch.
pub fn local_grad(shape: &SoftmaxShape, model: &ModelParams, batch: &Batch) -> Result<GradientVector> {
    shape.check(model, batch)?;
    let (d, l) = (shape.d, shape.classes);
    let mut g = vec![0.0; shape.num_params()];
    for (x, &y) in batch.x.iter().zip(&batch.y) {
        let mut p = shape.probabilities(&model.weights, x);
        p[y] -= 1.0;
        for c in 0..l {
            for k in 0..d {
                g[c * d + k] += p[c] * x[k];
            }
            g[d * l + c] += p[c];
        }
    }
    let n = batch.len() as f64;
    g.iter_mut().for_each(|v| *v /= n);
    GradientVector::new(g)
}

/// Fraction of the test set classified correctly.
pub fn evaluate(shape: &SoftmaxShape, model: &ModelParams, test: &Dataset) -> f64 {
    if test.is_empty() {
        return 0.0;
    }
    let correct = (0..test.len())
        .filter(|&i| shape.predict(&model.weights, test.x(i)) == test.y(i))
        .count();
    correct as f64 / test.len() as f64
}

/// Among triggered samples whose true label differs from `target`, the
/// fraction classified as `target`.
pub fn evaluate_asr(shape: &SoftmaxShape, model: &ModelParams, triggered: &Batch, target: usize) -> f64 {
    let eligible: Vec<usize> = (0..triggered.len()).filter(|&i| triggered.y[i] != target).collect();
    if eligible.is_empty() {
        return 0.0;
    }
    let hits = eligible
        .iter()
        .filter(|&&i| shape.predict(&model.weights, &triggered.x[i]) == target)
        .count();
    hits as f64 / eligible.len() as f64
}

/// Accuracy of the nearest-class-mean rule, the Bayes classifier for the
/// synthetic blobs (equal isotropic covariance and priors).
pub fn nearest_mean_accuracy(test: &Dataset) -> f64 {
    let means: Vec<Vec<f64>> = (0..test.classes)
        .map(|c| super::data::class_mean(c, test.classes, test.d))
        .collect();
    let correct = (0..test.len())
        .filter(|&i| {
            let x = test.x(i);
            let dist = |m: &Vec<f64>| m.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            let best = (0..means.len())
                .min_by(|&a, &b| dist(&means[a]).total_cmp(&dist(&means[b])))
                .expect("classes ≥ 2");
            best == test.y(i)
        })
        .count();
    correct as f64 / test.len() as f64
}
