use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::seed;

/// Distance of each class mean from the origin.
pub const MEAN_SCALE: f64 = 4.0;

/// Default within-class standard deviation.
pub const DEFAULT_SPREAD: f64 = 1.0;

/// Labelled samples with `d` features each, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub d: usize,
    pub classes: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(d: usize, classes: usize, features: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if d == 0 || features.len() != d * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: d * labels.len(),
                actual: features.len(),
            });
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        if let Some(l) = labels.iter().find(|l| **l >= classes) {
            return Err(invalid("label", format!("{l} is not below {classes}")));
        }
        Ok(Self {
            d,
            classes,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn y(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Copies the selected samples into a batch.
    pub fn batch(&self, idx: &[usize]) -> Batch {
        Batch {
            x: idx.iter().map(|&i| self.x(i).to_vec()).collect(),
            y: idx.iter().map(|&i| self.y(i)).collect(),
        }
    }

    pub fn all(&self) -> Batch {
        self.batch(&(0..self.len()).collect::<Vec<_>>())
    }

    /// Reads a CSV with a header row `f0,…,f{d-1},label`: `d` numeric
    /// feature columns followed by an integer label column named `label`.
    pub fn from_csv(path: impl AsRef<Path>, classes: usize) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path.as_ref()).map_err(|e| Error::Io(e.to_string()))?;
        let headers = reader.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        if headers.iter().last() != Some("label") || headers.len() < 2 {
            return Err(Error::Config("CSV header must end with a `label` column".into()));
        }
        let d = headers.len() - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            for field in rec.iter().take(d) {
                features.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("row {row}: {e}")))?,
                );
            }
            labels.push(
                rec[d]
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Config(format!("row {row}: {e}")))?,
            );
        }
        Self::new(d, classes, features, labels)
    }
}

/// An owned minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Class mean: `MEAN_SCALE·e_c` when `d ≥ L`, otherwise spaced along the
/// first axis at `c·MEAN_SCALE`.
pub fn class_mean(c: usize, classes: usize, d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d];
    if d >= classes {
        m[c] = MEAN_SCALE;
    } else {
        m[0] = c as f64 * MEAN_SCALE;
    }
    m
}

/// Gaussian blobs, `per_class` samples per class, deterministic per seed.
pub fn gen_synthetic(classes: usize, d: usize, per_class: usize, spread: f64, seed_value: u64) -> Result<Dataset> {
    if classes < 2 {
        return Err(invalid("L", "need at least two classes"));
    }
    if d == 0 || per_class == 0 {
        return Err(invalid("d/per_class", "must be positive"));
    }
    let noise = Normal::new(0.0, spread).map_err(|e| invalid("spread", e.to_string()))?;
    let mut rng = seed::rng(seed_value, &[seed::tag::DATA]);
    let mut features = Vec::with_capacity(classes * per_class * d);
    let mut labels = Vec::with_capacity(classes * per_class);
    for c in 0..classes {
        let mean = class_mean(c, classes, d);
        for _ in 0..per_class {
            features.extend(mean.iter().map(|m| m + noise.sample(&mut rng)));
            labels.push(c);
        }
    }
    Dataset::new(d, classes, features, labels)
}

/// Per-client sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub clients: Vec<Vec<usize>>,
    pub q: f64,
}

impl Partition {
    pub fn group_of(client: usize, classes: usize) -> usize {
        client % classes
    }
}

/// Non-iid split: clients form `L` groups (client `i` in group `i mod L`);
/// a sample of class `c` goes to group `c` with probability `q`, otherwise to
/// one of the other groups uniformly, then to a uniform client within the
/// group.
pub fn partition_noniid(ds: &Dataset, n: usize, q: f64, seed_value: u64) -> Result<Partition> {
    let l = ds.classes;
    if n < l {
        return Err(invalid("n", format!("need n ≥ L = {l}, got {n}")));
    }
    if !(q >= 1.0 / l as f64 - 1e-12 && q <= 1.0) {
        return Err(invalid("q", format!("{q} is outside [1/L, 1]")));
    }
    let members: Vec<Vec<usize>> = (0..l).map(|g| (g..n).step_by(l).collect()).collect();
    let mut rng = seed::rng(seed_value, &[seed::tag::PARTITION]);
    let mut clients = vec![Vec::new(); n];
    for i in 0..ds.len() {
        let c = ds.y(i);
        let group = if rng.random_bool(q) {
            c
        } else {
            let other = rng.random_range(0..l - 1);
            if other >= c {
                other + 1
            } else {
                other
            }
        };
        let client = *members[group].choose(&mut rng).expect("n ≥ L");
        clients[client].push(i);
    }
    Ok(Partition { clients, q })
}
