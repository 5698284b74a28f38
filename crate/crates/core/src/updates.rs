//! Update vectors, sign encoding and the majority-vote model step.
//!
//! Signs live in `{-1, +1}` and are encoded into bits as `+1 -> 1`,
//! `-1 -> 0`. A zero coordinate is treated as `+1`.

use crate::bits::BitVector;
use crate::error::{invalid, Error, Result};

/// Sign of a real value with the `0 -> +1` tie rule.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// A dense real-valued update (gradient) over the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    values: Vec<f64>,
}

impl GradientVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("gradient vector"));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "gradient dimension must be positive");
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Elementwise sign with the `0 -> +1` tie rule.
    pub fn signs(&self) -> Vec<f64> {
        self.values.iter().map(|&v| sign(v)).collect()
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * k).collect())
    }
}

/// Bit-encoded sign update: bit `1` encodes `+1`, bit `0` encodes `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    bits: BitVector,
}

impl SignVector {
    pub fn from_bits(bits: BitVector) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn into_bits(self) -> BitVector {
        self.bits
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    /// Integer form of the decoded signs, `2·bit - 1`.
    pub fn to_i64(&self) -> Vec<i64> {
        self.bits.iter().map(|b| if b { 1 } else { -1 }).collect()
    }
}

/// Model weights plus the step size used by the majority step.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub weights: Vec<f64>,
    pub learning_rate: f64,
}

impl ModelParams {
    pub fn new(weights: Vec<f64>, learning_rate: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("model weights"));
        }
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(invalid("learning_rate", format!("{learning_rate} is not > 0")));
        }
        Ok(Self {
            weights,
            learning_rate,
        })
    }

    pub fn zeros(dim: usize, learning_rate: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], learning_rate)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// `ECD(sign(g))`: bit `i` is set iff `g[i] >= 0`.
pub fn encode_sign(g: &GradientVector) -> Result<SignVector> {
    if let Some(index) = g.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(SignVector {
        bits: BitVector::from_bools(g.values.iter().map(|&v| v >= 0.0)),
    })
}

/// `DCD`: element `i` is `2·bit[i] - 1`.
pub fn decode_sign(s: &SignVector) -> GradientVector {
    GradientVector {
        values: s.bits.iter().map(|b| if b { 1.0 } else { -1.0 }).collect(),
    }
}

/// `w <- w - η·sign(G)` with the `0 -> +1` tie rule.
pub fn apply_majority_step(m: &ModelParams, aggregate: &GradientVector) -> Result<ModelParams> {
    if m.dim() != aggregate.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            actual: aggregate.dim(),
        });
    }
    let weights = m
        .weights
        .iter()
        .zip(aggregate.values())
        .map(|(w, &g)| w - m.learning_rate * sign(g))
        .collect();
    Ok(ModelParams {
        weights,
        learning_rate: m.learning_rate,
    })
}
