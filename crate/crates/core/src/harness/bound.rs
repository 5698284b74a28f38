use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed;

/// Majority-vote error parameters for one cluster of `h + m` members.
///
/// Only `h`, `m`, `p_h` and `p_m` enter the vote-error bound; the remaining
/// fields carry the smoothness and variance terms of the full convergence
/// statement and are checked but not used here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceBoundParams {
    pub h: u64,
    pub m: u64,
    /// Probability an honest member's sign is correct.
    pub p_h: f64,
    /// Probability a malicious member's sign is correct.
    pub p_m: f64,
    #[serde(default)]
    pub smoothness_l1: Option<f64>,
    #[serde(default)]
    pub sigma_l1: Option<f64>,
    #[serde(default)]
    pub f0: Option<f64>,
    #[serde(default)]
    pub f_star: Option<f64>,
    #[serde(default)]
    pub iterations: Option<u64>,
}

impl ConvergenceBoundParams {
    pub fn new(h: u64, m: u64, p_h: f64, p_m: f64) -> Self {
        Self {
            h,
            m,
            p_h,
            p_m,
            smoothness_l1: None,
            sigma_l1: None,
            f0: None,
            f_star: None,
            iterations: None,
        }
    }

    /// Cluster size `M = h + m`.
    pub fn total(&self) -> u64 {
        self.h + self.m
    }

    fn expected_margin(&self) -> f64 {
        self.h as f64 * self.p_h + self.m as f64 * self.p_m - self.total() as f64 / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.total() == 0 {
            return Err(invalid("h + m", "cluster is empty"));
        }
        for (name, p) in [("p_h", self.p_h), ("p_m", self.p_m)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(invalid(name, format!("{p} is outside (0, 1)")));
            }
        }
        if let (Some(f0), Some(fs)) = (self.f0, self.f_star) {
            if f0 < fs {
                return Err(invalid("f0", "below f*"));
            }
        }
        Ok(())
    }
}

/// Cantelli's inequality on `Z = Bin(h, p_h) + Bin(m, p_m)`:
/// `P[Z ≤ M/2] ≤ √(h·p_h·q_h + m·p_m·q_m) / (2·(E[Z] − M/2))`.
pub fn cantelli_bound(p: &ConvergenceBoundParams) -> Result<f64> {
    p.validate()?;
    let margin = p.expected_margin();
    if margin <= 0.0 {
        return Err(Error::BoundUndefined(format!(
            "expected correct votes do not exceed M/2 (margin {margin})"
        )));
    }
    let var = p.h as f64 * p.p_h * (1.0 - p.p_h) + p.m as f64 * p.p_m * (1.0 - p.p_m);
    Ok(var.sqrt() / (2.0 * margin))
}

/// Monte Carlo frequency of `Z ≤ M/2` over `trials` draws.
pub fn empirical_vote_error(p: &ConvergenceBoundParams, trials: u64, seed_value: u64) -> Result<f64> {
    p.validate()?;
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let honest = Binomial::new(p.h, p.p_h).map_err(|e| invalid("p_h", e.to_string()))?;
    let malicious = Binomial::new(p.m, p.p_m).map_err(|e| invalid("p_m", e.to_string()))?;
    let mut rng = seed::rng(seed_value, &[seed::tag::ADVERSARY, p.h, p.m]);
    let half = p.total() as f64 / 2.0;
    let errors = (0..trials)
        .filter(|_| (honest.sample(&mut rng) + malicious.sample(&mut rng)) as f64 <= half)
        .count();
    Ok(errors as f64 / trials as f64)
}
