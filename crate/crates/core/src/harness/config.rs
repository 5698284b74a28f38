use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackKind, AttackSpec};
use crate::clustering::{default_m_pts, MAX_CLIENTS, MAX_DIM};
use crate::dp::DpParams;
use crate::error::{invalid, Error, Result};
use crate::mpc::MIN_SERVERS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ServerBehavior {
    None,
    /// Adds an offset to the corrupt servers' aggregate shares.
    CorruptAgg,
    /// Corrupt servers broadcast an indicator matrix with every
    /// off-diagonal bit flipped.
    CorruptIndm,
    /// Corrupt servers add 7 to their comparison-output shares.
    CorruptCompare,
}

/// How the servers combine client updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    /// Secure clustering plus per-cluster aggregation.
    Segmentation,
    /// Undefended baselines over the decoded ±1 vectors, one global model.
    Fedavg,
    Median,
    TrimMean,
    Krum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub sensitivity: f64,
}

impl DpConfig {
    pub fn params(&self) -> Result<DpParams> {
        DpParams::new(self.epsilon, self.delta, self.sensitivity)
    }
}

/// One experiment. Missing JSON keys take the [`Default`] values; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Clients.
    pub n: usize,
    /// Servers `S`.
    #[serde(alias = "S")]
    pub servers: usize,
    /// Fraction of malicious clients `ξ`.
    pub xi: f64,
    pub malicious_server_count: usize,
    /// Non-iid degree.
    pub q: f64,
    /// Classes `L`.
    #[serde(alias = "L")]
    pub classes: usize,
    pub d: usize,
    pub per_class: usize,
    pub test_per_class: usize,
    #[serde(alias = "T")]
    pub epochs: usize,
    /// Learning rate `η` of the sign step.
    pub eta: f64,
    pub alpha: f64,
    /// Defaults to `⌈0.3·n⌉`.
    pub m_pts: Option<usize>,
    pub dp: DpConfig,
    pub attack: AttackSpec,
    pub malicious_server_behavior: ServerBehavior,
    pub aggregator: Aggregator,
    pub batch_size: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 20,
            servers: 3,
            xi: 0.0,
            malicious_server_count: 0,
            q: 0.5,
            classes: 10,
            d: 16,
            per_class: 400,
            test_per_class: 100,
            epochs: 50,
            eta: 0.05,
            alpha: 1.2,
            m_pts: None,
            dp: DpConfig {
                epsilon: 5.0,
                delta: 1e-5,
                sensitivity: 0.001,
            },
            attack: AttackSpec::default(),
            malicious_server_behavior: ServerBehavior::None,
            aggregator: Aggregator::Segmentation,
            batch_size: 128,
            seed: 1,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn m_pts(&self) -> usize {
        self.m_pts.unwrap_or_else(|| default_m_pts(self.n))
    }

    pub fn num_params(&self) -> usize {
        self.d * self.classes + self.classes
    }

    /// `round(ξ·n)`.
    pub fn malicious_count(&self) -> usize {
        (self.xi * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.servers < MIN_SERVERS {
            return Err(Error::TooFewServers(self.servers));
        }
        if 2 * self.malicious_server_count >= self.servers {
            return Err(invalid(
                "malicious_server_count",
                format!("{} is not below S/2 = {}", self.malicious_server_count, self.servers as f64 / 2.0),
            ));
        }
        if self.malicious_server_behavior != ServerBehavior::None && self.malicious_server_count == 0 {
            return Err(invalid("malicious_server_behavior", "needs malicious_server_count ≥ 1"));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(invalid("xi", format!("{} is outside [0, 1]", self.xi)));
        }
        if self.n == 0 || self.n < self.classes {
            return Err(invalid("n", format!("need n ≥ L = {}", self.classes)));
        }
        if self.aggregator == Aggregator::Segmentation && self.n > MAX_CLIENTS {
            return Err(Error::RangeOverflow(format!("{} clients exceed the limit of {MAX_CLIENTS}", self.n)));
        }
        if self.aggregator == Aggregator::Segmentation && self.num_params() > MAX_DIM {
            return Err(Error::RangeOverflow(format!(
                "{} parameters exceed the limit of {MAX_DIM}",
                self.num_params()
            )));
        }
        if !(self.q >= 1.0 / self.classes as f64 - 1e-12 && self.q <= 1.0) {
            return Err(invalid("q", format!("{} is outside [1/L, 1]", self.q)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta", "must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(invalid("alpha", format!("{} is outside (0, 2]", self.alpha)));
        }
        if self.m_pts == Some(0) {
            return Err(invalid("m_pts", "must be at least 1"));
        }
        if self.per_class == 0 || self.test_per_class == 0 || self.batch_size == 0 || self.d == 0 {
            return Err(invalid("per_class/test_per_class/batch_size/d", "must be positive"));
        }
        self.dp.params()?;
        self.attack.validate(self.d, self.classes)?;
        if self.xi > 0.0 && self.attack.kind == AttackKind::None {
            return Err(invalid("attack", "malicious clients need an attack kind"));
        }
        Ok(())
    }
}
