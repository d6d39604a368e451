//! The multi-objective network: a shared linear transform feeding a softmax
//! primary head and one sigmoid head per active bias pseudo-task, trained
//! jointly by mini-batch SGD on a squared-error objective in which the bias
//! tasks are adversarial (the model is rewarded for failing them).

mod network;
mod objective;
mod train;

pub use network::{BiasHead, MultiObjectiveModel};
pub use objective::{gradients, loss, Gradients, HeadGradient};
pub use train::{make_baseline, train, BaselineKind, TrainOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the adversarial bias term enters the objective.
///
/// `Inverted` trains each bias head toward the flipped response `1 - y_B`
/// (bounded, stable gradients); `Subtractive` subtracts the squared error
/// toward `y_B` itself, the literal negated-likelihood form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    #[default]
    Inverted,
    Subtractive,
}

/// Optional nonlinearity on the shared layer. The default is a pure linear
/// composition; `Tanh` is available for experimentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Identity,
    Tanh,
}

/// Training configuration. `shared_dim` is the width of the shared layer,
/// `lambda` the weight on the adversarial bias terms, `l2` the weight-decay
/// coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub shared_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lambda: f64,
    pub l2: f64,
    pub bias_mode: BiasMode,
    pub seed: u64,
    pub offsets: bool,
    pub activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            shared_dim: 200,
            learning_rate: 0.05,
            epochs: 200,
            batch_size: 32,
            lambda: 1.0,
            l2: 0.0,
            bias_mode: BiasMode::Inverted,
            seed: 0,
            offsets: true,
            activation: Activation::Identity,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shared_dim == 0 {
            return Err(Error::argument("shared_dim must be at least 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::argument("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::argument("batch size must be at least 1"));
        }
        if self.lambda < 0.0 {
            return Err(Error::argument("lambda must be nonnegative"));
        }
        if self.l2 < 0.0 {
            return Err(Error::argument("l2 must be nonnegative"));
        }
        Ok(())
    }
}

/// Class probabilities plus the argmax label (ties broken toward the lowest
/// label index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimaryPrediction {
    pub probabilities: Vec<f64>,
    pub label: usize,
}

impl PrimaryPrediction {
    pub(crate) fn from_probabilities(probabilities: Vec<f64>) -> PrimaryPrediction {
        let mut label = 0;
        let mut best = probabilities[0];
        for (i, &p) in probabilities.iter().enumerate().skip(1) {
            if p > best {
                best = p;
                label = i;
            }
        }
        PrimaryPrediction {
            probabilities,
            label,
        }
    }
}
