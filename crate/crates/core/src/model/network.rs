//! Model parameters, initialization, the forward pass, and serialization.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bias::BiasTaskSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{Activation, PrimaryPrediction, TrainConfig};
use crate::nn::{sigmoid, softmax, Matrix, Rng};

/// One adversarial head: a `p x 1` weight column, its offset, and the spec
/// that produced it. The offset matters for imbalanced pseudo-tasks: it
/// absorbs the base rate so the weights carry the discriminative signal the
/// shared layer is being trained to remove.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasHead {
    pub weights: Matrix,
    pub offset: f64,
    pub spec: BiasTaskSpec,
}

/// The shared-layer network. `theta_s` maps inputs (`d`) to the shared
/// representation (`p`); `theta_p` maps it to `k + 1` primary logits; each
/// bias head maps it to one logit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiObjectiveModel {
    pub(crate) theta_s: Matrix,
    pub(crate) offset_s: Vec<f64>,
    pub(crate) theta_p: Matrix,
    pub(crate) offset_p: Vec<f64>,
    pub(crate) bias_heads: Vec<BiasHead>,
    pub(crate) label_names: Vec<String>,
    pub(crate) use_offsets: bool,
    pub(crate) activation: Activation,
}

/// Per-instance forward intermediates, kept for gradient computation.
pub(crate) struct ForwardTrace {
    pub hidden: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub bias_probabilities: Vec<f64>,
}

impl MultiObjectiveModel {
    /// Initializes a model: `theta_s` entries uniform in `[-1/sqrt(d),
    /// 1/sqrt(d)]`, head entries uniform in `[-1/sqrt(p), 1/sqrt(p)]`,
    /// offsets zero. One bias head per given spec.
    pub fn init(
        d: usize,
        k: usize,
        label_names: &[String],
        specs: &[BiasTaskSpec],
        config: &TrainConfig,
        rng: &mut Rng,
    ) -> Result<MultiObjectiveModel> {
        if d == 0 || k == 0 {
            return Err(Error::argument(format!(
                "need d >= 1 and k >= 1, got d={d}, k={k}"
            )));
        }
        if label_names.len() != k + 1 {
            return Err(Error::argument(format!(
                "expected {} label names, got {}",
                k + 1,
                label_names.len()
            )));
        }
        config.validate()?;
        let p = config.shared_dim;
        let input_bound = 1.0 / (d as f64).sqrt();
        let head_bound = 1.0 / (p as f64).sqrt();
        let draw = |rng: &mut Rng, rows: usize, cols: usize, bound: f64| {
            let data = (0..rows * cols)
                .map(|_| rng.uniform(-bound, bound))
                .collect();
            Matrix::from_vec(rows, cols, data)
        };
        let theta_s = draw(rng, d, p, input_bound)?;
        let theta_p = draw(rng, p, k + 1, head_bound)?;
        let bias_heads = specs
            .iter()
            .map(|spec| {
                Ok(BiasHead {
                    weights: draw(rng, p, 1, head_bound)?,
                    offset: 0.0,
                    spec: spec.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiObjectiveModel {
            theta_s,
            offset_s: vec![0.0; p],
            theta_p,
            offset_p: vec![0.0; k + 1],
            bias_heads,
            label_names: label_names.to_vec(),
            use_offsets: config.offsets,
            activation: config.activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.theta_s.rows()
    }

    pub fn shared_dim(&self) -> usize {
        self.theta_s.cols()
    }

    pub fn n_labels(&self) -> usize {
        self.theta_p.cols()
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn bias_heads(&self) -> &[BiasHead] {
        &self.bias_heads
    }

    pub fn uses_offsets(&self) -> bool {
        self.use_offsets
    }

    pub(crate) fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(
                "forward",
                format!("input of length {}", x.len()),
                format!("model input dimension {}", self.input_dim()),
            ));
        }
        let mut hidden = self.theta_s.vecmat(x);
        if self.use_offsets {
            for (h, b) in hidden.iter_mut().zip(&self.offset_s) {
                *h += b;
            }
        }
        if self.activation == Activation::Tanh {
            for h in hidden.iter_mut() {
                *h = h.tanh();
            }
        }
        let mut logits = self.theta_p.vecmat(&hidden);
        if self.use_offsets {
            for (u, b) in logits.iter_mut().zip(&self.offset_p) {
                *u += b;
            }
        }
        let probabilities = softmax(&logits)?;
        debug_assert!({
            let total: f64 = probabilities.iter().sum();
            (total - 1.0).abs() < 1e-9 && probabilities.iter().all(|p| *p >= 0.0)
        });
        let bias_probabilities = self
            .bias_heads
            .iter()
            .map(|head| {
                let mut v: f64 = hidden
                    .iter()
                    .zip(head.weights.data())
                    .map(|(h, w)| h * w)
                    .sum();
                if self.use_offsets {
                    v += head.offset;
                }
                sigmoid(v)
            })
            .collect();
        Ok(ForwardTrace {
            hidden,
            probabilities,
            bias_probabilities,
        })
    }

    /// Runs the network on one input: primary class probabilities plus each
    /// bias head's probability.
    pub fn forward(&self, x: &[f64]) -> Result<(PrimaryPrediction, Vec<f64>)> {
        let trace = self.forward_trace(x)?;
        Ok((
            PrimaryPrediction::from_probabilities(trace.probabilities),
            trace.bias_probabilities,
        ))
    }

    /// Predicts every instance of a dataset.
    pub fn predict(&self, dataset: &Dataset) -> Result<Vec<PrimaryPrediction>> {
        if dataset.dim() != self.input_dim() {
            return Err(Error::shape(
                "predict",
                format!("dataset dimension {}", dataset.dim()),
                format!("model input dimension {}", self.input_dim()),
            ));
        }
        dataset
            .instances()
            .iter()
            .map(|inst| Ok(self.forward(&inst.features)?.0))
            .collect()
    }

    /// Flat mutable views over every trainable parameter, in a fixed order.
    /// Offsets are included only when the model uses them.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let use_offsets = self.use_offsets;
        let mut out: Vec<&mut [f64]> = Vec::new();
        out.push(self.theta_s.data_mut());
        if use_offsets {
            out.push(&mut self.offset_s);
        }
        out.push(self.theta_p.data_mut());
        if use_offsets {
            out.push(&mut self.offset_p);
        }
        for head in &mut self.bias_heads {
            out.push(head.weights.data_mut());
            if use_offsets {
                out.push(std::slice::from_mut(&mut head.offset));
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.theta_s.is_finite()
            && self.theta_p.is_finite()
            && self.offset_s.iter().all(|v| v.is_finite())
            && self.offset_p.iter().all(|v| v.is_finite())
            && self
                .bias_heads
                .iter()
                .all(|h| h.weights.is_finite() && h.offset.is_finite())
    }

    fn validate(&self) -> Result<()> {
        let p = self.theta_s.cols();
        if self.theta_p.rows() != p
            || self.offset_s.len() != p
            || self.offset_p.len() != self.theta_p.cols()
            || self.label_names.len() != self.theta_p.cols()
            || self
                .bias_heads
                .iter()
                .any(|h| h.weights.rows() != p || h.weights.cols() != 1)
        {
            return Err(Error::argument("model file has inconsistent shapes"));
        }
        if !self.all_finite() {
            return Err(Error::argument("model file has non-finite parameters"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<MultiObjectiveModel> {
        let model: MultiObjectiveModel =
            serde_json::from_str(text).map_err(|e| Error::parse(0, format!("model file: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<MultiObjectiveModel> {
        let text = std::fs::read_to_string(path)?;
        MultiObjectiveModel::from_json(&text)
    }
}
