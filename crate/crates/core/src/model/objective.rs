//! The joint squared-error objective and its analytic gradients.
//!
//! For a batch B the loss is
//!
//! ```text
//! L = sum_{x in B} ||yhat(x) - onehot(y)||^2
//!   + lambda * sum_i sum_{x in B, x labeled for task i} bias_term_i(x)
//!   + l2 * ||params||^2
//! ```
//!
//! where `bias_term` is `(q - (1 - y_B))^2` in inverted-label mode and
//! `-(q - y_B)^2` in subtractive mode, `q` the head's sigmoid output.
//! Instances excluded from a bias task contribute no bias term. Gradients
//! are derived by hand; the finite-difference suite pins them to this exact
//! loss.

use crate::bias::BiasLabeling;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{Activation, BiasMode, MultiObjectiveModel, TrainConfig};
use crate::nn::Matrix;

/// Gradient of the batch loss, shaped like the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub theta_s: Matrix,
    pub offset_s: Vec<f64>,
    pub theta_p: Matrix,
    pub offset_p: Vec<f64>,
    pub heads: Vec<HeadGradient>,
}

#[derive(Debug, Clone)]
pub struct HeadGradient {
    pub weights: Matrix,
    pub offset: f64,
}

impl Gradients {
    fn zeros_like(model: &MultiObjectiveModel) -> Gradients {
        Gradients {
            theta_s: Matrix::zeros(model.theta_s.rows(), model.theta_s.cols()),
            offset_s: vec![0.0; model.offset_s.len()],
            theta_p: Matrix::zeros(model.theta_p.rows(), model.theta_p.cols()),
            offset_p: vec![0.0; model.offset_p.len()],
            heads: model
                .bias_heads
                .iter()
                .map(|h| HeadGradient {
                    weights: Matrix::zeros(h.weights.rows(), 1),
                    offset: 0.0,
                })
                .collect(),
        }
    }

    /// Flat views in the same order as [`MultiObjectiveModel::params_mut`].
    pub fn slices(&self, use_offsets: bool) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        out.push(self.theta_s.data());
        if use_offsets {
            out.push(&self.offset_s);
        }
        out.push(self.theta_p.data());
        if use_offsets {
            out.push(&self.offset_p);
        }
        for head in &self.heads {
            out.push(head.weights.data());
            if use_offsets {
                out.push(std::slice::from_ref(&head.offset));
            }
        }
        out
    }
}

fn check_alignment(
    model: &MultiObjectiveModel,
    dataset: &Dataset,
    batch: &[usize],
    labelings: &[BiasLabeling],
) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::argument("batch must be non-empty"));
    }
    if labelings.len() != model.bias_heads.len() {
        return Err(Error::argument(format!(
            "got {} bias labelings for {} bias heads",
            labelings.len(),
            model.bias_heads.len()
        )));
    }
    for labeling in labelings {
        if labeling.labels.len() != dataset.len() {
            return Err(Error::argument(format!(
                "bias labeling covers {} instances, dataset has {}",
                labeling.labels.len(),
                dataset.len()
            )));
        }
    }
    if let Some(&bad) = batch.iter().find(|&&i| i >= dataset.len()) {
        return Err(Error::argument(format!(
            "batch index {bad} out of range for dataset of {}",
            dataset.len()
        )));
    }
    Ok(())
}

fn param_square_norm(model: &MultiObjectiveModel) -> f64 {
    // Offsets are zero whenever they are disabled, so summing them
    // unconditionally matches the trainable-parameter norm either way.
    let mut total = model.theta_s.sum_squares() + model.theta_p.sum_squares();
    total += model.offset_s.iter().map(|v| v * v).sum::<f64>();
    total += model.offset_p.iter().map(|v| v * v).sum::<f64>();
    for head in &model.bias_heads {
        total += head.weights.sum_squares() + head.offset * head.offset;
    }
    total
}

/// Batch loss. See the module docs for the exact expression.
pub fn loss(
    model: &MultiObjectiveModel,
    dataset: &Dataset,
    batch: &[usize],
    labelings: &[BiasLabeling],
    config: &TrainConfig,
) -> Result<f64> {
    Ok(evaluate(model, dataset, batch, labelings, config, false, false)?.0)
}

/// Analytic gradient of [`loss`] with respect to every trainable parameter.
pub fn gradients(
    model: &MultiObjectiveModel,
    dataset: &Dataset,
    batch: &[usize],
    labelings: &[BiasLabeling],
    config: &TrainConfig,
) -> Result<Gradients> {
    Ok(evaluate(model, dataset, batch, labelings, config, true, false)?
        .1
        .expect("gradients requested"))
}

/// Fused loss + optional gradients, used by the trainer to avoid a second
/// forward pass.
///
/// With `probe_heads` set, the head weight/offset blocks of the returned
/// gradient are swapped for the descent direction of each head's *own*
/// squared error toward `y_B` (unscaled by lambda). The trainer uses this so
/// a head keeps tracking the stereotyped association while the shared layer,
/// which still receives the adversarial joint-loss signal through the head,
/// learns to defeat it. Plain joint-loss head gradients would let the head
/// absorb the inversion by itself and leave the shared layer untouched.
pub(crate) fn evaluate(
    model: &MultiObjectiveModel,
    dataset: &Dataset,
    batch: &[usize],
    labelings: &[BiasLabeling],
    config: &TrainConfig,
    want_gradients: bool,
    probe_heads: bool,
) -> Result<(f64, Option<Gradients>)> {
    check_alignment(model, dataset, batch, labelings)?;
    let n_labels = model.n_labels();
    let mut total = 0.0;
    let mut grads = want_gradients.then(|| Gradients::zeros_like(model));

    for &idx in batch {
        let inst = dataset.instance(idx);
        let trace = model.forward_trace(&inst.features)?;

        // Primary squared error against the one-hot target.
        let mut errors = trace.probabilities.clone();
        errors[inst.label] -= 1.0;
        total += errors.iter().map(|e| e * e).sum::<f64>();

        // Adversarial terms for instances the pseudo-task covers. `head_dv`
        // is the joint-loss logit gradient (backpropagated into the shared
        // layer); `probe_dv` the head's own-task descent direction.
        let mut head_dv = vec![0.0; model.bias_heads.len()];
        let mut probe_dv = vec![0.0; model.bias_heads.len()];
        for (i, labeling) in labelings.iter().enumerate() {
            let Some(y_b) = labeling.labels[idx] else {
                continue;
            };
            let y_b = f64::from(y_b);
            let q = trace.bias_probabilities[i];
            probe_dv[i] = 2.0 * (q - y_b) * q * (1.0 - q);
            match config.bias_mode {
                BiasMode::Inverted => {
                    let e = q - (1.0 - y_b);
                    total += config.lambda * e * e;
                    head_dv[i] = config.lambda * 2.0 * e * q * (1.0 - q);
                }
                BiasMode::Subtractive => {
                    let e = q - y_b;
                    total -= config.lambda * e * e;
                    head_dv[i] = -config.lambda * 2.0 * e * q * (1.0 - q);
                }
            }
        }

        let Some(grads) = grads.as_mut() else {
            continue;
        };

        // d(primary)/d(logits) through the softmax Jacobian:
        // g_u[c] = 2 p_c (e_c - sum_j e_j p_j).
        let mix: f64 = errors
            .iter()
            .zip(&trace.probabilities)
            .map(|(e, p)| e * p)
            .sum();
        let g_logits: Vec<f64> = (0..n_labels)
            .map(|c| 2.0 * trace.probabilities[c] * (errors[c] - mix))
            .collect();

        grads.theta_p.add_outer(&trace.hidden, &g_logits, 1.0);
        if model.use_offsets {
            for (g, v) in grads.offset_p.iter_mut().zip(&g_logits) {
                *g += v;
            }
        }

        // Backprop into the shared representation from every head; the head
        // blocks themselves take either the joint-loss or the probe signal.
        let mut g_hidden = model.theta_p.matvec(&g_logits);
        for (i, head) in model.bias_heads.iter().enumerate() {
            let dv = head_dv[i];
            let block_dv = if probe_heads { probe_dv[i] } else { dv };
            if block_dv != 0.0 {
                let hg = &mut grads.heads[i];
                for (w, h) in hg.weights.data_mut().iter_mut().zip(&trace.hidden) {
                    *w += block_dv * h;
                }
                if model.use_offsets {
                    hg.offset += block_dv;
                }
            }
            if dv != 0.0 {
                for (g, w) in g_hidden.iter_mut().zip(head.weights.data()) {
                    *g += dv * w;
                }
            }
        }

        if model.activation == Activation::Tanh {
            for (g, h) in g_hidden.iter_mut().zip(&trace.hidden) {
                *g *= 1.0 - h * h;
            }
        }
        grads.theta_s.add_outer(&inst.features, &g_hidden, 1.0);
        if model.use_offsets {
            for (g, v) in grads.offset_s.iter_mut().zip(&g_hidden) {
                *g += v;
            }
        }
    }

    // Weight decay, once per batch.
    if config.l2 > 0.0 {
        total += config.l2 * param_square_norm(model);
        if let Some(grads) = grads.as_mut() {
            let decay = 2.0 * config.l2;
            grads.theta_s.add_scaled(&model.theta_s, decay);
            grads.theta_p.add_scaled(&model.theta_p, decay);
            if model.use_offsets {
                for (g, v) in grads.offset_s.iter_mut().zip(&model.offset_s) {
                    *g += decay * v;
                }
                for (g, v) in grads.offset_p.iter_mut().zip(&model.offset_p) {
                    *g += decay * v;
                }
            }
            for (hg, head) in grads.heads.iter_mut().zip(&model.bias_heads) {
                hg.weights.add_scaled(&head.weights, decay);
                if model.use_offsets {
                    hg.offset += decay * head.offset;
                }
            }
        }
    }

    Ok((total, grads))
}
