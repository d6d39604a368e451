//! Mini-batch SGD training and the bias-agnostic baseline variants.

use crate::bias::{compute_bias_labels, BiasTaskSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::network::MultiObjectiveModel;
use crate::model::objective::evaluate;
use crate::model::TrainConfig;
use crate::nn::Rng;

/// Default weight decay for the L2-regularized baseline when the caller's
/// config leaves it at zero.
pub const BASELINE_L2: f64 = 1e-3;

/// A trained model plus its per-epoch mean training loss.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MultiObjectiveModel,
    pub loss_trace: Vec<f64>,
    /// Association ratio per supplied spec, in order, with the gate verdict.
    pub gate_results: Vec<(f64, bool)>,
}

/// Trains on `dataset` (the caller passes the *training* split; bias labels
/// and gates are computed here, on that data only). Specs whose association
/// gate stays closed get no head. Deterministic for a fixed
/// (dataset, specs, config).
///
/// Shared and primary parameters descend the joint objective, in which the
/// bias terms reward failing each pseudo-task; the heads themselves descend
/// their own prediction error so they keep tracking the association being
/// removed. A head that were instead trained on the joint objective would
/// learn the inversion on its own and stop exerting any pressure on the
/// shared layer.
pub fn train(
    dataset: &Dataset,
    specs: &[BiasTaskSpec],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::argument("cannot train on an empty dataset"));
    }
    let k = dataset.label_names().len().saturating_sub(1);

    let mut active_specs = Vec::new();
    let mut active_labelings = Vec::new();
    let mut gate_results = Vec::new();
    for spec in specs {
        let labeling = compute_bias_labels(dataset, spec)?;
        gate_results.push((labeling.rho, labeling.active));
        if labeling.active {
            active_specs.push(spec.clone());
            active_labelings.push(labeling);
        }
    }

    // Separate child streams keep the shared/primary init draws identical
    // whether or not any bias head exists.
    let root = Rng::new(config.seed);
    let mut init_rng = root.child(0);
    let mut shuffle_rng = root.child(1);

    let mut model = MultiObjectiveModel::init(
        dataset.dim(),
        k,
        dataset.label_names(),
        &active_specs,
        config,
        &mut init_rng,
    )?;

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut loss_trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        // Linearly annealed step size: the adversarial game does not settle
        // under a constant step, so the schedule freezes the model where the
        // accumulated pressure left it.
        let rate = config.learning_rate * (1.0 - epoch as f64 / config.epochs as f64);
        for batch in order.chunks(config.batch_size) {
            let (batch_loss, grads) =
                evaluate(&model, dataset, batch, &active_labelings, config, true, true)?;
            let grads = grads.expect("gradients requested");
            if !batch_loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    learning_rate: config.learning_rate,
                });
            }
            epoch_loss += batch_loss;
            let step = -rate / batch.len() as f64;
            let grad_slices = grads.slices(model.uses_offsets());
            for (params, grad) in model.params_mut().into_iter().zip(grad_slices) {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p += step * g;
                }
            }
        }
        loss_trace.push(epoch_loss / dataset.len() as f64);
    }
    if !model.all_finite() {
        return Err(Error::Divergence {
            epoch: config.epochs.saturating_sub(1),
            learning_rate: config.learning_rate,
        });
    }
    Ok(TrainOutcome {
        model,
        loss_trace,
        gate_results,
    })
}

/// The bias-agnostic baselines of the experimental grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaselineKind {
    /// Primary task only.
    Agnostic,
    /// Primary task with L2 weight decay.
    AgnosticL2,
    /// Primary task with the named identity attribute one-hot-appended to
    /// the inputs.
    IdentityFeature(String),
}

/// Prepares (dataset, config) for a baseline run. Baselines train with no
/// bias specs, so callers pass `&[]` to [`train`].
pub fn make_baseline(
    kind: &BaselineKind,
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<(Dataset, TrainConfig)> {
    let mut config = config.clone();
    config.lambda = 0.0;
    match kind {
        BaselineKind::Agnostic => {
            config.l2 = 0.0;
            Ok((dataset.clone(), config))
        }
        BaselineKind::AgnosticL2 => {
            if config.l2 == 0.0 {
                config.l2 = BASELINE_L2;
            }
            Ok((dataset.clone(), config))
        }
        BaselineKind::IdentityFeature(attribute) => {
            config.l2 = 0.0;
            Ok((dataset.append_identity_feature(attribute)?, config))
        }
    }
}
