//! Method grid: the baselines and bias-aware variants a comparison sweep
//! runs, all trained and evaluated through one pipeline so a method's result
//! is identical whether it runs standalone or inside a sweep.

use fairmtl::bias::BiasTaskSpec;
use fairmtl::data::Dataset;
use fairmtl::error::{Error, Result};
use fairmtl::metrics::{evaluate_with_mode, AlphaMode, AssociationQuery, MetricsReport};
use fairmtl::model::{make_baseline, train, BaselineKind, MultiObjectiveModel, TrainConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Agnostic,
    AgnosticL2,
    IdentityFeature(String),
    /// Bias-aware training; `Some(attr)` restricts the configured specs to
    /// one attribute, `None` uses them all (the joint variant).
    BiasAware(Option<String>),
}

impl Method {
    pub fn parse(text: &str) -> Result<Method> {
        match text {
            "agnostic" => Ok(Method::Agnostic),
            "agnostic-l2" => Ok(Method::AgnosticL2),
            "bias-aware" | "bias-aware-joint" => Ok(Method::BiasAware(None)),
            other => {
                if let Some(attr) = other.strip_prefix("identity-feature:") {
                    Ok(Method::IdentityFeature(attr.to_string()))
                } else if let Some(attr) = other.strip_prefix("bias-aware:") {
                    Ok(Method::BiasAware(Some(attr.to_string())))
                } else {
                    Err(Error::Argument(format!(
                        "unknown method '{other}' (expected agnostic, agnostic-l2, \
                         identity-feature:<attr>, bias-aware[:<attr>], bias-aware-joint)"
                    )))
                }
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            Method::Agnostic => "agnostic".to_string(),
            Method::AgnosticL2 => "agnostic-l2".to_string(),
            Method::IdentityFeature(attr) => format!("identity-feature:{attr}"),
            Method::BiasAware(None) => "bias-aware".to_string(),
            Method::BiasAware(Some(attr)) => format!("bias-aware:{attr}"),
        }
    }
}

pub struct MethodRun {
    pub model: MultiObjectiveModel,
    pub loss_trace: Vec<f64>,
    pub report: MetricsReport,
    pub active_heads: usize,
}

/// Trains one method on the train split and evaluates it on the test split.
#[allow(clippy::too_many_arguments)]
pub fn run_method(
    method: &Method,
    train_ds: &Dataset,
    test_ds: &Dataset,
    specs: &[BiasTaskSpec],
    config: &TrainConfig,
    queries: &[AssociationQuery],
    alpha_mode: AlphaMode,
    train_seed: u64,
) -> Result<MethodRun> {
    let config = TrainConfig {
        seed: train_seed,
        ..config.clone()
    };
    let (model, loss_trace) = match method {
        Method::Agnostic | Method::AgnosticL2 | Method::IdentityFeature(_) => {
            let kind = match method {
                Method::Agnostic => BaselineKind::Agnostic,
                Method::AgnosticL2 => BaselineKind::AgnosticL2,
                Method::IdentityFeature(attr) => BaselineKind::IdentityFeature(attr.clone()),
                Method::BiasAware(_) => unreachable!(),
            };
            let (train_data, train_cfg) = make_baseline(&kind, train_ds, &config)?;
            let outcome = train(&train_data, &[], &train_cfg)?;
            (outcome.model, outcome.loss_trace)
        }
        Method::BiasAware(filter) => {
            let selected: Vec<BiasTaskSpec> = match filter {
                None => specs.to_vec(),
                Some(attr) => specs
                    .iter()
                    .filter(|s| &s.attribute == attr)
                    .cloned()
                    .collect(),
            };
            if selected.is_empty() {
                return Err(Error::Argument(format!(
                    "method '{}' selected no bias task specs",
                    method.id()
                )));
            }
            let outcome = train(train_ds, &selected, &config)?;
            (outcome.model, outcome.loss_trace)
        }
    };
    let eval_ds = eval_dataset(method, test_ds)?;
    let mut report = evaluate_with_mode(&model, &eval_ds, queries, alpha_mode)?;
    report.model_id = method.id();
    report.seed = train_seed;
    Ok(MethodRun {
        active_heads: model.bias_heads().len(),
        loss_trace,
        report,
        model,
    })
}

/// The test-side view a method's model expects (identity-feature baselines
/// extend the inputs, so the test set gets the same transform).
pub fn eval_dataset(method: &Method, test_ds: &Dataset) -> Result<Dataset> {
    match method {
        Method::IdentityFeature(attr) => test_ds.append_identity_feature(attr),
        _ => Ok(test_ds.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_strings_round_trip() {
        for text in [
            "agnostic",
            "agnostic-l2",
            "identity-feature:gender",
            "bias-aware",
            "bias-aware:race",
        ] {
            assert_eq!(Method::parse(text).unwrap().id(), text);
        }
        assert_eq!(
            Method::parse("bias-aware-joint").unwrap(),
            Method::BiasAware(None)
        );
        assert!(Method::parse("mystery").is_err());
    }
}
