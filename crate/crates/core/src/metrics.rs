//! Correctness and fairness metrics.
//!
//! `accuracy` is the plain fraction of correct predictions. For a chosen
//! association (a primary label `l`, an identity attribute, and its
//! under-represented category set U), `alpha` is the empirical conditional
//! `P(z in U | predicted = l)` over test instances with a non-missing
//! identity value, `fairness` is `F = alpha (1 - alpha)` (maximal at the
//! uniform posterior 1/2), and `gamma = A F / (A + F)` combines the two.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{MultiObjectiveModel, PrimaryPrediction};

/// Fraction of instances whose argmax label equals the ground truth.
pub fn accuracy(predictions: &[PrimaryPrediction], dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::argument("accuracy of an empty dataset"));
    }
    if predictions.len() != dataset.len() {
        return Err(Error::argument(format!(
            "{} predictions for {} instances",
            predictions.len(),
            dataset.len()
        )));
    }
    let correct = predictions
        .iter()
        .zip(dataset.instances())
        .filter(|(pred, inst)| pred.label == inst.label)
        .count();
    Ok(correct as f64 / dataset.len() as f64)
}

/// Which conditional `alpha` estimates.
///
/// `Predicted` is `P(z in U | yhat = l)`, the reading consistent with the
/// reported result tables. `Literal` is the converse conditional
/// `P(yhat = l | z in U)` as the fairness formula is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    #[default]
    Predicted,
    Literal,
}

fn alpha_counts(
    predictions: &[PrimaryPrediction],
    dataset: &Dataset,
    label: usize,
    attribute: &str,
    under: &BTreeSet<usize>,
    mode: AlphaMode,
) -> Result<(usize, usize)> {
    if predictions.len() != dataset.len() {
        return Err(Error::argument(format!(
            "{} predictions for {} instances",
            predictions.len(),
            dataset.len()
        )));
    }
    if label >= dataset.label_names().len() {
        return Err(Error::argument(format!("label index {label} out of range")));
    }
    let (attr_idx, attr) = dataset.attribute(attribute)?;
    if under.is_empty() {
        return Err(Error::argument("under-represented set must be non-empty"));
    }
    if let Some(&bad) = under.iter().find(|&&c| c >= attr.categories.len()) {
        return Err(Error::argument(format!(
            "category index {bad} out of range for attribute '{attribute}'"
        )));
    }
    let mut hits = 0usize;
    let mut support = 0usize;
    for (pred, inst) in predictions.iter().zip(dataset.instances()) {
        let Some(cat) = inst.identity[attr_idx] else {
            continue;
        };
        let in_under = under.contains(&cat);
        match mode {
            AlphaMode::Predicted => {
                if pred.label == label {
                    support += 1;
                    if in_under {
                        hits += 1;
                    }
                }
            }
            AlphaMode::Literal => {
                if in_under {
                    support += 1;
                    if pred.label == label {
                        hits += 1;
                    }
                }
            }
        }
    }
    Ok((hits, support))
}

/// The association conditional `alpha` in the default (`Predicted`) reading.
/// Errors with [`Error::NoSupport`] when no instance conditions the ratio.
pub fn alpha(
    predictions: &[PrimaryPrediction],
    dataset: &Dataset,
    label: usize,
    attribute: &str,
    under: &BTreeSet<usize>,
) -> Result<f64> {
    alpha_with_mode(
        predictions,
        dataset,
        label,
        attribute,
        under,
        AlphaMode::Predicted,
    )
}

pub fn alpha_with_mode(
    predictions: &[PrimaryPrediction],
    dataset: &Dataset,
    label: usize,
    attribute: &str,
    under: &BTreeSet<usize>,
    mode: AlphaMode,
) -> Result<f64> {
    let (hits, support) = alpha_counts(predictions, dataset, label, attribute, under, mode)?;
    if support == 0 {
        return Err(Error::NoSupport(format!(
            "no instance supports alpha for label {label} vs '{attribute}'"
        )));
    }
    Ok(hits as f64 / support as f64)
}

/// `F = alpha (1 - alpha)`, in `[0, 0.25]`, maximal at `alpha = 1/2`.
pub fn fairness(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::argument(format!("alpha must lie in [0,1], got {alpha}")));
    }
    Ok(alpha * (1.0 - alpha))
}

/// Combined correctness-fairness score `A F / (A + F)`; 0 when both vanish.
pub fn gamma(a: f64, f: f64) -> f64 {
    debug_assert!(a >= 0.0 && f >= 0.0);
    if a + f == 0.0 {
        0.0
    } else {
        a * f / (a + f)
    }
}

/// Truncates to 4 decimal places toward zero — the convention the reference
/// result tables use for presentation.
pub fn trunc4(x: f64) -> f64 {
    (x * 10_000.0).trunc() / 10_000.0
}

/// One association to evaluate: a primary label and an identity category
/// set, given by index against the evaluation dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationQuery {
    pub label: usize,
    pub attribute: String,
    pub under: BTreeSet<usize>,
}

impl AssociationQuery {
    /// Parses `label,attribute,cat` (multiple categories joined by `+`)
    /// against a dataset's vocabulary, e.g. `green,halfplane,upper`.
    pub fn parse(text: &str, dataset: &Dataset) -> Result<AssociationQuery> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::argument(format!(
                "query must be 'label,attribute,categories', got '{text}'"
            )));
        }
        let label = dataset
            .label_index(parts[0])
            .ok_or_else(|| Error::argument(format!("unknown label '{}' in query", parts[0])))?;
        let (_, attr) = dataset.attribute(parts[1])?;
        let mut under = BTreeSet::new();
        for cat in parts[2].split('+') {
            let idx = attr.category_index(cat.trim()).ok_or_else(|| {
                Error::argument(format!(
                    "unknown category '{cat}' for attribute '{}' in query",
                    parts[1]
                ))
            })?;
            under.insert(idx);
        }
        Ok(AssociationQuery {
            label,
            attribute: parts[1].to_string(),
            under,
        })
    }

    /// Column-header-safe identifier, e.g. `green_halfplane_upper`.
    pub fn id(&self, dataset: &Dataset) -> String {
        let (_, attr) = dataset.attribute(&self.attribute).expect("validated query");
        let cats: Vec<&str> = self
            .under
            .iter()
            .map(|&c| attr.categories[c].as_str())
            .collect();
        format!(
            "{}_{}_{}",
            dataset.label_names()[self.label],
            self.attribute,
            cats.join("+")
        )
    }
}

/// Metrics for one association. `support` counts the test instances that
/// condition `alpha` (predicted `l` with a non-missing identity value in the
/// default mode); when it is zero the three scores are absent and `flags`
/// records `no_support` instead of fabricating a maximally biased 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationMetrics {
    pub label: usize,
    pub label_name: String,
    pub attribute: String,
    pub under: Vec<String>,
    pub alpha: Option<f64>,
    pub fairness: Option<f64>,
    pub gamma: Option<f64>,
    pub support: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Accuracy plus one [`AssociationMetrics`] per query, all sharing the same
/// accuracy value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub associations: Vec<AssociationMetrics>,
    #[serde(default)]
    pub model_id: String,
    #[serde(default)]
    pub dataset_id: String,
    #[serde(default)]
    pub seed: u64,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<MetricsReport> {
        serde_json::from_str(text).map_err(|e| Error::parse(0, format!("metrics report: {e}")))
    }
}

/// Evaluates a model on a test dataset in the default alpha reading.
pub fn evaluate(
    model: &MultiObjectiveModel,
    dataset: &Dataset,
    queries: &[AssociationQuery],
) -> Result<MetricsReport> {
    evaluate_with_mode(model, dataset, queries, AlphaMode::Predicted)
}

pub fn evaluate_with_mode(
    model: &MultiObjectiveModel,
    dataset: &Dataset,
    queries: &[AssociationQuery],
    mode: AlphaMode,
) -> Result<MetricsReport> {
    let predictions = model.predict(dataset)?;
    evaluate_predictions(&predictions, dataset, queries, mode)
}

/// Same as [`evaluate`] but over precomputed predictions.
pub fn evaluate_predictions(
    predictions: &[PrimaryPrediction],
    dataset: &Dataset,
    queries: &[AssociationQuery],
    mode: AlphaMode,
) -> Result<MetricsReport> {
    let acc = accuracy(predictions, dataset)?;
    let mut associations = Vec::with_capacity(queries.len());
    for query in queries {
        let (hits, support) = alpha_counts(
            predictions,
            dataset,
            query.label,
            &query.attribute,
            &query.under,
            mode,
        )?;
        let (_, attr) = dataset.attribute(&query.attribute)?;
        let under_names = query
            .under
            .iter()
            .map(|&c| attr.categories[c].clone())
            .collect();
        let entry = if support == 0 {
            AssociationMetrics {
                label: query.label,
                label_name: dataset.label_names()[query.label].clone(),
                attribute: query.attribute.clone(),
                under: under_names,
                alpha: None,
                fairness: None,
                gamma: None,
                support: 0,
                flags: vec!["no_support".to_string()],
            }
        } else {
            let a = hits as f64 / support as f64;
            let f = fairness(a)?;
            AssociationMetrics {
                label: query.label,
                label_name: dataset.label_names()[query.label].clone(),
                attribute: query.attribute.clone(),
                under: under_names,
                alpha: Some(a),
                fairness: Some(f),
                gamma: Some(gamma(acc, f)),
                support,
                flags: Vec::new(),
            }
        };
        associations.push(entry);
    }
    Ok(MetricsReport {
        accuracy: acc,
        associations,
        model_id: String::new(),
        dataset_id: String::new(),
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{IdentityAttribute, Instance};
    use proptest::prelude::*;

    fn pred(label: usize, n_labels: usize) -> PrimaryPrediction {
        let mut probabilities = vec![0.0; n_labels];
        probabilities[label] = 1.0;
        PrimaryPrediction {
            probabilities,
            label,
        }
    }

    fn hand_dataset(rows: &[(usize, Option<usize>)]) -> Dataset {
        let attr = IdentityAttribute::new("gender", &["male", "female"], true).unwrap();
        let mut ds = Dataset::new(
            1,
            vec!["fear".into(), "anger".into(), "joy".into()],
            vec![attr],
        )
        .unwrap();
        for &(label, cat) in rows {
            ds.push(Instance {
                features: vec![0.0],
                label,
                identity: vec![cat],
            })
            .unwrap();
        }
        ds
    }

    #[test]
    fn accuracy_basics() {
        let ds = hand_dataset(&[(0, None), (1, None), (0, None), (2, None)]);
        let all = vec![pred(0, 3), pred(1, 3), pred(0, 3), pred(2, 3)];
        assert_eq!(accuracy(&all, &ds).unwrap(), 1.0);
        let none = vec![pred(1, 3), pred(0, 3), pred(1, 3), pred(0, 3)];
        assert_eq!(accuracy(&none, &ds).unwrap(), 0.0);
        let three = vec![pred(0, 3), pred(1, 3), pred(0, 3), pred(0, 3)];
        assert_eq!(accuracy(&three, &ds).unwrap(), 0.75);
        let empty = hand_dataset(&[]);
        assert!(accuracy(&[], &empty).is_err());
    }

    #[test]
    fn alpha_hand_count() {
        // preds [fear, fear, fear, joy], gender [F, M, F, F], U = {female}
        let ds = hand_dataset(&[(0, Some(1)), (0, Some(0)), (0, Some(1)), (2, Some(1))]);
        let preds = vec![pred(0, 3), pred(0, 3), pred(0, 3), pred(2, 3)];
        let under = BTreeSet::from([1]);
        let a = alpha(&preds, &ds, 0, "gender", &under).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_extremes_and_split() {
        let ds = hand_dataset(&[(0, Some(1)), (0, Some(1)), (0, Some(0)), (0, Some(0))]);
        let under = BTreeSet::from([1]);
        // All fear predictions female.
        let all_female = hand_dataset(&[(0, Some(1)), (0, Some(1))]);
        let preds = vec![pred(0, 3), pred(0, 3)];
        assert_eq!(alpha(&preds, &all_female, 0, "gender", &under).unwrap(), 1.0);
        // Even split.
        let preds = vec![pred(0, 3), pred(0, 3), pred(0, 3), pred(0, 3)];
        assert_eq!(alpha(&preds, &ds, 0, "gender", &under).unwrap(), 0.5);
    }

    #[test]
    fn alpha_zero_support_is_flagged_error() {
        let ds = hand_dataset(&[(0, Some(1)), (0, None)]);
        let preds = vec![pred(1, 3), pred(0, 3)];
        // Label 0 is only predicted for the missing-identity instance.
        assert!(matches!(
            alpha(&preds, &ds, 0, "gender", &BTreeSet::from([1])),
            Err(Error::NoSupport(_))
        ));
    }

    #[test]
    fn literal_mode_conditions_on_identity() {
        let ds = hand_dataset(&[(0, Some(1)), (0, Some(1)), (1, Some(1)), (1, Some(0))]);
        let preds = vec![pred(0, 3), pred(1, 3), pred(0, 3), pred(0, 3)];
        let under = BTreeSet::from([1]);
        // P(pred = fear | female) = 2/3; P(female | pred = fear) = 2/3 here too,
        // so distinguish via the male side: P(pred = fear | male) = 1.
        let literal =
            alpha_with_mode(&preds, &ds, 0, "gender", &BTreeSet::from([0]), AlphaMode::Literal)
                .unwrap();
        assert_eq!(literal, 1.0);
        let predicted = alpha(&preds, &ds, 0, "gender", &under).unwrap();
        assert!((predicted - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fairness_formula_oracle() {
        assert_eq!(fairness(0.5).unwrap(), 0.25);
        assert_eq!(fairness(1.0).unwrap(), 0.0);
        // Reference-table row: alpha 0.7914 presents as F = 0.1650.
        assert_eq!(trunc4(fairness(0.7914).unwrap()), 0.1650);
        assert!(fairness(-0.1).is_err());
        assert!(fairness(1.1).is_err());
    }

    #[test]
    fn gamma_formula_oracle() {
        assert_eq!(trunc4(gamma(0.8620, 0.1650)), 0.1384);
        assert_eq!(trunc4(gamma(0.8237, 0.1617)), 0.1351);
        assert_eq!(gamma(0.9, 0.0), 0.0);
        assert_eq!(gamma(0.0, 0.0), 0.0);
    }

    #[test]
    fn report_round_trips_and_flags_no_support() {
        let ds = hand_dataset(&[(0, Some(1)), (1, Some(0))]);
        let preds = vec![pred(1, 3), pred(1, 3)];
        let queries = vec![
            AssociationQuery::parse("fear,gender,female", &ds).unwrap(),
            AssociationQuery::parse("anger,gender,male", &ds).unwrap(),
            AssociationQuery::parse("anger,gender,male", &ds).unwrap(),
        ];
        let report =
            evaluate_predictions(&preds, &ds, &queries, AlphaMode::Predicted).unwrap();
        assert_eq!(report.accuracy, 0.5);
        assert_eq!(report.associations[0].flags, vec!["no_support".to_string()]);
        assert!(report.associations[0].alpha.is_none());
        // Duplicate queries give identical duplicate entries.
        assert_eq!(report.associations[1], report.associations[2]);
        let parsed = MetricsReport::from_json(&report.to_json()).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn zero_queries_reports_accuracy_only() {
        let ds = hand_dataset(&[(0, None)]);
        let preds = vec![pred(0, 3)];
        let report = evaluate_predictions(&preds, &ds, &[], AlphaMode::Predicted).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert!(report.associations.is_empty());
    }

    #[test]
    fn query_parsing_validates_names() {
        let ds = hand_dataset(&[(0, Some(0))]);
        assert!(AssociationQuery::parse("fear,gender,female", &ds).is_ok());
        assert!(AssociationQuery::parse("zap,gender,female", &ds).is_err());
        assert!(AssociationQuery::parse("fear,height,female", &ds).is_err());
        assert!(AssociationQuery::parse("fear,gender,blue", &ds).is_err());
        assert!(AssociationQuery::parse("fear,gender", &ds).is_err());
        let multi = AssociationQuery::parse("fear,gender,male+female", &ds);
        assert!(multi.is_ok());
        assert_eq!(multi.unwrap().under.len(), 2);
    }

    proptest! {
        // F is symmetric around 1/2: swapping U for its complement flips
        // alpha to 1 - alpha but leaves F unchanged.
        #[test]
        fn fairness_symmetric(a in 0.0f64..=1.0) {
            let f1 = fairness(a).unwrap();
            let f2 = fairness(1.0 - a).unwrap();
            prop_assert!((f1 - f2).abs() < 1e-12);
            prop_assert!((0.0..=0.25 + 1e-12).contains(&f1));
        }

        // gamma is bounded by min(A, F) and monotone in each argument.
        #[test]
        fn gamma_bounded_and_monotone(a in 0.0f64..=1.0, f in 0.0f64..=0.25, da in 0.0f64..0.5, df in 0.0f64..0.125) {
            let g = gamma(a, f);
            prop_assert!(g >= 0.0);
            prop_assert!(g <= a.min(f) + 1e-12);
            prop_assert!(gamma(a + da, f) >= g - 1e-12);
            prop_assert!(gamma(a, f + df) >= g - 1e-12);
        }

        // alpha ignores test-set order.
        #[test]
        fn alpha_permutation_invariant(
            rows in proptest::collection::vec((0usize..2, proptest::option::of(0usize..2), 0usize..2), 2..30),
            rotate in 1usize..8,
        ) {
            let ds_rows: Vec<(usize, Option<usize>)> = rows.iter().map(|&(l, c, _)| (l, c)).collect();
            let ds = hand_dataset(&ds_rows);
            let preds: Vec<PrimaryPrediction> = rows.iter().map(|&(_, _, p)| pred(p, 3)).collect();
            let mut rotated = rows.clone();
            rotated.rotate_left(rotate % rows.len());
            let ds_rot = hand_dataset(&rotated.iter().map(|&(l, c, _)| (l, c)).collect::<Vec<_>>());
            let preds_rot: Vec<PrimaryPrediction> = rotated.iter().map(|&(_, _, p)| pred(p, 3)).collect();
            let under = BTreeSet::from([1]);
            let a1 = alpha(&preds, &ds, 0, "gender", &under);
            let a2 = alpha(&preds_rot, &ds_rot, 0, "gender", &under);
            match (a1, a2) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(Error::NoSupport(_)), Err(Error::NoSupport(_))) => {}
                other => prop_assert!(false, "mismatch: {:?}", other),
            }
        }
    }
}
