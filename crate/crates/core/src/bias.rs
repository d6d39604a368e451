//! Bias pseudo-tasks.
//!
//! A [`BiasTaskSpec`] names a stereotyped association: a set of sensitive
//! primary labels (e.g. {fear}), an identity attribute (e.g. gender), and
//! that attribute's under-represented category set U (e.g. {female}). The
//! association is *gated*: bias response labels are emitted only when the
//! empirical ratio rho = P(z in U | y sensitive) on the dataset exceeds the
//! threshold tau (strictly). Instances whose primary label is not sensitive,
//! or whose identity value is missing, are excluded from the pseudo-task.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Default association-gate threshold.
pub const DEFAULT_TAU: f64 = 0.5;

/// One bias pseudo-task definition. Label and category sets are index-based
/// and resolved against a dataset's label/attribute vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTaskSpec {
    pub attribute: String,
    pub sensitive_labels: BTreeSet<usize>,
    pub under_represented: BTreeSet<usize>,
    pub tau: f64,
}

impl BiasTaskSpec {
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        let (_, attr) = dataset.attribute(&self.attribute)?;
        let n_labels = dataset.label_names().len();
        if self.sensitive_labels.is_empty() || self.sensitive_labels.len() >= n_labels {
            return Err(Error::argument(format!(
                "sensitive labels must be a non-empty strict subset of the {n_labels} primary labels"
            )));
        }
        if let Some(&bad) = self.sensitive_labels.iter().find(|&&l| l >= n_labels) {
            return Err(Error::argument(format!("sensitive label index {bad} out of range")));
        }
        let n_cats = attr.categories.len();
        if self.under_represented.is_empty() || self.under_represented.len() >= n_cats {
            return Err(Error::argument(format!(
                "under-represented set must be a non-empty strict subset of the {n_cats} categories of '{}'",
                self.attribute
            )));
        }
        if let Some(&bad) = self.under_represented.iter().find(|&&c| c >= n_cats) {
            return Err(Error::argument(format!("category index {bad} out of range")));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::argument(format!("tau must lie in [0,1], got {}", self.tau)));
        }
        Ok(())
    }

    /// A stable, file-name-safe identifier for reports and model metadata.
    pub fn id(&self, dataset: &Dataset) -> String {
        let labels: Vec<&str> = self
            .sensitive_labels
            .iter()
            .map(|&l| dataset.label_names()[l].as_str())
            .collect();
        let (_, attr) = dataset.attribute(&self.attribute).expect("validated spec");
        let cats: Vec<&str> = self
            .under_represented
            .iter()
            .map(|&c| attr.categories[c].as_str())
            .collect();
        format!("{}_{}_{}", labels.join("+"), self.attribute, cats.join("+"))
    }
}

/// Name-based spec as written in a spec file; resolved against a dataset to
/// produce an index-based [`BiasTaskSpec`].
#[derive(Debug, Clone, Deserialize)]
struct SpecFile {
    attribute: String,
    sensitive_labels: Vec<String>,
    under_represented: Vec<String>,
    #[serde(default = "default_tau")]
    tau: f64,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

/// Parses a spec file (TOML keys `attribute`, `sensitive_labels`,
/// `under_represented`, `tau`) and resolves the names against the dataset.
pub fn parse_spec(text: &str, dataset: &Dataset) -> Result<BiasTaskSpec> {
    let raw: SpecFile =
        toml::from_str(text).map_err(|e| Error::parse(0, format!("bias spec: {e}")))?;
    let (_, attr) = dataset.attribute(&raw.attribute)?;
    let mut sensitive_labels = BTreeSet::new();
    for name in &raw.sensitive_labels {
        let idx = dataset
            .label_index(name)
            .ok_or_else(|| Error::argument(format!("unknown label '{name}' in bias spec")))?;
        sensitive_labels.insert(idx);
    }
    let mut under_represented = BTreeSet::new();
    for name in &raw.under_represented {
        let idx = attr.category_index(name).ok_or_else(|| {
            Error::argument(format!(
                "unknown category '{name}' for attribute '{}' in bias spec",
                raw.attribute
            ))
        })?;
        under_represented.insert(idx);
    }
    let spec = BiasTaskSpec {
        attribute: raw.attribute,
        sensitive_labels,
        under_represented,
        tau: raw.tau,
    };
    spec.validate(dataset)?;
    Ok(spec)
}

/// The bias response labels a spec induces on a dataset.
///
/// `labels[i]` is `Some(true)` (response 1) when instance `i` has a sensitive
/// primary label and an under-represented identity value, `Some(false)`
/// (response 0) for a sensitive label with a dominating identity value, and
/// `None` when the instance is excluded (non-sensitive label or missing
/// identity). When the gate is closed all non-excluded labels are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasLabeling {
    pub active: bool,
    pub rho: f64,
    pub labels: Vec<Option<bool>>,
}

/// Computes the dataset-level association ratio and the per-instance bias
/// response labels for one spec. Errors when no instance carries a sensitive
/// label with a non-missing identity value (the ratio is undefined).
pub fn compute_bias_labels(dataset: &Dataset, spec: &BiasTaskSpec) -> Result<BiasLabeling> {
    spec.validate(dataset)?;
    let (attr_idx, _) = dataset.attribute(&spec.attribute)?;
    let mut sensitive = 0usize;
    let mut sensitive_under = 0usize;
    for inst in dataset.instances() {
        if !spec.sensitive_labels.contains(&inst.label) {
            continue;
        }
        let Some(cat) = inst.identity[attr_idx] else {
            continue;
        };
        sensitive += 1;
        if spec.under_represented.contains(&cat) {
            sensitive_under += 1;
        }
    }
    if sensitive == 0 {
        return Err(Error::EmptySupport(format!(
            "no instance with a sensitive label has a value for attribute '{}'",
            spec.attribute
        )));
    }
    let rho = sensitive_under as f64 / sensitive as f64;
    let active = rho > spec.tau;
    let labels = dataset
        .instances()
        .iter()
        .map(|inst| {
            if !spec.sensitive_labels.contains(&inst.label) {
                return None;
            }
            let cat = inst.identity[attr_idx]?;
            if active {
                Some(spec.under_represented.contains(&cat))
            } else {
                Some(false)
            }
        })
        .collect();
    Ok(BiasLabeling { active, rho, labels })
}

/// One row of an association audit: the empirical conditional
/// `rho = P(z = category | y = label)` and whether it clears the gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub label: usize,
    pub category: usize,
    pub rho: f64,
    pub active: bool,
    pub support: usize,
}

/// Scans every (label, category) pair of one attribute. Pairs whose label
/// never occurs with a non-missing identity value get rho = 0 with zero
/// support rather than an error, so the audit always covers the full grid.
pub fn audit_associations(dataset: &Dataset, attribute: &str, tau: f64) -> Result<Vec<AuditEntry>> {
    let (attr_idx, attr) = dataset.attribute(attribute)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::argument(format!("tau must lie in [0,1], got {tau}")));
    }
    let n_labels = dataset.label_names().len();
    let n_cats = attr.categories.len();
    let mut support = vec![0usize; n_labels];
    let mut joint = vec![vec![0usize; n_cats]; n_labels];
    for inst in dataset.instances() {
        if let Some(cat) = inst.identity[attr_idx] {
            support[inst.label] += 1;
            joint[inst.label][cat] += 1;
        }
    }
    let mut entries = Vec::with_capacity(n_labels * n_cats);
    for label in 0..n_labels {
        for category in 0..n_cats {
            let rho = if support[label] == 0 {
                0.0
            } else {
                joint[label][category] as f64 / support[label] as f64
            };
            entries.push(AuditEntry {
                label,
                category,
                rho,
                active: rho > tau,
                support: support[label],
            });
        }
    }
    Ok(entries)
}
