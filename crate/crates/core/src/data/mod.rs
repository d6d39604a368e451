//! Dataset representation and the operations that produce datasets:
//! CSV ingestion, synthetic generators, biased subsampling, stratified
//! splitting, and identity-feature concatenation.
//!
//! Datasets are immutable once built; every operation returns a new one.
//! Identity attributes are metadata alongside the feature vectors -- they are
//! never model inputs unless explicitly concatenated via
//! [`Dataset::append_identity_feature`].

mod csv_io;
mod generate;
mod split;
mod subsample;

pub use csv_io::{infer_schema, load_csv, write_csv, write_csv_path, CsvSchema};
pub use generate::{gen_gmm2d, gen_planted_bias, Gmm2dParams, PlantedCell};
pub use split::split;
pub use subsample::{subsample, PlanEntry, SubsamplePlan};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Missing-value spelling accepted in CSV attribute cells (besides empty).
pub const MISSING_TOKEN: &str = "NA";

/// A categorical social-identity attribute (e.g. gender), with its ordered
/// category names. Categories map to indices `0..categories.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityAttribute {
    pub name: String,
    pub categories: Vec<String>,
    pub missing_allowed: bool,
}

impl IdentityAttribute {
    pub fn new(name: &str, categories: &[&str], missing_allowed: bool) -> Result<Self> {
        let attr = IdentityAttribute {
            name: name.to_string(),
            categories: categories.iter().map(|c| c.to_string()).collect(),
            missing_allowed,
        };
        attr.validate()?;
        Ok(attr)
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.len() < 2 {
            return Err(Error::argument(format!(
                "attribute '{}' needs at least 2 categories",
                self.name
            )));
        }
        for (i, c) in self.categories.iter().enumerate() {
            if self.categories[..i].contains(c) {
                return Err(Error::argument(format!(
                    "attribute '{}' has duplicate category '{c}'",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == name)
    }
}

/// One observation: a feature vector, a primary label index, and one value
/// (possibly missing) per identity attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub features: Vec<f64>,
    pub label: usize,
    pub identity: Vec<Option<usize>>,
}

/// A fixed-dimension dataset with named labels and identity attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    label_names: Vec<String>,
    attributes: Vec<IdentityAttribute>,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(
        dim: usize,
        label_names: Vec<String>,
        attributes: Vec<IdentityAttribute>,
    ) -> Result<Dataset> {
        if dim == 0 {
            return Err(Error::argument("dataset dimension must be positive"));
        }
        if label_names.is_empty() {
            return Err(Error::argument("dataset needs at least one label name"));
        }
        for (i, l) in label_names.iter().enumerate() {
            if label_names[..i].contains(l) {
                return Err(Error::argument(format!("duplicate label name '{l}'")));
            }
        }
        for attr in &attributes {
            attr.validate()?;
        }
        Ok(Dataset {
            dim,
            label_names,
            attributes,
            instances: Vec::new(),
        })
    }

    /// Appends an instance, enforcing the dataset invariants.
    pub fn push(&mut self, instance: Instance) -> Result<()> {
        if instance.features.len() != self.dim {
            return Err(Error::shape(
                "push",
                format!("features of length {}", instance.features.len()),
                format!("dataset dimension {}", self.dim),
            ));
        }
        if instance.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("features must be finite"));
        }
        if instance.label >= self.label_names.len() {
            return Err(Error::argument(format!(
                "label index {} out of range (have {} labels)",
                instance.label,
                self.label_names.len()
            )));
        }
        if instance.identity.len() != self.attributes.len() {
            return Err(Error::argument(format!(
                "instance has {} identity values, dataset declares {} attributes",
                instance.identity.len(),
                self.attributes.len()
            )));
        }
        for (value, attr) in instance.identity.iter().zip(&self.attributes) {
            if let Some(v) = value {
                if *v >= attr.categories.len() {
                    return Err(Error::argument(format!(
                        "category index {v} out of range for attribute '{}'",
                        attr.name
                    )));
                }
            }
        }
        self.instances.push(instance);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn attributes(&self) -> &[IdentityAttribute] {
        &self.attributes
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, i: usize) -> &Instance {
        &self.instances[i]
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.label_names.iter().position(|l| l == name)
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Result<(usize, &IdentityAttribute)> {
        self.attribute_index(name)
            .map(|i| (i, &self.attributes[i]))
            .ok_or_else(|| Error::argument(format!("unknown attribute '{name}'")))
    }

    /// Number of instances with the given label and attribute category.
    pub fn cell_count(&self, label: usize, attribute: usize, category: usize) -> usize {
        self.instances
            .iter()
            .filter(|inst| inst.label == label && inst.identity[attribute] == Some(category))
            .count()
    }

    /// Builds a same-shape dataset holding the given instances (used by the
    /// subsampler and splitter).
    pub(crate) fn with_instances(&self, instances: Vec<Instance>) -> Dataset {
        Dataset {
            dim: self.dim,
            label_names: self.label_names.clone(),
            attributes: self.attributes.clone(),
            instances,
        }
    }

    /// Returns a new dataset with the named attribute one-hot encoded and
    /// appended to every feature vector (missing value -> all-zero block).
    /// The attribute itself stays in the metadata.
    pub fn append_identity_feature(&self, attribute: &str) -> Result<Dataset> {
        let (idx, attr) = self.attribute(attribute)?;
        let block = attr.categories.len();
        let mut out = Dataset::new(
            self.dim + block,
            self.label_names.clone(),
            self.attributes.clone(),
        )?;
        for inst in &self.instances {
            let mut features = Vec::with_capacity(self.dim + block);
            features.extend_from_slice(&inst.features);
            let mut onehot = vec![0.0; block];
            if let Some(cat) = inst.identity[idx] {
                onehot[cat] = 1.0;
            }
            features.extend_from_slice(&onehot);
            out.push(Instance {
                features,
                label: inst.label,
                identity: inst.identity.clone(),
            })?;
        }
        Ok(out)
    }
}
