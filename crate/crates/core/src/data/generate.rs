//! Synthetic dataset generators.

use std::collections::BTreeMap;

use crate::data::{Dataset, IdentityAttribute, Instance};
use crate::error::{Error, Result};
use crate::nn::{gaussian_sample, Rng};

/// Parameters for the two-component isotropic 2D Gaussian mixture.
#[derive(Debug, Clone)]
pub struct Gmm2dParams {
    pub n_samples: usize,
    pub mu1: [f64; 2],
    pub mu2: [f64; 2],
    pub stddev: f64,
    pub priors: (f64, f64),
}

impl Default for Gmm2dParams {
    fn default() -> Self {
        Gmm2dParams {
            n_samples: 2000,
            mu1: [2.0, 1.0],
            mu2: [2.0, 4.0],
            stddev: 1.0,
            priors: (0.5, 0.5),
        }
    }
}

/// Boundary of the `halfplane` identity attribute: `upper` iff `x2 > 2`.
pub const HALFPLANE_BOUNDARY: f64 = 2.0;

/// Samples the two-component 2D mixture. Component 0 is labeled `red`,
/// component 1 `green`; each instance carries a derived `halfplane`
/// identity value (`upper` iff its second coordinate exceeds 2).
pub fn gen_gmm2d(seed: u64, params: &Gmm2dParams) -> Result<Dataset> {
    let (p1, p2) = params.priors;
    if !(p1 >= 0.0 && p2 >= 0.0) || (p1 + p2 - 1.0).abs() > 1e-9 {
        return Err(Error::argument(format!(
            "priors must be nonnegative and sum to 1, got ({p1}, {p2})"
        )));
    }
    if params.n_samples == 0 {
        return Err(Error::argument("n_samples must be positive"));
    }
    let halfplane = IdentityAttribute::new("halfplane", &["lower", "upper"], false)?;
    let mut ds = Dataset::new(
        2,
        vec!["red".to_string(), "green".to_string()],
        vec![halfplane],
    )?;
    let mut rng = Rng::new(seed);
    for _ in 0..params.n_samples {
        let component = if rng.next_f64() < p1 { 0 } else { 1 };
        let mean = if component == 0 { &params.mu1 } else { &params.mu2 };
        let features = gaussian_sample(&mut rng, mean, params.stddev)?;
        let upper = features[1] > HALFPLANE_BOUNDARY;
        ds.push(Instance {
            features,
            label: component,
            identity: vec![Some(usize::from(upper))],
        })?;
    }
    Ok(ds)
}

/// One cell of a planted-bias design: `count` vectors drawn from an isotropic
/// Gaussian centered at `mean`, all carrying the given primary label and
/// identity values. Attributes absent from `identity` are missing.
#[derive(Debug, Clone)]
pub struct PlantedCell {
    pub label: String,
    pub identity: BTreeMap<String, String>,
    pub count: usize,
    pub mean: Vec<f64>,
    pub stddev: f64,
}

/// Generates a dataset from explicit cells. Planting an identity-correlated
/// mean direction makes the identity recoverable from the features, which is
/// exactly what a bias-agnostic model will exploit.
pub fn gen_planted_bias(
    seed: u64,
    d: usize,
    label_names: &[String],
    attributes: &[IdentityAttribute],
    cells: &[PlantedCell],
) -> Result<Dataset> {
    if d == 0 {
        return Err(Error::argument("d must be positive"));
    }
    let mut ds = Dataset::new(d, label_names.to_vec(), attributes.to_vec())?;
    let mut rng = Rng::new(seed);
    for (ci, cell) in cells.iter().enumerate() {
        if cell.count == 0 {
            return Err(Error::argument(format!("cell {ci} has count 0")));
        }
        if cell.mean.len() != d {
            return Err(Error::argument(format!(
                "cell {ci} mean has length {}, expected {d}",
                cell.mean.len()
            )));
        }
        let label = ds
            .label_index(&cell.label)
            .ok_or_else(|| Error::argument(format!("cell {ci}: unknown label '{}'", cell.label)))?;
        let mut identity = vec![None; attributes.len()];
        for (attr_name, cat_name) in &cell.identity {
            let (ai, attr) = ds.attribute(attr_name)?;
            let cat = attr.category_index(cat_name).ok_or_else(|| {
                Error::argument(format!(
                    "cell {ci}: unknown category '{cat_name}' for attribute '{attr_name}'"
                ))
            })?;
            identity[ai] = Some(cat);
        }
        for _ in 0..cell.count {
            let features = gaussian_sample(&mut rng, &cell.mean, cell.stddev)?;
            ds.push(Instance {
                features,
                label,
                identity: identity.clone(),
            })?;
        }
    }
    Ok(ds)
}
