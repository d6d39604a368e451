//! Stratified train/test splitting.

use std::collections::BTreeMap;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::Rng;

/// Number of cell instances that go to the training side. Fractional
/// instances round toward train; near-integer products are snapped first so
/// e.g. 0.8 of 10 is exactly 8.
fn train_count(n: usize, fraction: f64) -> usize {
    let raw = fraction * n as f64;
    ((raw - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Splits into (train, test), stratified by the full (label, identity
/// values) cell so both sides keep the dataset's joint composition. The
/// shuffle within each cell is seeded; instance order is preserved in the
/// outputs.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::argument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut cells: BTreeMap<(usize, Vec<Option<usize>>), Vec<usize>> = BTreeMap::new();
    for (i, inst) in dataset.instances().iter().enumerate() {
        cells
            .entry((inst.label, inst.identity.clone()))
            .or_default()
            .push(i);
    }
    let mut rng = Rng::new(seed);
    let mut to_train = vec![false; dataset.len()];
    for indices in cells.into_values() {
        let mut indices = indices;
        rng.shuffle(&mut indices);
        let n_train = train_count(indices.len(), train_fraction);
        for &i in &indices[..n_train] {
            to_train[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, inst) in dataset.instances().iter().enumerate() {
        if to_train[i] {
            train.push(inst.clone());
        } else {
            test.push(inst.clone());
        }
    }
    Ok((
        dataset.with_instances(train),
        dataset.with_instances(test),
    ))
}
