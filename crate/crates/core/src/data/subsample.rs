//! Biased subsampling: trims chosen (label, attribute, category) cells down
//! to target counts, leaving every other instance untouched.

use std::fmt;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::Rng;

/// One subsampling target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub label: String,
    pub attribute: String,
    pub category: String,
    pub count: usize,
}

/// An ordered list of targets. Entries are applied in order; each sees the
/// effect of the ones before it, which is how overlapping cells (an instance
/// belongs to one cell per attribute) are resolved.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubsamplePlan {
    pub entries: Vec<PlanEntry>,
}

impl SubsamplePlan {
    /// Parses the plan file format: one `label,attribute,category,count` line
    /// per cell. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<SubsamplePlan> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(Error::parse(
                    i + 1,
                    format!("expected 'label,attribute,category,count', got '{line}'"),
                ));
            }
            let count: usize = parts[3]
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad count '{}'", parts[3])))?;
            entries.push(PlanEntry {
                label: parts[0].to_string(),
                attribute: parts[1].to_string(),
                category: parts[2].to_string(),
                count,
            });
        }
        Ok(SubsamplePlan { entries })
    }
}

impl fmt::Display for SubsamplePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{},{},{},{}", e.label, e.attribute, e.category, e.count)?;
        }
        Ok(())
    }
}

/// Applies the plan: for each entry, keeps a uniform without-replacement
/// selection of exactly `count` instances from that cell and drops the rest.
/// Cells not mentioned by any entry are kept in full. Instance order is
/// preserved.
pub fn subsample(dataset: &Dataset, plan: &SubsamplePlan, seed: u64) -> Result<Dataset> {
    let mut kept = vec![true; dataset.len()];
    let mut rng = Rng::new(seed);
    for entry in &plan.entries {
        let label = dataset
            .label_index(&entry.label)
            .ok_or_else(|| Error::argument(format!("unknown label '{}'", entry.label)))?;
        let (attr_idx, attr) = dataset.attribute(&entry.attribute)?;
        let category = attr.category_index(&entry.category).ok_or_else(|| {
            Error::argument(format!(
                "unknown category '{}' for attribute '{}'",
                entry.category, entry.attribute
            ))
        })?;
        let mut members: Vec<usize> = (0..dataset.len())
            .filter(|&i| {
                kept[i]
                    && dataset.instance(i).label == label
                    && dataset.instance(i).identity[attr_idx] == Some(category)
            })
            .collect();
        if members.len() < entry.count {
            return Err(Error::Capacity {
                label: entry.label.clone(),
                attribute: entry.attribute.clone(),
                category: entry.category.clone(),
                wanted: entry.count,
                available: members.len(),
            });
        }
        rng.shuffle(&mut members);
        for &drop in &members[entry.count..] {
            kept[drop] = false;
        }
    }
    let instances = dataset
        .instances()
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(inst, _)| inst.clone())
        .collect();
    Ok(dataset.with_instances(instances))
}
