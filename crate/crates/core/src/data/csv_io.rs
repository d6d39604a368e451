//! Dataset CSV ingestion and export.
//!
//! Layout: header `f0,...,f{d-1},label,<attr1>,...,<attrn>`; features are
//! decimal reals, label and attribute cells are category names, a missing
//! attribute value is an empty cell or `NA`. UTF-8, comma separated, `\n`
//! line endings.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::data::{Dataset, IdentityAttribute, Instance, MISSING_TOKEN};
use crate::error::{Error, Result};

/// Column declarations a CSV file must match: feature dimension, the legal
/// label names, and the attributes with their legal categories.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub dim: usize,
    pub label_names: Vec<String>,
    pub attributes: Vec<IdentityAttribute>,
}

impl CsvSchema {
    pub fn of(dataset: &Dataset) -> CsvSchema {
        CsvSchema {
            dim: dataset.dim(),
            label_names: dataset.label_names().to_vec(),
            attributes: dataset.attributes().to_vec(),
        }
    }

    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = (0..self.dim).map(|i| format!("f{i}")).collect();
        h.push("label".to_string());
        h.extend(self.attributes.iter().map(|a| a.name.clone()));
        h
    }
}

/// Loads a dataset, validating every row against the schema. Parse errors
/// carry the 1-based line number of the offending row.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let file = File::open(path)?;
    load_csv_reader(BufReader::new(file), schema)
}

pub fn load_csv_reader<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let expected = schema.header();
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    let got: Vec<&str> = header.iter().collect();
    if got != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::parse(
            1,
            format!("header mismatch: expected {:?}, got {:?}", expected, got),
        ));
    }

    let mut dataset = Dataset::new(
        schema.dim,
        schema.label_names.clone(),
        schema.attributes.clone(),
    )?;
    let width = schema.dim + 1 + schema.attributes.len();

    for (i, record) in rdr.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
        if record.len() != width {
            return Err(Error::parse(
                line,
                format!("expected {width} fields, got {}", record.len()),
            ));
        }
        let mut features = Vec::with_capacity(schema.dim);
        for j in 0..schema.dim {
            let cell = &record[j];
            let value: f64 = cell.trim().parse().map_err(|_| {
                Error::parse(line, format!("non-numeric feature f{j}: '{cell}'"))
            })?;
            if !value.is_finite() {
                return Err(Error::parse(line, format!("non-finite feature f{j}")));
            }
            features.push(value);
        }
        let label_cell = record[schema.dim].trim();
        let label = schema
            .label_names
            .iter()
            .position(|l| l == label_cell)
            .ok_or_else(|| Error::parse(line, format!("unknown label '{label_cell}'")))?;
        let mut identity = Vec::with_capacity(schema.attributes.len());
        for (a, attr) in schema.attributes.iter().enumerate() {
            let cell = record[schema.dim + 1 + a].trim();
            if cell.is_empty() || cell == MISSING_TOKEN {
                identity.push(None);
            } else {
                let cat = attr.category_index(cell).ok_or_else(|| {
                    Error::parse(
                        line,
                        format!("unknown category '{cell}' for attribute '{}'", attr.name),
                    )
                })?;
                identity.push(Some(cat));
            }
        }
        dataset
            .push(Instance {
                features,
                label,
                identity,
            })
            .map_err(|e| Error::parse(line, e.to_string()))?;
    }
    Ok(dataset)
}

/// Writes the dataset in the declared CSV layout. Floats are printed with
/// the shortest representation that round-trips, so a reload is lossless.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let schema = CsvSchema::of(dataset);
    wtr.write_record(schema.header())?;
    for inst in dataset.instances() {
        let mut record: Vec<String> = inst.features.iter().map(|v| v.to_string()).collect();
        record.push(dataset.label_names()[inst.label].clone());
        for (value, attr) in inst.identity.iter().zip(dataset.attributes()) {
            record.push(match value {
                Some(c) => attr.categories[*c].clone(),
                None => MISSING_TOKEN.to_string(),
            });
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_csv_path(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    write_csv(dataset, file)
}

/// Scans a CSV file and derives a schema from its contents: dimension from
/// the header, label and category vocabularies from the cells in sorted
/// order (so the schema does not depend on row order). Inferred attributes
/// always allow missing values.
pub fn infer_schema(path: &Path) -> Result<CsvSchema> {
    let file = File::open(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    let cols: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    let mut dim = 0;
    while dim < cols.len() && cols[dim] == format!("f{dim}") {
        dim += 1;
    }
    if dim == 0 || dim >= cols.len() || cols[dim] != "label" {
        return Err(Error::parse(
            1,
            "header must start with f0,...,f{d-1},label".to_string(),
        ));
    }
    let attr_names: Vec<String> = cols[dim + 1..].to_vec();
    let mut labels = BTreeSet::new();
    let mut categories: Vec<BTreeSet<String>> = vec![BTreeSet::new(); attr_names.len()];
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
        if record.len() != cols.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, got {}", cols.len(), record.len()),
            ));
        }
        labels.insert(record[dim].trim().to_string());
        for (a, set) in categories.iter_mut().enumerate() {
            let cell = record[dim + 1 + a].trim();
            if !cell.is_empty() && cell != MISSING_TOKEN {
                set.insert(cell.to_string());
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::parse(0, "no data rows to infer labels from".to_string()));
    }
    let attributes = attr_names
        .into_iter()
        .zip(categories)
        .map(|(name, cats)| IdentityAttribute {
            name,
            categories: cats.into_iter().collect(),
            missing_allowed: true,
        })
        .collect();
    Ok(CsvSchema {
        dim,
        label_names: labels.into_iter().collect(),
        attributes,
    })
}
