//! Experiment configuration: a TOML file with flat key-value sections, all
//! of it overridable by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use fairmtl::error::{Error, Result};
use fairmtl::model::{Activation, BiasMode, TrainConfig};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tau: Option<f64>,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub specs: Vec<PathBuf>,
    #[serde(default)]
    pub methods: Vec<String>,
    #[serde(default)]
    pub queries: Vec<String>,
    pub alpha_literal: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub source: Option<String>,
    pub path: Option<PathBuf>,
    pub cells: Option<PathBuf>,
    pub n: Option<usize>,
    pub mu1: Option<[f64; 2]>,
    pub mu2: Option<[f64; 2]>,
    pub stddev: Option<f64>,
    pub priors: Option<[f64; 2]>,
    pub plan: Option<PathBuf>,
    pub split: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub p: Option<usize>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub lambda: Option<f64>,
    pub l2: Option<f64>,
    pub bias_mode: Option<BiasMode>,
    pub offsets: Option<bool>,
    pub activation: Option<Activation>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            line: 0,
            message: format!("config file {}: {e}", path.display()),
        })
    }
}

/// Where the dataset comes from, after config/flag resolution.
#[derive(Debug, Clone)]
pub enum DataSource {
    Csv(PathBuf),
    Gmm2d {
        n: usize,
        mu1: [f64; 2],
        mu2: [f64; 2],
        stddev: f64,
        priors: (f64, f64),
    },
    Planted(PathBuf),
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub seed: u64,
    pub out: PathBuf,
    pub tau: Option<f64>,
    pub source: Option<DataSource>,
    pub plan: Option<PathBuf>,
    pub split: f64,
    pub train: TrainConfig,
    pub specs: Vec<PathBuf>,
    pub methods: Vec<String>,
    pub queries: Vec<String>,
    pub alpha_literal: bool,
}

/// Flag-level overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
    pub p: Option<usize>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub l2: Option<f64>,
    pub bias_mode: Option<BiasMode>,
    pub data: Option<PathBuf>,
    pub split: Option<f64>,
    pub plan: Option<PathBuf>,
    pub specs: Vec<PathBuf>,
    pub methods: Vec<String>,
    pub queries: Vec<String>,
    pub alpha_literal: bool,
}

pub fn resolve(file: FileConfig, flags: &Overrides) -> Result<Experiment> {
    let mut train = TrainConfig::default();
    let t = &file.train;
    if let Some(p) = flags.p.or(t.p) {
        train.shared_dim = p;
    }
    if let Some(lr) = flags.lr.or(t.lr) {
        train.learning_rate = lr;
    }
    if let Some(epochs) = flags.epochs.or(t.epochs) {
        train.epochs = epochs;
    }
    if let Some(batch) = flags.batch.or(t.batch) {
        train.batch_size = batch;
    }
    if let Some(lambda) = flags.lambda.or(t.lambda) {
        train.lambda = lambda;
    }
    if let Some(l2) = flags.l2.or(t.l2) {
        train.l2 = l2;
    }
    if let Some(mode) = flags.bias_mode.or(t.bias_mode) {
        train.bias_mode = mode;
    }
    if let Some(offsets) = t.offsets {
        train.offsets = offsets;
    }
    if let Some(activation) = t.activation {
        train.activation = activation;
    }
    train.validate()?;

    let d = &file.dataset;
    let source = if let Some(path) = flags.data.clone() {
        Some(DataSource::Csv(path))
    } else {
        match d.source.as_deref() {
            None => d.path.clone().map(DataSource::Csv),
            Some("csv") => Some(DataSource::Csv(d.path.clone().ok_or_else(|| {
                Error::Argument("dataset.source = \"csv\" needs dataset.path".to_string())
            })?)),
            Some("gmm2d") => Some(DataSource::Gmm2d {
                n: d.n.unwrap_or(2000),
                mu1: d.mu1.unwrap_or([2.0, 1.0]),
                mu2: d.mu2.unwrap_or([2.0, 4.0]),
                stddev: d.stddev.unwrap_or(1.0),
                priors: d.priors.map_or((0.5, 0.5), |p| (p[0], p[1])),
            }),
            Some("planted") => Some(DataSource::Planted(d.cells.clone().ok_or_else(|| {
                Error::Argument("dataset.source = \"planted\" needs dataset.cells".to_string())
            })?)),
            Some(other) => {
                return Err(Error::Argument(format!(
                    "unknown dataset source '{other}' (expected csv, gmm2d, or planted)"
                )))
            }
        }
    };

    let mut specs = file.specs;
    if !flags.specs.is_empty() {
        specs = flags.specs.clone();
    }
    let mut methods = file.methods;
    if !flags.methods.is_empty() {
        methods = flags.methods.clone();
    }
    let mut queries = file.queries;
    if !flags.queries.is_empty() {
        queries = flags.queries.clone();
    }

    Ok(Experiment {
        seed: flags.seed.or(file.seed).unwrap_or(0),
        out: flags
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from(".")),
        tau: flags.tau.or(file.tau),
        source,
        plan: flags.plan.clone().or(d.plan.clone()),
        split: flags.split.or(d.split).unwrap_or(0.8),
        train,
        specs,
        methods,
        queries,
        alpha_literal: flags.alpha_literal || file.alpha_literal.unwrap_or(false),
    })
}
