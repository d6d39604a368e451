//! Command-line harness for bias-aware multi-objective classification
//! experiments: dataset generation, association auditing, training,
//! evaluation, method comparison sweeps, and decision-boundary export.

mod commands;
mod config;
mod data_source;
mod io_util;
mod methods;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fairmtl::error::Error;
use fairmtl::model::BiasMode;

use commands::BoundaryArgs;
use config::{DataSource, Experiment, FileConfig, Overrides};

#[derive(Parser)]
#[command(name = "fairmtl", version, about = "Bias-aware multi-objective classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    globals: GlobalArgs,
}

#[derive(Args)]
struct GlobalArgs {
    /// Master seed; all randomness derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment config file (TOML). Flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Association gate threshold override.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Bias-term weight.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Shared layer width.
    #[arg(long, global = true)]
    p: Option<usize>,
    /// Learning rate.
    #[arg(long, global = true)]
    lr: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    batch: Option<usize>,
    /// Weight decay coefficient.
    #[arg(long, global = true)]
    l2: Option<f64>,
    #[arg(long = "bias-mode", global = true, value_parser = parse_bias_mode)]
    bias_mode: Option<BiasMode>,
    /// Shared-width sweep for `compare`, as lo:hi:step.
    #[arg(long = "p-grid", global = true)]
    p_grid: Option<String>,
    /// Dataset CSV path (shorthand for a csv source).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Train fraction of the stratified split.
    #[arg(long, global = true)]
    split: Option<f64>,
    /// Subsample plan file.
    #[arg(long, global = true)]
    plan: Option<PathBuf>,
    /// Bias task spec file (repeatable).
    #[arg(long = "spec", global = true)]
    specs: Vec<PathBuf>,
    /// Method to run (repeatable for `compare`).
    #[arg(long = "method", global = true)]
    methods: Vec<String>,
    /// Association query `label,attribute,cat[+cat]` (repeatable).
    #[arg(long = "query", global = true)]
    queries: Vec<String>,
    /// Evaluate alpha as P(pred = l | z in U) instead of P(z in U | pred = l).
    #[arg(long = "alpha-literal", global = true)]
    alpha_literal: bool,
}

fn parse_bias_mode(text: &str) -> Result<BiasMode, String> {
    match text {
        "inverted" => Ok(BiasMode::Inverted),
        "subtractive" => Ok(BiasMode::Subtractive),
        other => Err(format!("unknown bias mode '{other}' (inverted | subtractive)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Print the association ratio of every (label, category) pair.
    Audit {
        /// Restrict to one identity attribute.
        #[arg(long)]
        attribute: Option<String>,
    },
    /// Train one method; writes the model file and its loss trace.
    Train,
    /// Evaluate a saved model on the configured test split.
    Eval {
        #[arg(long)]
        model: PathBuf,
    },
    /// Train and evaluate every configured method on one shared split.
    Compare,
    /// Export a prediction grid for a 2D-input model.
    Boundary {
        #[arg(long)]
        model: PathBuf,
        /// x1 range as lo:hi.
        #[arg(long = "x1-range", default_value = "-1:5")]
        x1_range: String,
        /// x2 range as lo:hi.
        #[arg(long = "x2-range", default_value = "-2:7")]
        x2_range: String,
        /// Grid points per axis.
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        /// Label whose probability is exported (defaults to the last label).
        #[arg(long = "positive-label")]
        positive_label: Option<String>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Two-component isotropic 2D Gaussian mixture.
    Gmm2d {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// First component mean, as x1,x2.
        #[arg(long, default_value = "2,1")]
        mu1: String,
        /// Second component mean, as x1,x2.
        #[arg(long, default_value = "2,4")]
        mu2: String,
        #[arg(long, default_value_t = 1.0)]
        stddev: f64,
        /// Component priors, as p1,p2.
        #[arg(long, default_value = "0.5,0.5")]
        priors: String,
    },
    /// Planted-bias Gaussian cells from a TOML cells file.
    Planted {
        #[arg(long)]
        cells: PathBuf,
    },
}

fn parse_pair(text: &str, what: &str) -> Result<[f64; 2], Error> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Argument(format!(
            "{what} must be two comma-separated numbers, got '{text}'"
        )));
    }
    let a = parts[0]
        .parse()
        .map_err(|_| Error::Argument(format!("bad {what} component '{}'", parts[0])))?;
    let b = parts[1]
        .parse()
        .map_err(|_| Error::Argument(format!("bad {what} component '{}'", parts[1])))?;
    Ok([a, b])
}

fn parse_range(text: &str, what: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Argument(format!("{what} must be lo:hi, got '{text}'")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Argument(format!("bad {what} bound '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Argument(format!("bad {what} bound '{}'", parts[1])))?;
    if hi <= lo {
        return Err(Error::Argument(format!("{what} must satisfy lo < hi")));
    }
    Ok((lo, hi))
}

fn overrides_from(globals: &GlobalArgs) -> Overrides {
    Overrides {
        seed: globals.seed,
        out: globals.out.clone(),
        tau: globals.tau,
        lambda: globals.lambda,
        p: globals.p,
        lr: globals.lr,
        epochs: globals.epochs,
        batch: globals.batch,
        l2: globals.l2,
        bias_mode: globals.bias_mode,
        data: globals.data.clone(),
        split: globals.split,
        plan: globals.plan.clone(),
        specs: globals.specs.clone(),
        methods: globals.methods.clone(),
        queries: globals.queries.clone(),
        alpha_literal: globals.alpha_literal,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = match &cli.globals.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = overrides_from(&cli.globals);
    let mut exp: Experiment = config::resolve(file, &flags)?;

    match cli.command {
        Command::Gen { kind } => {
            let out_name = match kind {
                GenKind::Gmm2d {
                    n,
                    mu1,
                    mu2,
                    stddev,
                    priors,
                } => {
                    let priors = parse_pair(&priors, "priors")?;
                    exp.source = Some(DataSource::Gmm2d {
                        n,
                        mu1: parse_pair(&mu1, "mu1")?,
                        mu2: parse_pair(&mu2, "mu2")?,
                        stddev,
                        priors: (priors[0], priors[1]),
                    });
                    "gmm2d.csv"
                }
                GenKind::Planted { cells } => {
                    exp.source = Some(DataSource::Planted(cells));
                    "planted.csv"
                }
            };
            commands::cmd_gen(&exp, out_name)
        }
        Command::Audit { attribute } => commands::cmd_audit(&exp, attribute.as_deref()),
        Command::Train => {
            let method = single_method(&exp)?;
            commands::cmd_train(&exp, &method)
        }
        Command::Eval { model } => {
            let method = if exp.methods.is_empty() {
                "agnostic".to_string()
            } else {
                single_method(&exp)?
            };
            commands::cmd_eval(&exp, &model, &method)
        }
        Command::Compare => commands::cmd_compare(&exp, cli.globals.p_grid.as_deref()),
        Command::Boundary {
            model,
            x1_range,
            x2_range,
            resolution,
            positive_label,
        } => commands::cmd_boundary(
            &exp,
            &BoundaryArgs {
                model,
                x1_range: parse_range(&x1_range, "x1-range")?,
                x2_range: parse_range(&x2_range, "x2-range")?,
                resolution,
                positive_label,
            },
        ),
    }
}

fn single_method(exp: &Experiment) -> Result<String, Error> {
    match exp.methods.as_slice() {
        [one] => Ok(one.clone()),
        [] => Err(Error::Argument("no --method given".to_string())),
        many => Err(Error::Argument(format!(
            "expected exactly one --method, got {}",
            many.len()
        ))),
    }
}

// Exit codes: 0 success, 2 validation error, 3 runtime/divergence, 4 I/O.
fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Divergence { .. } => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}
