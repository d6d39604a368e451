//! The six subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fairmtl::bias::{audit_associations, parse_spec, BiasTaskSpec, DEFAULT_TAU};
use fairmtl::data::{split, write_csv, Dataset};
use fairmtl::error::{Error, Result};
use fairmtl::metrics::{AlphaMode, AssociationQuery, MetricsReport};
use fairmtl::model::MultiObjectiveModel;

use crate::config::{DataSource, Experiment};
use crate::data_source::{acquire_dataset, SeedSchedule};
use crate::io_util::{atomic_write, fmt4, fmt_full, fmt_opt4, sanitize};
use crate::methods::{eval_dataset, run_method, Method};

fn resolve_queries(exp: &Experiment, dataset: &Dataset) -> Result<Vec<AssociationQuery>> {
    exp.queries
        .iter()
        .map(|q| AssociationQuery::parse(q, dataset))
        .collect()
}

/// Loads spec files and resolves their names against the dataset. A global
/// `--tau` overrides every spec's threshold.
fn resolve_specs(exp: &Experiment, dataset: &Dataset) -> Result<Vec<BiasTaskSpec>> {
    exp.specs
        .iter()
        .map(|path| {
            let text = std::fs::read_to_string(path)?;
            let mut spec = parse_spec(&text, dataset)?;
            if let Some(tau) = exp.tau {
                spec.tau = tau;
            }
            spec.validate(dataset)?;
            Ok(spec)
        })
        .collect()
}

fn alpha_mode(exp: &Experiment) -> AlphaMode {
    if exp.alpha_literal {
        AlphaMode::Literal
    } else {
        AlphaMode::Predicted
    }
}

fn print_dataset_summary(dataset: &Dataset) {
    println!("instances: {}  dimension: {}", dataset.len(), dataset.dim());
    for (attr_idx, attr) in dataset.attributes().iter().enumerate() {
        for (label_idx, label) in dataset.label_names().iter().enumerate() {
            let mut cells = Vec::new();
            for (cat_idx, cat) in attr.categories.iter().enumerate() {
                let n = dataset.cell_count(label_idx, attr_idx, cat_idx);
                cells.push(format!("{cat}={n}"));
            }
            let missing = dataset
                .instances()
                .iter()
                .filter(|inst| inst.label == label_idx && inst.identity[attr_idx].is_none())
                .count();
            println!("cell {label} x {}: {} missing={missing}", attr.name, cells.join(" "));
        }
    }
}

pub fn cmd_gen(exp: &Experiment, out_name: &str) -> Result<()> {
    let seeds = SeedSchedule::new(exp.seed);
    let dataset = acquire_dataset(exp, &seeds)?;
    let mut buffer = Vec::new();
    write_csv(&dataset, &mut buffer)?;
    let path = exp.out.join(out_name);
    atomic_write(&path, &buffer)?;
    println!("wrote {}", path.display());
    print_dataset_summary(&dataset);
    Ok(())
}

pub fn cmd_audit(exp: &Experiment, attribute: Option<&str>) -> Result<()> {
    let seeds = SeedSchedule::new(exp.seed);
    let dataset = acquire_dataset(exp, &seeds)?;
    let tau = exp.tau.unwrap_or(DEFAULT_TAU);
    let attributes: Vec<String> = match attribute {
        Some(name) => vec![name.to_string()],
        None => dataset.attributes().iter().map(|a| a.name.clone()).collect(),
    };
    println!("tau = {tau}");
    for attr_name in attributes {
        let (_, attr) = dataset.attribute(&attr_name)?;
        let categories = attr.categories.clone();
        for entry in audit_associations(&dataset, &attr_name, tau)? {
            println!(
                "attribute={attr_name} label={} category={} rho={} support={} active={}",
                dataset.label_names()[entry.label],
                categories[entry.category],
                fmt4(entry.rho),
                entry.support,
                entry.active
            );
        }
    }
    Ok(())
}

struct Pipeline {
    seeds: SeedSchedule,
    train_ds: Dataset,
    test_ds: Dataset,
    specs: Vec<BiasTaskSpec>,
    queries: Vec<AssociationQuery>,
}

fn build_pipeline(exp: &Experiment) -> Result<Pipeline> {
    let seeds = SeedSchedule::new(exp.seed);
    let dataset = acquire_dataset(exp, &seeds)?;
    let (train_ds, test_ds) = split(&dataset, exp.split, seeds.split())?;
    let specs = resolve_specs(exp, &train_ds)?;
    let queries = resolve_queries(exp, &test_ds)?;
    Ok(Pipeline {
        seeds,
        train_ds,
        test_ds,
        specs,
        queries,
    })
}

pub fn cmd_train(exp: &Experiment, method_text: &str) -> Result<()> {
    let method = Method::parse(method_text)?;
    let pipe = build_pipeline(exp)?;
    let run = run_method(
        &method,
        &pipe.train_ds,
        &pipe.test_ds,
        &pipe.specs,
        &exp.train,
        &pipe.queries,
        alpha_mode(exp),
        pipe.seeds.train(&method.id()),
    )?;
    let tag = sanitize(&method.id());
    let model_path = exp.out.join(format!("model_{tag}.json"));
    atomic_write(&model_path, run.model.to_json().as_bytes())?;
    let mut trace = String::from("epoch,loss\n");
    for (epoch, loss) in run.loss_trace.iter().enumerate() {
        let _ = writeln!(trace, "{epoch},{loss}");
    }
    let trace_path = exp.out.join(format!("loss_{tag}.csv"));
    atomic_write(&trace_path, trace.as_bytes())?;
    println!("wrote {}", model_path.display());
    println!("wrote {}", trace_path.display());
    println!(
        "method={} bias_heads={} final_loss={}",
        method.id(),
        run.active_heads,
        run.loss_trace.last().map_or("NA".to_string(), |l| l.to_string())
    );
    Ok(())
}

fn print_report(report: &MetricsReport) {
    println!("accuracy = {}", fmt4(report.accuracy));
    for assoc in &report.associations {
        println!(
            "label={} attribute={} U={} alpha={} fairness={} gamma={} support={}{}",
            assoc.label_name,
            assoc.attribute,
            assoc.under.join("+"),
            fmt_opt4(assoc.alpha),
            fmt_opt4(assoc.fairness),
            fmt_opt4(assoc.gamma),
            assoc.support,
            if assoc.flags.is_empty() {
                String::new()
            } else {
                format!(" flags={}", assoc.flags.join(","))
            }
        );
    }
}

pub fn cmd_eval(exp: &Experiment, model_path: &Path, method_text: &str) -> Result<()> {
    let method = Method::parse(method_text)?;
    let pipe = build_pipeline(exp)?;
    let model = MultiObjectiveModel::load(model_path)?;
    let eval_ds = eval_dataset(&method, &pipe.test_ds)?;
    let mut report = fairmtl::metrics::evaluate_with_mode(
        &model,
        &eval_ds,
        &pipe.queries,
        alpha_mode(exp),
    )?;
    report.model_id = method.id();
    report.dataset_id = source_id(exp);
    report.seed = exp.seed;
    let tag = sanitize(&method.id());
    let path = exp.out.join(format!("report_{tag}.json"));
    atomic_write(&path, report.to_json().as_bytes())?;
    println!("wrote {}", path.display());
    print_report(&report);
    Ok(())
}

fn source_id(exp: &Experiment) -> String {
    match &exp.source {
        None => String::new(),
        Some(DataSource::Csv(path)) => path.display().to_string(),
        Some(DataSource::Gmm2d { n, .. }) => format!("gmm2d:n={n}"),
        Some(DataSource::Planted(path)) => format!("planted:{}", path.display()),
    }
}

fn comparison_header(queries: &[AssociationQuery], dataset: &Dataset) -> String {
    let mut header = String::from("method,accuracy");
    for query in queries {
        let id = query.id(dataset);
        let _ = write!(header, ",{id}_alpha,{id}_fairness,{id}_gamma");
    }
    header
}

fn comparison_row(method: &str, report: Option<&MetricsReport>, n_queries: usize) -> String {
    let mut row = String::from(method);
    match report {
        Some(report) => {
            let _ = write!(row, ",{}", report.accuracy);
            for assoc in &report.associations {
                let _ = write!(
                    row,
                    ",{},{},{}",
                    fmt_full(assoc.alpha),
                    fmt_full(assoc.fairness),
                    fmt_full(assoc.gamma)
                );
            }
        }
        None => {
            for _ in 0..(1 + 3 * n_queries) {
                row.push_str(",NA");
            }
        }
    }
    row
}

fn parse_p_grid(text: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Argument(format!(
            "p-grid must be lo:hi:step, got '{text}'"
        )));
    }
    let lo: usize = parts[0]
        .parse()
        .map_err(|_| Error::Argument(format!("bad p-grid lower bound '{}'", parts[0])))?;
    let hi: usize = parts[1]
        .parse()
        .map_err(|_| Error::Argument(format!("bad p-grid upper bound '{}'", parts[1])))?;
    let step: usize = parts[2]
        .parse()
        .map_err(|_| Error::Argument(format!("bad p-grid step '{}'", parts[2])))?;
    if lo == 0 || step == 0 || hi < lo {
        return Err(Error::Argument(format!("degenerate p-grid '{text}'")));
    }
    Ok((lo..=hi).step_by(step).collect())
}

pub fn cmd_compare(exp: &Experiment, p_grid: Option<&str>) -> Result<()> {
    if exp.methods.is_empty() {
        return Err(Error::Argument(
            "compare needs at least one method (config `methods` or --method)".to_string(),
        ));
    }
    let methods = exp
        .methods
        .iter()
        .map(|m| Method::parse(m))
        .collect::<Result<Vec<_>>>()?;
    let pipe = build_pipeline(exp)?;
    let mode = alpha_mode(exp);

    let header = comparison_header(&pipe.queries, &pipe.test_ds);
    let mut table = header.clone();
    table.push('\n');
    println!("{header}");
    for method in &methods {
        let outcome = run_method(
            method,
            &pipe.train_ds,
            &pipe.test_ds,
            &pipe.specs,
            &exp.train,
            &pipe.queries,
            mode,
            pipe.seeds.train(&method.id()),
        );
        let row = match &outcome {
            Ok(run) => {
                let mut shown = format!("{},{}", method.id(), fmt4(run.report.accuracy));
                for assoc in &run.report.associations {
                    let _ = write!(
                        shown,
                        ",{},{},{}",
                        fmt_opt4(assoc.alpha),
                        fmt_opt4(assoc.fairness),
                        fmt_opt4(assoc.gamma)
                    );
                }
                println!("{shown}");
                comparison_row(&method.id(), Some(&run.report), pipe.queries.len())
            }
            Err(err) => {
                eprintln!("method {} failed: {err}", method.id());
                comparison_row(&method.id(), None, pipe.queries.len())
            }
        };
        table.push_str(&row);
        table.push('\n');
    }
    let path = exp.out.join("compare.csv");
    atomic_write(&path, table.as_bytes())?;
    println!("wrote {}", path.display());

    if let Some(grid_text) = p_grid {
        let grid = parse_p_grid(grid_text)?;
        let mut table = String::from("method,p");
        let header_tail = comparison_header(&pipe.queries, &pipe.test_ds);
        table.push_str(header_tail.strip_prefix("method").unwrap_or(&header_tail));
        table.push('\n');
        for &p in &grid {
            let config = fairmtl::model::TrainConfig {
                shared_dim: p,
                ..exp.train.clone()
            };
            for method in &methods {
                let outcome = run_method(
                    method,
                    &pipe.train_ds,
                    &pipe.test_ds,
                    &pipe.specs,
                    &config,
                    &pipe.queries,
                    mode,
                    pipe.seeds.train(&method.id()),
                );
                let row = match &outcome {
                    Ok(run) => {
                        let with_p = comparison_row(
                            &format!("{},{p}", method.id()),
                            Some(&run.report),
                            pipe.queries.len(),
                        );
                        with_p
                    }
                    Err(err) => {
                        eprintln!("method {} at p={p} failed: {err}", method.id());
                        comparison_row(&format!("{},{p}", method.id()), None, pipe.queries.len())
                    }
                };
                table.push_str(&row);
                table.push('\n');
            }
        }
        let path = exp.out.join("pgrid.csv");
        atomic_write(&path, table.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub struct BoundaryArgs {
    pub model: PathBuf,
    pub x1_range: (f64, f64),
    pub x2_range: (f64, f64),
    pub resolution: usize,
    pub positive_label: Option<String>,
}

pub fn cmd_boundary(exp: &Experiment, args: &BoundaryArgs) -> Result<()> {
    let model = MultiObjectiveModel::load(&args.model)?;
    if model.input_dim() != 2 {
        return Err(Error::Argument(format!(
            "boundary export needs a 2D-input model, this one takes {} features",
            model.input_dim()
        )));
    }
    if args.resolution < 2 {
        return Err(Error::Argument("resolution must be at least 2".to_string()));
    }
    let positive = match &args.positive_label {
        Some(name) => model
            .label_names()
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::Argument(format!("model has no label named '{name}'")))?,
        None => model.label_names().len() - 1,
    };
    let positive_name = &model.label_names()[positive];
    let mut out = format!("x1,x2,label,p_{positive_name}\n");
    let steps = args.resolution;
    let lerp = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (steps - 1) as f64;
    for i in 0..steps {
        let x1 = lerp(args.x1_range, i);
        for j in 0..steps {
            let x2 = lerp(args.x2_range, j);
            let (pred, _) = model.forward(&[x1, x2])?;
            let _ = writeln!(
                out,
                "{x1},{x2},{},{}",
                pred.label, pred.probabilities[positive]
            );
        }
    }
    let path = exp.out.join("boundary.csv");
    atomic_write(&path, out.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

