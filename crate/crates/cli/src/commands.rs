//! Subcommand handlers: wire the parsed arguments into the core library,
//! print key=value lines, and mirror everything into JSON reports.
//!
//! Every report records the full resolved configuration, so a report file
//! alone is enough to rerun the command. Artifacts are written through a
//! temporary file in the destination directory and renamed into place;
//! a nonzero exit therefore never leaves a partial artifact behind.

use std::error::Error;
use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sprec_core::dataset::{make_folds, IngestOptions, RatingsDataset};
use sprec_core::evaluation::{
    mae, mean_rank, rmse, run_cv, run_cv_item_knn, CvOptions, CvReport, GridSpec, MetricMatrix,
    SelectionMetric,
};
use sprec_core::models::ModelFamily;
use sprec_core::netgen::{degree_stats, generate, NetGenConfig};
use sprec_core::objective::ObjectiveKind;
use sprec_core::optimizer::OptimizerConfig;
use sprec_core::rng;
use sprec_core::trainer::{self, predict, train, Embedding, TrainConfig};

use crate::report::{print_kv, write_atomic, Reporter};
use crate::{Command, FitArgs, InputArgs, MethodArg, ObjectiveArg, SelectionArg, SharedArgs};

pub type CliResult = std::result::Result<(), Box<dyn Error>>;

pub fn run(shared: &SharedArgs, command: Command) -> CliResult {
    let reporter = Reporter::new();
    match command {
        Command::Ingest { input, report } => {
            cmd_ingest(shared, &input, report.as_deref(), reporter)
        }
        Command::Train {
            input,
            model,
            objective,
            dim,
            lambda,
            alpha,
            fit,
            output,
            report,
        } => {
            let cfg = TrainConfig {
                dim,
                lambda,
                alpha,
                objective: objective.into(),
                seed: shared.seed,
                init_scale: fit.init_scale,
                p_min: shared.p_min,
                p_max: shared.p_max,
                deterministic: shared.deterministic,
                optimizer: optimizer_config(&fit),
            };
            cmd_train(
                shared,
                &input,
                model.into(),
                &cfg,
                &fit,
                &output,
                report.as_deref(),
                reporter,
            )
        }
        Command::Predict {
            model,
            user,
            item,
            report,
        } => cmd_predict(shared, &model, user, item, report.as_deref(), reporter),
        Command::Evaluate {
            input,
            model,
            objective,
            folds,
            dims,
            lambdas,
            alphas,
            selection,
            neighbors,
            allow_fold_failures,
            fit,
            report,
        } => cmd_evaluate(
            shared,
            &input,
            model,
            objective,
            folds,
            GridSpec {
                dims,
                lambdas,
                alphas,
                selection: selection.into(),
            },
            selection,
            neighbors,
            allow_fold_failures,
            &fit,
            report.as_deref(),
            reporter,
        ),
        Command::Gridsearch {
            input,
            model,
            objective,
            folds,
            fold,
            dims,
            lambdas,
            alphas,
            selection,
            fit,
            report,
        } => cmd_gridsearch(
            shared,
            &input,
            model.into(),
            objective,
            folds,
            fold,
            GridSpec {
                dims,
                lambdas,
                alphas,
                selection: selection.into(),
            },
            &fit,
            report.as_deref(),
            reporter,
        ),
        Command::Rank {
            input,
            output,
            report,
        } => cmd_rank(
            shared,
            &input,
            output.as_deref(),
            report.as_deref(),
            reporter,
        ),
        Command::Netgen {
            nodes,
            gamma,
            alpha,
            circumference,
            kappa_min,
            degree_scale,
            mean_degree,
            edges_out,
            nodes_out,
            report,
        } => {
            let mut cfg = NetGenConfig::new(nodes, gamma, alpha, shared.seed);
            if let Some(c) = circumference {
                cfg.circumference = c;
            }
            cfg.kappa_min = kappa_min;
            if let Some(s) = degree_scale {
                cfg.degree_scale = s;
            }
            if let Some(t) = mean_degree {
                cfg = cfg.with_target_mean_degree(t);
            }
            cmd_netgen(
                shared,
                &cfg,
                edges_out.as_deref(),
                nodes_out.as_deref(),
                report.as_deref(),
                reporter,
            )
        }
    }
}

fn cmd_ingest(
    shared: &SharedArgs,
    input: &InputArgs,
    report: Option<&Path>,
    reporter: Reporter,
) -> CliResult {
    let ds = load_dataset(shared, input)?;
    println!(
        "{} users, {} items, {} ratings",
        ds.n_users(),
        ds.n_items(),
        ds.len()
    );
    print_kv("users", ds.n_users());
    print_kv("items", ds.n_items());
    print_kv("ratings", ds.len());
    print_kv("r_min", ds.r_min());
    print_kv("r_max", ds.r_max());
    print_kv("global_mean", ds.global_mean());
    print_kv("density", ds.density());

    let mut cfg = base_config(shared);
    input_config(&mut cfg, input);
    let result = json!({
        "users": ds.n_users(),
        "items": ds.n_items(),
        "ratings": ds.len(),
        "r_min": ds.r_min(),
        "r_max": ds.r_max(),
        "global_mean": ds.global_mean(),
        "density": ds.density(),
    });
    reporter.write("ingest", Value::Object(cfg), result, report)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    shared: &SharedArgs,
    input: &InputArgs,
    family: ModelFamily,
    train_cfg: &TrainConfig,
    fit: &FitArgs,
    output: &Path,
    report: Option<&Path>,
    reporter: Reporter,
) -> CliResult {
    let ds = load_dataset(shared, input)?;
    let emb = train(&ds, family, train_cfg)?;
    save_model(&emb, output)?;

    print_kv("model", family.name());
    print_kv("objective", emb.provenance.objective.kind.name());
    print_kv("dim", train_cfg.dim);
    print_kv("lambda", train_cfg.lambda);
    if family == ModelFamily::Sphm1 {
        print_kv("alpha", train_cfg.alpha);
    }
    print_kv("status", emb.provenance.status.name());
    print_kv("iterations", emb.provenance.iterations);
    print_kv("initial_value", emb.provenance.initial_value);
    print_kv("final_value", emb.provenance.final_value);
    print_kv("output", output.display());

    let mut cfg = base_config(shared);
    input_config(&mut cfg, input);
    fit_config(&mut cfg, fit);
    cfg.insert("model".into(), json!(family.name()));
    cfg.insert(
        "objective".into(),
        json!(emb.provenance.objective.kind.name()),
    );
    cfg.insert("dim".into(), json!(train_cfg.dim));
    cfg.insert("lambda".into(), json!(train_cfg.lambda));
    cfg.insert("alpha".into(), json!(train_cfg.alpha));
    cfg.insert("output".into(), json!(path_str(output)));
    let result = json!({
        "users": ds.n_users(),
        "items": ds.n_items(),
        "status": emb.provenance.status.name(),
        "iterations": emb.provenance.iterations,
        "initial_value": emb.provenance.initial_value,
        "final_value": emb.provenance.final_value,
        "output": path_str(output),
    });
    reporter.write("train", Value::Object(cfg), result, report)?;
    Ok(())
}

fn cmd_predict(
    shared: &SharedArgs,
    model: &Path,
    user: Option<usize>,
    item: Option<usize>,
    report: Option<&Path>,
    reporter: Reporter,
) -> CliResult {
    let emb = trainer::load(model)?;
    let pred = predict(&emb, user, item);
    print_kv("prediction", pred.rating);
    print_kv("source", pred.source.name());
    print_kv("fallback", pred.source.is_fallback());

    let mut cfg = base_config(shared);
    cfg.insert("model".into(), json!(path_str(model)));
    cfg.insert("user".into(), json!(user));
    cfg.insert("item".into(), json!(item));
    let result = json!({
        "prediction": pred.rating,
        "source": pred.source.name(),
        "fallback": pred.source.is_fallback(),
    });
    reporter.write("predict", Value::Object(cfg), result, report)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    shared: &SharedArgs,
    input: &InputArgs,
    method: MethodArg,
    objective: ObjectiveArg,
    folds: usize,
    grid: GridSpec,
    selection: SelectionArg,
    neighbors: usize,
    allow_fold_failures: bool,
    fit: &FitArgs,
    report: Option<&Path>,
    reporter: Reporter,
) -> CliResult {
    let ds = load_dataset(shared, input)?;
    let plan = make_folds(&ds, folds, shared.seed)?;
    let cv = match method_family(method) {
        None => run_cv_item_knn(&ds, neighbors, &plan)?,
        Some(family) => {
            let opts = CvOptions {
                init_scale: fit.init_scale,
                p_min: shared.p_min,
                p_max: shared.p_max,
                optimizer: optimizer_config(fit),
                deterministic: shared.deterministic,
                allow_fold_failures,
            };
            run_cv(&ds, family, objective.into(), &grid, &plan, &opts)?
        }
    };
    print_cv(&cv);

    let mut cfg = base_config(shared);
    input_config(&mut cfg, input);
    fit_config(&mut cfg, fit);
    cfg.insert("method".into(), json!(enum_name(method)));
    cfg.insert("objective".into(), json!(enum_name(objective)));
    cfg.insert("folds".into(), json!(folds));
    cfg.insert("dims".into(), json!(grid.dims));
    cfg.insert("lambdas".into(), json!(grid.lambdas));
    cfg.insert("alphas".into(), json!(grid.alphas));
    cfg.insert("selection".into(), json!(enum_name(selection)));
    cfg.insert("neighbors".into(), json!(neighbors));
    cfg.insert("allow_fold_failures".into(), json!(allow_fold_failures));
    let result = serde_json::to_value(&cv)?;
    reporter.write("evaluate", Value::Object(cfg), result, report)?;
    Ok(())
}

fn print_cv(cv: &CvReport) {
    print_kv("method", &cv.method);
    if let Some(o) = &cv.objective {
        print_kv("objective", o);
    }
    if let Some(s) = &cv.selection {
        print_kv("selection", s);
    }
    print_kv("seed", cv.seed);
    print_kv("folds", cv.n_folds);
    print_kv("rng", &cv.rng_algorithm);
    for f in &cv.folds {
        let k = format!("fold_{}", f.fold);
        if let Some(sel) = &f.selected {
            print_kv(&format!("{k}_dim"), sel.dim);
            print_kv(&format!("{k}_lambda"), sel.lambda);
            if let Some(a) = sel.alpha {
                print_kv(&format!("{k}_alpha"), a);
            }
            print_kv(&format!("{k}_validation"), sel.validation_score);
        }
        print_kv(&format!("{k}_rmse"), f.rmse);
        print_kv(&format!("{k}_mae"), f.mae);
        let fallbacks =
            f.fallbacks.item_average + f.fallbacks.user_average + f.fallbacks.global_mean;
        print_kv(&format!("{k}_fallbacks"), fallbacks);
    }
    for fail in &cv.failures {
        print_kv(&format!("fold_{}_error", fail.fold), &fail.message);
    }
    print_kv("rmse_mean", cv.rmse_mean);
    print_kv("rmse_std", cv.rmse_std);
    print_kv("mae_mean", cv.mae_mean);
    print_kv("mae_std", cv.mae_std);
}

#[allow(clippy::too_many_arguments)]
fn cmd_gridsearch(
    shared: &SharedArgs,
    input: &InputArgs,
    family: ModelFamily,
    objective: ObjectiveArg,
    folds: usize,
    fold: usize,
    grid: GridSpec,
    fit: &FitArgs,
    report: Option<&Path>,
    reporter: Reporter,
) -> CliResult {
    let ds = load_dataset(shared, input)?;
    let plan = make_folds(&ds, folds, shared.seed)?;
    if fold >= plan.k {
        return Err(format!("fold {fold} is out of range for {} folds", plan.k).into());
    }
    let objective: ObjectiveKind = objective.into();
    let cells = grid.cells(family)?;
    let pinned = ds.pin_scale();
    let (proper_idx, val_idx) = plan.validation_split(fold);
    let proper = pinned.restrict(&proper_idx)?;

    // Seeds and the validation split match the evaluate command exactly, so
    // a cell's score here equals the score evaluate selected by on this fold.
    let scores: Vec<std::result::Result<(f64, f64), String>> = cells
        .par_iter()
        .enumerate()
        .map(|(ci, cell)| {
            let seed =
                rng::substream_seed(plan.seed, "cv-train", ((fold as u64) << 32) | ci as u64);
            let cfg = TrainConfig {
                dim: cell.dim,
                lambda: cell.lambda,
                alpha: cell.alpha.unwrap_or(TrainConfig::default().alpha),
                objective,
                seed,
                init_scale: fit.init_scale,
                p_min: shared.p_min,
                p_max: shared.p_max,
                deterministic: shared.deterministic,
                optimizer: optimizer_config(fit),
            };
            let emb = train(&proper, family, &cfg).map_err(|e| e.to_string())?;
            let mut preds = Vec::with_capacity(val_idx.len());
            let mut truths = Vec::with_capacity(val_idx.len());
            for &r in &val_idx {
                let t = &pinned.ratings()[r];
                preds.push(predict(&emb, Some(t.user as usize), Some(t.item as usize)).rating);
                truths.push(t.rating);
            }
            let rm = rmse(&preds, &truths).map_err(|e| e.to_string())?;
            let ma = mae(&preds, &truths).map_err(|e| e.to_string())?;
            Ok((rm, ma))
        })
        .collect();

    print_kv("model", family.name());
    print_kv("objective", objective.name());
    print_kv("selection", grid.selection.name());
    print_kv("fold", fold);
    print_kv("train_size", proper_idx.len());
    print_kv("validation_size", val_idx.len());
    print_kv("cells", cells.len());

    let mut best: Option<(usize, f64)> = None;
    let mut cell_json = Vec::with_capacity(cells.len());
    for (ci, (cell, res)) in cells.iter().zip(&scores).enumerate() {
        let k = format!("cell_{ci}");
        print_kv(&format!("{k}_dim"), cell.dim);
        print_kv(&format!("{k}_lambda"), cell.lambda);
        if let Some(a) = cell.alpha {
            print_kv(&format!("{k}_alpha"), a);
        }
        match res {
            Ok((rm, ma)) => {
                print_kv(&format!("{k}_rmse"), rm);
                print_kv(&format!("{k}_mae"), ma);
                let score = match grid.selection {
                    SelectionMetric::Rmse => *rm,
                    SelectionMetric::Mae => *ma,
                };
                if score.is_finite() && best.is_none_or(|(_, b)| score < b) {
                    best = Some((ci, score));
                }
                cell_json.push(json!({
                    "index": ci,
                    "dim": cell.dim,
                    "lambda": cell.lambda,
                    "alpha": cell.alpha,
                    "rmse": rm,
                    "mae": ma,
                }));
            }
            Err(e) => {
                print_kv(&format!("{k}_error"), e);
                cell_json.push(json!({
                    "index": ci,
                    "dim": cell.dim,
                    "lambda": cell.lambda,
                    "alpha": cell.alpha,
                    "error": e,
                }));
            }
        }
    }
    let best_json = match best {
        Some((ci, score)) => {
            let cell = &cells[ci];
            print_kv("best_index", ci);
            print_kv("best_dim", cell.dim);
            print_kv("best_lambda", cell.lambda);
            if let Some(a) = cell.alpha {
                print_kv("best_alpha", a);
            }
            print_kv("best_score", score);
            json!({
                "index": ci,
                "dim": cell.dim,
                "lambda": cell.lambda,
                "alpha": cell.alpha,
                "score": score,
            })
        }
        None => {
            print_kv("best_index", "none");
            Value::Null
        }
    };

    let mut cfg = base_config(shared);
    input_config(&mut cfg, input);
    fit_config(&mut cfg, fit);
    cfg.insert("model".into(), json!(family.name()));
    cfg.insert("objective".into(), json!(objective.name()));
    cfg.insert("folds".into(), json!(folds));
    cfg.insert("fold".into(), json!(fold));
    cfg.insert("dims".into(), json!(grid.dims));
    cfg.insert("lambdas".into(), json!(grid.lambdas));
    cfg.insert("alphas".into(), json!(grid.alphas));
    cfg.insert("selection".into(), json!(grid.selection.name()));
    let result = json!({
        "fold": fold,
        "train_size": proper_idx.len(),
        "validation_size": val_idx.len(),
        "cells": cell_json,
        "best": best_json,
    });
    reporter.write("gridsearch", Value::Object(cfg), result, report)?;
    Ok(())
}

fn cmd_rank(
    shared: &SharedArgs,
    input: &Path,
    output: Option<&Path>,
    report: Option<&Path>,
    reporter: Reporter,
) -> CliResult {
    let text = std::fs::read_to_string(input)
        .map_err(|e| format!("cannot read {}: {e}", input.display()))?;
    let matrix = parse_metric_csv(&text)?;
    let table = mean_rank(&matrix);
    let csv = table.to_delimited(',');
    match output {
        Some(p) => {
            write_atomic(p, csv.as_bytes())?;
            print_kv("output", p.display());
        }
        None => print!("{csv}"),
    }
    for (m, r) in table.methods.iter().zip(&table.mean_ranks) {
        print_kv(&format!("mean_rank_{m}"), format!("{r:.2}"));
    }

    let mut cfg = base_config(shared);
    cfg.insert("input".into(), json!(path_str(input)));
    cfg.insert("output".into(), json!(output.map(path_str)));
    let result = json!({
        "methods": table.methods,
        "datasets": table.datasets,
        "ranks": table.ranks,
        "mean_ranks": table.mean_ranks,
    });
    reporter.write("rank", Value::Object(cfg), result, report)?;
    Ok(())
}

/// Plain comma-separated table, no quoting: a header row naming the
/// methods, then one row per dataset with its metric values.
fn parse_metric_csv(text: &str) -> std::result::Result<MetricMatrix, Box<dyn Error>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or("metric table is empty")?;
    let methods: Vec<String> = header
        .split(',')
        .map(str::trim)
        .skip(1)
        .map(String::from)
        .collect();
    if methods.is_empty() {
        return Err("metric table header needs at least one method column".into());
    }
    let mut datasets = Vec::new();
    let mut rows = Vec::new();
    for line in lines {
        let mut fields = line.split(',').map(str::trim);
        let name = fields.next().unwrap_or_default();
        if name.is_empty() {
            return Err(format!("metric row without a dataset name: {line:?}").into());
        }
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| format!("cannot parse metric value {f:?} in row {name:?}"))
            })
            .collect::<std::result::Result<Vec<f64>, String>>()?;
        datasets.push(name.to_string());
        rows.push(values);
    }
    Ok(MetricMatrix::new(methods, datasets, &rows)?)
}

fn cmd_netgen(
    shared: &SharedArgs,
    cfg: &NetGenConfig,
    edges_out: Option<&Path>,
    nodes_out: Option<&Path>,
    report: Option<&Path>,
    reporter: Reporter,
) -> CliResult {
    let net = generate(cfg)?;
    let stats = degree_stats(&net);

    print_kv("nodes", cfg.nodes);
    print_kv("edges", net.edges.len());
    print_kv("mean_degree", stats.mean_degree);
    print_kv("max_degree", stats.max_degree);
    print_kv("degree_scale", cfg.degree_scale);

    if let Some(p) = edges_out {
        let mut out = String::new();
        for &(u, v) in &net.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        write_atomic(p, out.as_bytes())?;
        print_kv("edges_out", p.display());
    }
    if let Some(p) = nodes_out {
        let mut out = String::new();
        for i in 0..net.n_nodes() {
            let _ = writeln!(out, "{} {} {}", i, net.positions[i], net.kappas[i]);
        }
        write_atomic(p, out.as_bytes())?;
        print_kv("nodes_out", p.display());
    }

    let mut rep_cfg = base_config(shared);
    rep_cfg.insert("nodes".into(), json!(cfg.nodes));
    rep_cfg.insert("gamma".into(), json!(cfg.gamma));
    rep_cfg.insert("alpha".into(), json!(cfg.alpha));
    rep_cfg.insert("circumference".into(), json!(cfg.circumference));
    rep_cfg.insert("kappa_min".into(), json!(cfg.kappa_min));
    rep_cfg.insert("degree_scale".into(), json!(cfg.degree_scale));
    rep_cfg.insert("edges_out".into(), json!(edges_out.map(path_str)));
    rep_cfg.insert("nodes_out".into(), json!(nodes_out.map(path_str)));
    let result = json!({
        "edges": net.edges.len(),
        "mean_degree": stats.mean_degree,
        "max_degree": stats.max_degree,
    });
    reporter.write("netgen", Value::Object(rep_cfg), result, report)?;
    Ok(())
}

fn load_dataset(
    shared: &SharedArgs,
    input: &InputArgs,
) -> std::result::Result<RatingsDataset, Box<dyn Error>> {
    let opts = IngestOptions {
        delimiter: input.delimiter.into(),
        declared_scale: shared.scale,
        min_ratings_per_user: input.min_ratings,
    };
    Ok(RatingsDataset::ingest(&input.input, &opts)?)
}

/// Writes the model next to its destination and renames it into place.
fn save_model(emb: &Embedding, path: &Path) -> CliResult {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    trainer::save(emb, tmp.path())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn method_family(m: MethodArg) -> Option<ModelFamily> {
    match m {
        MethodArg::Sphm1 => Some(ModelFamily::Sphm1),
        MethodArg::Sphm2 => Some(ModelFamily::Sphm2),
        MethodArg::Spdp => Some(ModelFamily::Spdp),
        MethodArg::Itemknn => None,
    }
}

fn optimizer_config(fit: &FitArgs) -> OptimizerConfig {
    OptimizerConfig {
        max_iterations: fit.max_iterations,
        grad_tolerance: fit.grad_tolerance,
        ..OptimizerConfig::default()
    }
}

fn base_config(shared: &SharedArgs) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("seed".into(), json!(shared.seed));
    m.insert("threads".into(), json!(shared.threads));
    m.insert("deterministic".into(), json!(shared.deterministic));
    m.insert("p_min".into(), json!(shared.p_min));
    m.insert("p_max".into(), json!(shared.p_max));
    let scale = match shared.scale {
        Some((lo, hi)) => json!([lo, hi]),
        None => Value::Null,
    };
    m.insert("scale".into(), scale);
    m
}

fn input_config(m: &mut Map<String, Value>, input: &InputArgs) {
    m.insert("input".into(), json!(path_str(&input.input)));
    m.insert("delimiter".into(), json!(enum_name(input.delimiter)));
    m.insert("min_ratings".into(), json!(input.min_ratings));
}

fn fit_config(m: &mut Map<String, Value>, fit: &FitArgs) {
    m.insert("init_scale".into(), json!(fit.init_scale));
    m.insert("max_iterations".into(), json!(fit.max_iterations));
    m.insert("grad_tolerance".into(), json!(fit.grad_tolerance));
}

fn path_str(p: impl AsRef<Path>) -> String {
    p.as_ref().display().to_string()
}

fn enum_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .expect("unit variants only")
        .get_name()
        .to_string()
}
