//! Cross-validated experiment driver with nested grid search.
//!
//! Each fold holds out one part as the test set, splits the rest 90/10
//! into proper-training and validation, trains every grid cell on the
//! proper part, picks the cell with the best validation score, retrains
//! it on the full training portion, and scores the held-out fold. Grid
//! ties go to the first cell in enumeration order (dimension ascending,
//! then regularization descending, then exponent ascending), so runs are
//! reproducible; every training seed is a named substream of the fold
//! plan's seed.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{FoldPlan, RatingsDataset};
use crate::error::{Error, Result};
use crate::evaluation::knn::ItemKnnModel;
use crate::evaluation::metrics::{mae, rmse};
use crate::models::ModelFamily;
use crate::objective::ObjectiveKind;
use crate::optimizer::OptimizerConfig;
use crate::rng;
use crate::scaling::{DEFAULT_P_MAX, DEFAULT_P_MIN};
use crate::trainer::{predict, train, Prediction, PredictionSource, TrainConfig};

/// Which metric drives grid selection on the validation split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMetric {
    Rmse,
    Mae,
}

impl SelectionMetric {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionMetric::Rmse => "rmse",
            SelectionMetric::Mae => "mae",
        }
    }

    fn score(&self, pred: &[f64], truth: &[f64]) -> Result<f64> {
        match self {
            SelectionMetric::Rmse => rmse(pred, truth),
            SelectionMetric::Mae => mae(pred, truth),
        }
    }
}

impl std::fmt::Display for SelectionMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SelectionMetric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "rmse" => Ok(SelectionMetric::Rmse),
            "mae" => Ok(SelectionMetric::Mae),
            other => Err(format!(
                "unknown selection metric {other:?} (expected rmse or mae)"
            )),
        }
    }
}

/// One hyperparameter combination; `alpha` is set only for SPHM1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub dim: usize,
    pub lambda: f64,
    pub alpha: Option<f64>,
}

/// Candidate hyperparameter sets. The sets are sorted and deduplicated
/// before enumeration, so duplicates cannot change the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// SPHM1 exponents; ignored by the other families.
    pub alphas: Vec<f64>,
    pub selection: SelectionMetric,
}

impl GridSpec {
    /// The default search ranges: D in {5, 10, 20}, λ in {0.1, 0.01}, and
    /// for SPHM1 additionally α in {2, ..., 9}.
    pub fn default_for(family: ModelFamily) -> GridSpec {
        GridSpec {
            dims: vec![5, 10, 20],
            lambdas: vec![0.1, 0.01],
            alphas: match family {
                ModelFamily::Sphm1 => (2..=9).map(f64::from).collect(),
                _ => Vec::new(),
            },
            selection: SelectionMetric::Rmse,
        }
    }

    /// A degenerate one-cell grid, making `run_cv` plain cross-validation
    /// with fixed hyperparameters.
    pub fn single(dim: usize, lambda: f64, alpha: Option<f64>) -> GridSpec {
        GridSpec {
            dims: vec![dim],
            lambdas: vec![lambda],
            alphas: alpha.into_iter().collect(),
            selection: SelectionMetric::Rmse,
        }
    }

    /// Enumerates the grid in selection-tie-break order: dimension
    /// ascending, then regularization descending, then exponent ascending.
    pub fn cells(&self, family: ModelFamily) -> Result<Vec<GridCell>> {
        let mut dims = self.dims.clone();
        dims.sort_unstable();
        dims.dedup();
        if dims.is_empty() {
            return Err(Error::InvalidConfig(
                "grid needs at least one dimension".into(),
            ));
        }
        if dims[0] == 0 {
            return Err(Error::InvalidConfig(
                "grid dimensions must be at least 1".into(),
            ));
        }

        let mut lambdas = self.lambdas.clone();
        lambdas.sort_unstable_by(|a, b| b.total_cmp(a));
        lambdas.dedup();
        if lambdas.is_empty() {
            return Err(Error::InvalidConfig(
                "grid needs at least one regularization value".into(),
            ));
        }
        if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidConfig(
                "grid regularization values must be finite and non-negative".into(),
            ));
        }

        let alphas: Vec<Option<f64>> = match family {
            ModelFamily::Sphm1 => {
                let mut alphas = self.alphas.clone();
                alphas.sort_unstable_by(f64::total_cmp);
                alphas.dedup();
                if alphas.is_empty() {
                    return Err(Error::InvalidConfig(
                        "sphm1 grid needs at least one exponent".into(),
                    ));
                }
                if alphas.iter().any(|a| !a.is_finite() || *a <= 1.0) {
                    return Err(Error::InvalidConfig(
                        "sphm1 grid exponents must exceed 1".into(),
                    ));
                }
                alphas.into_iter().map(Some).collect()
            }
            _ => vec![None],
        };

        let mut cells = Vec::with_capacity(dims.len() * lambdas.len() * alphas.len());
        for &dim in &dims {
            for &lambda in &lambdas {
                for &alpha in &alphas {
                    cells.push(GridCell { dim, lambda, alpha });
                }
            }
        }
        Ok(cells)
    }
}

/// Knobs shared by every training run inside the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub init_scale: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub optimizer: OptimizerConfig,
    pub deterministic: bool,
    /// Record a failed fold and continue instead of aborting the run.
    pub allow_fold_failures: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            init_scale: 0.1,
            p_min: DEFAULT_P_MIN,
            p_max: DEFAULT_P_MAX,
            optimizer: OptimizerConfig::default(),
            deterministic: true,
            allow_fold_failures: false,
        }
    }
}

/// The grid cell a fold settled on, with its validation score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectedCell {
    pub dim: usize,
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub validation_score: f64,
}

/// How many test predictions came from the fitted model versus each
/// cold-start fallback.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FallbackCounts {
    pub model: usize,
    pub item_average: usize,
    pub user_average: usize,
    pub global_mean: usize,
}

impl FallbackCounts {
    fn tally(&mut self, source: PredictionSource) {
        match source {
            PredictionSource::Model => self.model += 1,
            PredictionSource::ItemAverage => self.item_average += 1,
            PredictionSource::UserAverage => self.user_average += 1,
            PredictionSource::GlobalMean => self.global_mean += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.model + self.item_average + self.user_average + self.global_mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// None for grid-free baselines such as ItemKNN.
    pub selected: Option<SelectedCell>,
    pub rmse: f64,
    pub mae: f64,
    pub fallbacks: FallbackCounts,
}

/// A fold that failed and was skipped under `allow_fold_failures`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldFailure {
    pub fold: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub method: String,
    pub objective: Option<String>,
    pub selection: Option<String>,
    pub seed: u64,
    pub n_folds: usize,
    pub rng_algorithm: String,
    pub folds: Vec<FoldReport>,
    pub failures: Vec<FoldFailure>,
    pub rmse_mean: f64,
    /// Sample standard deviation across folds; NaN (null in JSON) below
    /// two folds.
    pub rmse_std: f64,
    pub mae_mean: f64,
    pub mae_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn check_plan(ds: &RatingsDataset, plan: &FoldPlan) -> Result<()> {
    if plan.assignments.len() != ds.len() {
        return Err(Error::InvalidConfig(format!(
            "fold plan covers {} ratings but the dataset has {}",
            plan.assignments.len(),
            ds.len()
        )));
    }
    Ok(())
}

/// Predictions and truths for the ratings of `ds` at `indices`.
fn score_indices<F>(
    ds: &RatingsDataset,
    indices: &[usize],
    predictor: F,
) -> (Vec<f64>, Vec<f64>, FallbackCounts)
where
    F: Fn(usize, usize) -> Prediction,
{
    let mut preds = Vec::with_capacity(indices.len());
    let mut truths = Vec::with_capacity(indices.len());
    let mut fallbacks = FallbackCounts::default();
    for &idx in indices {
        let t = &ds.ratings()[idx];
        let p = predictor(t.user as usize, t.item as usize);
        fallbacks.tally(p.source);
        preds.push(p.rating);
        truths.push(t.rating);
    }
    (preds, truths, fallbacks)
}

fn finish_report(
    method: String,
    objective: Option<String>,
    selection: Option<String>,
    plan: &FoldPlan,
    folds: Vec<FoldReport>,
    failures: Vec<FoldFailure>,
) -> Result<CvReport> {
    if folds.is_empty() {
        let detail = failures
            .first()
            .map(|f| format!(": {}", f.message))
            .unwrap_or_default();
        return Err(Error::InvalidConfig(format!("every fold failed{detail}")));
    }
    let (rmse_mean, rmse_std) = mean_std(&folds.iter().map(|f| f.rmse).collect::<Vec<_>>());
    let (mae_mean, mae_std) = mean_std(&folds.iter().map(|f| f.mae).collect::<Vec<_>>());
    Ok(CvReport {
        method,
        objective,
        selection,
        seed: plan.seed,
        n_folds: plan.k,
        rng_algorithm: plan.rng_algorithm.clone(),
        folds,
        failures,
        rmse_mean,
        rmse_std,
        mae_mean,
        mae_std,
    })
}

fn cell_config(
    cell: &GridCell,
    objective: ObjectiveKind,
    seed: u64,
    opts: &CvOptions,
) -> TrainConfig {
    TrainConfig {
        dim: cell.dim,
        lambda: cell.lambda,
        alpha: cell.alpha.unwrap_or(TrainConfig::default().alpha),
        objective,
        seed,
        init_scale: opts.init_scale,
        p_min: opts.p_min,
        p_max: opts.p_max,
        deterministic: opts.deterministic,
        optimizer: opts.optimizer,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    ds: &RatingsDataset,
    family: ModelFamily,
    objective: ObjectiveKind,
    cells: &[GridCell],
    selection: SelectionMetric,
    plan: &FoldPlan,
    opts: &CvOptions,
    fold: usize,
) -> Result<FoldReport> {
    let train_idx = plan.training_indices(fold);
    let test_idx = plan.test_indices(fold);
    let (proper_idx, val_idx) = plan.validation_split(fold);
    let proper_view = ds.restrict(&proper_idx)?;

    let scores: Vec<Result<f64>> = cells
        .par_iter()
        .enumerate()
        .map(|(ci, cell)| {
            let seed =
                rng::substream_seed(plan.seed, "cv-train", ((fold as u64) << 32) | ci as u64);
            let emb = train(
                &proper_view,
                family,
                &cell_config(cell, objective, seed, opts),
            )?;
            let (preds, truths, _) =
                score_indices(ds, &val_idx, |u, i| predict(&emb, Some(u), Some(i)));
            selection.score(&preds, &truths)
        })
        .collect();

    let (best_ci, validation_score) = pick_best(cells, &scores)?;
    let best = cells[best_ci];

    let train_view = ds.restrict(&train_idx)?;
    let retrain_seed = rng::substream_seed(plan.seed, "cv-retrain", fold as u64);
    let emb = train(
        &train_view,
        family,
        &cell_config(&best, objective, retrain_seed, opts),
    )?;
    let (preds, truths, fallbacks) =
        score_indices(ds, &test_idx, |u, i| predict(&emb, Some(u), Some(i)));
    Ok(FoldReport {
        fold,
        train_size: train_idx.len(),
        test_size: test_idx.len(),
        selected: Some(SelectedCell {
            dim: best.dim,
            lambda: best.lambda,
            alpha: best.alpha,
            validation_score,
        }),
        rmse: rmse(&preds, &truths)?,
        mae: mae(&preds, &truths)?,
        fallbacks,
    })
}

/// First strictly-best finite score wins, so enumeration order breaks ties.
fn pick_best(cells: &[GridCell], scores: &[Result<f64>]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut first_err = None;
    for (ci, res) in scores.iter().enumerate() {
        match res {
            Ok(score) if score.is_finite() => {
                if best.is_none_or(|(_, b)| *score < b) {
                    best = Some((ci, *score));
                }
            }
            Ok(_) => {}
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e.to_string());
                }
            }
        }
    }
    best.ok_or_else(|| {
        let detail = first_err.map(|e| format!(": {e}")).unwrap_or_default();
        Error::InvalidConfig(format!(
            "no grid cell produced a usable validation score over {} cells{detail}",
            cells.len()
        ))
    })
}

/// Runs the full protocol: per fold, grid-search on a 90/10 validation
/// split of the training portion, retrain the winner on all of it, and
/// score the held-out fold. Identical inputs produce identical reports.
pub fn run_cv(
    ds: &RatingsDataset,
    family: ModelFamily,
    objective: ObjectiveKind,
    grid: &GridSpec,
    plan: &FoldPlan,
    opts: &CvOptions,
) -> Result<CvReport> {
    check_plan(ds, plan)?;
    let cells = grid.cells(family)?;
    let pinned = ds.pin_scale();

    let mut folds = Vec::with_capacity(plan.k);
    let mut failures = Vec::new();
    for fold in 0..plan.k {
        match run_fold(
            &pinned,
            family,
            objective,
            &cells,
            grid.selection,
            plan,
            opts,
            fold,
        ) {
            Ok(report) => folds.push(report),
            Err(e) if opts.allow_fold_failures => failures.push(FoldFailure {
                fold,
                message: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    finish_report(
        family.name().to_string(),
        Some(objective.name().to_string()),
        Some(grid.selection.name().to_string()),
        plan,
        folds,
        failures,
    )
}

/// Same protocol for the untuned ItemKNN baseline: no grid and no
/// validation split, each fold fits on its full training portion.
pub fn run_cv_item_knn(ds: &RatingsDataset, k: usize, plan: &FoldPlan) -> Result<CvReport> {
    check_plan(ds, plan)?;
    let pinned = ds.pin_scale();
    let mut folds = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let train_idx = plan.training_indices(fold);
        let test_idx = plan.test_indices(fold);
        let train_view = pinned.restrict(&train_idx)?;
        let model = ItemKnnModel::fit(&train_view, k)?;
        let (preds, truths, fallbacks) =
            score_indices(&pinned, &test_idx, |u, i| model.predict(Some(u), Some(i)));
        folds.push(FoldReport {
            fold,
            train_size: train_idx.len(),
            test_size: test_idx.len(),
            selected: None,
            rmse: rmse(&preds, &truths)?,
            mae: mae(&preds, &truths)?,
            fallbacks,
        });
    }
    finish_report("itemknn".to_string(), None, None, plan, folds, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{make_folds, RatingTriple, DEFAULT_FOLDS};

    fn planted_dataset() -> RatingsDataset {
        let mut triples = Vec::new();
        for u in 0..20u32 {
            let au = 2.0 * std::f64::consts::PI * f64::from(u) / 20.0;
            for i in 0..10u32 {
                let ai = 2.0 * std::f64::consts::PI * f64::from(i) / 10.0;
                let d = ((au.cos() - ai.cos()).powi(2) + (au.sin() - ai.sin()).powi(2)).sqrt();
                let rating = match d {
                    d if d < 0.5 => 5.0,
                    d if d < 1.0 => 4.0,
                    d if d < 1.4 => 3.0,
                    d if d < 1.8 => 2.0,
                    _ => 1.0,
                };
                triples.push(RatingTriple {
                    user: u,
                    item: i,
                    rating,
                });
            }
        }
        RatingsDataset::from_triples(20, 10, triples, Some((1.0, 5.0))).unwrap()
    }

    #[test]
    fn cells_enumerate_in_tie_break_order() {
        let grid = GridSpec {
            dims: vec![20, 5, 10],
            lambdas: vec![0.01, 0.1],
            alphas: vec![3.0, 2.0],
            selection: SelectionMetric::Rmse,
        };
        let cells = grid.cells(ModelFamily::Sphm1).unwrap();
        let tuples: Vec<(usize, f64, Option<f64>)> =
            cells.iter().map(|c| (c.dim, c.lambda, c.alpha)).collect();
        assert_eq!(
            tuples,
            vec![
                (5, 0.1, Some(2.0)),
                (5, 0.1, Some(3.0)),
                (5, 0.01, Some(2.0)),
                (5, 0.01, Some(3.0)),
                (10, 0.1, Some(2.0)),
                (10, 0.1, Some(3.0)),
                (10, 0.01, Some(2.0)),
                (10, 0.01, Some(3.0)),
                (20, 0.1, Some(2.0)),
                (20, 0.1, Some(3.0)),
                (20, 0.01, Some(2.0)),
                (20, 0.01, Some(3.0)),
            ]
        );
        let cells = grid.cells(ModelFamily::Spdp).unwrap();
        assert_eq!(cells.len(), 6);
        assert!(cells.iter().all(|c| c.alpha.is_none()));
    }

    #[test]
    fn cells_validation() {
        let empty = GridSpec {
            dims: vec![],
            lambdas: vec![0.1],
            alphas: vec![],
            selection: SelectionMetric::Rmse,
        };
        assert!(empty.cells(ModelFamily::Sphm2).is_err());
        let no_alpha = GridSpec {
            dims: vec![5],
            lambdas: vec![0.1],
            alphas: vec![],
            selection: SelectionMetric::Rmse,
        };
        assert!(no_alpha.cells(ModelFamily::Sphm1).is_err());
        assert!(no_alpha.cells(ModelFamily::Sphm2).is_ok());
        let bad_alpha = GridSpec {
            dims: vec![5],
            lambdas: vec![0.1],
            alphas: vec![1.0],
            selection: SelectionMetric::Rmse,
        };
        assert!(bad_alpha.cells(ModelFamily::Sphm1).is_err());
    }

    #[test]
    fn single_cell_grid_is_plain_cv() {
        let ds = planted_dataset();
        let plan = make_folds(&ds, DEFAULT_FOLDS, 7).unwrap();
        let opts = CvOptions::default();
        let grid = GridSpec::single(2, 0.01, None);
        let report = run_cv(
            &ds,
            ModelFamily::Sphm2,
            ObjectiveKind::L2,
            &grid,
            &plan,
            &opts,
        )
        .unwrap();

        // plain CV: train the fixed config per fold with the retrain seed
        let pinned = ds.pin_scale();
        for fold in 0..plan.k {
            let train_view = pinned.restrict(&plan.training_indices(fold)).unwrap();
            let seed = rng::substream_seed(plan.seed, "cv-retrain", fold as u64);
            let cell = GridCell {
                dim: 2,
                lambda: 0.01,
                alpha: None,
            };
            let cfg = cell_config(&cell, ObjectiveKind::L2, seed, &opts);
            let emb = train(&train_view, ModelFamily::Sphm2, &cfg).unwrap();
            let (preds, truths, _) = score_indices(&pinned, &plan.test_indices(fold), |u, i| {
                predict(&emb, Some(u), Some(i))
            });
            assert_eq!(report.folds[fold].rmse, rmse(&preds, &truths).unwrap());
            assert_eq!(report.folds[fold].mae, mae(&preds, &truths).unwrap());
            let selected = report.folds[fold].selected.unwrap();
            assert_eq!(
                (selected.dim, selected.lambda, selected.alpha),
                (2, 0.01, None)
            );
        }
    }

    #[test]
    fn duplicate_grid_cells_change_nothing() {
        let ds = planted_dataset();
        let plan = make_folds(&ds, DEFAULT_FOLDS, 3).unwrap();
        let opts = CvOptions::default();
        let dup = GridSpec {
            dims: vec![2, 2, 3],
            lambdas: vec![0.1, 0.1, 0.01],
            alphas: vec![],
            selection: SelectionMetric::Rmse,
        };
        let dedup = GridSpec {
            dims: vec![2, 3],
            lambdas: vec![0.1, 0.01],
            alphas: vec![],
            selection: SelectionMetric::Rmse,
        };
        let a = run_cv(
            &ds,
            ModelFamily::Sphm2,
            ObjectiveKind::L2,
            &dup,
            &plan,
            &opts,
        )
        .unwrap();
        let b = run_cv(
            &ds,
            ModelFamily::Sphm2,
            ObjectiveKind::L2,
            &dedup,
            &plan,
            &opts,
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn planted_structure_beats_global_mean() {
        let ds = planted_dataset();
        let plan = make_folds(&ds, DEFAULT_FOLDS, 11).unwrap();
        let grid = GridSpec::single(2, 0.01, None);
        let report = run_cv(
            &ds,
            ModelFamily::Sphm2,
            ObjectiveKind::L2,
            &grid,
            &plan,
            &CvOptions::default(),
        )
        .unwrap();

        // oracle: predict the training-portion mean for every test rating
        let mut baseline_rmses = Vec::new();
        for fold in 0..plan.k {
            let train_idx = plan.training_indices(fold);
            let mean: f64 = train_idx
                .iter()
                .map(|&i| ds.ratings()[i].rating)
                .sum::<f64>()
                / train_idx.len() as f64;
            let test_idx = plan.test_indices(fold);
            let preds = vec![mean; test_idx.len()];
            let truths: Vec<f64> = test_idx.iter().map(|&i| ds.ratings()[i].rating).collect();
            baseline_rmses.push(rmse(&preds, &truths).unwrap());
        }
        let baseline = baseline_rmses.iter().sum::<f64>() / baseline_rmses.len() as f64;
        assert!(
            report.rmse_mean < baseline,
            "model {} vs global-mean baseline {}",
            report.rmse_mean,
            baseline
        );
    }

    #[test]
    fn same_seed_reproduces_the_report() {
        let ds = planted_dataset();
        let plan = make_folds(&ds, DEFAULT_FOLDS, 5).unwrap();
        let grid = GridSpec {
            dims: vec![2, 3],
            lambdas: vec![0.1, 0.01],
            alphas: vec![],
            selection: SelectionMetric::Rmse,
        };
        let opts = CvOptions::default();
        let a = run_cv(
            &ds,
            ModelFamily::Sphm2,
            ObjectiveKind::L2,
            &grid,
            &plan,
            &opts,
        )
        .unwrap();
        let b = run_cv(
            &ds,
            ModelFamily::Sphm2,
            ObjectiveKind::L2,
            &grid,
            &plan,
            &opts,
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn fallback_counts_cover_every_test_rating() {
        let ds = planted_dataset();
        let plan = make_folds(&ds, DEFAULT_FOLDS, 13).unwrap();
        let grid = GridSpec::single(2, 0.1, None);
        let report = run_cv(
            &ds,
            ModelFamily::Spdp,
            ObjectiveKind::L1,
            &grid,
            &plan,
            &CvOptions::default(),
        )
        .unwrap();
        for fold in &report.folds {
            assert_eq!(fold.fallbacks.total(), fold.test_size);
        }
        assert_eq!(report.folds.len(), DEFAULT_FOLDS);
    }

    #[test]
    fn item_knn_cv_runs_the_same_folds() {
        let ds = planted_dataset();
        let plan = make_folds(&ds, DEFAULT_FOLDS, 17).unwrap();
        let report = run_cv_item_knn(&ds, 5, &plan).unwrap();
        assert_eq!(report.folds.len(), DEFAULT_FOLDS);
        assert_eq!(report.method, "itemknn");
        assert!(report.rmse_mean.is_finite());
        assert!(report.rmse_mean >= report.mae_mean);
        for fold in &report.folds {
            assert!(fold.selected.is_none());
            assert_eq!(fold.fallbacks.total(), fold.test_size);
            assert!(fold.rmse >= fold.mae);
        }
        let again = run_cv_item_knn(&ds, 5, &plan).unwrap();
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }

    #[test]
    fn plan_dataset_mismatch_is_rejected() {
        let ds = planted_dataset();
        let plan = make_folds(&ds, DEFAULT_FOLDS, 1).unwrap();
        let smaller = ds.restrict(&(0..100).collect::<Vec<_>>()).unwrap();
        let grid = GridSpec::single(2, 0.1, None);
        assert!(run_cv(
            &smaller,
            ModelFamily::Sphm2,
            ObjectiveKind::L2,
            &grid,
            &plan,
            &CvOptions::default()
        )
        .is_err());
        assert!(run_cv_item_knn(&smaller, 5, &plan).is_err());
    }
}
