//! Metrics, the cross-validated experiment driver, grid search, mean-rank
//! tables, and the ItemKNN baseline.

mod cv;
mod knn;
mod metrics;
mod rank;

pub use cv::{
    run_cv, run_cv_item_knn, CvOptions, CvReport, FallbackCounts, FoldFailure, FoldReport,
    GridCell, GridSpec, SelectedCell, SelectionMetric,
};
pub use knn::{item_knn_predict, ItemKnnModel, DEFAULT_NEIGHBORS, MIN_CO_RATERS};
pub use metrics::{mae, rmse};
pub use rank::{mean_rank, MetricMatrix, RankTable};
