//! Rating prediction through latent positions in a hidden metric space.
//!
//! Users and items are embedded as points in a low-dimensional Euclidean
//! space and carry popularity degrees derived from their average ratings.
//! A similarity-popularity network model turns a pair's distance (or dot
//! product) and degrees into a connection probability, and an affine map
//! between the rating scale and probability space turns that probability
//! into a rating. Fitting minimizes squared or absolute prediction error
//! plus a norm penalty with a conjugate-gradient solver.
//!
//! Module map: [`dataset`] ingests rating files and builds fold plans;
//! [`models`] holds the three probability kernels and their gradients;
//! [`scaling`] maps between ratings, probabilities, and degrees;
//! [`objective`] assembles the regularized loss; [`optimizer`] minimizes
//! it; [`trainer`] wires those into fit/predict/save/load; [`evaluation`]
//! drives cross-validation, grid search, mean-rank tables, and the ItemKNN
//! baseline; [`netgen`] samples synthetic networks from the same model
//! family; [`rng`] pins every random draw to named substreams of one seed.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod models;
pub mod netgen;
pub mod objective;
pub mod optimizer;
pub mod rng;
pub mod scaling;
pub mod trainer;

pub use dataset::{
    make_folds, Delimiter, FoldPlan, IngestOptions, RatingTriple, RatingsDataset, DEFAULT_FOLDS,
};
pub use error::{Error, Result};
pub use evaluation::{
    item_knn_predict, mae, mean_rank, rmse, run_cv, run_cv_item_knn, CvOptions, CvReport, GridSpec,
    ItemKnnModel, MetricMatrix, RankTable, SelectionMetric, DEFAULT_NEIGHBORS,
};
pub use models::{ModelFamily, ModelKind};
pub use netgen::{degree_stats, generate, GeneratedNetwork, NetGenConfig};
pub use objective::{Objective, ObjectiveKind, ObjectiveSpec};
pub use optimizer::{minimize, ObjectiveFn, OptimizeResult, OptimizeStatus, OptimizerConfig};
pub use scaling::ScalingConfig;
pub use trainer::{
    load, predict, save, train, Embedding, Prediction, PredictionSource, TrainConfig,
};
