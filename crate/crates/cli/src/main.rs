//! Command-line front end for the similarity-popularity recommender.
//!
//! One process runs one subcommand: ingest a ratings file, train a model,
//! predict from a saved model, run the cross-validated protocol, probe a
//! hyperparameter grid, rank methods across datasets, or sample a
//! synthetic network. Results go to stdout as key=value lines and,
//! optionally, to a JSON report file carrying the resolved configuration.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use sprec_core::dataset::Delimiter;
use sprec_core::evaluation::SelectionMetric;
use sprec_core::models::ModelFamily;
use sprec_core::objective::ObjectiveKind;

#[derive(Parser)]
#[command(
    name = "sprec",
    version,
    about = "Similarity-popularity rating prediction"
)]
struct Cli {
    #[command(flatten)]
    shared: SharedArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each can also come from the
/// environment variable of the same name with the SPREC_ prefix.
#[derive(Args, Debug, Clone)]
struct SharedArgs {
    /// Master seed; every random draw flows from it through named substreams.
    #[arg(long, global = true, env = "SPREC_SEED", default_value_t = 42)]
    seed: u64,

    /// Worker threads; 0 means all available cores.
    #[arg(long, global = true, env = "SPREC_THREADS", default_value_t = 0)]
    threads: usize,

    /// Pin the floating-point reduction order so reruns are bit-identical
    /// at any thread count (small speed cost).
    #[arg(
        long,
        global = true,
        env = "SPREC_DETERMINISTIC",
        default_value_t = true,
        action = ArgAction::Set,
        num_args = 1,
        value_name = "BOOL"
    )]
    deterministic: bool,

    /// Lower end of the probability interval ratings are scaled into.
    #[arg(long, global = true, env = "SPREC_P_MIN", default_value_t = 0.01)]
    p_min: f64,

    /// Upper end of the probability interval ratings are scaled into.
    #[arg(long, global = true, env = "SPREC_P_MAX", default_value_t = 0.99)]
    p_max: f64,

    /// Declared rating scale as min:max; inferred from the data if absent.
    #[arg(long, global = true, env = "SPREC_SCALE", value_parser = parse_scale, value_name = "MIN:MAX")]
    scale: Option<(f64, f64)>,
}

fn parse_scale(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected min:max, got {s:?}"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse scale minimum {lo:?}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse scale maximum {hi:?}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("scale needs finite min < max, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DelimiterArg {
    Auto,
    Tab,
    Comma,
    Space,
}

impl From<DelimiterArg> for Delimiter {
    fn from(d: DelimiterArg) -> Delimiter {
        match d {
            DelimiterArg::Auto => Delimiter::Auto,
            DelimiterArg::Tab => Delimiter::Tab,
            DelimiterArg::Comma => Delimiter::Comma,
            DelimiterArg::Space => Delimiter::Space,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    L1,
    L2,
}

impl From<ObjectiveArg> for ObjectiveKind {
    fn from(o: ObjectiveArg) -> ObjectiveKind {
        match o {
            ObjectiveArg::L1 => ObjectiveKind::L1,
            ObjectiveArg::L2 => ObjectiveKind::L2,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SelectionArg {
    Rmse,
    Mae,
}

impl From<SelectionArg> for SelectionMetric {
    fn from(s: SelectionArg) -> SelectionMetric {
        match s {
            SelectionArg::Rmse => SelectionMetric::Rmse,
            SelectionArg::Mae => SelectionMetric::Mae,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Sphm1,
    Sphm2,
    Spdp,
}

impl From<FamilyArg> for ModelFamily {
    fn from(f: FamilyArg) -> ModelFamily {
        match f {
            FamilyArg::Sphm1 => ModelFamily::Sphm1,
            FamilyArg::Sphm2 => ModelFamily::Sphm2,
            FamilyArg::Spdp => ModelFamily::Spdp,
        }
    }
}

/// Model selector for the protocol commands, including the grid-free
/// ItemKNN baseline.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Sphm1,
    Sphm2,
    Spdp,
    Itemknn,
}

/// Flags for commands that start by reading a ratings file.
#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Ratings file: one "user item rating" record per line.
    #[arg(long)]
    input: PathBuf,

    #[arg(long, value_enum, default_value_t = DelimiterArg::Auto)]
    delimiter: DelimiterArg,

    /// Drop users with fewer ratings than this.
    #[arg(long, default_value_t = 5)]
    min_ratings: usize,
}

/// Optimizer knobs shared by the training commands.
#[derive(Args, Debug, Clone)]
struct FitArgs {
    /// Half-width of the uniform coordinate initialization interval.
    #[arg(long, default_value_t = 0.1)]
    init_scale: f64,

    #[arg(long, default_value_t = 500)]
    max_iterations: usize,

    /// Stop when the gradient sup-norm falls below this.
    #[arg(long, default_value_t = 1e-6)]
    grad_tolerance: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read a ratings file and print its post-filter summary.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Write a JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Fit one model on the whole dataset and write a model file.
    Train {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        model: FamilyArg,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::L2)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        /// SPHM1 decay exponent; ignored by the other families.
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[command(flatten)]
        fit: FitArgs,
        /// Model file to write.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Predict one user-item pair from a saved model file.
    Predict {
        /// Model file written by the train command.
        #[arg(long)]
        model: PathBuf,
        /// User index; omit for an unknown user.
        #[arg(long)]
        user: Option<usize>,
        /// Item index; omit for an unknown item.
        #[arg(long)]
        item: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Run the cross-validated protocol: per fold, grid-search on a
    /// validation split, retrain the winner, score the held-out fold.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        model: MethodArg,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::L2)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Candidate dimensions, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![5, 10, 20])]
        dims: Vec<usize>,
        /// Candidate regularization weights, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.01])]
        lambdas: Vec<f64>,
        /// Candidate SPHM1 exponents, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])]
        alphas: Vec<f64>,
        #[arg(long, value_enum, default_value_t = SelectionArg::Rmse)]
        selection: SelectionArg,
        /// Neighborhood size for the itemknn baseline.
        #[arg(long, default_value_t = 25)]
        neighbors: usize,
        /// Record failed folds and continue instead of aborting.
        #[arg(long)]
        allow_fold_failures: bool,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Train every grid cell on one fold's validation split and report
    /// each cell's score (the same scores the evaluate command selects by).
    Gridsearch {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        model: FamilyArg,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::L2)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Which fold's training portion to split for validation.
        #[arg(long, default_value_t = 0)]
        fold: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![5, 10, 20])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.01])]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])]
        alphas: Vec<f64>,
        #[arg(long, value_enum, default_value_t = SelectionArg::Rmse)]
        selection: SelectionArg,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Rank methods across datasets from a metric matrix CSV
    /// (header "dataset,<method>,..."; lower metric values are better).
    Rank {
        /// Metric matrix CSV; externally computed baselines welcome.
        #[arg(long)]
        input: PathBuf,
        /// Write the rank table as CSV here (stdout otherwise).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Sample a synthetic similarity-popularity network on a ring.
    Netgen {
        #[arg(long)]
        nodes: usize,
        /// Hidden-degree power-law exponent (> 2).
        #[arg(long, default_value_t = 2.5)]
        gamma: f64,
        /// Connection-probability decay exponent (> 1).
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Ring circumference; defaults to the node count.
        #[arg(long)]
        circumference: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        kappa_min: f64,
        /// Direct multiplier on the characteristic distance.
        #[arg(long, conflicts_with = "mean_degree")]
        degree_scale: Option<f64>,
        /// Calibrate the multiplier to hit this expected mean degree.
        #[arg(long)]
        mean_degree: Option<f64>,
        /// Edge list output, one "u v" line per edge.
        #[arg(long)]
        edges_out: Option<PathBuf>,
        /// Node table output, one "id position kappa" line per node.
        #[arg(long)]
        nodes_out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.shared.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.shared.threads)
            .build_global()
        {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match commands::run(&cli.shared, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
