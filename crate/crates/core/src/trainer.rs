//! End-to-end fitting, prediction, and model-file serialization.
//!
//! Training assembles the pieces of the other modules: scale the ratings,
//! assign degrees from averages, initialize coordinates uniformly in
//! [−init_scale, init_scale] from the "init" substream of the seed, and
//! hand the objective to the conjugate-gradient solver. Prediction inverts
//! the training-time scaling, clamping kernel outputs into [p_min, p_max]
//! first, so every prediction lands on the rating scale; pairs involving a
//! node unseen in training fall back through item average, user average,
//! then global mean.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::RatingsDataset;
use crate::error::{Error, Result};
use crate::models::{ModelFamily, ModelKind, NodePair};
use crate::objective::{Objective, ObjectiveKind, ObjectiveSpec, ScaledRatings};
use crate::optimizer::{minimize, OptimizeStatus, OptimizerConfig};
use crate::rng;
use crate::scaling::{assign_degrees, DegreeVector, ScalingConfig, DEFAULT_P_MAX, DEFAULT_P_MIN};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub lambda: f64,
    /// SPHM1 exponent; ignored by the other families.
    pub alpha: f64,
    pub objective: ObjectiveKind,
    pub seed: u64,
    /// Half-width of the uniform coordinate initialization interval.
    pub init_scale: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Pins the objective-value reduction order; see the objective module.
    pub deterministic: bool,
    pub optimizer: OptimizerConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 10,
            lambda: 0.1,
            alpha: 2.0,
            objective: ObjectiveKind::L2,
            seed: 42,
            init_scale: 0.1,
            p_min: DEFAULT_P_MIN,
            p_max: DEFAULT_P_MAX,
            deterministic: true,
            optimizer: OptimizerConfig::default(),
        }
    }
}

/// How a training run ended, kept alongside the fitted parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    pub objective: ObjectiveSpec,
    pub status: OptimizeStatus,
    pub iterations: usize,
    pub initial_value: f64,
    pub final_value: f64,
}

/// A fitted model: coordinates, degrees, and everything needed to predict.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub model: ModelKind,
    pub dim: usize,
    /// n × dim, row-major.
    pub user_coords: Vec<f64>,
    /// m × dim, row-major.
    pub item_coords: Vec<f64>,
    pub user_degrees: DegreeVector,
    pub item_degrees: DegreeVector,
    /// Whether the node had any training ratings; unobserved nodes carry
    /// global-mean degrees and are served by fallbacks.
    pub user_observed: Vec<bool>,
    pub item_observed: Vec<bool>,
    pub scaling: ScalingConfig,
    pub global_mean: f64,
    pub provenance: Provenance,
}

/// Fits `family` on `train_set`. For SPHM1 the exponent comes from
/// `cfg.alpha` (it is a searched hyperparameter); the other families ignore
/// it.
pub fn train(
    train_set: &RatingsDataset,
    family: ModelFamily,
    cfg: &TrainConfig,
) -> Result<Embedding> {
    if cfg.dim == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if !(cfg.init_scale.is_finite() && cfg.init_scale > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "init_scale must be positive and finite, got {}",
            cfg.init_scale
        )));
    }
    let model = match family {
        ModelFamily::Sphm1 => {
            if !(cfg.alpha.is_finite() && cfg.alpha > 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "sphm1 exponent must exceed 1, got {}",
                    cfg.alpha
                )));
            }
            ModelKind::Sphm1 { alpha: cfg.alpha }
        }
        ModelFamily::Sphm2 => ModelKind::Sphm2,
        ModelFamily::Spdp => ModelKind::Spdp,
    };
    let spec = ObjectiveSpec::new(cfg.objective, cfg.lambda)?;
    let scaling = ScalingConfig::new(cfg.p_min, cfg.p_max, train_set.r_min(), train_set.r_max())?;
    let (user_degrees, item_degrees) = assign_degrees(train_set, &model, &scaling)?;
    let data = ScaledRatings::from_dataset(train_set, &scaling)?;
    let objective = Objective::new(
        model,
        spec,
        cfg.dim,
        &data,
        &user_degrees,
        &item_degrees,
        cfg.deterministic,
    )?;
    let layout = objective.layout();

    let mut init_rng = rng::substream(cfg.seed, "init", 0);
    let x0: Vec<f64> = (0..layout.len())
        .map(|_| rng::uniform_in(&mut init_rng, -cfg.init_scale, cfg.init_scale))
        .collect();

    let result = minimize(&objective, x0, &cfg.optimizer)?;
    let (user_coords, item_coords) = {
        let (u, i) = layout.split(&result.x);
        (u.to_vec(), i.to_vec())
    };
    Ok(Embedding {
        model,
        dim: cfg.dim,
        user_coords,
        item_coords,
        user_degrees,
        item_degrees,
        user_observed: (0..train_set.n_users())
            .map(|i| train_set.user_count(i) > 0)
            .collect(),
        item_observed: (0..train_set.n_items())
            .map(|j| train_set.item_count(j) > 0)
            .collect(),
        scaling,
        global_mean: train_set.global_mean(),
        provenance: Provenance {
            seed: cfg.seed,
            objective: spec,
            status: result.status,
            iterations: result.iterations,
            initial_value: result.trace[0],
            final_value: result.value,
        },
    })
}

/// Where a prediction came from: the fitted kernel or one of the cold-start
/// fallbacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    Model,
    ItemAverage,
    UserAverage,
    GlobalMean,
}

impl PredictionSource {
    pub fn name(&self) -> &'static str {
        match self {
            PredictionSource::Model => "model",
            PredictionSource::ItemAverage => "item-average",
            PredictionSource::UserAverage => "user-average",
            PredictionSource::GlobalMean => "global-mean",
        }
    }

    pub fn is_fallback(&self) -> bool {
        *self != PredictionSource::Model
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub rating: f64,
    pub source: PredictionSource,
}

impl Embedding {
    pub fn n_users(&self) -> usize {
        self.user_degrees.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_degrees.len()
    }

    fn known_user(&self, user: Option<usize>) -> Option<usize> {
        user.filter(|&i| i < self.n_users() && self.user_observed[i])
    }

    fn known_item(&self, item: Option<usize>) -> Option<usize> {
        item.filter(|&j| j < self.n_items() && self.item_observed[j])
    }

    /// Recovers the average rating a node's degree encodes.
    fn average_from_degree(&self, kappa: f64) -> f64 {
        let r = if self.model.is_metric() {
            kappa + self.scaling.r_min - 1.0
        } else {
            self.scaling.phi_inverse(kappa)
        };
        r.clamp(self.scaling.r_min, self.scaling.r_max)
    }

    pub fn user_average(&self, i: usize) -> f64 {
        self.average_from_degree(self.user_degrees.get(i))
    }

    pub fn item_average(&self, j: usize) -> f64 {
        self.average_from_degree(self.item_degrees.get(j))
    }
}

/// Rating prediction with the cold-start fallback chain; the result always
/// lies within the rating scale.
pub fn predict(emb: &Embedding, user: Option<usize>, item: Option<usize>) -> Prediction {
    match (emb.known_user(user), emb.known_item(item)) {
        (Some(i), Some(j)) => {
            let pair = NodePair {
                x: &emb.user_coords[i * emb.dim..(i + 1) * emb.dim],
                y: &emb.item_coords[j * emb.dim..(j + 1) * emb.dim],
                kappa_u: emb.user_degrees.get(i),
                kappa_v: emb.item_degrees.get(j),
            };
            let p = emb.model.kernel(&pair);
            Prediction {
                rating: emb.scaling.phi_inverse(p),
                source: PredictionSource::Model,
            }
        }
        (None, Some(j)) => Prediction {
            rating: emb.item_average(j),
            source: PredictionSource::ItemAverage,
        },
        (Some(i), None) => Prediction {
            rating: emb.user_average(i),
            source: PredictionSource::UserAverage,
        },
        (None, None) => Prediction {
            rating: emb.global_mean.clamp(emb.scaling.r_min, emb.scaling.r_max),
            source: PredictionSource::GlobalMean,
        },
    }
}

const MAGIC: &str = "SPREC";
const FORMAT_VERSION: u32 = 1;

/// Writes the embedding as line-oriented text; every float uses Rust's
/// shortest round-trip decimal form, so `load` reproduces it bit for bit.
pub fn save(emb: &Embedding, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let (name, alpha) = match emb.model {
        ModelKind::Sphm1 { alpha } => ("sphm1", alpha.to_string()),
        ModelKind::Sphm2 => ("sphm2", "1".to_string()),
        ModelKind::Spdp => ("spdp", "-".to_string()),
    };
    let _ = writeln!(out, "model {name} {alpha}");
    let _ = writeln!(out, "shape {} {} {}", emb.dim, emb.n_users(), emb.n_items());
    let s = &emb.scaling;
    let _ = writeln!(out, "scale {} {} {} {}", s.p_min, s.p_max, s.r_min, s.r_max);
    let _ = writeln!(out, "seed {}", emb.provenance.seed);
    let p = &emb.provenance;
    let _ = writeln!(
        out,
        "objective {} {} {} {} {} {}",
        p.objective.kind,
        p.objective.lambda,
        p.status,
        p.iterations,
        p.initial_value,
        p.final_value
    );
    let _ = writeln!(out, "global-mean {}", emb.global_mean);
    for (kappa, &observed) in emb.user_degrees.as_slice().iter().zip(&emb.user_observed) {
        let _ = writeln!(out, "{} {}", kappa, u8::from(observed));
    }
    for (kappa, &observed) in emb.item_degrees.as_slice().iter().zip(&emb.item_observed) {
        let _ = writeln!(out, "{} {}", kappa, u8::from(observed));
    }
    for row in emb.user_coords.chunks(emb.dim) {
        let _ = writeln!(out, "{}", join_floats(row));
    }
    for row in emb.item_coords.chunks(emb.dim) {
        let _ = writeln!(out, "{}", join_floats(row));
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

fn join_floats(row: &[f64]) -> String {
    let mut s = String::new();
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    s
}

struct Reader<'t> {
    lines: std::str::Lines<'t>,
    path: &'t Path,
    line_no: usize,
}

impl<'t> Reader<'t> {
    fn next(&mut self, what: &str) -> Result<&'t str> {
        self.line_no += 1;
        self.lines.next().ok_or_else(|| Error::ModelFormat {
            path: self.path.into(),
            message: format!("truncated: expected {what} at line {}", self.line_no),
        })
    }

    fn labeled(&mut self, label: &str, arity: usize) -> Result<Vec<&'t str>> {
        let line = self.next(label)?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some(label) {
            return Err(self.bad(&format!("expected a {label:?} line, got {line:?}")));
        }
        let rest: Vec<&str> = fields.collect();
        if rest.len() != arity {
            return Err(self.bad(&format!(
                "{label} line needs {arity} fields, got {}",
                rest.len()
            )));
        }
        Ok(rest)
    }

    fn bad(&self, message: &str) -> Error {
        Error::ModelFormat {
            path: self.path.into(),
            message: format!("line {}: {message}", self.line_no),
        }
    }

    fn parse<T: std::str::FromStr>(&self, field: &str, what: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.bad(&format!("cannot parse {what} from {field:?}")))
    }
}

/// Reads a file produced by [`save`], validating the format and the
/// model-specific degree invariants.
pub fn load(path: &Path) -> Result<Embedding> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    let mut r = Reader {
        lines: text.lines(),
        path,
        line_no: 0,
    };

    let header = r.next("magic header")?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(r.bad("wrong magic string"));
    }
    let version: u32 = r.parse(fields.next().unwrap_or(""), "format version")?;
    if version != FORMAT_VERSION {
        return Err(r.bad(&format!("unsupported format version {version}")));
    }

    let model_fields = r.labeled("model", 2)?;
    let model = match model_fields[0] {
        "sphm1" => {
            let alpha: f64 = r.parse(model_fields[1], "sphm1 exponent")?;
            if !(alpha.is_finite() && alpha > 1.0) {
                return Err(r.bad(&format!("sphm1 exponent must exceed 1, got {alpha}")));
            }
            ModelKind::Sphm1 { alpha }
        }
        "sphm2" => ModelKind::Sphm2,
        "spdp" => ModelKind::Spdp,
        other => return Err(r.bad(&format!("unknown model {other:?}"))),
    };

    let shape = r.labeled("shape", 3)?;
    let dim: usize = r.parse(shape[0], "dimension")?;
    let n: usize = r.parse(shape[1], "user count")?;
    let m: usize = r.parse(shape[2], "item count")?;
    if dim == 0 {
        return Err(r.bad("dimension must be at least 1"));
    }

    let scale = r.labeled("scale", 4)?;
    let scaling = ScalingConfig::new(
        r.parse(scale[0], "p_min")?,
        r.parse(scale[1], "p_max")?,
        r.parse(scale[2], "r_min")?,
        r.parse(scale[3], "r_max")?,
    )
    .map_err(|e| r.bad(&e.to_string()))?;

    let seed_field = r.labeled("seed", 1)?;
    let seed: u64 = r.parse(seed_field[0], "seed")?;

    let obj = r.labeled("objective", 6)?;
    let kind: ObjectiveKind = obj[0].parse().map_err(|e: String| r.bad(&e))?;
    let lambda: f64 = r.parse(obj[1], "lambda")?;
    let status: OptimizeStatus = obj[2].parse().map_err(|e: String| r.bad(&e))?;
    let iterations: usize = r.parse(obj[3], "iteration count")?;
    let initial_value: f64 = r.parse(obj[4], "initial objective value")?;
    let final_value: f64 = r.parse(obj[5], "final objective value")?;
    let objective = ObjectiveSpec::new(kind, lambda).map_err(|e| r.bad(&e.to_string()))?;

    let mean_field = r.labeled("global-mean", 1)?;
    let global_mean: f64 = r.parse(mean_field[0], "global mean")?;

    let read_degrees =
        |count: usize, side: &str, r: &mut Reader| -> Result<(Vec<f64>, Vec<bool>)> {
            let mut kappas = Vec::with_capacity(count);
            let mut observed = Vec::with_capacity(count);
            for _ in 0..count {
                let line = r.next(&format!("{side} degree line"))?;
                let mut fields = line.split_whitespace();
                let kappa: f64 = r.parse(fields.next().unwrap_or(""), "degree")?;
                let flag: u8 = r.parse(fields.next().unwrap_or(""), "observed flag")?;
                if flag > 1 {
                    return Err(r.bad(&format!("observed flag must be 0 or 1, got {flag}")));
                }
                let valid = if model.is_metric() {
                    kappa.is_finite() && kappa >= 1.0
                } else {
                    kappa >= scaling.p_min && kappa <= scaling.p_max
                };
                if !valid {
                    return Err(r.bad(&format!(
                        "degree {kappa} violates the {} invariant",
                        model.family()
                    )));
                }
                kappas.push(kappa);
                observed.push(flag == 1);
            }
            Ok((kappas, observed))
        };
    let (user_kappas, user_observed) = read_degrees(n, "user", &mut r)?;
    let (item_kappas, item_observed) = read_degrees(m, "item", &mut r)?;

    let read_coords = |count: usize, side: &str, r: &mut Reader| -> Result<Vec<f64>> {
        let mut coords = Vec::with_capacity(count * dim);
        for _ in 0..count {
            let line = r.next(&format!("{side} coordinate row"))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim {
                return Err(r.bad(&format!(
                    "coordinate row has {} fields, dimension is {dim}",
                    fields.len()
                )));
            }
            for f in fields {
                let v: f64 = r.parse(f, "coordinate")?;
                if !v.is_finite() {
                    return Err(r.bad(&format!("non-finite coordinate {v}")));
                }
                coords.push(v);
            }
        }
        Ok(coords)
    };
    let user_coords = read_coords(n, "user", &mut r)?;
    let item_coords = read_coords(m, "item", &mut r)?;

    Ok(Embedding {
        model,
        dim,
        user_coords,
        item_coords,
        user_degrees: DegreeVector::new(user_kappas),
        item_degrees: DegreeVector::new(item_kappas),
        user_observed,
        item_observed,
        scaling,
        global_mean,
        provenance: Provenance {
            seed,
            objective,
            status,
            iterations,
            initial_value,
            final_value,
        },
    })
}
