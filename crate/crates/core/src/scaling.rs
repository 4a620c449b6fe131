//! Rating-scale transforms and expected-degree assignment.
//!
//! Ratings live on an arbitrary closed scale [r_min, r_max]; model targets
//! live strictly inside (0, 1). `phi` maps affinely between the two,
//! `varphi` shifts the scale so it starts at 1. Expected degrees come from
//! per-node average ratings: the metric models translate them (so every
//! degree is at least 1), the dot-product model scales them into
//! [p_min, p_max].

use serde::{Deserialize, Serialize};

use crate::dataset::RatingsDataset;
use crate::error::{Error, Result};
use crate::models::ModelKind;

pub const DEFAULT_P_MIN: f64 = 0.01;
pub const DEFAULT_P_MAX: f64 = 0.99;

/// Affine map between the rating scale and a target interval inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl ScalingConfig {
    pub fn new(p_min: f64, p_max: f64, r_min: f64, r_max: f64) -> Result<ScalingConfig> {
        if !(p_min > 0.0 && p_min < p_max && p_max < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "probability bounds must satisfy 0 < p_min < p_max < 1, got [{p_min}, {p_max}]"
            )));
        }
        if !(r_min.is_finite() && r_max.is_finite() && r_min < r_max) {
            return Err(Error::InvalidConfig(format!(
                "rating bounds must be finite with r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        Ok(ScalingConfig {
            p_min,
            p_max,
            r_min,
            r_max,
        })
    }

    /// Maps a rating into [p_min, p_max]; strictly increasing.
    pub fn phi(&self, r: f64) -> Result<f64> {
        if !(r >= self.r_min && r <= self.r_max) {
            return Err(Error::RatingOutOfBounds {
                rating: r,
                r_min: self.r_min,
                r_max: self.r_max,
            });
        }
        Ok((r - self.r_min) / (self.r_max - self.r_min) * (self.p_max - self.p_min) + self.p_min)
    }

    /// Inverse of [`phi`](Self::phi), total by clamping: inputs outside
    /// [p_min, p_max] (possible for unbounded scores) land on the nearest
    /// scale bound.
    pub fn phi_inverse(&self, p: f64) -> f64 {
        let p = p.clamp(self.p_min, self.p_max);
        (p - self.p_min) / (self.p_max - self.p_min) * (self.r_max - self.r_min) + self.r_min
    }
}

/// Shifts a rating so the scale starts at 1: r − r_min + 1.
pub fn varphi(r: f64, r_min: f64) -> Result<f64> {
    if !r.is_finite() || r < r_min {
        return Err(Error::RatingOutOfBounds {
            rating: r,
            r_min,
            r_max: f64::INFINITY,
        });
    }
    Ok(r - r_min + 1.0)
}

/// Per-node expected-degree parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeVector {
    values: Vec<f64>,
}

impl DegreeVector {
    pub fn new(values: Vec<f64>) -> DegreeVector {
        DegreeVector { values }
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Expected degrees for every user and item from their average ratings;
/// nodes without ratings in this view fall back to the global mean. Metric
/// models yield degrees ≥ 1, the dot-product model degrees in
/// [p_min, p_max].
pub fn assign_degrees(
    ds: &RatingsDataset,
    model: &ModelKind,
    cfg: &ScalingConfig,
) -> Result<(DegreeVector, DegreeVector)> {
    let fallback = ds.global_mean();
    let degree_of = |avg: f64| -> Result<f64> {
        if model.is_metric() {
            varphi(avg, cfg.r_min)
        } else {
            cfg.phi(avg)
        }
    };
    let users = (0..ds.n_users())
        .map(|i| degree_of(ds.user_average(i).unwrap_or(fallback)))
        .collect::<Result<Vec<f64>>>()?;
    let items = (0..ds.n_items())
        .map(|j| degree_of(ds.item_average(j).unwrap_or(fallback)))
        .collect::<Result<Vec<f64>>>()?;
    Ok((DegreeVector::new(users), DegreeVector::new(items)))
}
