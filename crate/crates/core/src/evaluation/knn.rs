//! Item-based k-nearest-neighbors baseline with Pearson similarity.
//!
//! Similarity between two items is the Pearson correlation of their rating
//! vectors restricted to co-rating users; a pair needs at least
//! [`MIN_CO_RATERS`] co-raters and nonzero variance on both sides to count.
//! A prediction averages the target user's ratings on the most-similar
//! co-rated items, weighted by similarity; neighbors with non-positive
//! similarity are excluded. When no neighbor qualifies the prediction falls
//! back to the user average, then the item average, then the global mean.

use rayon::prelude::*;

use crate::dataset::RatingsDataset;
use crate::error::{Error, Result};
use crate::trainer::{Prediction, PredictionSource};

pub const DEFAULT_NEIGHBORS: usize = 25;
pub const MIN_CO_RATERS: usize = 2;

/// Precomputed item-item similarity model.
#[derive(Debug, Clone)]
pub struct ItemKnnModel {
    k: usize,
    n_items: usize,
    /// Per user, (item, rating) sorted by item.
    user_ratings: Vec<Vec<(u32, f64)>>,
    /// Dense item-by-item Pearson matrix; NaN marks pairs without a valid
    /// correlation.
    sim: Vec<f64>,
    user_average: Vec<Option<f64>>,
    item_average: Vec<Option<f64>>,
    global_mean: f64,
}

/// Pearson correlation over the co-raters of two items, given their rater
/// lists sorted by user. NaN when fewer than [`MIN_CO_RATERS`] co-raters or
/// either side has zero variance.
fn pearson(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut n = 0usize;
    let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let (ra, rb) = (a[i].1, b[j].1);
                n += 1;
                sa += ra;
                sb += rb;
                sab += ra * rb;
                saa += ra * ra;
                sbb += rb * rb;
                i += 1;
                j += 1;
            }
        }
    }
    if n < MIN_CO_RATERS {
        return f64::NAN;
    }
    let nf = n as f64;
    let cov = sab - sa * sb / nf;
    let va = saa - sa * sa / nf;
    let vb = sbb - sb * sb / nf;
    if va <= 0.0 || vb <= 0.0 {
        return f64::NAN;
    }
    (cov / (va * vb).sqrt()).clamp(-1.0, 1.0)
}

impl ItemKnnModel {
    /// Builds the full similarity matrix from the training ratings.
    pub fn fit(ds: &RatingsDataset, k: usize) -> Result<ItemKnnModel> {
        if k == 0 {
            return Err(Error::InvalidConfig(
                "neighborhood size must be at least 1".into(),
            ));
        }
        let n = ds.n_users();
        let m = ds.n_items();
        let mut user_ratings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut item_raters: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
        for t in ds.ratings() {
            user_ratings[t.user as usize].push((t.item, t.rating));
            item_raters[t.item as usize].push((t.user, t.rating));
        }
        for list in &mut user_ratings {
            list.sort_unstable_by_key(|&(item, _)| item);
        }
        for list in &mut item_raters {
            list.sort_unstable_by_key(|&(user, _)| user);
        }

        let mut sim = vec![f64::NAN; m * m];
        sim.par_chunks_mut(m).enumerate().for_each(|(a, row)| {
            for (b, slot) in row.iter_mut().enumerate().skip(a + 1) {
                *slot = pearson(&item_raters[a], &item_raters[b]);
            }
        });
        for a in 1..m {
            for b in 0..a {
                sim[a * m + b] = sim[b * m + a];
            }
        }

        Ok(ItemKnnModel {
            k,
            n_items: m,
            user_ratings,
            sim,
            user_average: (0..n).map(|i| ds.user_average(i)).collect(),
            item_average: (0..m).map(|j| ds.item_average(j)).collect(),
            global_mean: ds.global_mean(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Pearson similarity of two items, or None when no valid correlation
    /// exists.
    pub fn similarity(&self, a: usize, b: usize) -> Option<f64> {
        if a >= self.n_items || b >= self.n_items {
            return None;
        }
        let s = self.sim[a * self.n_items + b];
        s.is_finite().then_some(s)
    }

    pub fn predict(&self, user: Option<usize>, item: Option<usize>) -> Prediction {
        let user =
            user.filter(|&u| u < self.user_ratings.len() && !self.user_ratings[u].is_empty());
        let item_avg = item
            .filter(|&j| j < self.n_items)
            .and_then(|j| self.item_average[j]);

        if let (Some(u), Some(j)) = (user, item.filter(|&j| j < self.n_items)) {
            let mut neighbors: Vec<(f64, u32, f64)> = self.user_ratings[u]
                .iter()
                .filter(|&&(i, _)| i as usize != j)
                .filter_map(|&(i, r)| {
                    let s = self.sim[j * self.n_items + i as usize];
                    (s.is_finite() && s > 0.0).then_some((s, i, r))
                })
                .collect();
            neighbors.sort_unstable_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
            neighbors.truncate(self.k);
            if !neighbors.is_empty() {
                let weight: f64 = neighbors.iter().map(|t| t.0).sum();
                let total: f64 = neighbors.iter().map(|t| t.0 * t.2).sum();
                return Prediction {
                    rating: total / weight,
                    source: PredictionSource::Model,
                };
            }
        }

        if let Some(u) = user {
            let avg = self.user_average[u].expect("rated user has an average");
            Prediction {
                rating: avg,
                source: PredictionSource::UserAverage,
            }
        } else if let Some(avg) = item_avg {
            Prediction {
                rating: avg,
                source: PredictionSource::ItemAverage,
            }
        } else {
            Prediction {
                rating: self.global_mean,
                source: PredictionSource::GlobalMean,
            }
        }
    }
}

/// One-shot convenience: fit on `train` and predict a single pair.
pub fn item_knn_predict(
    train: &RatingsDataset,
    k: usize,
    user: Option<usize>,
    item: Option<usize>,
) -> Result<f64> {
    Ok(ItemKnnModel::fit(train, k)?.predict(user, item).rating)
}
