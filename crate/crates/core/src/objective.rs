//! Full training objective: per-rating loss plus coordinate-norm penalty.
//!
//! The parameter vector is flat: user i's coordinate k sits at i·D + k,
//! item j's at (n + j)·D + k. Gradients are accumulated per node (each
//! user's ratings form one contiguous block, likewise per item), so every
//! addition happens in a fixed order and the result is identical at any
//! thread count. The value reduction follows the same per-user blocks; the
//! `deterministic` flag pins the final block sum to a fixed order, while
//! clearing it lets the blocks reduce in whatever order the thread pool
//! finds them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::RatingsDataset;
use crate::error::{Error, Result};
use crate::models::{pair_coefficient, ModelKind, NodePair, ResidualKind};
use crate::scaling::{DegreeVector, ScalingConfig};

/// Loss/penalty family: L2 pairs squared residuals with squared norms, L1
/// absolute residuals with absolute norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    L1,
    L2,
}

impl ObjectiveKind {
    pub fn residual(self) -> ResidualKind {
        match self {
            ObjectiveKind::L1 => ResidualKind::Absolute,
            ObjectiveKind::L2 => ResidualKind::Squared,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::L1 => "l1",
            ObjectiveKind::L2 => "l2",
        }
    }
}

impl std::fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "l1" => Ok(ObjectiveKind::L1),
            "l2" => Ok(ObjectiveKind::L2),
            other => Err(format!("unknown objective {other:?} (expected l1 or l2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub lambda: f64,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, lambda: f64) -> Result<ObjectiveSpec> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "regularization coefficient must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(ObjectiveSpec { kind, lambda })
    }
}

/// Shape of the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterLayout {
    pub n_users: usize,
    pub n_items: usize,
    pub dim: usize,
}

impl ParameterLayout {
    pub fn len(&self) -> usize {
        (self.n_users + self.n_items) * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn user_offset(&self, i: usize) -> usize {
        i * self.dim
    }

    pub fn item_offset(&self, j: usize) -> usize {
        (self.n_users + j) * self.dim
    }

    pub fn user_coords<'p>(&self, params: &'p [f64], i: usize) -> &'p [f64] {
        &params[self.user_offset(i)..self.user_offset(i) + self.dim]
    }

    pub fn item_coords<'p>(&self, params: &'p [f64], j: usize) -> &'p [f64] {
        &params[self.item_offset(j)..self.item_offset(j) + self.dim]
    }

    /// All user coordinates, then all item coordinates.
    pub fn split<'p>(&self, params: &'p [f64]) -> (&'p [f64], &'p [f64]) {
        params.split_at(self.n_users * self.dim)
    }
}

/// Training ratings mapped into (0, 1) and grouped for per-node traversal:
/// entries are stored sorted by (user, item), with an extra permutation
/// giving the (item, user) order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRatings {
    n_users: usize,
    n_items: usize,
    users: Vec<u32>,
    items: Vec<u32>,
    values: Vec<f64>,
    /// Position → index of the rating in the source dataset's order.
    original: Vec<u32>,
    user_ptr: Vec<u32>,
    by_item: Vec<u32>,
    item_ptr: Vec<u32>,
}

impl ScaledRatings {
    /// Scales every rating of `ds` with `cfg.phi`.
    pub fn from_dataset(ds: &RatingsDataset, cfg: &ScalingConfig) -> Result<ScaledRatings> {
        let entries = ds
            .ratings()
            .iter()
            .map(|t| Ok((t.user, t.item, cfg.phi(t.rating)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_scaled(ds.n_users(), ds.n_items(), &entries)
    }

    /// Builds directly from already-scaled values.
    pub fn from_scaled(
        n_users: usize,
        n_items: usize,
        entries: &[(u32, u32, f64)],
    ) -> Result<ScaledRatings> {
        for &(u, i, v) in entries {
            if u as usize >= n_users {
                return Err(Error::InvalidIndex {
                    index: u as usize,
                    len: n_users,
                });
            }
            if i as usize >= n_items {
                return Err(Error::InvalidIndex {
                    index: i as usize,
                    len: n_items,
                });
            }
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "non-finite scaled rating {v}"
                )));
            }
        }
        let mut order: Vec<u32> = (0..entries.len() as u32).collect();
        order.sort_by_key(|&p| {
            let (u, i, _) = entries[p as usize];
            (u, i)
        });
        let users: Vec<u32> = order.iter().map(|&p| entries[p as usize].0).collect();
        let items: Vec<u32> = order.iter().map(|&p| entries[p as usize].1).collect();
        let values: Vec<f64> = order.iter().map(|&p| entries[p as usize].2).collect();
        let user_ptr = bucket_ptr(&users, n_users);
        let mut by_item: Vec<u32> = (0..users.len() as u32).collect();
        by_item.sort_by_key(|&p| (items[p as usize], users[p as usize]));
        let sorted_items: Vec<u32> = by_item.iter().map(|&p| items[p as usize]).collect();
        let item_ptr = bucket_ptr(&sorted_items, n_items);
        Ok(ScaledRatings {
            n_users,
            n_items,
            users,
            items,
            values,
            original: order,
            user_ptr,
            by_item,
            item_ptr,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Positions of user `i`'s ratings (contiguous).
    pub fn user_range(&self, i: usize) -> std::ops::Range<usize> {
        self.user_ptr[i] as usize..self.user_ptr[i + 1] as usize
    }

    /// Positions of item `j`'s ratings, via the (item, user) permutation.
    pub fn item_positions(&self, j: usize) -> &[u32] {
        &self.by_item[self.item_ptr[j] as usize..self.item_ptr[j + 1] as usize]
    }
}

/// Prefix offsets of each key's contiguous run in `sorted_keys`.
fn bucket_ptr(sorted_keys: &[u32], n_keys: usize) -> Vec<u32> {
    let mut ptr = vec![0u32; n_keys + 1];
    for &k in sorted_keys {
        ptr[k as usize + 1] += 1;
    }
    for k in 0..n_keys {
        ptr[k + 1] += ptr[k];
    }
    ptr
}

/// Objective evaluator bound to one model, loss spec, and training view.
pub struct Objective<'a> {
    model: ModelKind,
    spec: ObjectiveSpec,
    layout: ParameterLayout,
    data: &'a ScaledRatings,
    user_degrees: &'a DegreeVector,
    item_degrees: &'a DegreeVector,
    deterministic: bool,
}

impl<'a> Objective<'a> {
    pub fn new(
        model: ModelKind,
        spec: ObjectiveSpec,
        dim: usize,
        data: &'a ScaledRatings,
        user_degrees: &'a DegreeVector,
        item_degrees: &'a DegreeVector,
        deterministic: bool,
    ) -> Result<Objective<'a>> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if user_degrees.len() != data.n_users() || item_degrees.len() != data.n_items() {
            return Err(Error::InvalidConfig(format!(
                "degree vectors ({}, {}) do not match dataset shape ({}, {})",
                user_degrees.len(),
                item_degrees.len(),
                data.n_users(),
                data.n_items()
            )));
        }
        ObjectiveSpec::new(spec.kind, spec.lambda)?;
        Ok(Objective {
            model,
            spec,
            layout: ParameterLayout {
                n_users: data.n_users(),
                n_items: data.n_items(),
                dim,
            },
            data,
            user_degrees,
            item_degrees,
            deterministic,
        })
    }

    pub fn layout(&self) -> ParameterLayout {
        self.layout
    }

    fn check_len(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.layout.len() {
            return Err(Error::InvalidConfig(format!(
                "parameter vector has length {}, layout requires {}",
                params.len(),
                self.layout.len()
            )));
        }
        Ok(())
    }

    /// Sum of losses over one user's ratings.
    fn user_partial(&self, xs: &[f64], ys: &[f64], i: usize) -> f64 {
        let dim = self.layout.dim;
        let residual = self.spec.kind.residual();
        let x = &xs[i * dim..(i + 1) * dim];
        let mut acc = 0.0;
        for p in self.data.user_range(i) {
            let j = self.data.items[p] as usize;
            let pair = NodePair {
                x,
                y: &ys[j * dim..(j + 1) * dim],
                kappa_u: self.user_degrees.get(i),
                kappa_v: self.item_degrees.get(j),
            };
            acc += residual.loss(self.model.kernel(&pair), self.data.values[p]);
        }
        acc
    }

    fn regularization(&self, params: &[f64]) -> f64 {
        match self.spec.kind {
            ObjectiveKind::L2 => params.iter().map(|&v| v * v).sum::<f64>(),
            ObjectiveKind::L1 => params.iter().map(|&v| v.abs()).sum::<f64>(),
        }
    }

    /// Locates the first rating whose loss term is non-finite and reports
    /// its index in the source dataset's order.
    fn non_finite_error(&self, xs: &[f64], ys: &[f64]) -> Error {
        let dim = self.layout.dim;
        let residual = self.spec.kind.residual();
        for p in 0..self.data.len() {
            let (i, j) = (self.data.users[p] as usize, self.data.items[p] as usize);
            let pair = NodePair {
                x: &xs[i * dim..(i + 1) * dim],
                y: &ys[j * dim..(j + 1) * dim],
                kappa_u: self.user_degrees.get(i),
                kappa_v: self.item_degrees.get(j),
            };
            if !residual
                .loss(self.model.kernel(&pair), self.data.values[p])
                .is_finite()
            {
                return Error::NonFiniteValue {
                    rating: Some(self.data.original[p] as usize),
                };
            }
        }
        Error::NonFiniteValue { rating: None }
    }

    pub fn value(&self, params: &[f64]) -> Result<f64> {
        self.check_len(params)?;
        let (xs, ys) = self.layout.split(params);
        let n = self.layout.n_users;
        let data_term = if self.deterministic {
            let partials: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|i| self.user_partial(xs, ys, i))
                .collect();
            partials.iter().sum::<f64>()
        } else {
            (0..n)
                .into_par_iter()
                .map(|i| self.user_partial(xs, ys, i))
                .sum::<f64>()
        };
        let total = data_term + self.spec.lambda * self.regularization(params);
        if !total.is_finite() {
            return Err(self.non_finite_error(xs, ys));
        }
        Ok(total)
    }

    pub fn gradient(&self, params: &[f64], grad: &mut [f64]) -> Result<()> {
        self.value_and_gradient(params, grad).map(drop)
    }

    /// Computes the objective and writes its gradient into `grad` in one
    /// fused sweep: a user pass evaluates every kernel once, caching the
    /// per-rating coefficient, and an item pass reuses the cache.
    pub fn value_and_gradient(&self, params: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.check_len(params)?;
        self.check_len(grad)?;
        let dim = self.layout.dim;
        let n = self.layout.n_users;
        let residual = self.spec.kind.residual();
        let metric = self.model.is_metric();
        let (xs, ys) = self.layout.split(params);
        let (gx, gy) = grad.split_at_mut(n * dim);

        let mut coeff = vec![0.0f64; self.data.len()];
        let mut partials = vec![0.0f64; n];
        let coeff_slices = split_by_ptr(&mut coeff, &self.data.user_ptr);
        gx.par_chunks_mut(dim)
            .zip(coeff_slices)
            .zip(partials.par_iter_mut())
            .enumerate()
            .for_each(|(i, ((gxi, ci), partial))| {
                gxi.fill(0.0);
                let x = &xs[i * dim..(i + 1) * dim];
                let mut acc = 0.0;
                for (t, p) in self.data.user_range(i).enumerate() {
                    let j = self.data.items[p] as usize;
                    let y = &ys[j * dim..(j + 1) * dim];
                    let pair = NodePair {
                        x,
                        y,
                        kappa_u: self.user_degrees.get(i),
                        kappa_v: self.item_degrees.get(j),
                    };
                    let pk = self.model.kernel(&pair);
                    let target = self.data.values[p];
                    acc += residual.loss(pk, target);
                    let c = pair_coefficient(&self.model, &pair, residual, pk, target);
                    ci[t] = c;
                    if metric {
                        for k in 0..dim {
                            gxi[k] += c * (x[k] - y[k]);
                        }
                    } else {
                        for k in 0..dim {
                            gxi[k] += c * y[k];
                        }
                    }
                }
                *partial = acc;
            });

        let coeff = &coeff;
        gy.par_chunks_mut(dim).enumerate().for_each(|(j, gyj)| {
            gyj.fill(0.0);
            let y = &ys[j * dim..(j + 1) * dim];
            for &p in self.data.item_positions(j) {
                let p = p as usize;
                let i = self.data.users[p] as usize;
                let x = &xs[i * dim..(i + 1) * dim];
                let c = coeff[p];
                if metric {
                    for k in 0..dim {
                        gyj[k] += c * (y[k] - x[k]);
                    }
                } else {
                    for k in 0..dim {
                        gyj[k] += c * x[k];
                    }
                }
            }
        });

        let lambda = self.spec.lambda;
        match self.spec.kind {
            ObjectiveKind::L2 => {
                grad.par_iter_mut()
                    .zip(params.par_iter())
                    .for_each(|(g, &v)| {
                        *g += 2.0 * lambda * v;
                    });
            }
            ObjectiveKind::L1 => {
                grad.par_iter_mut()
                    .zip(params.par_iter())
                    .for_each(|(g, &v)| {
                        *g += lambda * sign(v);
                    });
            }
        }

        let data_term: f64 = partials.iter().sum();
        let total = data_term + lambda * self.regularization(params);
        if !total.is_finite() {
            return Err(self.non_finite_error(xs, ys));
        }
        Ok(total)
    }
}

impl crate::optimizer::ObjectiveFn for Objective<'_> {
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.value_and_gradient(x, grad)
    }
}

/// sign with sign(0) = 0, unlike f64::signum.
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Cuts `buf` into one mutable slice per bucket following `ptr` offsets.
fn split_by_ptr<'b>(buf: &'b mut [f64], ptr: &[u32]) -> Vec<&'b mut [f64]> {
    let mut out = Vec::with_capacity(ptr.len().saturating_sub(1));
    let mut rest = buf;
    for w in ptr.windows(2) {
        let take = (w[1] - w[0]) as usize;
        let (head, tail) = std::mem::take(&mut rest).split_at_mut(take);
        out.push(head);
        rest = tail;
    }
    out
}
