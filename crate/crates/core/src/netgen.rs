//! Synthetic similarity-popularity networks on a ring.
//!
//! Nodes get uniform positions on a circle and hidden degrees from a
//! Pareto law with exponent `gamma` truncated below at `kappa_min`. A pair
//! at arc distance d connects with probability (1 + d/d_c)^(-alpha), where
//! the characteristic distance d_c grows with the product of the two
//! hidden degrees. The d_c scale is normalized so `degree_scale` directly
//! controls the expected mean degree; see [`characteristic_distance`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct NetGenConfig {
    pub nodes: usize,
    /// Hidden-degree power-law exponent, > 2.
    pub gamma: f64,
    /// Connection-probability decay exponent, > 1.
    pub alpha: f64,
    pub circumference: f64,
    pub kappa_min: f64,
    /// Multiplier on d_c; approximately the expected mean degree times
    /// pi * (alpha - 1) / E[kappa].
    pub degree_scale: f64,
    pub seed: u64,
}

impl NetGenConfig {
    /// Defaults: circumference equal to the node count (unit node density),
    /// kappa_min 1, degree_scale 1.
    pub fn new(nodes: usize, gamma: f64, alpha: f64, seed: u64) -> NetGenConfig {
        NetGenConfig {
            nodes,
            gamma,
            alpha,
            circumference: nodes as f64,
            kappa_min: 1.0,
            degree_scale: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::InvalidConfig(
                "network needs at least one node".into(),
            ));
        }
        if !(self.gamma.is_finite() && self.gamma > 2.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must exceed 2, got {}",
                self.gamma
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must exceed 1, got {}",
                self.alpha
            )));
        }
        for (name, v) in [
            ("circumference", self.circumference),
            ("kappa_min", self.kappa_min),
            ("degree_scale", self.degree_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Expectation of the Pareto hidden degree, kappa_min (gamma-1)/(gamma-2).
    pub fn mean_kappa(&self) -> f64 {
        self.kappa_min * (self.gamma - 1.0) / (self.gamma - 2.0)
    }

    /// Sets `degree_scale` so the expected mean degree comes out near
    /// `target` (exact in the limit of a large sparse ring).
    pub fn with_target_mean_degree(mut self, target: f64) -> NetGenConfig {
        self.degree_scale = target * std::f64::consts::PI * (self.alpha - 1.0) / self.mean_kappa();
        self
    }
}

/// Shorter-arc distance between two ring positions.
pub fn ring_distance(a: f64, b: f64, circumference: f64) -> f64 {
    let d = (a - b).abs() % circumference;
    d.min(circumference - d)
}

/// d_c = degree_scale * kappa kappa' * C / (2 pi N E[kappa]); proportional
/// to the degree product, normalized by ring size and density.
pub fn characteristic_distance(cfg: &NetGenConfig, kappa_u: f64, kappa_v: f64) -> f64 {
    cfg.degree_scale * kappa_u * kappa_v * cfg.circumference
        / (2.0 * std::f64::consts::PI * cfg.nodes as f64 * cfg.mean_kappa())
}

/// (1 + d/d_c)^(-alpha) with d_c from [`characteristic_distance`].
pub fn connection_probability(cfg: &NetGenConfig, d: f64, kappa_u: f64, kappa_v: f64) -> f64 {
    let dc = characteristic_distance(cfg, kappa_u, kappa_v);
    (1.0 + d / dc).powf(-cfg.alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedNetwork {
    /// Ring position per node, in [0, circumference).
    pub positions: Vec<f64>,
    /// Hidden degree per node, at least kappa_min.
    pub kappas: Vec<f64>,
    /// Undirected edges with u < v, no self-loops, no duplicates.
    pub edges: Vec<(u32, u32)>,
}

impl GeneratedNetwork {
    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }
}

/// Samples a network. Positions come from the "positions" substream,
/// hidden degrees from "degrees", and row i of the pair matrix from the
/// "edges" substream at index i, so the result does not depend on how the
/// rows are scheduled across threads.
pub fn generate(cfg: &NetGenConfig) -> Result<GeneratedNetwork> {
    cfg.validate()?;
    let n = cfg.nodes;

    let mut pos_rng = rng::substream(cfg.seed, "positions", 0);
    let positions: Vec<f64> = (0..n)
        .map(|_| rng::uniform_in(&mut pos_rng, 0.0, cfg.circumference))
        .collect();

    let mut deg_rng = rng::substream(cfg.seed, "degrees", 0);
    let kappas: Vec<f64> = (0..n)
        .map(|_| rng::pareto(&mut deg_rng, cfg.kappa_min, cfg.gamma))
        .collect();

    let rows: Vec<Vec<(u32, u32)>> = (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let mut row_rng = rng::substream(cfg.seed, "edges", i as u64);
            let mut row = Vec::new();
            for j in i + 1..n {
                let d = ring_distance(positions[i], positions[j], cfg.circumference);
                let p = connection_probability(cfg, d, kappas[i], kappas[j]);
                if rng::uniform_f64(&mut row_rng) < p {
                    row.push((i as u32, j as u32));
                }
            }
            row
        })
        .collect();

    Ok(GeneratedNetwork {
        positions,
        kappas,
        edges: rows.concat(),
    })
}

/// Exact degree summary from the edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    /// Degree per node.
    pub degrees: Vec<usize>,
    /// histogram[d] = number of nodes with degree d.
    pub histogram: Vec<usize>,
    pub max_degree: usize,
    pub mean_degree: f64,
}

pub fn degree_stats(net: &GeneratedNetwork) -> DegreeStats {
    let n = net.n_nodes();
    let mut degrees = vec![0usize; n];
    for &(u, v) in &net.edges {
        degrees[u as usize] += 1;
        degrees[v as usize] += 1;
    }
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; max_degree + 1];
    for &d in &degrees {
        histogram[d] += 1;
    }
    let mean_degree = if n == 0 {
        0.0
    } else {
        2.0 * net.edges.len() as f64 / n as f64
    };
    DegreeStats {
        degrees,
        histogram,
        max_degree,
        mean_degree,
    }
}
