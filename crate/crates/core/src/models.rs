//! Connection kernels linking latent coordinates and degrees to ratings.
//!
//! Three kernels share one vocabulary: a user and an item each carry a
//! D-dimensional coordinate vector and a positive expected degree. The two
//! metric kernels (SPHM1 with a free exponent, SPHM2 with the exponent fixed
//! to 1) turn squared Euclidean distance into a probability in (0, 1]; the
//! dot-product kernel (SPDP) produces an unbounded nonnegative score. The
//! per-rating gradients of both loss flavors live here too, so the objective
//! module only has to sum them.

use serde::{Deserialize, Serialize};

/// Exponent cap for the dot-product kernel. Beyond it the score saturates
/// and the gradient is defined as zero, keeping value and gradient mutually
/// consistent for line searches and finite-difference checks. Trained
/// embeddings stay far below the cap because target values lie inside (0,1).
pub const SPDP_EXP_CLAMP: f64 = 50.0;

/// Concrete model: the variant plus any exponent it carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    Sphm1 { alpha: f64 },
    Sphm2,
    Spdp,
}

/// Model selector without hyperparameters, used where the exponent is still
/// to be chosen (grids, CLI flags).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelFamily {
    Sphm1,
    Sphm2,
    Spdp,
}

impl ModelKind {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelKind::Sphm1 { .. } => ModelFamily::Sphm1,
            ModelKind::Sphm2 => ModelFamily::Sphm2,
            ModelKind::Spdp => ModelFamily::Spdp,
        }
    }

    /// True for the two distance-based kernels.
    pub fn is_metric(&self) -> bool {
        !matches!(self, ModelKind::Spdp)
    }

    /// Kernel output for one pair: a probability for the metric kernels, an
    /// unbounded score for the dot-product kernel.
    pub fn kernel(&self, pair: &NodePair) -> f64 {
        match *self {
            ModelKind::Sphm1 { alpha } => sphm1_prob(pair, alpha),
            ModelKind::Sphm2 => sphm2_prob(pair),
            ModelKind::Spdp => spdp_score(pair),
        }
    }

    /// Exponent of the metric kernel (1 for SPHM2), None for SPDP.
    pub fn metric_exponent(&self) -> Option<f64> {
        match *self {
            ModelKind::Sphm1 { alpha } => Some(alpha),
            ModelKind::Sphm2 => Some(1.0),
            ModelKind::Spdp => None,
        }
    }
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Sphm1 => "sphm1",
            ModelFamily::Sphm2 => "sphm2",
            ModelFamily::Spdp => "spdp",
        }
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphm1" => Ok(ModelFamily::Sphm1),
            "sphm2" => Ok(ModelFamily::Sphm2),
            "spdp" => Ok(ModelFamily::Spdp),
            other => Err(format!(
                "unknown model {other:?} (expected sphm1, sphm2, or spdp)"
            )),
        }
    }
}

/// Borrowed view of one user/item pair: coordinates and expected degrees.
#[derive(Debug, Clone, Copy)]
pub struct NodePair<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub kappa_u: f64,
    pub kappa_v: f64,
}

impl NodePair<'_> {
    pub fn squared_distance(&self) -> f64 {
        self.x
            .iter()
            .zip(self.y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn dot(&self) -> f64 {
        self.x.iter().zip(self.y).map(|(a, b)| a * b).sum()
    }
}

/// Metric kernel: (1 + d²/√(κ_u κ_v))^(-α). Output in (0, 1].
pub fn sphm1_prob(pair: &NodePair, alpha: f64) -> f64 {
    let s = (pair.kappa_u * pair.kappa_v).sqrt();
    let q = pair.squared_distance() / s;
    if alpha == 1.0 {
        // same arithmetic the exponent-1 model uses, so the two agree bitwise
        1.0 / (1.0 + q)
    } else {
        (1.0 + q).powf(-alpha)
    }
}

/// Metric kernel with the exponent fixed to 1.
pub fn sphm2_prob(pair: &NodePair) -> f64 {
    sphm1_prob(pair, 1.0)
}

/// Dot-product kernel: √(κ_u κ_v) · exp(x·y), exponent capped at
/// [`SPDP_EXP_CLAMP`]. Unbounded above, symmetric in its two nodes.
pub fn spdp_score(pair: &NodePair) -> f64 {
    let s = (pair.kappa_u * pair.kappa_v).sqrt();
    s * pair.dot().min(SPDP_EXP_CLAMP).exp()
}

/// Loss applied to the kernel-output-vs-scaled-rating residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualKind {
    Squared,
    Absolute,
}

impl ResidualKind {
    pub fn loss(self, p: f64, r_tilde: f64) -> f64 {
        let e = p - r_tilde;
        match self {
            ResidualKind::Squared => e * e,
            ResidualKind::Absolute => e.abs(),
        }
    }

    /// Derivative of the loss in p; the absolute case uses sign(0) = 0.
    fn dloss(self, p: f64, r_tilde: f64) -> f64 {
        match self {
            ResidualKind::Squared => 2.0 * (p - r_tilde),
            ResidualKind::Absolute => {
                if p > r_tilde {
                    1.0
                } else if p < r_tilde {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Scalar c such that this rating's data-term gradient is c·(x_k − y_k) per
/// coordinate of x (and the negation for y) under the metric kernels, or
/// (c·y_k, c·x_k) under the dot-product kernel. `p` must be the kernel
/// output for `pair`.
pub(crate) fn pair_coefficient(
    model: &ModelKind,
    pair: &NodePair,
    residual: ResidualKind,
    p: f64,
    r_tilde: f64,
) -> f64 {
    let f = residual.dloss(p, r_tilde);
    match model.metric_exponent() {
        Some(alpha) => {
            let s = (pair.kappa_u * pair.kappa_v).sqrt();
            let q = pair.squared_distance() / s;
            // dp/dq = -α(1+q)^(-α-1) = -α·p/(1+q); dq/dx_k = 2(x_k − y_k)/s
            -f * alpha * p / (1.0 + q) * 2.0 / s
        }
        None => {
            if pair.dot() >= SPDP_EXP_CLAMP {
                0.0
            } else {
                f * p
            }
        }
    }
}

/// Per-rating data-term gradient with respect to both coordinate vectors,
/// regularization excluded. `p` must be the kernel output for `pair`.
pub fn grad_pair(
    model: &ModelKind,
    pair: &NodePair,
    residual: ResidualKind,
    p: f64,
    r_tilde: f64,
) -> (Vec<f64>, Vec<f64>) {
    let c = pair_coefficient(model, pair, residual, p, r_tilde);
    if model.is_metric() {
        let dx: Vec<f64> = pair
            .x
            .iter()
            .zip(pair.y)
            .map(|(a, b)| c * (a - b))
            .collect();
        let dy: Vec<f64> = dx.iter().map(|v| -v).collect();
        (dx, dy)
    } else {
        let dx: Vec<f64> = pair.y.iter().map(|v| c * v).collect();
        let dy: Vec<f64> = pair.x.iter().map(|v| c * v).collect();
        (dx, dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair<'a>(x: &'a [f64], y: &'a [f64], ku: f64, kv: f64) -> NodePair<'a> {
        NodePair {
            x,
            y,
            kappa_u: ku,
            kappa_v: kv,
        }
    }

    #[test]
    fn sphm1_zero_distance_is_one() {
        let x = [0.3, -0.2];
        let p = pair(&x, &x, 2.5, 7.0);
        assert_eq!(sphm1_prob(&p, 2.0), 1.0);
        assert_eq!(sphm1_prob(&p, 7.5), 1.0);
        assert_eq!(sphm2_prob(&p), 1.0);
    }

    #[test]
    fn sphm1_at_characteristic_distance() {
        // d² = √(κ_u κ_v) makes the base 2, so α = 2 gives 1/4
        let x = [0.0, 0.0];
        let y = [3.0, 0.0]; // d² = 9
        let p = pair(&x, &y, 81.0, 1.0); // √(81·1) = 9
        assert_relative_eq!(sphm1_prob(&p, 2.0), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn sphm1_alpha_one_example() {
        let x = [0.0];
        let y = [3.0f64.sqrt()]; // d² = 3
        let p = pair(&x, &y, 1.0, 1.0);
        assert_relative_eq!(sphm1_prob(&p, 1.0), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn sphm2_examples() {
        let x = [0.0];
        let y = [1.0];
        assert_relative_eq!(
            sphm2_prob(&pair(&x, &y, 1.0, 1.0)),
            0.5,
            max_relative = 1e-15
        );
        let y2 = [2.0f64.sqrt()]; // d² = 2, √(4·1) = 2
        assert_relative_eq!(
            sphm2_prob(&pair(&x, &y2, 4.0, 1.0)),
            0.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn sphm1_alpha_one_matches_sphm2_bitwise() {
        let mut rng = crate::rng::substream(11, "kernel-grid", 0);
        for _ in 0..200 {
            let x: Vec<f64> = (0..3)
                .map(|_| crate::rng::uniform_in(&mut rng, -2.0, 2.0))
                .collect();
            let y: Vec<f64> = (0..3)
                .map(|_| crate::rng::uniform_in(&mut rng, -2.0, 2.0))
                .collect();
            let ku = crate::rng::uniform_in(&mut rng, 0.1, 5.0);
            let kv = crate::rng::uniform_in(&mut rng, 0.1, 5.0);
            let p = pair(&x, &y, ku, kv);
            assert_eq!(sphm1_prob(&p, 1.0).to_bits(), sphm2_prob(&p).to_bits());
        }
    }

    #[test]
    fn spdp_examples() {
        let zero = [0.0, 0.0];
        let p = pair(&zero, &zero, 0.25, 0.25);
        assert_eq!(spdp_score(&p), 0.25);
        let x = [std::f64::consts::LN_2, 0.0];
        let y = [1.0, 0.0];
        assert_relative_eq!(
            spdp_score(&pair(&x, &y, 1.0, 1.0)),
            2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn spdp_symmetric_in_nodes() {
        let mut rng = crate::rng::substream(11, "kernel-sym", 0);
        for _ in 0..100 {
            let x: Vec<f64> = (0..4)
                .map(|_| crate::rng::uniform_in(&mut rng, -1.5, 1.5))
                .collect();
            let y: Vec<f64> = (0..4)
                .map(|_| crate::rng::uniform_in(&mut rng, -1.5, 1.5))
                .collect();
            let ku = crate::rng::uniform_in(&mut rng, 0.01, 0.99);
            let kv = crate::rng::uniform_in(&mut rng, 0.01, 0.99);
            let a = spdp_score(&pair(&x, &y, ku, kv));
            let b = spdp_score(&pair(&y, &x, kv, ku));
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn spdp_exponent_clamps() {
        let x = [10.0, 10.0];
        let y = [10.0, 10.0]; // dot = 200
        let p = pair(&x, &y, 1.0, 1.0);
        assert_eq!(spdp_score(&p), SPDP_EXP_CLAMP.exp());
        // gradient defined as zero in the clamped region
        let (dx, dy) = grad_pair(
            &ModelKind::Spdp,
            &p,
            ResidualKind::Squared,
            spdp_score(&p),
            0.5,
        );
        assert!(dx.iter().chain(&dy).all(|&g| g == 0.0));
    }

    #[test]
    fn metric_grad_zero_at_coincident_points() {
        let x = [0.4, -0.7, 0.1];
        let p = pair(&x, &x, 2.0, 3.0);
        for model in [ModelKind::Sphm1 { alpha: 3.0 }, ModelKind::Sphm2] {
            let pk = model.kernel(&p);
            for res in [ResidualKind::Squared, ResidualKind::Absolute] {
                let (dx, dy) = grad_pair(&model, &p, res, pk, 0.3);
                assert!(dx.iter().chain(&dy).all(|&g| g == 0.0), "{model:?} {res:?}");
            }
        }
    }

    #[test]
    fn zero_residual_means_zero_gradient() {
        let x = [0.2, 0.1];
        let y = [-0.3, 0.5];
        let p = pair(&x, &y, 0.4, 0.9);
        let score = spdp_score(&p);
        let (dx, dy) = grad_pair(&ModelKind::Spdp, &p, ResidualKind::Squared, score, score);
        assert!(dx.iter().chain(&dy).all(|&g| g == 0.0));
        // sign(0) = 0 makes the absolute loss behave the same at the kink
        let (dx, dy) = grad_pair(&ModelKind::Spdp, &p, ResidualKind::Absolute, score, score);
        assert!(dx.iter().chain(&dy).all(|&g| g == 0.0));
    }

    #[test]
    fn metric_kernels_monotone_in_distance_and_degrees() {
        let mut rng = crate::rng::substream(12, "kernel-mono", 0);
        for _ in 0..200 {
            let ku = crate::rng::uniform_in(&mut rng, 0.2, 6.0);
            let kv = crate::rng::uniform_in(&mut rng, 0.2, 6.0);
            let alpha = crate::rng::uniform_in(&mut rng, 1.0, 9.0);
            let d1 = crate::rng::uniform_in(&mut rng, 0.01, 3.0);
            let d2 = d1 + crate::rng::uniform_in(&mut rng, 0.01, 2.0);
            let x = [0.0];
            let y1 = [d1.sqrt()];
            let y2 = [d2.sqrt()];
            let p_near = sphm1_prob(&pair(&x, &y1, ku, kv), alpha);
            let p_far = sphm1_prob(&pair(&x, &y2, ku, kv), alpha);
            assert!(p_near > p_far, "probability must fall with distance");
            assert!(p_near > 0.0 && p_near <= 1.0);
            let p_popular = sphm1_prob(&pair(&x, &y1, ku * 1.5, kv), alpha);
            assert!(p_popular > p_near, "probability must rise with degree");
        }
    }
}
