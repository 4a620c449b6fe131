//! Central finite-difference oracle for every analytic gradient.
//!
//! The per-rating gradients and the assembled objective gradient are
//! checked against numerical differentiation of the corresponding value
//! functions at random points, for every model and objective combination.
//! Points too close to an absolute-loss kink are skipped; enough points
//! are drawn that at least one hundred checks survive per combination.

use sprec_core::models::{grad_pair, ModelKind, NodePair, ResidualKind};
use sprec_core::objective::{Objective, ObjectiveKind, ObjectiveSpec, ScaledRatings};
use sprec_core::rng;
use sprec_core::scaling::DegreeVector;

const MODELS: [ModelKind; 4] = [
    ModelKind::Sphm1 { alpha: 2.0 },
    ModelKind::Sphm1 { alpha: 3.5 },
    ModelKind::Sphm2,
    ModelKind::Spdp,
];

fn residual_tolerance(residual: ResidualKind) -> f64 {
    match residual {
        ResidualKind::Squared => 1e-4,
        ResidualKind::Absolute => 1e-3,
    }
}

/// Relative error with both magnitudes in the denominator; pairs where
/// both sides are tiny count as matching.
fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs());
    if denom < 1e-6 {
        0.0
    } else {
        (analytic - numeric).abs() / denom
    }
}

fn random_kappa(rng: &mut rng::ChaCha8Rng, model: &ModelKind) -> f64 {
    if model.is_metric() {
        rng::uniform_in(rng, 1.0, 6.0)
    } else {
        rng::uniform_in(rng, 0.01, 0.99)
    }
}

#[test]
fn pair_gradients_match_finite_differences() {
    let h = 1e-5;
    for model in &MODELS {
        for residual in [ResidualKind::Squared, ResidualKind::Absolute] {
            for dim in [1usize, 2, 5] {
                let mut rng = rng::substream(0xFD, "fd-points", dim as u64);
                let tol = residual_tolerance(residual);
                let mut checked = 0;
                for _ in 0..200 {
                    let x: Vec<f64> = (0..dim)
                        .map(|_| rng::uniform_in(&mut rng, -1.5, 1.5))
                        .collect();
                    let y: Vec<f64> = (0..dim)
                        .map(|_| rng::uniform_in(&mut rng, -1.5, 1.5))
                        .collect();
                    let ku = random_kappa(&mut rng, model);
                    let kv = random_kappa(&mut rng, model);
                    let r_tilde = rng::uniform_in(&mut rng, 0.01, 0.99);

                    let value = |x: &[f64], y: &[f64]| {
                        let pair = NodePair {
                            x,
                            y,
                            kappa_u: ku,
                            kappa_v: kv,
                        };
                        residual.loss(model.kernel(&pair), r_tilde)
                    };
                    let pair = NodePair {
                        x: &x,
                        y: &y,
                        kappa_u: ku,
                        kappa_v: kv,
                    };
                    let p = model.kernel(&pair);
                    if residual == ResidualKind::Absolute && (p - r_tilde).abs() < 1e-3 {
                        continue;
                    }
                    let (dx, dy) = grad_pair(model, &pair, residual, p, r_tilde);

                    for k in 0..dim {
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[k] += h;
                        xm[k] -= h;
                        let fd = (value(&xp, &y) - value(&xm, &y)) / (2.0 * h);
                        assert!(
                            rel_err(dx[k], fd) < tol,
                            "{model:?}/{residual:?} D={dim} dx[{k}]: analytic {} vs fd {fd}",
                            dx[k]
                        );

                        let mut yp = y.clone();
                        let mut ym = y.clone();
                        yp[k] += h;
                        ym[k] -= h;
                        let fd = (value(&x, &yp) - value(&x, &ym)) / (2.0 * h);
                        assert!(
                            rel_err(dy[k], fd) < tol,
                            "{model:?}/{residual:?} D={dim} dy[{k}]: analytic {} vs fd {fd}",
                            dy[k]
                        );
                    }
                    checked += 1;
                }
                assert!(
                    checked >= 100,
                    "{model:?}/{residual:?} D={dim}: only {checked} points checked"
                );
            }
        }
    }
}

fn toy_objective_parts(model: ModelKind) -> (ScaledRatings, DegreeVector, DegreeVector) {
    // 3 users, 4 items, 8 scaled ratings
    let entries = [
        (0u32, 0u32, 0.9),
        (0, 1, 0.3),
        (0, 3, 0.7),
        (1, 0, 0.2),
        (1, 2, 0.85),
        (2, 1, 0.5),
        (2, 2, 0.15),
        (2, 3, 0.6),
    ];
    let data = ScaledRatings::from_scaled(3, 4, &entries).unwrap();
    let (users, items) = if model.is_metric() {
        (vec![2.0, 3.5, 1.2], vec![4.0, 1.0, 2.2, 3.0])
    } else {
        (vec![0.3, 0.8, 0.5], vec![0.6, 0.2, 0.9, 0.4])
    };
    (data, DegreeVector::new(users), DegreeVector::new(items))
}

fn check_full_objective(model: ModelKind, kind: ObjectiveKind, dim: usize, h: f64, tol: f64) {
    let (data, users, items) = toy_objective_parts(model);
    let spec = ObjectiveSpec::new(kind, 0.1).unwrap();
    let objective = Objective::new(model, spec, dim, &data, &users, &items, true).unwrap();
    let len = objective.layout().len();

    let mut rng = rng::substream(0xFD, "fd-objective", dim as u64);
    let params: Vec<f64> = (0..len)
        .map(|_| rng::uniform_in(&mut rng, -1.0, 1.0))
        .collect();
    let mut grad = vec![0.0; len];
    objective.gradient(&params, &mut grad).unwrap();

    for k in 0..len {
        let mut plus = params.clone();
        let mut minus = params.clone();
        plus[k] += h;
        minus[k] -= h;
        let fd = (objective.value(&plus).unwrap() - objective.value(&minus).unwrap()) / (2.0 * h);
        assert!(
            rel_err(grad[k], fd) < tol,
            "{model:?}/{kind:?} D={dim} coord {k}: analytic {} vs fd {fd}",
            grad[k]
        );
    }
}

#[test]
fn objective_gradient_matches_finite_differences() {
    for model in MODELS {
        check_full_objective(model, ObjectiveKind::L2, 2, 1e-5, 1e-4);
        check_full_objective(model, ObjectiveKind::L1, 2, 1e-5, 1e-3);
    }
}

#[test]
fn objective_gradient_matches_at_tight_step() {
    check_full_objective(ModelKind::Sphm2, ObjectiveKind::L2, 3, 1e-6, 1e-5);
}
