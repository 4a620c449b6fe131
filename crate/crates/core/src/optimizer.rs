//! Nonlinear conjugate gradient with a strong-Wolfe line search.
//!
//! Directions follow the Hager-Zhang update with its standard lower
//! truncation, which guarantees a descent direction regardless of how the
//! previous line search ended. The line search brackets and zooms with
//! quadratic interpolation plus a bisection fallback; a step is accepted
//! only if it satisfies the sufficient-decrease condition, so the trace of
//! accepted values never increases. When the search cannot satisfy the
//! curvature condition (routine near the kinks of an absolute-loss
//! objective) it falls back to the best sufficient-decrease point. A failed
//! search triggers one steepest-descent restart before the solver reports
//! failure; restarts are also forced periodically, by default every
//! parameter-count iterations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value-plus-gradient callback minimized by [`minimize`].
pub trait ObjectiveFn {
    /// Returns the value at `x` and writes the gradient into `grad`.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Result<f64>;
}

impl<F> ObjectiveFn for F
where
    F: Fn(&[f64], &mut [f64]) -> Result<f64>,
{
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Stop once the gradient sup-norm drops to this or below.
    pub grad_tolerance: f64,
    /// Sufficient-decrease (Armijo) constant c1.
    pub sufficient_decrease: f64,
    /// Strong-Wolfe curvature constant c2.
    pub curvature: f64,
    /// Iterations between forced steepest-descent restarts; None means the
    /// parameter count.
    pub restart_period: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 500,
            grad_tolerance: 1e-6,
            sufficient_decrease: 1e-4,
            curvature: 0.1,
            restart_period: None,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        let (c1, c2) = (self.sufficient_decrease, self.curvature);
        if !(c1 > 0.0 && c1 < c2 && c2 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "line-search constants must satisfy 0 < c1 < c2 < 1, got c1={c1}, c2={c2}"
            )));
        }
        if self.grad_tolerance.is_nan() || self.grad_tolerance < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gradient tolerance must be nonnegative, got {}",
                self.grad_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizeStatus {
    Converged,
    MaxIterations,
    LineSearchFailure,
}

impl OptimizeStatus {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizeStatus::Converged => "converged",
            OptimizeStatus::MaxIterations => "max-iters",
            OptimizeStatus::LineSearchFailure => "line-search-failure",
        }
    }
}

impl std::fmt::Display for OptimizeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OptimizeStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "converged" => Ok(OptimizeStatus::Converged),
            "max-iters" => Ok(OptimizeStatus::MaxIterations),
            "line-search-failure" => Ok(OptimizeStatus::LineSearchFailure),
            other => Err(format!("unknown optimizer status {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub status: OptimizeStatus,
    /// Completed (accepted) iterations.
    pub iterations: usize,
    pub grad_sup_norm: f64,
    /// Objective at x0, then after each accepted step; never increasing.
    pub trace: Vec<f64>,
    /// Directional derivative g·d of each accepted search; negative on
    /// every run by the descent guarantee.
    pub directional_derivatives: Vec<f64>,
}

const MAX_BRACKET: usize = 25;
const MAX_ZOOM: usize = 40;
const EXPAND: f64 = 4.0;
const ALPHA_CEILING: f64 = 1e18;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// One evaluated point along the search direction.
#[derive(Debug, Clone, Copy)]
struct Trial {
    alpha: f64,
    value: f64,
    /// φ'(α) = g(x + αd)·d.
    slope: f64,
}

/// Evaluates φ(α); a non-finite objective at a trial point acts as +∞ so
/// the bracket shrinks instead of aborting.
fn eval_trial<O: ObjectiveFn>(
    obj: &O,
    x: &[f64],
    d: &[f64],
    alpha: f64,
    x_trial: &mut [f64],
    g_trial: &mut [f64],
) -> Result<Trial> {
    for (t, (xk, dk)) in x_trial.iter_mut().zip(x.iter().zip(d)) {
        *t = xk + alpha * dk;
    }
    match obj.eval(x_trial, g_trial) {
        Ok(v) if v.is_finite() => Ok(Trial {
            alpha,
            value: v,
            slope: dot(g_trial, d),
        }),
        Ok(_) | Err(Error::NonFiniteValue { .. }) => Ok(Trial {
            alpha,
            value: f64::INFINITY,
            slope: 0.0,
        }),
        Err(e) => Err(e),
    }
}

/// Minimizer of the quadratic through (lo.alpha, lo.value) with slope
/// lo.slope and (hi.alpha, hi.value); None when the quadratic has no
/// interior minimum.
fn quadratic_min(lo: &Trial, hi: &Trial) -> Option<f64> {
    let delta = hi.alpha - lo.alpha;
    if delta == 0.0 {
        return None;
    }
    let b = (hi.value - lo.value - lo.slope * delta) / (delta * delta);
    if !(b.is_finite() && b > 0.0) {
        return None;
    }
    let a = lo.alpha - lo.slope / (2.0 * b);
    a.is_finite().then_some(a)
}

/// Strong-Wolfe search along `d` from `x`. Returns the accepted trial with
/// the buffers holding its point and gradient, or None when no acceptable
/// step exists. `f0`/`g0` are φ(0) and φ'(0) with g0 < 0.
#[allow(clippy::too_many_arguments)]
fn line_search<O: ObjectiveFn>(
    obj: &O,
    x: &[f64],
    d: &[f64],
    f0: f64,
    g0: f64,
    alpha_init: f64,
    cfg: &OptimizerConfig,
    x_trial: &mut [f64],
    g_trial: &mut [f64],
) -> Result<Option<Trial>> {
    let c1 = cfg.sufficient_decrease;
    let c2 = cfg.curvature;
    let armijo = |t: &Trial| t.value <= f0 + c1 * t.alpha * g0;
    let curvature_ok = |t: &Trial| t.slope.abs() <= -c2 * g0;
    // α the buffers currently hold, so acceptance can avoid a re-evaluation
    let mut held = f64::NAN;

    let mut prev = Trial {
        alpha: 0.0,
        value: f0,
        slope: g0,
    };
    let mut alpha = alpha_init;
    let mut bracket: Option<(Trial, Trial)> = None;
    for round in 0..MAX_BRACKET {
        let t = eval_trial(obj, x, d, alpha, x_trial, g_trial)?;
        held = t.alpha;
        if !armijo(&t) || (round > 0 && t.value >= prev.value) {
            bracket = Some((prev, t));
            break;
        }
        if curvature_ok(&t) {
            return Ok(Some(t));
        }
        if t.slope >= 0.0 {
            bracket = Some((t, prev));
            break;
        }
        prev = t;
        alpha *= EXPAND;
        if alpha > ALPHA_CEILING {
            break;
        }
    }

    let Some((mut lo, mut hi)) = bracket else {
        // the direction kept descending past the expansion ceiling; settle
        // for the last sufficient-decrease point
        return finish_at(obj, x, d, prev, held, x_trial, g_trial);
    };

    for _ in 0..MAX_ZOOM {
        let width = (hi.alpha - lo.alpha).abs();
        if width <= 1e-14 * lo.alpha.abs().max(1.0) {
            break;
        }
        let lower = lo.alpha.min(hi.alpha) + 0.1 * width;
        let upper = lo.alpha.max(hi.alpha) - 0.1 * width;
        let candidate = quadratic_min(&lo, &hi)
            .filter(|a| *a >= lower && *a <= upper)
            .unwrap_or(0.5 * (lo.alpha + hi.alpha));
        let t = eval_trial(obj, x, d, candidate, x_trial, g_trial)?;
        held = t.alpha;
        if !armijo(&t) || t.value >= lo.value {
            hi = t;
        } else {
            if curvature_ok(&t) {
                return Ok(Some(t));
            }
            if t.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
    }
    finish_at(obj, x, d, lo, held, x_trial, g_trial)
}

/// Accepts `best` when it made sufficient progress, restoring the buffers
/// to its point if a later probe overwrote them.
fn finish_at<O: ObjectiveFn>(
    obj: &O,
    x: &[f64],
    d: &[f64],
    best: Trial,
    held: f64,
    x_trial: &mut [f64],
    g_trial: &mut [f64],
) -> Result<Option<Trial>> {
    if best.alpha <= 0.0 || !best.value.is_finite() {
        return Ok(None);
    }
    if held == best.alpha {
        return Ok(Some(best));
    }
    let t = eval_trial(obj, x, d, best.alpha, x_trial, g_trial)?;
    Ok(t.value.is_finite().then_some(t))
}

/// Minimizes `obj` starting from `x0`.
pub fn minimize<O: ObjectiveFn>(
    obj: &O,
    x0: Vec<f64>,
    cfg: &OptimizerConfig,
) -> Result<OptimizeResult> {
    cfg.validate()?;
    let dim = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; dim];
    let mut f = obj.eval(&x, &mut g)?;
    if !f.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    let restart_period = cfg.restart_period.unwrap_or(dim).max(1);

    let mut trace = vec![f];
    let mut directional = Vec::new();
    let mut d = vec![0.0; dim];
    let mut g_prev = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let mut x_trial = vec![0.0; dim];
    let mut g_trial = vec![0.0; dim];

    let mut status = OptimizeStatus::MaxIterations;
    let mut iterations = 0;
    let mut since_restart = 0usize;
    let mut have_history = false;
    let mut alpha_prev = 1.0;
    let mut gd_prev = -1.0;

    for _ in 0..cfg.max_iterations {
        let gsup = sup_norm(&g);
        if gsup <= cfg.grad_tolerance {
            status = OptimizeStatus::Converged;
            break;
        }

        let mut steepest = !have_history || since_restart >= restart_period;
        if !steepest {
            for k in 0..dim {
                y[k] = g[k] - g_prev[k];
            }
            let dy = dot(&d, &y);
            let beta = if dy != 0.0 && dy.is_finite() {
                let beta_hz = (dot(&y, &g) - 2.0 * dot(&d, &g) * dot(&y, &y) / dy) / dy;
                let eta = -1.0 / (norm2(&d) * f64::min(0.01, norm2(&g_prev)));
                beta_hz.max(eta)
            } else {
                f64::NAN
            };
            if beta.is_finite() {
                for k in 0..dim {
                    d[k] = -g[k] + beta * d[k];
                }
            } else {
                steepest = true;
            }
        }
        if steepest {
            for k in 0..dim {
                d[k] = -g[k];
            }
            since_restart = 0;
        }
        let mut gd = dot(&g, &d);
        if !(gd.is_finite() && gd < 0.0) {
            for k in 0..dim {
                d[k] = -g[k];
            }
            steepest = true;
            since_restart = 0;
            gd = -dot(&g, &g);
        }

        let mut alpha0 = if have_history {
            alpha_prev * gd_prev / gd
        } else {
            1.0 / gsup
        };
        if !alpha0.is_finite() || alpha0 <= 0.0 {
            alpha0 = 1.0;
        }
        alpha0 = alpha0.clamp(1e-16, 1e16);

        let mut accepted =
            line_search(obj, &x, &d, f, gd, alpha0, cfg, &mut x_trial, &mut g_trial)?;
        if accepted.is_none() && !steepest {
            // one steepest-descent restart before giving up
            for k in 0..dim {
                d[k] = -g[k];
            }
            since_restart = 0;
            gd = -dot(&g, &g);
            let alpha_retry = (1.0 / gsup).clamp(1e-16, 1e16);
            accepted = line_search(
                obj,
                &x,
                &d,
                f,
                gd,
                alpha_retry,
                cfg,
                &mut x_trial,
                &mut g_trial,
            )?;
        }

        match accepted {
            Some(t) => {
                std::mem::swap(&mut x, &mut x_trial);
                std::mem::swap(&mut g_prev, &mut g);
                std::mem::swap(&mut g, &mut g_trial);
                f = t.value;
                trace.push(f);
                directional.push(gd);
                alpha_prev = t.alpha;
                gd_prev = gd;
                have_history = true;
                since_restart += 1;
                iterations += 1;
            }
            None => {
                status = OptimizeStatus::LineSearchFailure;
                break;
            }
        }
    }

    if status == OptimizeStatus::MaxIterations && sup_norm(&g) <= cfg.grad_tolerance {
        status = OptimizeStatus::Converged;
    }
    Ok(OptimizeResult {
        grad_sup_norm: sup_norm(&g),
        x,
        value: f,
        status,
        iterations,
        trace,
        directional_derivatives: directional,
    })
}
