//! Convex-relaxation antenna selection by projected gradient ascent.

use super::{check_selection_size, power_ranking, SolverStats};
use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, CMat, Cholesky};
use crate::rate::{weighted_gram, SelectionMask};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::LN_2;
use std::time::Instant;

// ---------------------------------------------------------------------------
// Parameters and results
// ---------------------------------------------------------------------------

/// Projected-gradient-ascent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexParams {
    /// Iteration cap.
    pub max_iters: usize,
    /// Stop when the norm of the projected gradient step falls below this.
    pub gradient_tol: f64,
    /// Armijo sufficient-increase coefficient.
    pub armijo_c: f64,
    /// Backtracking shrink factor.
    pub backtrack: f64,
    /// Initial line-search step, reset every iteration.
    pub init_step: f64,
}

impl Default for ConvexParams {
    fn default() -> Self {
        ConvexParams {
            max_iters: 2000,
            gradient_tol: 1.0e-6,
            armijo_c: 1.0e-4,
            backtrack: 0.5,
            init_step: 1.0,
        }
    }
}

/// Fractional solution of the relaxed selection problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedDelta {
    /// Per-antenna weights in [0, 1] summing to the target count.
    pub values: Vec<f64>,
    /// The selection size N the weights sum to.
    pub target_n: usize,
    /// Achieved relaxed objective (mean equal-power log-det), bps/Hz.
    pub objective: f64,
}

/// Output of [`select_convex`]: the rounded mask, the fractional solution
/// it came from, and the solver trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSelection {
    pub mask: SelectionMask,
    pub relaxed: RelaxedDelta,
    pub stats: SolverStats,
}

// ---------------------------------------------------------------------------
// Capped-simplex projection
// ---------------------------------------------------------------------------

/// Euclidean projection of `y` onto `{x : 0 <= x_i <= 1, sum x_i = target}`
/// by bisection on the dual shift: `x_i(tau) = clamp(y_i - tau, 0, 1)` has
/// a continuous nonincreasing sum, so the feasible shift is bracketed by
/// `[min(y) - 1, max(y)]`.
pub fn project_capped_simplex(y: &[f64], target: f64) -> Result<Vec<f64>> {
    let n = y.len();
    if n == 0 {
        return Err(Error::Precondition("cannot project an empty vector".into()));
    }
    if !(target >= 0.0 && target <= n as f64) {
        return Err(Error::Precondition(format!(
            "target sum {target} outside [0, {n}]"
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "projection input {i} is not finite"
        )));
    }
    let clamped_sum = |tau: f64| -> f64 {
        y.iter().map(|v| (v - tau).clamp(0.0, 1.0)).sum()
    };
    let mut lo = y.iter().cloned().fold(f64::MAX, f64::min) - 1.0;
    let mut hi = y.iter().cloned().fold(f64::MIN, f64::max);
    // `lo` forces every coordinate to 1 (sum n >= target); `hi` forces
    // every coordinate to 0 (sum 0 <= target).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = clamped_sum(mid);
        if s > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 && (s - target).abs() < 1e-10 {
            break;
        }
    }
    let tau = 0.5 * (lo + hi);
    Ok(y.iter().map(|v| (v - tau).clamp(0.0, 1.0)).collect())
}

// ---------------------------------------------------------------------------
// Objective and gradient
// ---------------------------------------------------------------------------

/// Mean log-det objective together with the per-subcarrier Cholesky
/// factors of `B_l = I + rho * H_l diag(delta) H_l^H` (reused by the
/// gradient).
fn objective_with_factors(
    tensor: &ChannelTensor,
    delta: &[f64],
    rho: f64,
) -> Result<(f64, Vec<Cholesky>)> {
    let users = tensor.users();
    let per: Vec<(f64, Cholesky)> = (0..tensor.subcarriers())
        .into_par_iter()
        .map(|l| {
            let g = weighted_gram(tensor, l, delta);
            let mut b = CMat::identity(users);
            for i in 0..users {
                for j in 0..users {
                    *b.at_mut(i, j) += rho * g.at(i, j);
                }
            }
            let factor = cholesky(&b)?;
            Ok((factor.log2_det(), factor))
        })
        .collect::<Result<_>>()?;
    let mean = per.iter().map(|(v, _)| v).sum::<f64>() / per.len() as f64;
    Ok((mean, per.into_iter().map(|(_, f)| f).collect()))
}

/// Analytic gradient of the relaxed objective:
/// `df/d delta_m = (rho / ln 2) * (1/L) * sum_l h_{l,m}^H B_l^{-1} h_{l,m}`
/// where `h_{l,m}` is antenna m's K-vector on subcarrier l.  Each
/// quadratic form is `||L_l^{-1} h_{l,m}||^2` via one forward solve.
fn gradient(tensor: &ChannelTensor, factors: &[Cholesky], rho: f64) -> Vec<f64> {
    let users = tensor.users();
    let antennas = tensor.antennas();
    let subcarriers = tensor.subcarriers();
    let per_l: Vec<Vec<f64>> = (0..subcarriers)
        .into_par_iter()
        .map(|l| {
            let factor = &factors[l];
            let mut out = vec![0.0f64; antennas];
            let mut column = vec![Complex64::new(0.0, 0.0); users];
            for (m, slot) in out.iter_mut().enumerate() {
                for (k, c) in column.iter_mut().enumerate() {
                    *c = tensor.user_row(l, k)[m];
                }
                factor.forward_solve_in_place(&mut column);
                *slot = column.iter().map(|z| z.norm_sqr()).sum();
            }
            out
        })
        .collect();
    // Reduce in subcarrier order so the result is thread-count invariant.
    let scale = rho / LN_2 / subcarriers as f64;
    let mut grad = vec![0.0f64; antennas];
    for row in &per_l {
        for (g, v) in grad.iter_mut().zip(row) {
            *g += v;
        }
    }
    for g in &mut grad {
        *g *= scale;
    }
    grad
}

/// Analytic gradient of the relaxed objective at an arbitrary weight
/// vector `delta` in `[0, 1]^M` — the derivative of
/// [`crate::rate::equal_power_log_det`]'s mean with respect to each
/// antenna weight.  Exposed so external checks can compare it against
/// finite differences.
pub fn relaxed_gradient(tensor: &ChannelTensor, delta: &[f64], rho: f64) -> Result<Vec<f64>> {
    crate::rate::check_rho(rho)?;
    if delta.len() != tensor.antennas() {
        return Err(Error::Dimension(format!(
            "weight vector has {} entries for {} antennas",
            delta.len(),
            tensor.antennas()
        )));
    }
    for (m, &d) in delta.iter().enumerate() {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::Domain(format!(
                "antenna weight {m} is {d}, outside [0, 1]"
            )));
        }
    }
    let (_, factors) = objective_with_factors(tensor, delta, rho)?;
    Ok(gradient(tensor, &factors, rho))
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

/// Maximize the relaxed equal-power objective over the capped simplex
/// `{0 <= delta_i <= 1, sum delta_i = N}` and round to a binary mask.
///
/// Projected gradient ascent from the uniform start `delta = N/M` with
/// Armijo backtracking; stops when the projected gradient step is shorter
/// than `params.gradient_tol` or the iteration cap is reached (the best
/// iterate is returned either way, flagged in the stats).  Rounding keeps
/// the N largest weights; ties break toward higher average received
/// power, then lower index.  The relaxed objective always upper-bounds
/// the rounded mask's objective.
pub fn select_convex(
    tensor: &ChannelTensor,
    selected: usize,
    rho: f64,
    params: &ConvexParams,
) -> Result<ConvexSelection> {
    check_selection_size(tensor.antennas(), selected)?;
    crate::rate::check_rho(rho)?;
    if params.max_iters == 0 {
        return Err(Error::Precondition("max_iters must be at least 1".into()));
    }
    let antennas = tensor.antennas();
    let started = Instant::now();

    // The constraint set is a single point when every antenna is kept.
    if selected == antennas {
        let delta = vec![1.0; antennas];
        let (objective, _) = objective_with_factors(tensor, &delta, rho)?;
        return Ok(ConvexSelection {
            mask: SelectionMask::full(antennas)?,
            relaxed: RelaxedDelta {
                values: delta,
                target_n: selected,
                objective,
            },
            stats: SolverStats {
                iterations: 0,
                projected_gradient_norm: 0.0,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
                converged: true,
            },
        });
    }

    let target = selected as f64;
    let mut delta = vec![target / antennas as f64; antennas];
    let (mut value, mut factors) = objective_with_factors(tensor, &delta, rho)?;
    let mut iterations = 0;
    let mut converged = false;
    let mut pg_norm = f64::INFINITY;

    while iterations < params.max_iters {
        iterations += 1;
        let grad = gradient(tensor, &factors, rho);

        // Stationarity: the projected full-gradient step collapses to the
        // current point at a constrained maximum.
        let moved: Vec<f64> = delta.iter().zip(&grad).map(|(d, g)| d + g).collect();
        let projected = project_capped_simplex(&moved, target)?;
        pg_norm = projected
            .iter()
            .zip(&delta)
            .map(|(p, d)| (p - d) * (p - d))
            .sum::<f64>()
            .sqrt();
        if pg_norm < params.gradient_tol {
            converged = true;
            break;
        }

        // Backtracking line search on the projected arc.
        let mut step = params.init_step;
        let mut accepted = false;
        while step > 1e-16 {
            let trial: Vec<f64> = delta
                .iter()
                .zip(&grad)
                .map(|(d, g)| d + step * g)
                .collect();
            let candidate = project_capped_simplex(&trial, target)?;
            let (cand_value, cand_factors) = objective_with_factors(tensor, &candidate, rho)?;
            let directional: f64 = grad
                .iter()
                .zip(candidate.iter().zip(&delta))
                .map(|(g, (c, d))| g * (c - d))
                .sum();
            if cand_value >= value + params.armijo_c * directional {
                delta = candidate;
                value = cand_value;
                factors = cand_factors;
                accepted = true;
                break;
            }
            step *= params.backtrack;
        }
        if !accepted {
            // The line search cannot make progress; stop on the best
            // iterate without claiming gradient-criterion convergence.
            break;
        }
    }

    let mask = round_to_mask(tensor, &delta, selected)?;
    Ok(ConvexSelection {
        mask,
        relaxed: RelaxedDelta {
            values: delta,
            target_n: selected,
            objective: value,
        },
        stats: SolverStats {
            iterations,
            projected_gradient_norm: pg_norm,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            converged,
        },
    })
}

/// Keep the N largest relaxed weights; break ties by higher average
/// received power, then by lower antenna index.
fn round_to_mask(
    tensor: &ChannelTensor,
    delta: &[f64],
    selected: usize,
) -> Result<SelectionMask> {
    let power = tensor.per_antenna_avg_power();
    let power_rank = {
        // rank[m] = position of antenna m in the power ordering.
        let order = power_ranking(&power);
        let mut rank = vec![0usize; order.len()];
        for (pos, &m) in order.iter().enumerate() {
            rank[m] = pos;
        }
        rank
    };
    let mut order: Vec<usize> = (0..delta.len()).collect();
    order.sort_by(|&a, &b| {
        delta[b]
            .partial_cmp(&delta[a])
            .expect("finite relaxed weights")
            .then(power_rank[a].cmp(&power_rank[b]))
            .then(a.cmp(&b))
    });
    SelectionMask::from_indices(delta.len(), &order[..selected])
}
