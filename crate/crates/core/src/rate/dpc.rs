//! Dirty-paper-coding sum capacity via sum-power iterative waterfilling.

use super::waterfill::waterfill;
use super::{
    check_mask, check_rho, masked_gram, mean_in_order, try_map_subcarriers, AllocationKind,
    PowerAllocation, RateResult, RateScheme, SelectionMask,
};
use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, CMat, Cholesky};
use num_complex::Complex64;

/// Default iteration cap of the per-subcarrier power iteration.
pub const DEFAULT_MAX_ITERS: usize = 500;
/// Default convergence tolerance on the capacity increment, bps/Hz.
pub const DEFAULT_TOL: f64 = 1.0e-8;

/// Downlink sum capacity of the masked channel under dirty-paper coding,
/// maximized over the per-user power split on every subcarrier.
///
/// Per subcarrier this solves `max log2 det(I + rho*K * P^{1/2} G P^{1/2})`
/// over diagonal `P >= 0` with `trace(P) = 1`, where `G` is the K-by-K
/// Gram matrix of the masked channel — the K-by-K determinant form of the
/// broadcast capacity with total SNR budget `rho*K`.  The solver is
/// sum-power iterative waterfilling with an averaged power update, which
/// increases capacity monotonically from the equal-power start, so the
/// result is always at least the equal-power value.  Iteration stops when
/// the capacity increment drops below `tol` (or at `max_iters`, in which
/// case the best iterate is returned and `converged` is false).
pub fn dpc_sum_capacity(
    tensor: &ChannelTensor,
    mask: &SelectionMask,
    rho: f64,
    max_iters: usize,
    tol: f64,
) -> Result<RateResult> {
    check_mask(tensor, mask)?;
    check_rho(rho)?;
    if max_iters == 0 {
        return Err(Error::Precondition("max_iters must be at least 1".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!(
            "convergence tolerance must be positive and finite, got {tol}"
        )));
    }
    let active = mask.active_indices();
    let users = tensor.users();
    let per: Vec<Subcarrier> = try_map_subcarriers(tensor.subcarriers(), |l| {
        solve_subcarrier(tensor, l, &active, rho, max_iters, tol)
    })?;

    let per_subcarrier: Vec<f64> = per.iter().map(|s| s.capacity).collect();
    let mean = mean_in_order(&per_subcarrier);
    Ok(RateResult {
        scheme: RateScheme::Dpc,
        mean_bpshz: mean,
        converged: per.iter().all(|s| s.converged),
        solver_iterations: per.iter().map(|s| s.iterations).max().unwrap_or(0),
        allocation: PowerAllocation {
            kind: AllocationKind::DpcPower,
            values: per.into_iter().map(|s| s.power).collect(),
            rho,
            users,
        },
        per_subcarrier,
    })
}

struct Subcarrier {
    capacity: f64,
    power: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// `I + rho*K * P^{1/2} G P^{1/2}` and its Cholesky factor.
fn capacity_factor(g: &CMat, sqrt_p: &[f64], rho_k: f64) -> Result<Cholesky> {
    let k = g.order();
    let mut c = CMat::identity(k);
    for i in 0..k {
        for j in 0..k {
            *c.at_mut(i, j) += rho_k * sqrt_p[i] * sqrt_p[j] * g.at(i, j);
        }
    }
    cholesky(&c)
}

fn solve_subcarrier(
    tensor: &ChannelTensor,
    subcarrier: usize,
    active: &[usize],
    rho: f64,
    max_iters: usize,
    tol: f64,
) -> Result<Subcarrier> {
    let users = tensor.users();
    let rho_k = rho * users as f64;
    let g = masked_gram(tensor, subcarrier, active);

    let mut power = vec![1.0 / users as f64; users];
    let mut sqrt_p: Vec<f64> = power.iter().map(|p| p.sqrt()).collect();
    let mut factor = capacity_factor(&g, &sqrt_p, rho_k)?;
    let mut capacity = factor.log2_det();

    let mut iterations = 0;
    let mut converged = false;
    let mut gains = vec![0.0f64; users];
    let mut column = vec![Complex64::new(0.0, 0.0); users];
    while iterations < max_iters {
        iterations += 1;
        // Effective single-user gain of each user with the *other* users'
        // current powers treated as interference.  With
        // C = I + rho_k * P^{1/2} G P^{1/2} and v_i = P^{1/2} G e_i,
        // a_i = G_ii - rho_k * v_i^H C^{-1} v_i is user i's gain including
        // its own power, and the rank-one downdate a_i / (1 - rho_k P_i a_i)
        // removes the self-term.
        for i in 0..users {
            for j in 0..users {
                column[j] = sqrt_p[j] * g.at(j, i);
            }
            factor.forward_solve_in_place(&mut column);
            let quad: f64 = column.iter().map(|z| z.norm_sqr()).sum();
            let a = g.at(i, i).re - rho_k * quad;
            let denom = 1.0 - rho_k * power[i] * a;
            if !(denom > 0.0) {
                return Err(Error::Numeric(format!(
                    "power iteration became unstable on subcarrier {subcarrier} \
                     (self-interference downdate denominator {denom:.3e})"
                )));
            }
            gains[i] = rho_k * (a / denom).max(0.0);
        }

        let positive: Vec<usize> = (0..users).filter(|&i| gains[i] > 0.0).collect();
        if positive.is_empty() {
            // Degenerate all-zero channel: nothing to allocate toward.
            converged = true;
            break;
        }
        let filtered: Vec<f64> = positive.iter().map(|&i| gains[i]).collect();
        let refill = waterfill(&filtered, 1.0)?;

        // Averaged update keeps the iteration monotone and provably
        // convergent for any user count.
        let keep = (users as f64 - 1.0) / users as f64;
        let mut next: Vec<f64> = power.iter().map(|p| keep * p).collect();
        for (slot, &i) in positive.iter().enumerate() {
            next[i] += refill[slot] / users as f64;
        }
        let next_sqrt: Vec<f64> = next.iter().map(|p| p.sqrt()).collect();
        let next_factor = capacity_factor(&g, &next_sqrt, rho_k)?;
        let next_capacity = next_factor.log2_det();
        let increment = next_capacity - capacity;

        power = next;
        sqrt_p = next_sqrt;
        factor = next_factor;
        capacity = next_capacity;
        if increment.abs() < tol {
            converged = true;
            break;
        }
    }

    Ok(Subcarrier {
        capacity,
        power,
        iterations,
        converged,
    })
}
