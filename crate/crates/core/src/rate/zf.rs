//! Zero-forcing sum rate with waterfilled per-user SNRs.

use super::waterfill::waterfill;
use super::{
    check_mask, check_rho, masked_gram, mean_in_order, try_map_subcarriers, AllocationKind,
    PowerAllocation, RateResult, RateScheme, SelectionMask,
};
use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, one_norm_condition};

/// Gram matrices with a 1-norm condition number above this are treated as
/// singular rather than silently regularized: the inverse-diagonal power
/// penalties would be meaningless.
pub const GRAM_CONDITION_LIMIT: f64 = 1.0e12;

/// Zero-forcing sum rate of the masked channel.
///
/// Nulling inter-user interference costs each user the power penalty
/// `c_i = [(H Δ H^H)^{-1}]_{i,i}`; the achievable rate is
/// `max sum_i log2(1 + rho*K * Q_i)` subject to `sum_i Q_i c_i = 1`,
/// `Q_i >= 0`.  Substituting `q_i = Q_i c_i` turns this into standard
/// waterfilling with gains `rho*K / c_i` and unit budget.  Requires at
/// least K active antennas and a well-conditioned Gram matrix on every
/// subcarrier.
pub fn zf_sum_rate(tensor: &ChannelTensor, mask: &SelectionMask, rho: f64) -> Result<RateResult> {
    check_mask(tensor, mask)?;
    check_rho(rho)?;
    let users = tensor.users();
    let active = mask.active_indices();
    if active.len() < users {
        return Err(Error::Precondition(format!(
            "zero-forcing needs at least K = {users} active antennas, \
             got {}",
            active.len()
        )));
    }
    let rho_k = rho * users as f64;

    let per: Vec<(f64, Vec<f64>)> = try_map_subcarriers(tensor.subcarriers(), |l| {
        let g = masked_gram(tensor, l, &active);
        let factor = cholesky(&g).map_err(|_| Error::Singular {
            subcarrier: l,
            cond: f64::INFINITY,
        })?;
        let cond = one_norm_condition(&g, &factor);
        if cond > GRAM_CONDITION_LIMIT {
            return Err(Error::Singular {
                subcarrier: l,
                cond,
            });
        }
        let penalties = factor.inverse_diagonal();
        let gains: Vec<f64> = penalties.iter().map(|c| rho_k / c).collect();
        let shares = waterfill(&gains, 1.0)?;
        let snr: Vec<f64> = shares
            .iter()
            .zip(&penalties)
            .map(|(q, c)| q / c)
            .collect();
        let rate: f64 = snr.iter().map(|&q| (1.0 + rho_k * q).log2()).sum();
        Ok((rate, snr))
    })?;

    let per_subcarrier: Vec<f64> = per.iter().map(|(r, _)| *r).collect();
    let mean = mean_in_order(&per_subcarrier);
    Ok(RateResult {
        scheme: RateScheme::Zf,
        mean_bpshz: mean,
        converged: true,
        solver_iterations: 0,
        allocation: PowerAllocation {
            kind: AllocationKind::ZfSnr,
            values: per.into_iter().map(|(_, q)| q).collect(),
            rho,
            users,
        },
        per_subcarrier,
    })
}
