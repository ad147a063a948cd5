//! Exhaustive subset search — the small-scale optimality oracle.

use super::check_selection_size;
use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, CMat};
use crate::rate::{masked_gram, SelectionMask};

/// Enumeration refuses instances with more candidate subsets than this.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

/// Binomial coefficient, or `None` on overflow.
pub fn binomial(m: usize, n: usize) -> Option<u128> {
    if n > m {
        return Some(0);
    }
    let n = n.min(m - n);
    let mut c: u128 = 1;
    for i in 1..=n {
        // Multiply before dividing keeps every intermediate an integer.
        c = c.checked_mul((m - n + i) as u128)?;
        c /= i as u128;
    }
    Some(c)
}

/// Result of the exhaustive search: the best mask and its equal-power
/// mean log-det objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveSelection {
    pub mask: SelectionMask,
    pub objective: f64,
}

/// Find the N-subset maximizing the equal-power mean log-det (the same
/// objective the convex relaxation rounds toward).
///
/// Enumerates subsets in lexicographic order, keeping the first strict
/// maximum, so exact ties resolve to the lexicographically smallest index
/// set.  Refuses to run when `binomial(M, N)` exceeds
/// [`ENUMERATION_BUDGET`].
pub fn select_exhaustive(
    tensor: &ChannelTensor,
    selected: usize,
    rho: f64,
) -> Result<ExhaustiveSelection> {
    check_selection_size(tensor.antennas(), selected)?;
    crate::rate::check_rho(rho)?;
    let antennas = tensor.antennas();
    let count = binomial(antennas, selected).unwrap_or(u128::MAX);
    if count > ENUMERATION_BUDGET {
        return Err(Error::ExhaustiveGuard {
            count,
            budget: ENUMERATION_BUDGET,
        });
    }

    let users = tensor.users();
    let subcarriers = tensor.subcarriers();
    let mut indices: Vec<usize> = (0..selected).collect();
    let mut best_indices = indices.clone();
    let mut best = f64::NEG_INFINITY;
    loop {
        // Equal-power mean log-det of this subset.
        let mut total = 0.0;
        for l in 0..subcarriers {
            let g = masked_gram(tensor, l, &indices);
            let mut b = CMat::identity(users);
            for i in 0..users {
                for j in 0..users {
                    *b.at_mut(i, j) += rho * g.at(i, j);
                }
            }
            total += cholesky(&b)?.log2_det();
        }
        let objective = total / subcarriers as f64;
        if objective > best {
            best = objective;
            best_indices.copy_from_slice(&indices);
        }

        // Advance to the next lexicographic combination.
        let mut i = selected;
        loop {
            if i == 0 {
                let mask = SelectionMask::from_indices(antennas, &best_indices)?;
                return Ok(ExhaustiveSelection {
                    mask,
                    objective: best,
                });
            }
            i -= 1;
            if indices[i] != i + antennas - selected {
                break;
            }
        }
        indices[i] += 1;
        for j in i + 1..selected {
            indices[j] = indices[j - 1] + 1;
        }
    }
}
