//! Exact water-filling power allocation.

use crate::error::{Error, Result};

/// Split `budget` over parallel channels with the given power gains to
/// maximize `sum_i log2(1 + gains[i] * p[i])` subject to
/// `sum_i p[i] = budget`, `p[i] >= 0`.
///
/// Solved by the exact active-set closed form: channels are sorted by
/// inverse gain, the weakest is dropped while the implied water level
/// would leave it below the surface, and the first feasible level is
/// exact — so the KKT conditions hold to rounding error, with no
/// bisection tolerance.
pub fn waterfill(gains: &[f64], budget: f64) -> Result<Vec<f64>> {
    if gains.is_empty() {
        return Err(Error::Precondition(
            "waterfilling needs at least one channel gain".into(),
        ));
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::Domain(format!(
            "power budget must be positive and finite, got {budget}"
        )));
    }
    if let Some(i) = gains.iter().position(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::Domain(format!(
            "channel gain {i} must be positive and finite, got {}",
            gains[i]
        )));
    }

    let n = gains.len();
    let inverse: Vec<f64> = gains.iter().map(|g| 1.0 / g).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        inverse[a]
            .partial_cmp(&inverse[b])
            .expect("finite inverse gains")
            .then(a.cmp(&b))
    });
    // Prefix sums of inverse gains in sorted order.
    let mut prefix = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &i in &order {
        acc += inverse[i];
        prefix.push(acc);
    }

    // Largest feasible active set: with k strongest channels active the
    // water level is mu = (budget + sum of their inverse gains) / k, and
    // feasibility means the weakest active channel stays submerged.
    let mut p = vec![0.0; n];
    for k in (1..=n).rev() {
        let mu = (budget + prefix[k - 1]) / k as f64;
        if mu > inverse[order[k - 1]] {
            for &i in &order[..k] {
                p[i] = mu - inverse[i];
            }
            break;
        }
    }
    Ok(p)
}
