//! Downlink sum-rate engines for a masked channel.
//!
//! Given a channel tensor and a selection mask over the transmit
//! antennas, this module computes — per subcarrier and averaged across
//! subcarriers — the dirty-paper-coding sum capacity ([`dpc`]) and the
//! zero-forcing sum rate ([`zf`]), both driven by exact active-set
//! waterfilling ([`waterfill`]).  The total transmit power grows with the
//! user count: every engine uses the per-user SNR budget `rho * K`.
//!
//! Everything here works on the K-by-K Gram matrix `H Δ H^H` of the
//! masked channel (never on M-by-M forms), so cost scales with the small
//! user count rather than the array size.

pub mod dpc;
pub mod waterfill;
pub mod zf;

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, one_norm_condition, CMat};
use num_complex::Complex64;
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// Selection mask
// ---------------------------------------------------------------------------

/// Binary on/off state of every transmit antenna, shared by all
/// subcarriers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionMask {
    active: Vec<bool>,
}

impl SelectionMask {
    /// Mask with every antenna active.
    pub fn full(antennas: usize) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::Dimension("a mask needs at least one antenna".into()));
        }
        Ok(SelectionMask {
            active: vec![true; antennas],
        })
    }

    /// Mask from explicit per-antenna flags.
    pub fn from_flags(active: Vec<bool>) -> Result<Self> {
        if active.is_empty() {
            return Err(Error::Dimension("a mask needs at least one antenna".into()));
        }
        Ok(SelectionMask { active })
    }

    /// Mask of `antennas` entries with exactly the listed indices active.
    pub fn from_indices(antennas: usize, indices: &[usize]) -> Result<Self> {
        let mut active = vec![false; antennas];
        for &i in indices {
            if i >= antennas {
                return Err(Error::Dimension(format!(
                    "antenna index {i} out of range for an array of {antennas}"
                )));
            }
            if active[i] {
                return Err(Error::Precondition(format!(
                    "antenna index {i} listed twice"
                )));
            }
            active[i] = true;
        }
        SelectionMask::from_flags(active)
    }

    /// Total number of antennas M.
    pub fn antennas(&self) -> usize {
        self.active.len()
    }

    /// Number of active antennas N.
    pub fn selected_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Whether antenna `m` is active.
    pub fn is_active(&self, m: usize) -> bool {
        self.active[m]
    }

    /// Active antenna indices in ascending order.
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&m| self.active[m]).collect()
    }

    /// The mask as a 0/1 weight vector.
    pub fn to_delta(&self) -> Vec<f64> {
        self.active
            .iter()
            .map(|&a| if a { 1.0 } else { 0.0 })
            .collect()
    }

    /// True when every antenna active in `other` is also active here.
    pub fn is_superset_of(&self, other: &SelectionMask) -> bool {
        self.active.len() == other.active.len()
            && other
                .active
                .iter()
                .zip(&self.active)
                .all(|(&o, &s)| s || !o)
    }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Which engine produced a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateScheme {
    Dpc,
    Zf,
}

/// What the allocation values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationKind {
    /// Per-user power shares P; each subcarrier's shares sum to 1.
    DpcPower,
    /// Per-user zero-forcing SNR coefficients Q; weighted by the inverse
    /// Gram diagonal c they sum to 1 per subcarrier.
    ZfSnr,
}

/// Per-subcarrier, per-user waterfilling output.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub kind: AllocationKind,
    /// `values[l][k]`, L rows of K nonnegative reals.
    pub values: Vec<Vec<f64>>,
    /// Normalized per-user transmit SNR (linear scale).
    pub rho: f64,
    /// User count K.
    pub users: usize,
}

/// Rate of one scheme on one (tensor, mask, rho) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub scheme: RateScheme,
    /// Rate per subcarrier, bps/Hz.
    pub per_subcarrier: Vec<f64>,
    /// Arithmetic mean of `per_subcarrier`, bps/Hz.
    pub mean_bpshz: f64,
    pub allocation: PowerAllocation,
    /// False when an iterative solver hit its iteration cap on some
    /// subcarrier; the reported rate is then the best iterate found.
    pub converged: bool,
    /// Worst-case (maximum over subcarriers) iteration count of the
    /// underlying solver; 0 for closed-form schemes.
    pub solver_iterations: usize,
}

/// Per-subcarrier values and mean of the equal-power log-det objective.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualPowerLogDet {
    pub per_subcarrier: Vec<f64>,
    pub mean: f64,
}

/// Which receive-SNR convention to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrScheme {
    /// Equal per-user SNR under zero-forcing: `rho*K / trace((H Δ H^H)^{-1})`.
    Zf,
    /// One user served alone with the full array gain: `rho * ||h||^2`.
    SingleUser,
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Check that a mask matches the tensor and keeps at least one antenna.
pub(crate) fn check_mask(tensor: &ChannelTensor, mask: &SelectionMask) -> Result<()> {
    if mask.antennas() != tensor.antennas() {
        return Err(Error::Dimension(format!(
            "mask covers {} antennas but the tensor has {}",
            mask.antennas(),
            tensor.antennas()
        )));
    }
    if mask.selected_count() == 0 {
        return Err(Error::Precondition(
            "at least one antenna must be selected".into(),
        ));
    }
    Ok(())
}

/// Check the transmit SNR.
pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!(
            "transmit SNR rho must be positive and finite, got {rho}"
        )));
    }
    Ok(())
}

/// K-by-K Gram matrix of the masked channel on one subcarrier:
/// `G[i][j] = sum_{m active} h_i[m] * conj(h_j[m])`.
pub(crate) fn masked_gram(tensor: &ChannelTensor, subcarrier: usize, active: &[usize]) -> CMat {
    let users = tensor.users();
    let mut g = CMat::zeros(users);
    for i in 0..users {
        let hi = tensor.user_row(subcarrier, i);
        for j in 0..=i {
            let hj = tensor.user_row(subcarrier, j);
            let mut s = Complex64::new(0.0, 0.0);
            for &m in active {
                s += hi[m] * hj[m].conj();
            }
            *g.at_mut(i, j) = s;
            *g.at_mut(j, i) = s.conj();
        }
    }
    g
}

/// K-by-K Gram matrix with fractional antenna weights:
/// `G[i][j] = sum_m delta[m] * h_i[m] * conj(h_j[m])`.
pub(crate) fn weighted_gram(tensor: &ChannelTensor, subcarrier: usize, delta: &[f64]) -> CMat {
    let users = tensor.users();
    let mut g = CMat::zeros(users);
    for i in 0..users {
        let hi = tensor.user_row(subcarrier, i);
        for j in 0..=i {
            let hj = tensor.user_row(subcarrier, j);
            let mut s = Complex64::new(0.0, 0.0);
            for (m, &w) in delta.iter().enumerate() {
                if w != 0.0 {
                    s += w * hi[m] * hj[m].conj();
                }
            }
            *g.at_mut(i, j) = s;
            *g.at_mut(j, i) = s.conj();
        }
    }
    g
}

/// Evaluate all subcarriers in parallel, preserving subcarrier order so
/// downstream reductions are bit-stable regardless of thread count.
pub(crate) fn try_map_subcarriers<T: Send>(
    subcarriers: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    (0..subcarriers).into_par_iter().map(f).collect()
}

/// Arithmetic mean in index order.
pub(crate) fn mean_in_order(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

// ---------------------------------------------------------------------------
// Equal-power objective and SNR diagnostics
// ---------------------------------------------------------------------------

/// Equal-power sum rate of a (possibly fractional) antenna weight vector:
/// `(1/L) * sum_l log2 det(I + rho * H_l diag(delta) H_l^H)`.
///
/// With the power budget split equally over users the per-user SNR
/// `rho*K` times the share `1/K` collapses to `rho`, which is why `rho`
/// (not `rho*K`) appears here.  Binary masks can be evaluated through
/// [`SelectionMask::to_delta`].
pub fn equal_power_log_det(
    tensor: &ChannelTensor,
    delta: &[f64],
    rho: f64,
) -> Result<EqualPowerLogDet> {
    check_rho(rho)?;
    if delta.len() != tensor.antennas() {
        return Err(Error::Dimension(format!(
            "weight vector has {} entries but the tensor has {} antennas",
            delta.len(),
            tensor.antennas()
        )));
    }
    if let Some(m) = delta
        .iter()
        .position(|w| !(w.is_finite() && (0.0..=1.0).contains(w)))
    {
        return Err(Error::Domain(format!(
            "antenna weight {m} must lie in [0, 1], got {}",
            delta[m]
        )));
    }
    let users = tensor.users();
    let per_subcarrier = try_map_subcarriers(tensor.subcarriers(), |l| {
        let g = weighted_gram(tensor, l, delta);
        let mut b = CMat::identity(users);
        for i in 0..users {
            for j in 0..users {
                *b.at_mut(i, j) += rho * g.at(i, j);
            }
        }
        Ok(cholesky(&b)?.log2_det())
    })?;
    let mean = mean_in_order(&per_subcarrier);
    Ok(EqualPowerLogDet {
        per_subcarrier,
        mean,
    })
}

/// Per-user received SNR diagnostic, one row per subcarrier.
///
/// * [`SnrScheme::Zf`] reports the equal per-user SNR that zero-forcing
///   supports on the masked channel: `rho*K / trace((H Δ H^H)^{-1})`,
///   identical for every user on a subcarrier.
/// * [`SnrScheme::SingleUser`] reports `rho * ||h||^2` per user — the SNR
///   of serving that user alone, which approaches `rho * N` for
///   unit-energy channel entries.
pub fn per_user_received_snr(
    tensor: &ChannelTensor,
    mask: &SelectionMask,
    rho: f64,
    scheme: SnrScheme,
) -> Result<Vec<Vec<f64>>> {
    check_mask(tensor, mask)?;
    check_rho(rho)?;
    let users = tensor.users();
    let active = mask.active_indices();
    match scheme {
        SnrScheme::SingleUser => try_map_subcarriers(tensor.subcarriers(), |l| {
            Ok((0..users)
                .map(|k| {
                    let row = tensor.user_row(l, k);
                    rho * active.iter().map(|&m| row[m].norm_sqr()).sum::<f64>()
                })
                .collect())
        }),
        SnrScheme::Zf => {
            if active.len() < users {
                return Err(Error::Precondition(format!(
                    "zero-forcing SNR needs at least K = {users} active \
                     antennas, got {}",
                    active.len()
                )));
            }
            try_map_subcarriers(tensor.subcarriers(), |l| {
                let g = masked_gram(tensor, l, &active);
                let factor = cholesky(&g).map_err(|_| Error::Singular {
                    subcarrier: l,
                    cond: f64::INFINITY,
                })?;
                let cond = one_norm_condition(&g, &factor);
                if cond > zf::GRAM_CONDITION_LIMIT {
                    return Err(Error::Singular {
                        subcarrier: l,
                        cond,
                    });
                }
                let trace_inv: f64 = factor.inverse_diagonal().iter().sum();
                let snr = rho * users as f64 / trace_inv;
                Ok(vec![snr; users])
            })
        }
    }
}

/// Rate of one interference-free user at received SNR `rho * n`:
/// the single-user envelope `log2(1 + rho * n)` against which selection
/// curves saturate.
pub fn interference_free_rate(rho: f64, selected: usize) -> Result<f64> {
    check_rho(rho)?;
    if selected == 0 {
        return Err(Error::Precondition(
            "at least one antenna must be selected".into(),
        ));
    }
    Ok((1.0 + rho * selected as f64).log2())
}
