//! Transmit-antenna selection strategies and their evaluation.
//!
//! Four ways to pick N of the M antennas, one shared mask across all
//! subcarriers:
//!
//! * [`convex`] — near-optimal benchmark: maximize the relaxed equal-power
//!   log-det objective over fractional antenna weights by projected
//!   gradient ascent, then round to the N largest weights;
//! * [`select_power`] — rank antennas by average received power, a
//!   statistic available before any full CSI estimation;
//! * [`random`] — uniform random N-subsets, the reference baseline;
//! * [`exhaustive`] — enumerate every subset (guarded small-scale oracle).

pub mod convex;
pub mod exhaustive;
pub mod random;

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::rate::dpc::{dpc_sum_capacity, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::rate::zf::zf_sum_rate;
use crate::rate::{RateResult, SelectionMask};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Shared types
// ---------------------------------------------------------------------------

/// Which strategy produced a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Convex,
    Power,
    Random,
    Exhaustive,
}

impl Strategy {
    /// Stable lowercase name used in CSV output and logs.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Convex => "convex",
            Strategy::Power => "power",
            Strategy::Random => "random",
            Strategy::Exhaustive => "exhaustive",
        }
    }
}

/// Iteration record of the projected-gradient selection solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverStats {
    /// Gradient-ascent iterations performed.
    pub iterations: usize,
    /// Euclidean norm of the final projected gradient step.
    pub projected_gradient_norm: f64,
    /// Wall-clock time spent in the solver, milliseconds.
    pub wall_ms: f64,
    /// False when the solver stopped on its iteration cap or a stalled
    /// line search instead of the gradient criterion.
    pub converged: bool,
}

/// Mask plus the rates achieved on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub strategy: Strategy,
    pub mask: SelectionMask,
    pub dpc: RateResult,
    /// Absent when fewer antennas than users are selected.
    pub zf: Option<RateResult>,
    /// Present only for solver-produced masks.
    pub solver_stats: Option<SolverStats>,
}

/// Check a requested selection size against the array.
pub(crate) fn check_selection_size(antennas: usize, selected: usize) -> Result<()> {
    if selected == 0 {
        return Err(Error::Precondition(
            "at least one antenna must be selected".into(),
        ));
    }
    if selected > antennas {
        return Err(Error::Precondition(format!(
            "cannot select {selected} antennas from an array of {antennas}"
        )));
    }
    Ok(())
}

/// Antenna indices sorted by average received power, strongest first,
/// ties broken by lower index.
pub(crate) fn power_ranking(per_antenna_power: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..per_antenna_power.len()).collect();
    order.sort_by(|&a, &b| {
        per_antenna_power[b]
            .partial_cmp(&per_antenna_power[a])
            .expect("finite per-antenna powers")
            .then(a.cmp(&b))
    });
    order
}

// ---------------------------------------------------------------------------
// Power-ranking strategy
// ---------------------------------------------------------------------------

/// Select the N antennas with the highest average received power over
/// all users and subcarriers.
pub fn select_power(tensor: &ChannelTensor, selected: usize) -> Result<SelectionMask> {
    check_selection_size(tensor.antennas(), selected)?;
    let order = power_ranking(&tensor.per_antenna_avg_power());
    SelectionMask::from_indices(tensor.antennas(), &order[..selected])
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluate a mask: DPC sum capacity always, ZF sum rate when at least K
/// antennas are active.  Power allocation is re-optimized per subcarrier
/// by the rate engine for each scheme.
pub fn evaluate_selection(
    tensor: &ChannelTensor,
    mask: &SelectionMask,
    rho: f64,
    strategy: Strategy,
) -> Result<SelectionReport> {
    let dpc = dpc_sum_capacity(tensor, mask, rho, DEFAULT_MAX_ITERS, DEFAULT_TOL)?;
    let zf = if mask.selected_count() >= tensor.users() {
        Some(zf_sum_rate(tensor, mask, rho)?)
    } else {
        None
    };
    Ok(SelectionReport {
        strategy,
        mask: mask.clone(),
        dpc,
        zf,
        solver_stats: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::rayleigh::gen_iid_rayleigh;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_selection_ranks_by_average_power() {
        // Per-antenna powers [0.5, 2.0, 1.0]: the top two are antennas
        // 1 and 2 (0-indexed).
        let data = vec![
            c(0.5f64.sqrt(), 0.0),
            c(2.0f64.sqrt(), 0.0),
            c(0.0, 1.0),
        ];
        let t = ChannelTensor::from_flat(1, 3, 1, data).unwrap();
        let mask = select_power(&t, 2).unwrap();
        assert_eq!(mask.active_indices(), vec![1, 2]);
        let full = select_power(&t, 3).unwrap();
        assert_eq!(full.selected_count(), 3);
    }

    #[test]
    fn power_selection_breaks_ties_by_lower_index() {
        let data = vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let t = ChannelTensor::from_flat(1, 3, 1, data).unwrap();
        let mask = select_power(&t, 2).unwrap();
        assert_eq!(mask.active_indices(), vec![0, 1]);
    }

    #[test]
    fn selection_size_is_validated() {
        let t = gen_iid_rayleigh(2, 4, 1, 0).unwrap();
        assert!(select_power(&t, 0).is_err());
        assert!(select_power(&t, 5).is_err());
    }

    #[test]
    fn evaluation_reports_both_schemes_when_possible() {
        let t = gen_iid_rayleigh(2, 6, 3, 4).unwrap();
        let mask = SelectionMask::from_indices(6, &[0, 2, 5]).unwrap();
        let report = evaluate_selection(&t, &mask, 0.4, Strategy::Power).unwrap();
        assert_eq!(report.strategy, Strategy::Power);
        let zf = report.zf.expect("three antennas cover two users");
        assert!(report.dpc.mean_bpshz + 1e-9 >= zf.mean_bpshz);
    }

    #[test]
    fn evaluation_omits_zf_below_the_user_count() {
        let t = gen_iid_rayleigh(3, 6, 2, 4).unwrap();
        let mask = SelectionMask::from_indices(6, &[1, 4]).unwrap();
        let report = evaluate_selection(&t, &mask, 0.4, Strategy::Random).unwrap();
        assert!(report.zf.is_none());
        assert!(report.dpc.mean_bpshz > 0.0);
    }

    #[test]
    fn identity_channel_evaluation_matches_closed_form() {
        let mut data = vec![c(0.0, 0.0); 4];
        data[0] = c(1.0, 0.0);
        data[3] = c(1.0, 0.0);
        let t = ChannelTensor::from_flat(2, 2, 1, data).unwrap();
        let mask = SelectionMask::full(2).unwrap();
        let rho = 0.6;
        let report = evaluate_selection(&t, &mask, rho, Strategy::Exhaustive).unwrap();
        let want = 2.0 * (1.0 + rho).log2();
        assert_relative_eq!(report.dpc.mean_bpshz, want, epsilon = 1e-7);
        assert_relative_eq!(report.zf.unwrap().mean_bpshz, want, epsilon = 1e-9);
    }

    #[test]
    fn strategy_names_are_stable() {
        assert_eq!(Strategy::Convex.name(), "convex");
        assert_eq!(Strategy::Power.name(), "power");
        assert_eq!(Strategy::Random.name(), "random");
        assert_eq!(Strategy::Exhaustive.name(), "exhaustive");
    }
}
