//! Shared oracles and builders for the acceptance suite.
//!
//! Everything here re-derives reference answers by brute force —
//! grid scans and closed forms that are slow but obviously correct —
//! independent of the library's own algorithms.

use antsel_core::channel::rayleigh::gen_iid_rayleigh;
use antsel_core::channel::synthetic::{
    gen_synthetic, ArrayGeometry, SyntheticSceneConfig, UserLayout,
};
use antsel_core::channel::{ChannelTensor, NormalizationMode};
use antsel_core::rate::{equal_power_log_det, SelectionMask};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// -5 dB on a linear scale, the transmit SNR every check runs at.
pub const RHO: f64 = 0.31622776601683794;

// ---------------------------------------------------------------------------
// Waterfilling oracle
// ---------------------------------------------------------------------------

/// Grid-search waterfilling objective: scan the water level coarsely,
/// then at step 1e-5 inside the bracketing coarse cell.  Valid because
/// the total allocated power is continuous and nondecreasing in the
/// level.
pub fn grid_waterfill_objective(gains: &[f64], budget: f64) -> f64 {
    let fine = 1e-5;
    let coarse = 1e-2;
    let total = |mu: f64| gains.iter().map(|g| (mu - 1.0 / g).max(0.0)).sum::<f64>();
    let max_inv = gains.iter().map(|g| 1.0 / g).fold(0.0f64, f64::max);
    let hi = budget + max_inv + coarse;

    let mut lo = 0.0;
    while lo + coarse < hi && total(lo + coarse) < budget {
        lo += coarse;
    }
    let mut level = lo;
    while level < lo + coarse + fine && total(level) < budget {
        level += fine;
    }
    gains
        .iter()
        .map(|g| (1.0 + g * (level - 1.0 / g).max(0.0)).log2())
        .sum()
}

/// KKT residual of a candidate allocation: active channels must share
/// one water level and inactive channels must sit above it.
pub fn kkt_residual(gains: &[f64], powers: &[f64]) -> f64 {
    let active: Vec<f64> = powers
        .iter()
        .zip(gains)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, g)| p + 1.0 / g)
        .collect();
    if active.is_empty() {
        return f64::INFINITY;
    }
    let mu = active.iter().sum::<f64>() / active.len() as f64;
    powers
        .iter()
        .zip(gains)
        .map(|(p, g)| {
            if *p > 0.0 {
                (p + 1.0 / g - mu).abs()
            } else {
                (mu - 1.0 / g).max(0.0)
            }
        })
        .fold(0.0f64, f64::max)
}

// ---------------------------------------------------------------------------
// Two-user sum-capacity oracle
// ---------------------------------------------------------------------------

/// Gram matrix of the two user rows on one subcarrier (full mask).
fn two_user_gram(tensor: &ChannelTensor, subcarrier: usize) -> [[Complex64; 2]; 2] {
    let row0 = tensor.user_row(subcarrier, 0);
    let row1 = tensor.user_row(subcarrier, 1);
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    };
    [
        [dot(row0, row0), dot(row0, row1)],
        [dot(row1, row0), dot(row1, row1)],
    ]
}

/// Brute-force two-user sum capacity: scan the diagonal power split
/// (p, 1-p) on a `step` grid and keep the best closed-form
/// log-determinant, averaged over subcarriers.
pub fn two_user_grid_capacity(tensor: &ChannelTensor, rho: f64, step: f64) -> f64 {
    assert_eq!(tensor.users(), 2, "oracle is specific to two users");
    let rho_k = rho * 2.0;
    let points = (1.0 / step).round() as usize;
    let mut mean = 0.0;
    for l in 0..tensor.subcarriers() {
        let g = two_user_gram(tensor, l);
        let (g00, g11, g01) = (g[0][0].re, g[1][1].re, g[0][1].norm_sqr());
        let mut best = f64::MIN;
        for i in 0..=points {
            let p = i as f64 * step;
            let det = (1.0 + rho_k * p * g00) * (1.0 + rho_k * (1.0 - p) * g11)
                - rho_k * rho_k * p * (1.0 - p) * g01;
            best = best.max(det.log2());
        }
        mean += best;
    }
    mean / tensor.subcarriers() as f64
}

// ---------------------------------------------------------------------------
// Finite-difference gradient
// ---------------------------------------------------------------------------

/// Central finite differences of the relaxed objective's mean.
pub fn fd_gradient(tensor: &ChannelTensor, delta: &[f64], rho: f64, h: f64) -> Vec<f64> {
    let objective = |d: &[f64]| equal_power_log_det(tensor, d, rho).unwrap().mean;
    (0..delta.len())
        .map(|m| {
            let mut plus = delta.to_vec();
            let mut minus = delta.to_vec();
            plus[m] += h;
            minus[m] -= h;
            (objective(&plus) - objective(&minus)) / (2.0 * h)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Instance builders
// ---------------------------------------------------------------------------

/// Seeded i.i.d. Rayleigh instance.
pub fn iid(users: usize, antennas: usize, subcarriers: usize, seed: u64) -> ChannelTensor {
    gen_iid_rayleigh(users, antennas, subcarriers, seed).unwrap()
}

/// The structured line-of-sight scene with co-located users: strong
/// power variation along the array, so selection has something to win.
pub fn los_colocated_scene(seed: u64) -> ChannelTensor {
    let geometry = ArrayGeometry::linear(64).unwrap();
    let scene = SyntheticSceneConfig {
        users: 4,
        cluster_count: 8,
        subpaths_per_cluster: 10,
        cluster_azimuth_spread_deg: 10.0,
        cluster_power_sigma_db: 6.0,
        visibility_region_fraction: 0.35,
        user_layout: UserLayout::CoLocated { spacing_m: 2.0 },
        los: true,
        ricean_k_db: 8.0,
        bandwidth_subcarriers: 16,
        seed,
    };
    gen_synthetic(&geometry, &scene).unwrap()
}

/// The structured non-line-of-sight scene with well-separated users:
/// per-user visibility regions overlap enough that average received
/// power alone nearly identifies the best antennas.
pub fn nlos_separated_scene(seed: u64) -> ChannelTensor {
    let geometry = ArrayGeometry::linear(64).unwrap();
    let scene = SyntheticSceneConfig {
        users: 4,
        cluster_count: 12,
        subpaths_per_cluster: 10,
        cluster_azimuth_spread_deg: 10.0,
        cluster_power_sigma_db: 5.0,
        visibility_region_fraction: 0.5,
        user_layout: UserLayout::WellSeparated { min_spacing_m: 10.0 },
        los: false,
        ricean_k_db: 0.0,
        bandwidth_subcarriers: 16,
        seed,
    };
    gen_synthetic(&geometry, &scene).unwrap()
}

/// Mean convex-over-random DPC gain (percent) on i.i.d. channels at
/// M=64, K=4, L=16, N=32 over 20 seeds — the flat-channel reference that
/// structured scenes are measured against.
pub fn iid_reference_gain() -> f64 {
    use antsel_core::rate::dpc::{dpc_sum_capacity, DEFAULT_MAX_ITERS, DEFAULT_TOL};
    use antsel_core::select::convex::{select_convex, ConvexParams};
    use antsel_core::select::random::random_baseline;

    let mut gains = Vec::new();
    for seed in 0..20u64 {
        let h = iid(4, 64, 16, seed)
            .normalize(NormalizationMode::Joint)
            .unwrap();
        let sel = select_convex(&h, 32, RHO, &ConvexParams::default()).unwrap();
        let dpc = dpc_sum_capacity(&h, &sel.mask, RHO, DEFAULT_MAX_ITERS, DEFAULT_TOL)
            .unwrap()
            .mean_bpshz;
        let base = random_baseline(&h, 32, RHO, 200, seed + 1000).unwrap();
        gains.push(100.0 * (dpc - base.dpc_mean) / base.dpc_mean);
    }
    gains.iter().sum::<f64>() / gains.len() as f64
}

/// A uniformly random mask pair (subset, superset) over `antennas`.
pub fn nested_mask_pair(rng: &mut ChaCha8Rng, antennas: usize) -> (SelectionMask, SelectionMask) {
    let mut order: Vec<usize> = (0..antennas).collect();
    order.shuffle(rng);
    let small = rng.random_range(1..antennas);
    let big = rng.random_range(small..=antennas);
    let sub = SelectionMask::from_indices(antennas, &order[..small]).unwrap();
    let sup = SelectionMask::from_indices(antennas, &order[..big]).unwrap();
    (sub, sup)
}

/// Step-1 objective (equal-power mean log-det) of a mask.
pub fn mask_objective(tensor: &ChannelTensor, mask: &SelectionMask, rho: f64) -> f64 {
    equal_power_log_det(tensor, &mask.to_delta(), rho)
        .unwrap()
        .mean
}
