//! Spatially white Rayleigh-fading channel generator.

use super::ChannelTensor;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::FRAC_1_SQRT_2;

/// Generate an i.i.d. circularly symmetric complex Gaussian channel with
/// unit entry variance (`E|h|^2 = 1`).
///
/// Reproducibility contract: every (subcarrier, user) antenna row is
/// drawn from its own counter-derived ChaCha8 stream of the master seed,
/// so the result is a pure function of `(users, antennas, subcarriers,
/// seed)` — identical across runs, platforms, and thread counts, and
/// unchanged for shared dimensions when another dimension grows.
pub fn gen_iid_rayleigh(
    users: usize,
    antennas: usize,
    subcarriers: usize,
    seed: u64,
) -> Result<ChannelTensor> {
    if users == 0 || antennas == 0 || subcarriers == 0 {
        return Err(Error::Dimension(format!(
            "channel dimensions must all be at least 1, got \
             (users {users}, antennas {antennas}, subcarriers {subcarriers})"
        )));
    }
    let mut data = vec![Complex64::new(0.0, 0.0); users * antennas * subcarriers];
    // One contiguous block per subcarrier; rows inside a block are
    // (user-indexed) independent streams, so parallelism over subcarriers
    // cannot change the output.
    data.par_chunks_mut(users * antennas)
        .enumerate()
        .for_each(|(l, block)| {
            for k in 0..users {
                let mut rng = row_rng(seed, l, k, users);
                for z in &mut block[k * antennas..(k + 1) * antennas] {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *z = Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2);
                }
            }
        });
    ChannelTensor::from_flat(users, antennas, subcarriers, data)
}

/// Dedicated random stream for the (subcarrier `l`, user `k`) row.
/// Stream 0 is reserved for scene-level draws elsewhere.
fn row_rng(seed: u64, l: usize, k: usize, users: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((l * users + k) as u64 + 1);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::power_spread_db;
    use approx::assert_relative_eq;

    #[test]
    fn same_seed_reproduces_bit_for_bit() {
        let a = gen_iid_rayleigh(1, 1, 1, 7).unwrap();
        let b = gen_iid_rayleigh(1, 1, 1, 7).unwrap();
        assert_eq!(a.flat(), b.flat());

        let a = gen_iid_rayleigh(3, 8, 5, 7).unwrap();
        let b = gen_iid_rayleigh(3, 8, 5, 7).unwrap();
        assert_eq!(a.flat(), b.flat());
    }

    #[test]
    fn different_seeds_differ() {
        let a = gen_iid_rayleigh(2, 4, 3, 1).unwrap();
        let b = gen_iid_rayleigh(2, 4, 3, 2).unwrap();
        assert_ne!(a.flat(), b.flat());
    }

    #[test]
    fn growing_one_dimension_preserves_shared_rows() {
        // The (l, k) streams are indexed rows, so adding subcarriers must
        // not disturb earlier ones.
        let small = gen_iid_rayleigh(2, 4, 3, 11).unwrap();
        let large = gen_iid_rayleigh(2, 4, 6, 11).unwrap();
        for l in 0..3 {
            for k in 0..2 {
                assert_eq!(small.user_row(l, k), large.user_row(l, k));
            }
        }
    }

    #[test]
    fn unit_entry_variance_at_scale() {
        let t = gen_iid_rayleigh(4, 128, 161, 1).unwrap();
        assert_relative_eq!(t.mean_square_magnitude(), 1.0, epsilon = 0.02);
    }

    #[test]
    fn per_antenna_spread_matches_sampling_statistics() {
        // With K*L = 32 averaging terms over 64 antennas the spread of the
        // per-antenna power profile concentrates between roughly 2.2 and
        // 5.5 dB (Monte-Carlo over 400 seeds: mean 3.64 dB, 5th pct 2.89,
        // 95th pct 4.42).
        let t = gen_iid_rayleigh(2, 64, 16, 3).unwrap();
        let s = power_spread_db(&t.per_antenna_avg_power());
        assert!(
            (2.2..=5.5).contains(&s),
            "spread {s:.3} dB outside the expected sampling band"
        );
    }

    #[test]
    fn per_antenna_spread_tightens_with_more_averaging() {
        // With K*L = 644 averaging terms the profile is nearly flat.
        let t = gen_iid_rayleigh(4, 128, 161, 3).unwrap();
        let s = power_spread_db(&t.per_antenna_avg_power());
        assert!(s < 1.5, "spread {s:.3} dB should be under 1.5 dB");
    }

    #[test]
    fn mean_is_centered() {
        let t = gen_iid_rayleigh(4, 64, 16, 9).unwrap();
        let n = t.flat().len() as f64;
        let mean = t.flat().iter().sum::<Complex64>() / n;
        assert!(mean.norm() < 0.02, "sample mean {mean} too far from zero");
    }
}
