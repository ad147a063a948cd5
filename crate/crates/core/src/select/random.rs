//! Uniform random selection and the random-selection rate baseline.

use super::check_selection_size;
use crate::channel::ChannelTensor;
use crate::error::Result;
use crate::rate::dpc::{dpc_sum_capacity, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::rate::zf::zf_sum_rate;
use crate::rate::SelectionMask;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One uniform draw from all N-subsets of M antennas, deterministic in
/// the seed.
pub fn select_random(antennas: usize, selected: usize, seed: u64) -> Result<SelectionMask> {
    check_selection_size(antennas, selected)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_mask(&mut rng, antennas, selected)
}

/// Draw the next uniform N-subset from an already-seeded generator.
fn draw_mask(rng: &mut ChaCha8Rng, antennas: usize, selected: usize) -> Result<SelectionMask> {
    let picked = rand::seq::index::sample(rng, antennas, selected).into_vec();
    SelectionMask::from_indices(antennas, &picked)
}

/// Mean rates over many independent uniform selections.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomBaseline {
    /// Number of masks averaged.
    pub draws: usize,
    /// Mean DPC sum capacity across draws, bps/Hz.
    pub dpc_mean: f64,
    /// Standard error of the DPC mean; absent for a single draw.
    pub dpc_std_err: Option<f64>,
    /// Mean ZF sum rate across draws; absent when N < K.
    pub zf_mean: Option<f64>,
    /// Standard error of the ZF mean; absent when N < K or for a single
    /// draw.
    pub zf_std_err: Option<f64>,
    /// The first drawn mask — identical to `select_random` with the same
    /// seed, useful as the representative mask of the strategy.
    pub first_mask: SelectionMask,
}

/// Average the DPC and ZF rates of `draws` independent uniform
/// N-selections.  Deterministic in the seed: the mask sequence is drawn
/// up front from one stream and evaluation order never affects the
/// reduction.  ZF statistics are reported only when N >= K.
pub fn random_baseline(
    tensor: &ChannelTensor,
    selected: usize,
    rho: f64,
    draws: usize,
    seed: u64,
) -> Result<RandomBaseline> {
    check_selection_size(tensor.antennas(), selected)?;
    crate::rate::check_rho(rho)?;
    if draws == 0 {
        return Err(crate::error::Error::Precondition(
            "the baseline needs at least one draw".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks: Vec<SelectionMask> = (0..draws)
        .map(|_| draw_mask(&mut rng, tensor.antennas(), selected))
        .collect::<Result<_>>()?;
    let with_zf = selected >= tensor.users();

    let rates: Vec<(f64, f64)> = masks
        .par_iter()
        .map(|mask| {
            let dpc = dpc_sum_capacity(tensor, mask, rho, DEFAULT_MAX_ITERS, DEFAULT_TOL)?
                .mean_bpshz;
            let zf = if with_zf {
                zf_sum_rate(tensor, mask, rho)?.mean_bpshz
            } else {
                0.0
            };
            Ok((dpc, zf))
        })
        .collect::<Result<_>>()?;

    let (dpc_mean, dpc_std_err) = mean_and_std_err(rates.iter().map(|r| r.0));
    let (zf_mean, zf_std_err) = if with_zf {
        let (m, s) = mean_and_std_err(rates.iter().map(|r| r.1));
        (Some(m), s)
    } else {
        (None, None)
    };
    Ok(RandomBaseline {
        draws,
        dpc_mean,
        dpc_std_err,
        zf_mean,
        zf_std_err,
        first_mask: masks.into_iter().next().expect("at least one draw"),
    })
}

/// Mean and standard error of the mean (sample standard deviation over
/// sqrt(n)); the standard error needs at least two samples.
fn mean_and_std_err(values: impl Iterator<Item = f64> + Clone) -> (f64, Option<f64>) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}
