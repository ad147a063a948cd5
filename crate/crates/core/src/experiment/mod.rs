//! Scenario-driven experiment harness.
//!
//! A [`ScenarioConfig`] (usually parsed from a JSON file) names a channel
//! source, the system dimensions, and the selection strategies to
//! compare.  [`run_scenario`] realizes the channel once, sweeps every
//! strategy over a grid of selection sizes against a shared
//! random-selection baseline, and returns per-cell rates, gains, and
//! 90%-of-full-rate thresholds ready for CSV emission.

pub mod csv;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::synthetic::{
    gen_synthetic, ArrayGeometry, ArrayKind, SyntheticSceneConfig, UserLayout,
};
use crate::channel::{ctf1, rayleigh::gen_iid_rayleigh, ChannelTensor, NormalizationMode};
use crate::error::{Error, Result};
use crate::rate::SelectionMask;
use crate::select::exhaustive::{binomial, select_exhaustive, ENUMERATION_BUDGET};
use crate::select::random::{random_baseline, RandomBaseline};
use crate::select::{
    convex::{select_convex, ConvexParams},
    evaluate_selection, select_power, SelectionReport, SolverStats, Strategy,
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Element-pattern exponent used when a cylindrical geometry does not
/// specify one.
pub const DEFAULT_DIRECTIVITY_EXPONENT: f64 = 2.0;

/// Array shape as written in a config file; the scenario's antenna count
/// sizes the actual geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub kind: ArrayKind,
    /// Element-pattern exponent; only meaningful for cylindrical arrays,
    /// where it defaults to [`DEFAULT_DIRECTIVITY_EXPONENT`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directivity_exponent: Option<f64>,
}

impl GeometrySpec {
    /// Instantiate the geometry for an array of `antennas` elements.
    pub fn build(&self, antennas: usize) -> Result<ArrayGeometry> {
        match self.kind {
            ArrayKind::Linear => {
                if self.directivity_exponent.is_some() {
                    return Err(Error::config(
                        "directivity_exponent",
                        "only cylindrical arrays have a directive element pattern",
                    ));
                }
                ArrayGeometry::linear(antennas)
            }
            ArrayKind::Cylindrical => ArrayGeometry::cylindrical(
                antennas,
                self.directivity_exponent
                    .unwrap_or(DEFAULT_DIRECTIVITY_EXPONENT),
            ),
        }
    }
}

/// Propagation-scene shape as written in a config file.  The scenario's
/// user count, subcarrier count, and seed complete it, so those values
/// cannot disagree between the scene and the scenario; `seed` here
/// overrides the scenario seed when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub cluster_count: usize,
    pub subpaths_per_cluster: usize,
    pub cluster_azimuth_spread_deg: f64,
    pub cluster_power_sigma_db: f64,
    pub visibility_region_fraction: f64,
    pub user_layout: UserLayout,
    #[serde(default)]
    pub los: bool,
    #[serde(default)]
    pub ricean_k_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SceneSpec {
    /// Complete the scene with the scenario-level dimensions and seed.
    pub fn to_scene(
        &self,
        users: usize,
        subcarriers: usize,
        fallback_seed: u64,
    ) -> SyntheticSceneConfig {
        SyntheticSceneConfig {
            users,
            cluster_count: self.cluster_count,
            subpaths_per_cluster: self.subpaths_per_cluster,
            cluster_azimuth_spread_deg: self.cluster_azimuth_spread_deg,
            cluster_power_sigma_db: self.cluster_power_sigma_db,
            visibility_region_fraction: self.visibility_region_fraction,
            user_layout: self.user_layout,
            los: self.los,
            ricean_k_db: self.ricean_k_db,
            bandwidth_subcarriers: subcarriers,
            seed: self.seed.unwrap_or(fallback_seed),
        }
    }
}

/// Where the channel tensor comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSource {
    /// Independent unit-variance circularly symmetric Gaussian entries.
    IidRayleigh,
    /// Geometric cluster scene over a configured array.
    Synthetic {
        geometry: GeometrySpec,
        scene: SceneSpec,
    },
    /// Load a channel file (see the `ctf1` module for the format).
    File { path: PathBuf },
}

/// One experiment: a channel, a strategy set, and a sweep over selection
/// sizes.  Parsed from a single JSON document whose keys mirror these
/// field names; unknown keys are rejected so config typos fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Label copied into every output row.
    pub name: String,
    pub channel_source: ChannelSource,
    /// Number of users K.
    #[serde(rename = "K")]
    pub users: usize,
    /// Number of array antennas M.
    #[serde(rename = "M")]
    pub antennas: usize,
    /// Number of OFDM subcarriers L.
    #[serde(rename = "L")]
    pub subcarriers: usize,
    /// Per-user transmit SNR in dB; converted to linear exactly once.
    pub rho_db: f64,
    /// Selection sizes to sweep; leave empty for the default grid (see
    /// [`default_n_grid`]).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_sweep: Vec<usize>,
    /// Strategies to compare.  An empty list yields an empty sweep.
    pub strategies: Vec<Strategy>,
    /// Number of masks averaged into the random baseline.
    pub random_draws: usize,
    /// Master seed for channel generation and baseline mask draws.
    pub seed: u64,
    pub normalization: NormalizationMode,
}

impl ScenarioConfig {
    /// Parse a config from JSON text.
    pub fn from_json(text: &str) -> Result<ScenarioConfig> {
        serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))
    }

    /// Read and parse a JSON config file.
    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// The configured SNR on a linear scale.
    pub fn rho_linear(&self) -> f64 {
        10f64.powf(self.rho_db / 10.0)
    }

    /// The selection sizes actually swept: the configured list, sorted
    /// and deduplicated, or the default grid when none is given.
    pub fn effective_n_grid(&self) -> Vec<usize> {
        if self.n_sweep.is_empty() {
            default_n_grid(self.users, self.antennas)
        } else {
            let mut grid = self.n_sweep.clone();
            grid.sort_unstable();
            grid.dedup();
            grid
        }
    }

    /// Check every invariant that does not require touching the channel
    /// source; violations name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        if !self
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return Err(Error::config(
                "name",
                "must use only letters, digits, '_', '-', '.' \
                 (it becomes a CSV field and an artifact file prefix)",
            ));
        }
        if self.users == 0 {
            return Err(Error::config("K", "must be at least 1"));
        }
        if self.antennas == 0 {
            return Err(Error::config("M", "must be at least 1"));
        }
        if self.subcarriers == 0 {
            return Err(Error::config("L", "must be at least 1"));
        }
        if self.users > self.antennas {
            return Err(Error::config(
                "K",
                format!(
                    "must not exceed M; got K={} users over M={} antennas",
                    self.users, self.antennas
                ),
            ));
        }
        if !self.rho_db.is_finite() {
            return Err(Error::config(
                "rho_db",
                format!("must be finite, got {}", self.rho_db),
            ));
        }
        if self.random_draws == 0 {
            return Err(Error::config("random_draws", "must be at least 1"));
        }
        for &n in &self.n_sweep {
            if n < self.users || n > self.antennas {
                return Err(Error::config(
                    "n_sweep",
                    format!(
                        "every selection size must lie in [K, M] = [{}, {}], got {n}",
                        self.users, self.antennas
                    ),
                ));
            }
        }
        if self.strategies.contains(&Strategy::Exhaustive) {
            for n in self.effective_n_grid() {
                let count = binomial(self.antennas, n).unwrap_or(u128::MAX);
                if count > ENUMERATION_BUDGET {
                    return Err(Error::config(
                        "strategies",
                        format!(
                            "exhaustive search over C({}, {n}) = {count} masks exceeds \
                             the enumeration budget of {ENUMERATION_BUDGET}",
                            self.antennas
                        ),
                    ));
                }
            }
        }
        if let ChannelSource::Synthetic { geometry, scene } = &self.channel_source {
            let geometry = geometry.build(self.antennas)?;
            scene
                .to_scene(self.users, self.subcarriers, self.seed)
                .validate(&geometry)?;
        }
        Ok(())
    }

    /// Generate or load the channel and apply the configured
    /// normalization.  A file source must match the configured
    /// dimensions exactly.
    pub fn realize_channel(&self) -> Result<ChannelTensor> {
        let raw = match &self.channel_source {
            ChannelSource::IidRayleigh | ChannelSource::Synthetic { .. } => {
                self.generate_channel()?
            }
            ChannelSource::File { path } => {
                let tensor = ctf1::load(path)?;
                check_file_dim("K", tensor.users(), self.users)?;
                check_file_dim("M", tensor.antennas(), self.antennas)?;
                check_file_dim("L", tensor.subcarriers(), self.subcarriers)?;
                tensor
            }
        };
        raw.normalize(self.normalization)
    }

    /// Generate the raw (un-normalized) channel from a generative
    /// source — what a channel-export command writes to disk, leaving
    /// normalization to whoever later consumes the file.
    pub fn generate_channel(&self) -> Result<ChannelTensor> {
        match &self.channel_source {
            ChannelSource::IidRayleigh => {
                gen_iid_rayleigh(self.users, self.antennas, self.subcarriers, self.seed)
            }
            ChannelSource::Synthetic { geometry, scene } => {
                let geometry = geometry.build(self.antennas)?;
                let scene = scene.to_scene(self.users, self.subcarriers, self.seed);
                gen_synthetic(&geometry, &scene)
            }
            ChannelSource::File { .. } => Err(Error::config(
                "channel_source",
                "channel generation needs a generative source, not a file path",
            )),
        }
    }
}

fn check_file_dim(field: &str, found: usize, configured: usize) -> Result<()> {
    if found != configured {
        return Err(Error::config(
            field,
            format!("channel file has {found}, config says {configured}"),
        ));
    }
    Ok(())
}

/// The default selection-size grid: every integer from K to M for small
/// arrays, otherwise 16 evenly spaced values that always include both K
/// and M (so the 90% threshold is always well defined).
pub fn default_n_grid(users: usize, antennas: usize) -> Vec<usize> {
    if antennas <= 32 {
        (users..=antennas).collect()
    } else {
        let span = (antennas - users) as f64;
        let mut grid: Vec<usize> = (0..16)
            .map(|i| users + (span * i as f64 / 15.0).round() as usize)
            .collect();
        grid.dedup();
        grid
    }
}

// ---------------------------------------------------------------------------
// Sweep results
// ---------------------------------------------------------------------------

/// One (strategy, N) cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub strategy: Strategy,
    /// Number of active antennas.
    pub selected: usize,
    /// Mean DPC sum capacity over subcarriers, bps/Hz; for the random
    /// strategy, additionally averaged over the baseline draws.
    pub dpc_mean_bpshz: f64,
    /// Mean ZF sum rate, bps/Hz.  The sweep grid keeps N >= K, so this
    /// is populated on every harness-produced row.
    pub zf_mean_bpshz: Option<f64>,
    /// DPC gain over the shared random baseline, percent.
    pub dpc_gain_pct: f64,
    /// ZF gain over the shared random baseline, percent.
    pub zf_gain_pct: Option<f64>,
    /// Selection-solver iterations (projected gradient ascent); 0 for
    /// strategies without an iterative solver.
    pub solver_iterations: usize,
    /// Measured selection-solver wall time, milliseconds.  Reported in
    /// logs only: the CSV pins this column to 0.0 so identical
    /// (config, seed) runs stay byte-identical.
    pub solver_wall_ms: f64,
    /// The mask behind the row; for the random strategy, the first drawn
    /// mask.
    pub mask: SelectionMask,
}

/// Smallest swept N reaching 90% of the full-array rate, per strategy
/// and rate scheme.  `None` when the sweep grid does not include N = M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub n90_dpc: Option<usize>,
    pub n90_zf: Option<usize>,
}

/// Everything one scenario run produces, in deterministic row order
/// (strategies in configured order, selection sizes ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scenario: String,
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<StrategySummary>,
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Percentage gain of an adaptive rate over the random-baseline rate.
pub fn gain_vs_random(adaptive: f64, baseline: f64) -> Result<f64> {
    if !(baseline > 0.0 && baseline.is_finite()) {
        return Err(Error::Domain(format!(
            "gain over baseline needs a positive finite baseline rate, got {baseline}"
        )));
    }
    Ok(100.0 * (adaptive - baseline) / baseline)
}

/// Smallest sampled N whose rate reaches 90% of `full_rate`.  No
/// interpolation: the answer is always a grid point.  `None` when no
/// sample reaches the threshold (cannot happen when the sweep includes
/// N = M, whose rate defines `full_rate`).
pub fn n90(rates: &[(usize, f64)], full_rate: f64) -> Option<usize> {
    let threshold = 0.9 * full_rate;
    rates
        .iter()
        .filter(|(_, rate)| *rate >= threshold)
        .map(|(n, _)| *n)
        .min()
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Decorrelate the per-N baseline mask draws from the channel draws that
/// descend from the same master seed (one SplitMix64 scramble).
fn baseline_seed(seed: u64, selected: usize) -> u64 {
    let mut z = seed ^ (selected as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run one scenario end to end: realize the channel, compute the shared
/// random baseline for every swept N, evaluate every configured strategy
/// on every N, and derive gains and 90%-threshold summaries.
///
/// Deterministic in (config, seed): cells are evaluated in parallel but
/// reduced in canonical (strategy, N) order, and all randomness is seeded.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SweepResult> {
    config.validate()?;
    let tensor = config.realize_channel()?;
    let rho = config.rho_linear();
    let grid = config.effective_n_grid();

    let mut strategies: Vec<Strategy> = Vec::new();
    for &s in &config.strategies {
        if !strategies.contains(&s) {
            strategies.push(s);
        }
    }

    // The baseline is shared by every strategy at the same N: gains are
    // then differences in selection only, never in channel realization.
    let baselines: BTreeMap<usize, RandomBaseline> = grid
        .par_iter()
        .map(|&n| {
            let b = random_baseline(
                &tensor,
                n,
                rho,
                config.random_draws,
                baseline_seed(config.seed, n),
            )?;
            Ok((n, b))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();

    let cells: Vec<(Strategy, usize)> = strategies
        .iter()
        .flat_map(|&s| grid.iter().map(move |&n| (s, n)))
        .collect();
    let rows: Vec<SweepRow> = cells
        .into_par_iter()
        .map(|(strategy, n)| run_cell(config, &tensor, rho, strategy, n, &baselines[&n]))
        .collect::<Result<_>>()?;

    let summaries = strategies
        .iter()
        .map(|&s| summarize_strategy(s, &rows, config.antennas))
        .collect();

    Ok(SweepResult {
        scenario: config.name.clone(),
        rows,
        summaries,
    })
}

/// Evaluate one (strategy, N) cell against its shared baseline.
fn run_cell(
    config: &ScenarioConfig,
    tensor: &ChannelTensor,
    rho: f64,
    strategy: Strategy,
    selected: usize,
    baseline: &RandomBaseline,
) -> Result<SweepRow> {
    // The random strategy IS the baseline: copy its statistics so its
    // gain is zero by construction.
    if strategy == Strategy::Random {
        return Ok(SweepRow {
            scenario: config.name.clone(),
            strategy,
            selected,
            dpc_mean_bpshz: baseline.dpc_mean,
            zf_mean_bpshz: baseline.zf_mean,
            dpc_gain_pct: 0.0,
            zf_gain_pct: baseline.zf_mean.map(|_| 0.0),
            solver_iterations: 0,
            solver_wall_ms: 0.0,
            mask: baseline.first_mask.clone(),
        });
    }

    let report: SelectionReport = match strategy {
        Strategy::Convex => {
            let solution = select_convex(tensor, selected, rho, &ConvexParams::default())?;
            let mut report = evaluate_selection(tensor, &solution.mask, rho, strategy)?;
            report.solver_stats = Some(solution.stats);
            report
        }
        Strategy::Power => {
            let mask = select_power(tensor, selected)?;
            evaluate_selection(tensor, &mask, rho, strategy)?
        }
        Strategy::Exhaustive => {
            let best = select_exhaustive(tensor, selected, rho)?;
            evaluate_selection(tensor, &best.mask, rho, strategy)?
        }
        Strategy::Random => unreachable!("handled above"),
    };

    let dpc_mean = report.dpc.mean_bpshz;
    let zf_mean = report.zf.as_ref().map(|r| r.mean_bpshz);
    let dpc_gain = gain_vs_random(dpc_mean, baseline.dpc_mean)?;
    let zf_gain = match (zf_mean, baseline.zf_mean) {
        (Some(rate), Some(base)) => Some(gain_vs_random(rate, base)?),
        _ => None,
    };
    let stats: Option<SolverStats> = report.solver_stats;

    Ok(SweepRow {
        scenario: config.name.clone(),
        strategy,
        selected,
        dpc_mean_bpshz: dpc_mean,
        zf_mean_bpshz: zf_mean,
        dpc_gain_pct: dpc_gain,
        zf_gain_pct: zf_gain,
        solver_iterations: stats.map_or(0, |s| s.iterations),
        solver_wall_ms: stats.map_or(0.0, |s| s.wall_ms),
        mask: report.mask,
    })
}

/// Compute the 90%-of-full-rate thresholds for one strategy's rows.
fn summarize_strategy(strategy: Strategy, rows: &[SweepRow], antennas: usize) -> StrategySummary {
    let dpc: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.strategy == strategy)
        .map(|r| (r.selected, r.dpc_mean_bpshz))
        .collect();
    let zf: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.strategy == strategy)
        .filter_map(|r| r.zf_mean_bpshz.map(|rate| (r.selected, rate)))
        .collect();
    let full = |points: &[(usize, f64)]| {
        points
            .iter()
            .find(|(n, _)| *n == antennas)
            .map(|(_, rate)| *rate)
    };
    StrategySummary {
        strategy,
        n90_dpc: full(&dpc).and_then(|f| n90(&dpc, f)),
        n90_zf: full(&zf).and_then(|f| n90(&zf, f)),
    }
}
