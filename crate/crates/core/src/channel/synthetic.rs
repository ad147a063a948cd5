//! Geometric cluster-based channel generator for large apertures.
//!
//! The model sums plane-wave subpaths grouped into scattering clusters.
//! Each cluster carries a lognormal power weight, a mean azimuth, and —
//! the large-aperture twist — a *visibility region*: a window over the
//! array so that different parts of a physically long array see different
//! scatterers.  Users are either co-located (sharing one cluster set, as
//! in a tight routing cabinet) or well separated (independent cluster
//! sets and azimuths spread over a 120 degree sector).  An optional
//! line-of-sight ray with a Ricean power factor can be added per user.
//!
//! Two array shapes are supported: a uniform linear array at half-
//! wavelength spacing (azimuth 0 = broadside), and a cylindrical array of
//! four stacked rings with radial element boresights, a cosine-power
//! directivity pattern, and an alternating-element polarization power
//! imbalance.
//!
//! In the dense limit (many clusters and subpaths, full visibility, zero
//! power spread) the output converges to the i.i.d. Rayleigh statistics
//! of [`super::rayleigh::gen_iid_rayleigh`]; a test pins that limit.

use super::ChannelTensor;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_3, PI, TAU};

// ---------------------------------------------------------------------------
// Model constants
// ---------------------------------------------------------------------------

/// Residual visibility amplitude outside a cluster's nominal region
/// (-25 dB): scatterers are attenuated, not perfectly invisible.
const WINDOW_FLOOR_AMP: f64 = 0.056234132519034905; // 10^(-25/20)

/// Cosine roll-off length beyond each visibility-core edge, as a fraction
/// of the core length.
const WINDOW_ROLLOFF_FRACTION: f64 = 0.2;

/// Back-lobe amplitude floor of a directive cylindrical element (-30 dB).
const BACK_LOBE_FLOOR_AMP: f64 = 0.03162277660168379; // 10^(-30/20)

/// Polarization power imbalance on alternating cylindrical elements:
/// lognormal with this mean and standard deviation in dB.
const POLARIZATION_MEAN_DB: f64 = -2.2;
const POLARIZATION_STD_DB: f64 = 8.0;

/// Standard deviation of per-subpath elevation jitter, degrees.
const ELEVATION_SIGMA_DEG: f64 = 5.0;

/// Delay spread: subpath delays are uniform on [0, DELAY_TAPS / L), i.e.
/// the coherence bandwidth spans about L / DELAY_TAPS subcarriers
/// regardless of L.
const DELAY_TAPS: f64 = 16.0;

/// Angular jitter applied to evenly spread well-separated users, radians.
const SEPARATED_AZIMUTH_JITTER: f64 = 0.05;

/// Rough scene depth used to convert user spacing in meters to an angular
/// offset seen from the array, radians per meter.
const METERS_TO_RADIANS: f64 = 1.0 / 30.0;

// ---------------------------------------------------------------------------
// Array geometry
// ---------------------------------------------------------------------------

/// Supported physical array shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayKind {
    Linear,
    Cylindrical,
}

/// Physical transmit-array description: element positions in wavelengths,
/// per-element boresight azimuths, and the element directivity.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    kind: ArrayKind,
    /// Element positions (x, y, z) in wavelengths.
    positions: Vec<[f64; 3]>,
    /// Per-element boresight azimuth; all zero for the linear array.
    boresight: Vec<f64>,
    /// Exponent q of the max(cos psi, 0)^q element pattern; 0 = omni.
    directivity_exponent: f64,
}

impl ArrayGeometry {
    /// Uniform linear array of `antennas` omnidirectional elements at
    /// half-wavelength spacing along the array axis; azimuth 0 is
    /// broadside.
    pub fn linear(antennas: usize) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::Dimension(
                "a linear array needs at least one element".into(),
            ));
        }
        let positions = (0..antennas)
            .map(|m| [0.0, 0.5 * m as f64, 0.0])
            .collect();
        Ok(ArrayGeometry {
            kind: ArrayKind::Linear,
            positions,
            boresight: vec![0.0; antennas],
            directivity_exponent: 0.0,
        })
    }

    /// Cylindrical array: four stacked rings of `antennas / 4` elements
    /// each, half-wavelength spacing along each ring and between rings,
    /// radial boresights, and a `max(cos psi, 0)^q` element pattern.
    pub fn cylindrical(antennas: usize, directivity_exponent: f64) -> Result<Self> {
        if antennas == 0 || antennas % 4 != 0 {
            return Err(Error::Dimension(format!(
                "a cylindrical array needs a positive multiple of 4 \
                 elements (4 rings), got {antennas}"
            )));
        }
        if !(directivity_exponent >= 0.0 && directivity_exponent.is_finite()) {
            return Err(Error::Domain(format!(
                "directivity exponent must be finite and non-negative, \
                 got {directivity_exponent}"
            )));
        }
        let per_ring = antennas / 4;
        // Half-wavelength arc spacing fixes the radius.
        let radius = per_ring as f64 * 0.5 / TAU;
        let mut positions = Vec::with_capacity(antennas);
        let mut boresight = Vec::with_capacity(antennas);
        for m in 0..antennas {
            let ring = m / per_ring;
            let ang = TAU * (m % per_ring) as f64 / per_ring as f64;
            positions.push([radius * ang.cos(), radius * ang.sin(), 0.5 * ring as f64]);
            boresight.push(ang);
        }
        Ok(ArrayGeometry {
            kind: ArrayKind::Cylindrical,
            positions,
            boresight,
            directivity_exponent,
        })
    }

    /// Array shape tag.
    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    /// Number of elements.
    pub fn antennas(&self) -> usize {
        self.positions.len()
    }

    /// Elements per ring (cylindrical), or the full length (linear).
    pub fn elements_per_ring(&self) -> usize {
        match self.kind {
            ArrayKind::Linear => self.positions.len(),
            ArrayKind::Cylindrical => self.positions.len() / 4,
        }
    }

    /// Directional amplitude response of every element toward the given
    /// azimuth: 1 for omnidirectional linear elements, the floored
    /// cosine-power pattern for cylindrical ones.
    pub fn element_gain(&self, azimuth: f64) -> Vec<f64> {
        match self.kind {
            ArrayKind::Linear => vec![1.0; self.antennas()],
            ArrayKind::Cylindrical => self
                .boresight
                .iter()
                .map(|&b| {
                    let psi = wrap_angle(azimuth - b);
                    psi.cos()
                        .max(0.0)
                        .powf(self.directivity_exponent)
                        .max(BACK_LOBE_FLOOR_AMP)
                })
                .collect(),
        }
    }

    /// Array response (phase times directional amplitude) toward a plane
    /// wave arriving from `(azimuth, elevation)`.
    fn steering(&self, azimuth: f64, elevation: f64) -> Vec<Complex64> {
        let (kx, ky, kz) = (
            elevation.cos() * azimuth.cos(),
            elevation.cos() * azimuth.sin(),
            elevation.sin(),
        );
        let gain = self.element_gain(azimuth);
        self.positions
            .iter()
            .zip(gain)
            .map(|(p, g)| {
                let phase = TAU * (p[0] * kx + p[1] * ky + p[2] * kz);
                g * Complex64::cis(phase)
            })
            .collect()
    }

    /// Draw a cluster mean azimuth appropriate for this array: uniform in
    /// the direction cosine for a linear array (so broadside is not
    /// artificially favored), uniform on the full circle for a
    /// cylindrical one.
    fn draw_cluster_azimuth(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.kind {
            ArrayKind::Linear => rng.random_range(-1.0f64..1.0).asin(),
            ArrayKind::Cylindrical => rng.random_range(-PI..PI),
        }
    }
}

/// Wrap an angle to (-pi, pi].
fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

// ---------------------------------------------------------------------------
// Scene configuration
// ---------------------------------------------------------------------------

/// How the single-antenna users are placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UserLayout {
    /// Users packed within a few meters of each other; they share one
    /// scattering-cluster set and differ by small azimuth offsets and
    /// independent subpath phases.
    CoLocated { spacing_m: f64 },
    /// Users spread across the service area: independent cluster sets and
    /// azimuths fanned over a 120 degree sector.
    WellSeparated { min_spacing_m: f64 },
}

/// Full description of one synthetic propagation scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSceneConfig {
    /// Number of single-antenna users K.
    pub users: usize,
    /// Scattering clusters per cluster set.
    pub cluster_count: usize,
    /// Plane-wave subpaths per cluster.
    pub subpaths_per_cluster: usize,
    /// Standard deviation of subpath azimuth jitter around the cluster
    /// mean, degrees.
    pub cluster_azimuth_spread_deg: f64,
    /// Standard deviation of the lognormal cluster power weights, dB.
    pub cluster_power_sigma_db: f64,
    /// Fraction of the array over which a cluster is visible at full
    /// strength, in (0, 1].  1 means every cluster illuminates the whole
    /// array (the stationary limit).
    pub visibility_region_fraction: f64,
    /// User placement.
    pub user_layout: UserLayout,
    /// Add a per-user line-of-sight ray.
    pub los: bool,
    /// Ricean K-factor of the line-of-sight ray, dB (ignored when `los`
    /// is false).
    pub ricean_k_db: f64,
    /// Number of OFDM subcarriers L.
    pub bandwidth_subcarriers: usize,
    /// Master seed for all scene randomness.
    pub seed: u64,
}

impl SyntheticSceneConfig {
    /// Check the scene against an array geometry.
    pub fn validate(&self, geometry: &ArrayGeometry) -> Result<()> {
        if self.users == 0 {
            return Err(Error::config("users", "must be at least 1"));
        }
        if self.cluster_count == 0 {
            return Err(Error::config("cluster_count", "must be at least 1"));
        }
        if self.subpaths_per_cluster == 0 {
            return Err(Error::config("subpaths_per_cluster", "must be at least 1"));
        }
        if !(self.cluster_azimuth_spread_deg >= 0.0
            && self.cluster_azimuth_spread_deg.is_finite())
        {
            return Err(Error::config(
                "cluster_azimuth_spread_deg",
                "must be finite and non-negative",
            ));
        }
        if !(self.cluster_power_sigma_db >= 0.0 && self.cluster_power_sigma_db.is_finite()) {
            return Err(Error::config(
                "cluster_power_sigma_db",
                "must be finite and non-negative",
            ));
        }
        if !(self.visibility_region_fraction > 0.0 && self.visibility_region_fraction <= 1.0) {
            return Err(Error::config(
                "visibility_region_fraction",
                "must lie in (0, 1]",
            ));
        }
        if self.bandwidth_subcarriers == 0 {
            return Err(Error::config("bandwidth_subcarriers", "must be at least 1"));
        }
        if !self.ricean_k_db.is_finite() {
            return Err(Error::config("ricean_k_db", "must be finite"));
        }
        match self.user_layout {
            UserLayout::CoLocated { spacing_m } => {
                if !(spacing_m >= 0.0 && spacing_m.is_finite()) {
                    return Err(Error::config(
                        "user_layout",
                        "co-located spacing_m must be finite and non-negative",
                    ));
                }
            }
            UserLayout::WellSeparated { min_spacing_m } => {
                if !(min_spacing_m >= 0.0 && min_spacing_m.is_finite()) {
                    return Err(Error::config(
                        "user_layout",
                        "well-separated min_spacing_m must be finite and non-negative",
                    ));
                }
                // Users are fanned over a 120 degree sector; the requested
                // minimum spacing must fit.
                if self.users > 1 {
                    let needed = (self.users - 1) as f64 * min_spacing_m * METERS_TO_RADIANS;
                    if needed > 2.0 * FRAC_PI_3 {
                        return Err(Error::config(
                            "user_layout",
                            format!(
                                "{} users at min_spacing_m {} need {:.2} rad of \
                                 azimuth but only {:.2} rad are available",
                                self.users,
                                min_spacing_m,
                                needed,
                                2.0 * FRAC_PI_3
                            ),
                        ));
                    }
                }
            }
        }
        if geometry.antennas() == 0 {
            return Err(Error::Dimension("array has no elements".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

/// One resolved plane-wave contribution to one user's channel: a delay
/// plus a per-antenna complex coefficient (power weight, visibility
/// window, element pattern, steering phase, and path phase folded in).
struct Ray {
    delay: f64,
    coef: Vec<Complex64>,
}

/// One drawn scattering cluster.
struct Cluster {
    power: f64,
    window_center: f64,
    subpath_azimuth: Vec<f64>,
    subpath_elevation: Vec<f64>,
    subpath_delay: Vec<f64>,
}

/// Generate a synthetic geometric channel for the given array and scene.
///
/// All randomness derives from `scene.seed` through a single dedicated
/// stream, so the output is a pure function of `(geometry, scene)` and is
/// identical across runs and thread counts.
pub fn gen_synthetic(
    geometry: &ArrayGeometry,
    scene: &SyntheticSceneConfig,
) -> Result<ChannelTensor> {
    scene.validate(geometry)?;
    let antennas = geometry.antennas();
    let users = scene.users;
    let subcarriers = scene.bandwidth_subcarriers;

    // Scene-level draws use stream 0 of the master seed (the i.i.d.
    // generator reserves streams >= 1 for tensor rows).
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    rng.set_stream(0);

    // 1. Polarization power multipliers on alternating cylindrical
    //    elements (dual-polarized panels with measured imbalance).
    let polarization: Vec<f64> = match geometry.kind {
        ArrayKind::Linear => vec![1.0; antennas],
        ArrayKind::Cylindrical => (0..antennas)
            .map(|m| {
                if m % 2 == 1 {
                    let z: f64 = rng.sample(StandardNormal);
                    let db = POLARIZATION_MEAN_DB + POLARIZATION_STD_DB * z;
                    10f64.powf(db / 20.0)
                } else {
                    1.0
                }
            })
            .collect(),
    };

    // 2. User azimuths.
    let user_azimuth: Vec<f64> = match scene.user_layout {
        UserLayout::CoLocated { spacing_m } => {
            let base = rng.random_range(-FRAC_PI_3..FRAC_PI_3);
            (0..users)
                .map(|k| {
                    base + (k as f64 - (users - 1) as f64 / 2.0) * spacing_m * METERS_TO_RADIANS
                })
                .collect()
        }
        UserLayout::WellSeparated { .. } => {
            let span = 2.0 * FRAC_PI_3;
            (0..users)
                .map(|k| {
                    let even = if users == 1 {
                        0.0
                    } else {
                        -span / 2.0 + span * k as f64 / (users - 1) as f64
                    };
                    even + rng.random_range(-SEPARATED_AZIMUTH_JITTER..SEPARATED_AZIMUTH_JITTER)
                })
                .collect()
        }
    };

    // 3. Per-user ray lists.  Co-located users share one cluster set (but
    //    draw independent subpath phases); well-separated users each draw
    //    their own.
    let shared_clusters = matches!(scene.user_layout, UserLayout::CoLocated { .. });
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut rays: Vec<Vec<Ray>> = Vec::with_capacity(users);
    for k in 0..users {
        if k == 0 || !shared_clusters {
            clusters = draw_cluster_set(&mut rng, geometry, scene);
        }
        let beta_sum: f64 = clusters.iter().map(|c| c.power).sum();
        let mut user_rays = Vec::new();
        for cl in &clusters {
            let window = visibility_window(antennas, cl.window_center, scene);
            let amp = (cl.power / (scene.subpaths_per_cluster as f64 * beta_sum)).sqrt();
            for s in 0..scene.subpaths_per_cluster {
                let phase = rng.random_range(0.0..TAU);
                let steer = geometry.steering(cl.subpath_azimuth[s], cl.subpath_elevation[s]);
                let rot = Complex64::cis(phase);
                let coef = steer
                    .iter()
                    .enumerate()
                    .map(|(m, a)| amp * window[m] * polarization[m] * rot * a)
                    .collect();
                user_rays.push(Ray {
                    delay: cl.subpath_delay[s],
                    coef,
                });
            }
        }
        if scene.los {
            let k_lin = 10f64.powf(scene.ricean_k_db / 10.0);
            let center = draw_window_center(&mut rng, antennas, scene);
            let window = visibility_window(antennas, center, scene);
            let phase = rng.random_range(0.0..TAU);
            let steer = geometry.steering(user_azimuth[k], 0.0);
            let rot = k_lin.sqrt() * Complex64::cis(phase);
            let coef = steer
                .iter()
                .enumerate()
                .map(|(m, a)| window[m] * polarization[m] * rot * a)
                .collect();
            user_rays.push(Ray { delay: 0.0, coef });
        }
        rays.push(user_rays);
    }

    // 4. Assemble the tensor: each subcarrier block is an independent
    //    deterministic sum over rays, so parallelism cannot reorder
    //    floating point reductions within a row.
    let mut data = vec![Complex64::new(0.0, 0.0); users * antennas * subcarriers];
    data.par_chunks_mut(users * antennas)
        .enumerate()
        .for_each(|(l, block)| {
            for (k, user_rays) in rays.iter().enumerate() {
                let row = &mut block[k * antennas..(k + 1) * antennas];
                for ray in user_rays {
                    let tone = Complex64::cis(-TAU * l as f64 * ray.delay);
                    for (dst, c) in row.iter_mut().zip(&ray.coef) {
                        *dst += tone * c;
                    }
                }
            }
        });
    ChannelTensor::from_flat(users, antennas, subcarriers, data)
}

/// Draw one set of scattering clusters with their subpath geometry.
fn draw_cluster_set(
    rng: &mut ChaCha8Rng,
    geometry: &ArrayGeometry,
    scene: &SyntheticSceneConfig,
) -> Vec<Cluster> {
    let antennas = geometry.antennas();
    let s = scene.subpaths_per_cluster;
    let spread = scene.cluster_azimuth_spread_deg.to_radians();
    let sigma_el = ELEVATION_SIGMA_DEG.to_radians();
    let delay_max = DELAY_TAPS / scene.bandwidth_subcarriers as f64;
    (0..scene.cluster_count)
        .map(|_| {
            let azimuth = geometry.draw_cluster_azimuth(rng);
            let power_db = scene.cluster_power_sigma_db * rng.sample::<f64, _>(StandardNormal);
            let window_center = draw_window_center(rng, antennas, scene);
            let subpath_azimuth = (0..s)
                .map(|_| azimuth + spread * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let subpath_elevation = (0..s)
                .map(|_| sigma_el * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let subpath_delay = (0..s).map(|_| rng.random_range(0.0..delay_max)).collect();
            Cluster {
                power: 10f64.powf(power_db / 10.0),
                window_center,
                subpath_azimuth,
                subpath_elevation,
                subpath_delay,
            }
        })
        .collect()
}

/// Draw a visibility-window center such that the flat core fits inside
/// the array.  At full visibility the window is all ones and no
/// randomness is consumed.
fn draw_window_center(rng: &mut ChaCha8Rng, antennas: usize, scene: &SyntheticSceneConfig) -> f64 {
    let m = antennas as f64;
    let flat_half = scene.visibility_region_fraction * m / 2.0;
    if flat_half >= m / 2.0 {
        m / 2.0
    } else {
        rng.random_range(flat_half..m - flat_half)
    }
}

/// Per-element visibility amplitude: flat core of length
/// `visibility_region_fraction * M` centered at `center`, cosine roll-off
/// beyond each edge, floored at the residual level.
fn visibility_window(antennas: usize, center: f64, scene: &SyntheticSceneConfig) -> Vec<f64> {
    let m = antennas as f64;
    let flat_half = scene.visibility_region_fraction * m / 2.0;
    let roll = WINDOW_ROLLOFF_FRACTION * scene.visibility_region_fraction * m;
    (0..antennas)
        .map(|idx| {
            let d = (idx as f64 - center).abs();
            let w = if d <= flat_half {
                1.0
            } else if d <= flat_half + roll {
                0.5 * (1.0 + (PI * (d - flat_half) / roll).cos())
            } else {
                0.0
            };
            w.max(WINDOW_FLOOR_AMP)
        })
        .collect()
}
