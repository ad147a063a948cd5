//! Frequency-domain downlink channel tensors and their generators.
//!
//! A [`ChannelTensor`] holds the complex gain between every transmit
//! antenna and every single-antenna user on every OFDM subcarrier.  The
//! submodules provide three sources:
//!
//! * [`rayleigh`] — i.i.d. complex Gaussian entries (the stationary,
//!   spatially white reference case);
//! * [`synthetic`] — a geometric cluster model with per-cluster visibility
//!   regions over a large aperture, co-located or well-separated users,
//!   optional line-of-sight rays, and linear or cylindrical arrays;
//! * [`ctf1`] — a binary file format for interchange with external tools.

pub mod ctf1;
pub mod rayleigh;
pub mod synthetic;

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

/// Immutable frequency-domain channel tensor.
///
/// Logical shape is `(users K, antennas M, subcarriers L)`.  Storage is a
/// flat buffer ordered subcarrier-major, then user, then antenna, so the
/// per-(subcarrier, user) antenna row is contiguous:
/// `index(k, m, l) = (l * K + k) * M + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    users: usize,
    antennas: usize,
    subcarriers: usize,
    data: Vec<Complex64>,
}

impl ChannelTensor {
    /// Build a tensor from a flat buffer in storage order.
    ///
    /// Validates dimensions (all at least 1), the buffer length, and that
    /// every entry is finite.
    pub fn from_flat(
        users: usize,
        antennas: usize,
        subcarriers: usize,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        if users == 0 || antennas == 0 || subcarriers == 0 {
            return Err(Error::Dimension(format!(
                "channel dimensions must all be at least 1, got \
                 (users {users}, antennas {antennas}, subcarriers {subcarriers})"
            )));
        }
        let want = users
            .checked_mul(antennas)
            .and_then(|p| p.checked_mul(subcarriers))
            .ok_or_else(|| {
                Error::Dimension("channel dimensions overflow the address space".into())
            })?;
        if data.len() != want {
            return Err(Error::Dimension(format!(
                "flat buffer holds {} entries but (K, M, L) = \
                 ({users}, {antennas}, {subcarriers}) needs {want}",
                data.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::Numeric(format!(
                "channel entry at flat index {pos} is not finite"
            )));
        }
        Ok(ChannelTensor {
            users,
            antennas,
            subcarriers,
            data,
        })
    }

    /// Number of users K.
    pub fn users(&self) -> usize {
        self.users
    }

    /// Number of transmit antennas M.
    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Number of subcarriers L.
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// Complex gain for (user, antenna, subcarrier).
    #[inline]
    pub fn entry(&self, user: usize, antenna: usize, subcarrier: usize) -> Complex64 {
        self.data[(subcarrier * self.users + user) * self.antennas + antenna]
    }

    /// Contiguous antenna row of one user on one subcarrier (length M).
    #[inline]
    pub fn user_row(&self, subcarrier: usize, user: usize) -> &[Complex64] {
        let start = (subcarrier * self.users + user) * self.antennas;
        &self.data[start..start + self.antennas]
    }

    /// The flat buffer in storage order (subcarrier-major, then user,
    /// then antenna).
    pub fn flat(&self) -> &[Complex64] {
        &self.data
    }

    /// Mean squared magnitude over all entries.
    pub fn mean_square_magnitude(&self) -> f64 {
        let n = self.data.len() as f64;
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / n
    }

    /// Average received power per transmit antenna, averaged over users
    /// and subcarriers: `p[m] = mean_{k,l} |h[k,m,l]|^2`.
    pub fn per_antenna_avg_power(&self) -> Vec<f64> {
        let mut p = vec![0.0f64; self.antennas];
        for l in 0..self.subcarriers {
            for k in 0..self.users {
                let row = self.user_row(l, k);
                for (m, z) in row.iter().enumerate() {
                    p[m] += z.norm_sqr();
                }
            }
        }
        let denom = (self.users * self.subcarriers) as f64;
        for v in &mut p {
            *v /= denom;
        }
        p
    }

    /// Mean squared magnitude per user, averaged over antennas and
    /// subcarriers.
    pub fn per_user_avg_power(&self) -> Vec<f64> {
        let mut p = vec![0.0f64; self.users];
        for l in 0..self.subcarriers {
            for k in 0..self.users {
                p[k] += self.user_row(l, k).iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        let denom = (self.antennas * self.subcarriers) as f64;
        for v in &mut p {
            *v /= denom;
        }
        p
    }

    /// Rescale so the tensor has the requested power normalization.
    /// Returns a new tensor; the input is never modified.
    pub fn normalize(&self, mode: NormalizationMode) -> Result<ChannelTensor> {
        match mode {
            NormalizationMode::Joint => {
                let mean = self.mean_square_magnitude();
                if !(mean > 0.0) {
                    return Err(Error::Degenerate(
                        "cannot normalize an all-zero channel tensor".into(),
                    ));
                }
                let s = 1.0 / mean.sqrt();
                let data = self.data.iter().map(|z| z * s).collect();
                ChannelTensor::from_flat(self.users, self.antennas, self.subcarriers, data)
            }
            NormalizationMode::PerUser => {
                let per_user = self.per_user_avg_power();
                if let Some(k) = per_user.iter().position(|&p| !(p > 0.0)) {
                    return Err(Error::Degenerate(format!(
                        "user {k} has an all-zero channel; per-user \
                         normalization is undefined"
                    )));
                }
                let scales: Vec<f64> = per_user.iter().map(|p| 1.0 / p.sqrt()).collect();
                let mut data = Vec::with_capacity(self.data.len());
                for l in 0..self.subcarriers {
                    for k in 0..self.users {
                        let s = scales[k];
                        data.extend(self.user_row(l, k).iter().map(|z| z * s));
                    }
                }
                ChannelTensor::from_flat(self.users, self.antennas, self.subcarriers, data)
            }
        }
    }
}

/// How a raw channel tensor is rescaled before rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// One global scalar: mean squared entry magnitude becomes exactly 1.
    /// Preserves the per-antenna power profile shape.
    Joint,
    /// One scalar per user: every user's mean squared magnitude becomes 1.
    /// Removes near/far imbalance while preserving each user's per-antenna
    /// profile shape.
    PerUser,
}

/// Spread of a per-antenna power profile in decibels:
/// `10 log10(max / min)`.  Returns infinity when some antenna has zero
/// average power.
pub fn power_spread_db(per_antenna: &[f64]) -> f64 {
    let max = per_antenna.iter().cloned().fold(f64::MIN, f64::max);
    let min = per_antenna.iter().cloned().fold(f64::MAX, f64::min);
    if !(min > 0.0) {
        return f64::INFINITY;
    }
    10.0 * (max / min).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn indexing_is_subcarrier_user_antenna() {
        // K=2, M=3, L=2: fill with a recognizable pattern.
        let mut data = Vec::new();
        for l in 0..2 {
            for k in 0..2 {
                for m in 0..3 {
                    data.push(c((100 * l + 10 * k + m) as f64, 0.0));
                }
            }
        }
        let t = ChannelTensor::from_flat(2, 3, 2, data).unwrap();
        assert_eq!(t.entry(1, 2, 0), c(12.0, 0.0));
        assert_eq!(t.entry(0, 1, 1), c(101.0, 0.0));
        assert_eq!(t.user_row(1, 1), &[c(110.0, 0.0), c(111.0, 0.0), c(112.0, 0.0)]);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(ChannelTensor::from_flat(0, 3, 2, vec![]).is_err());
        assert!(ChannelTensor::from_flat(2, 0, 2, vec![]).is_err());
        assert!(ChannelTensor::from_flat(2, 3, 0, vec![]).is_err());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let err = ChannelTensor::from_flat(2, 3, 2, vec![c(0.0, 0.0); 11]).unwrap_err();
        assert!(err.to_string().contains("11"));
    }

    #[test]
    fn non_finite_entry_is_rejected() {
        let mut data = vec![c(0.0, 0.0); 12];
        data[7] = c(f64::NAN, 0.0);
        let err = ChannelTensor::from_flat(2, 3, 2, data).unwrap_err();
        assert!(err.to_string().contains("7"));
    }

    #[test]
    fn per_antenna_power_single_row() {
        // One user, one subcarrier, gains [1, 2i, 0] -> powers [1, 4, 0].
        let t =
            ChannelTensor::from_flat(1, 3, 1, vec![c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)])
                .unwrap();
        let p = t.per_antenna_avg_power();
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(p[1], 4.0, epsilon = 1e-15);
        assert_relative_eq!(p[2], 0.0, epsilon = 1e-15);
        assert!(power_spread_db(&p).is_infinite());
    }

    #[test]
    fn per_antenna_power_averages_users_and_subcarriers() {
        // K=2, M=1, L=2 with magnitudes 1, 2, 3, 4:
        // mean power = (1 + 4 + 9 + 16) / 4 = 7.5.
        let data = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(0.0, 4.0)];
        let t = ChannelTensor::from_flat(2, 1, 2, data).unwrap();
        assert_relative_eq!(t.per_antenna_avg_power()[0], 7.5, epsilon = 1e-15);
    }

    #[test]
    fn joint_normalization_sets_global_mean_to_one() {
        let data = vec![c(3.0, 0.0), c(0.0, -2.0), c(1.0, 1.0), c(0.5, 0.0)];
        let t = ChannelTensor::from_flat(2, 1, 2, data).unwrap();
        let n = t.normalize(NormalizationMode::Joint).unwrap();
        assert_relative_eq!(n.mean_square_magnitude(), 1.0, epsilon = 1e-12);
        // Shape is preserved: ratios between entries unchanged.
        let r_before = t.entry(0, 0, 0).norm() / t.entry(1, 0, 0).norm();
        let r_after = n.entry(0, 0, 0).norm() / n.entry(1, 0, 0).norm();
        assert_relative_eq!(r_before, r_after, epsilon = 1e-12);
    }

    #[test]
    fn per_user_normalization_equalizes_users() {
        // User 0 has mean power 4, user 1 has mean power 0.25.
        let data = vec![c(2.0, 0.0), c(0.5, 0.0)];
        let t = ChannelTensor::from_flat(2, 1, 1, data).unwrap();

        let per_user = t.normalize(NormalizationMode::PerUser).unwrap();
        let p = per_user.per_user_avg_power();
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(p[1], 1.0, epsilon = 1e-12);

        // Joint keeps the imbalance: mean power 2.125 maps the users to
        // 4 / 2.125 ~= 1.88 and 0.25 / 2.125 ~= 0.12.
        let joint = t.normalize(NormalizationMode::Joint).unwrap();
        let p = joint.per_user_avg_power();
        assert_relative_eq!(p[0], 4.0 / 2.125, epsilon = 1e-12);
        assert_relative_eq!(p[1], 0.25 / 2.125, epsilon = 1e-12);
        assert_relative_eq!(p[0], 1.88, epsilon = 0.005);
        assert_relative_eq!(p[1], 0.12, epsilon = 0.005);
    }

    #[test]
    fn normalizing_zero_tensor_fails() {
        let t = ChannelTensor::from_flat(1, 2, 1, vec![c(0.0, 0.0); 2]).unwrap();
        assert!(t.normalize(NormalizationMode::Joint).is_err());
        assert!(t.normalize(NormalizationMode::PerUser).is_err());
    }

    #[test]
    fn normalization_does_not_mutate_the_input() {
        let data = vec![c(3.0, 0.0), c(1.0, 0.0)];
        let t = ChannelTensor::from_flat(1, 2, 1, data.clone()).unwrap();
        let _ = t.normalize(NormalizationMode::Joint).unwrap();
        assert_eq!(t.flat(), data.as_slice());
    }

    #[test]
    fn spread_of_flat_profile_is_zero() {
        assert_relative_eq!(power_spread_db(&[2.0, 2.0, 2.0]), 0.0, epsilon = 1e-15);
        assert_relative_eq!(power_spread_db(&[1.0, 10.0]), 10.0, epsilon = 1e-12);
    }
}
