//! Transmit-antenna selection for the multi-user massive MIMO-OFDM
//! downlink.
//!
//! A base station with `M` antennas serves `K` single-antenna users over
//! `L` subcarriers but powers only `N <= M` radio chains; the library
//! answers *which* `N` antennas to keep and *what* sum rate the choice
//! costs, for one common selection across all subcarriers:
//!
//! * [`channel`] — the immutable `(K, M, L)` channel tensor, an i.i.d.
//!   Rayleigh generator, a geometric cluster-scene generator for arrays
//!   large enough to see power variation along the aperture, and a
//!   binary file format for measured or exported tensors;
//! * [`rate`] — dirty-paper-coding sum capacity and zero-forcing sum
//!   rate for a masked channel, built on exact waterfilling;
//! * [`select`] — selection strategies: convex relaxation with projected
//!   gradient ascent, received-power ranking, uniform random baselines,
//!   and a guarded exhaustive oracle;
//! * [`experiment`] — a config-driven harness sweeping strategies over
//!   selection sizes and emitting deterministic CSV artifacts;
//! * [`linalg`] — the small complex-matrix kernel (Cholesky and friends)
//!   everything else leans on.
//!
//! Every random path is seeded and every parallel reduction is ordered,
//! so identical inputs reproduce identical outputs bit for bit.

pub mod channel;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod rate;
pub mod select;

pub use channel::{ChannelTensor, NormalizationMode};
pub use error::{Error, Result};
pub use rate::{RateResult, RateScheme, SelectionMask};
pub use select::{SelectionReport, SolverStats, Strategy};
