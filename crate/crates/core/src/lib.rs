//! Secrecy analysis of finite-blocklength (FBL) wiretap transmissions over
//! quasi-static Rayleigh fading.
//!
//! The crate evaluates the average information leakage (AIL) to a passive
//! eavesdropper in three independent ways and uses it to design the coding
//! blocklength:
//!
//! * [`leakage::ail_exact`] integrates the per-realization leakage against the
//!   exponential law of the eavesdropper SNR with adaptive Gauss–Kronrod panels.
//! * [`leakage::ail_approx`] is the closed-form saddle-point approximation
//!   `exp(-x0 / gbar_e)`.
//! * [`montecarlo::ail_mc`] averages sampled realizations with a
//!   counter-based, thread-count independent random stream.
//!
//! [`sop`] links the approximation to the infinite-blocklength secrecy outage
//! probability, [`optimizer`] solves the throughput/leakage blocklength design
//! problems, and [`experiments`] turns JSON sweep specifications into CSV tables.
//!
//! All library quantities are linear (not dB); conversion happens at the CLI.

pub mod core_math;
pub mod error;
pub mod experiments;
pub mod leakage;
pub mod montecarlo;
pub mod optimizer;
pub mod quadrature;
pub mod sop;

pub use core_math::{ChannelStats, FblParams, Realization};
pub use error::{Error, Result};
pub use leakage::{LeakageEstimate, Method, SaddleInfo};
pub use montecarlo::{McConfig, McMode};
pub use optimizer::{DesignMethod, DesignOutcome, ParetoPoint, WeightedObjective};

/// Converts a power ratio in decibels to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
