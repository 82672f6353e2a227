//! Fundamental limits of covert (low-probability-of-detection) communication.
//!
//! Over a discrete memoryless channel with an off input whose output law is
//! `Q0`, the number of nats that can be sent reliably in `n` channel uses
//! while keeping `D(Q^n || Q0^n) <= delta` grows like `L sqrt(n delta)`.
//! This crate classifies channels, computes `L` with its upper bound and
//! tightness certificate, evaluates the finite-`n` constrained capacity, and
//! runs Monte Carlo experiments that exhibit the square-root law.
//!
//! Everything is measured in nats; `L` is in square-root nats.

pub mod awgn;
pub mod capacity;
pub mod channel;
mod error;
pub mod infodiv;
pub mod lpd;
pub mod opt;
pub mod sim;

pub use channel::{parse_channel, reduce, Channel, Distribution, ReducedChannel};
pub use error::{Error, Result};

/// An information quantity in nats. Variances are in nats squared and `L` in
/// square-root nats; each function documents which.
pub type Nats = f64;
