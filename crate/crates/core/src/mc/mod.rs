//! Deterministic Monte-Carlo plumbing.
//!
//! Every stochastic quantity is a mean over draws from an [`RngStream`]
//! identified by `(seed, stream_id)`. Work is cut into chunks of
//! [`CHUNK_SIZE`] samples, each chunk owns a derived stream, and chunk
//! results are reduced in chunk order, so the output is bit-identical for
//! any number of worker threads.

mod estimate;
mod exact;
mod fit;
mod rng;

pub use estimate::{estimate_mean, estimate_means, estimate_means_dyn, run_chunks, MCEstimate, Moments, CHUNK_SIZE};
pub use exact::ExactSum;
pub use fit::{fit_line, fit_power_law, ScalingFit};
pub use rng::{derive_stream_id, mix64, RngStream};
