//! The Knapp slab, the tangency set, and the counterexample showing that
//! `p > (n+1)/(n-1)` is needed for the strong spherical maximal function.

mod counterexample;
mod exponent;
mod shells;
mod slab;
mod tangency_set;

pub use counterexample::{g_lp_norm, g_lp_norm_midpoint, g_value, gauss_legendre, CounterexampleField, GNorm};
pub use exponent::{knapp_exponent, slab_shell_average, KnappExponent, KnappParams, KnappRow};
pub use shells::{shell_partial_sums, shell_term_direct, ShellSeries, ShellTerm};
pub use slab::{normal_frame, orthogonality_residual, KnappSlab};
pub use tangency_set::{phi, phi_jacobian, sample_tangency_set, TangencySample, TangencySet};
