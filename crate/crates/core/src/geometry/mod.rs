//! Exact geometry of axis-parallel ellipsoids.
//!
//! An ellipsoid `E(x; r)` is the zero set of
//! `F(y) = sum_j (y_j - x_j)^2 / r_j^2 - 1`, its `delta`-annulus is
//! `{ |F| < delta }`, and the affine map `omega -> x + r * omega` carries the
//! unit sphere (and spherical shells) onto it. Axis indices are zero-based
//! throughout the crate.

mod annulus;
mod frame;
mod radii;
mod tangency;

pub use annulus::{
    affine_forward, affine_inverse, affine_map, defining_gradient, defining_value, Annulus, AnnulusSpec,
    Direction, Ellipsoid, RefinedAnnulusSpec, ShellKernel,
};
pub use frame::{
    d_omega_phi_k, g_ij, g_j, gram_norm_sq_cauchy_binet, gram_norm_sq_gram, jacobian_gram_norm,
    phi_k, AxisFrame, GramNorm, GramKernel, TangencyConfig,
};
pub use radii::{covering_holds, default_c_n, max_c_n, Radii};
pub use tangency::{tangency_centre, tangency_normal, tangency_radii};
