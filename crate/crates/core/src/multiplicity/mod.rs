//! Families of `delta`-separated ellipsoids centred on a line, the `L^2`
//! norm of the sum of their refined annuli, and the multiplicity bound.

mod family;
mod overlap;

pub use family::{generate_family, max_family_size, EllipsoidFamily};
pub use overlap::{
    cordoba_check, default_count, overlap_l2, overlap_l2_direct, pair_samples, CordobaParams, CordobaReport,
    CordobaRow, OverlapReport,
};
