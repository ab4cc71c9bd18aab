//! The discretised maximal operator over a net of radii, its refined
//! companions, and `L^p` norms of fields.

mod field;
mod net;
mod operator;
mod scan;

pub use field::{box_indicator, BoxRegion, ClosureField, Field, FieldKind, GridField};
pub use net::RadiiNet;
pub use operator::{
    annulus_average, annulus_average_mode, discretised_maximal, domination_check, lp_norm, net_point_average,
    shared_maximal, shell_spec, AverageMode, DominationReport, MaximalParams, SharedMaximal,
};
pub use scan::{bump_family, l2_growth_scan, BumpMixture, L2GrowthParams, L2GrowthRow, L2GrowthScan, NetPolicy};
