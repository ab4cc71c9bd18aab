//! Volumes and measures of ellipsoidal annuli by exact formulas and
//! Monte-Carlo sampling.
//!
//! Annuli are sampled through their preimage shell
//! `1 - delta < |omega|^2 < 1 + delta`: the affine map has constant Jacobian,
//! so uniform shell points push forward to uniform annulus points and no
//! rejection is needed.

mod cluster;
mod fibre;
mod intersect;
mod sampling;

pub use cluster::{diameter, low_jacobian_cluster, low_jacobian_points, single_linkage, ClusterParams, ClusterReport};
pub use fibre::{fibre_length_in_ball, trace_fibre, Component, Fibre, FibreLength, FibreTrace};
pub use intersect::{
    banded_intersection_scan, dyadic_scales, intersection_volume, intersection_volume_on, volume_bound,
    volume_bound_scan, BandDecomposition, VolumeBoundParams, VolumeBoundRow, VolumeBoundScan,
};
pub use sampling::{
    sample_annulus, sample_surface, shell_volume, surface_area, surface_weight, unit_ball_volume,
    unit_sphere_area, ShellSampler,
};
