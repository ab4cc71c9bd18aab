//! Closed-form linear-algebra identities, each checked against an
//! independent determinant or finite-difference oracle.

mod appendix;
mod circulant;
mod identities;
mod nondeg;
mod report;

pub use appendix::{
    appendix_jacobian_check, det_at_ones_closed_form, det_at_ones_display, display_jacobian,
    finite_difference_jacobian, AppendixReport, JacobianRow,
};
pub use circulant::{circulant_det_check, circulant_det_check_exact, ones_off_diagonal, p_closed_form};
pub use identities::{
    a_k_closed_form, a_k_matrix, cauchy_binet_check, identity_suite, identity_suite_exact, schur_split, SuiteParams,
};
pub use nondeg::{nondeg_bounds_scan, NondegParams, NondegReport};
pub use report::{seeded_uniform, IdentityReport, WorstCase};
