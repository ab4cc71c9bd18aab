//! Numerical laboratory for thin ellipsoidal shells.
//!
//! The crate estimates intersection volumes of axis-parallel ellipsoidal
//! annuli, evaluates discretised maximal averages over them, runs the Knapp
//! and multiplicity experiments, and checks the closed-form algebra behind
//! all of it against brute-force oracles.
//!
//! Polynomial geometry is generic over [`Scalar`] (`f32`, `f64` or exact
//! [`Rational`]); the Monte-Carlo code works in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod geometry;
pub mod knapp;
pub mod linalg;
pub mod maximal;
pub mod mc;
pub mod multiplicity;
pub mod scalar;
pub mod volume;

pub use error::{Error, Result};
pub use scalar::{RealScalar, Scalar};

/// Exact arbitrary-precision rationals.
pub type Rational = num_rational::BigRational;

pub type Radii64 = geometry::Radii<f64>;
pub type Ellipsoid64 = geometry::Ellipsoid<f64>;
pub type AnnulusSpec64 = geometry::AnnulusSpec<f64>;
pub type RefinedAnnulusSpec64 = geometry::RefinedAnnulusSpec<f64>;
pub type TangencyConfig64 = geometry::TangencyConfig<f64>;
pub type Matrix64 = linalg::Matrix<f64>;

pub type RadiiQ = geometry::Radii<Rational>;
pub type TangencyConfigQ = geometry::TangencyConfig<Rational>;
pub type MatrixQ = linalg::Matrix<Rational>;
