//! Free-boundary ("dead core") analysis for `A(r) u'' - B(r) u' = Λ(r) u^p`,
//! `0 < p < 1`, on exterior radial domains `r ≥ R` with Neumann (`u'(R) = -h`)
//! or Dirichlet (`u(R) = h`) data.
//!
//! The crate computes minimal nonnegative solutions by monotone iteration and
//! domain continuation, locates the free-boundary radius `r*(h)`, fits scaling
//! laws, brackets `r*` with explicit comparison functions, and reduces
//! non-radial coefficient fields to radial bracket operators.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bvp;
pub mod error;
pub mod free_boundary;
pub mod io;
pub mod nonradial;
pub mod operator;
pub mod quadrature;

pub use error::{DeadcoreError, Result};
pub use operator::{
    classify_regime, evaluate_coefficients, predicted_exponent_critical, validate_operator, BcKind, BoundaryCondition,
    CoefficientSpec, DriftSign, RadialOperator, RegimeKind, RegimeLabel,
};
