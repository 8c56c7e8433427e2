//! Free-boundary detection, `h`-sweeps, scaling-law fits and analytic brackets.

pub mod bracket;
pub mod detect;
pub mod fit;
pub mod sweep;

pub use bracket::{bracket_free_boundary, BracketParams, FreeBoundaryBracket};
pub use detect::{
    dead_tail_start, dead_tail_start_by, detect_free_boundary, detect_on_samples, local_exponent, FreeBoundaryEstimate,
};
pub use fit::{fit_log_power, fit_power_law, linear_regression, FitKind, LinearFit};
pub use sweep::{
    geometric_h, profiles_monotone_in_h, solve_sweep_points, sweep_h, validate_h_values, FitRecord, SweepFit,
    SweepPoint, SweepResult, SweepSample,
};
