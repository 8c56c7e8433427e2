//! Finite-difference solver for the radial boundary value problem.

pub mod grid;
pub mod scheme;
pub mod solver;

pub use grid::{Grid, GridPolicy};
pub use solver::{
    build_grid, compare_profiles, compare_samples, minimal_solution, residual_norm, solve_truncated, ComparisonReport,
    ContinuationStep, MinimalSolution, Ordering, SolutionProfile, SolveConfig,
};
