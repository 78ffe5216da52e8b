//! Numerical toolkit for coupled thermostat-type systems in Hammerstein
//! integral form: it checks the hypotheses guaranteeing an eigenpair on every
//! cone sphere, and computes concrete eigenpairs `(lambda_R, (u1, u2))` with
//! `||(u1, u2)||_Y = R` by normalized fixed-point iteration on a uniform-grid
//! discretization.
//!
//! Modules:
//!
//! - [`expr`]: the small expression language for nonlinearities and
//!   functionals in problem files.
//! - [`problem`]: domain types, cone geometry and validation.
//! - [`kernels`]: closed-form kernels, boundary-influence functions and cone
//!   constants per boundary-condition kind.
//! - [`grid`] / [`operator`]: uniform grids and the Nystrom-discretized
//!   operator with breakpoint-split Simpson quadrature.
//! - [`verifier`]: numerical certification of the existence hypotheses.
//! - [`solver`]: the normalized fixed-point eigensolver and radius sweeps.
//! - [`presets`]: three built-in example systems.
//! - [`problem_file`]: the problem-definition file format.

pub mod expr;
pub mod grid;
pub mod kernels;
pub mod operator;
pub mod presets;
pub mod problem;
pub mod problem_file;
pub mod solver;
pub mod verifier;

pub use grid::{Grid, GridFunction, GridPair};
pub use kernels::KernelSet;
pub use presets::Preset;
pub use problem::{
    in_cone, validate, BcKind, Component, ComponentParams, ConeSpec, Functional, ParamValue,
    SystemProblem, ValidationReport,
};
pub use problem_file::{load_problem, serialize_problem, LoadError};
pub use solver::{solve, sweep, EigenPair, SolveError, SolveOptions, SweepOptions, SweepRow};
pub use verifier::{verify, VerificationReport, VerifyOptions};
