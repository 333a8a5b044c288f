//! Sparse linear programming with exact basic duals.
//!
//! This crate holds a named sparse LP representation, a bounded-variable
//! two-phase revised simplex solver, optimality certificates, a
//! finite-difference check for reported duals and a fixed MPS exporter.
//! Dual values follow the shadow-price convention throughout: the dual of a
//! row is the derivative of the optimal objective with respect to that row's
//! right-hand side.

pub mod mps;
pub mod problem;
mod simplex;
pub mod solver;

pub use problem::{ColId, Column, LinearProgram, Row, RowId, RowSense};
pub use solver::{
    dual_perturbation_check, solve, verify_certificates, DualCheck, LpOutcome, LpSolution,
    SimplexSolver, SolveStatus, Solver, Tolerances,
};

use thiserror::Error;

/// Errors raised while building or solving a program.
#[derive(Debug, Error)]
pub enum LpError {
    #[error("name `{0}` is already in use")]
    DuplicateName(String),
    #[error("column `{name}`: lower bound {lower} exceeds upper bound {upper}")]
    BoundOrder { name: String, lower: f64, upper: f64 },
    #[error("`{0}`: coefficient or bound is not a finite number")]
    NotFinite(String),
    #[error("row `{row}` references unknown column index {col}")]
    UnknownColumn { row: String, col: usize },
    #[error("row `{row}` has two coefficients for column `{col}`")]
    DuplicateCoefficient { row: String, col: String },
    #[error("program failed validation: {0}")]
    InvalidProgram(String),
    #[error("expected an optimal solution, solve ended {0:?}")]
    NotOptimal(SolveStatus),
    #[error("perturbation step must be nonzero")]
    ZeroPerturbation,
    #[error("base problem of the perturbation check did not solve to optimality")]
    PerturbationBase,
    #[error("re-solve with perturbed rhs on row `{row}` ended {status:?}")]
    PerturbationResolve { row: String, status: SolveStatus },
}
