//! Solver interface: outcomes, tolerances, optimality certificates and the
//! right-hand-side perturbation check for reported duals.

use crate::problem::{LinearProgram, RowId, RowSense};
use crate::simplex::{RawOutcome, Simplex};
use crate::LpError;

/// Numerical tolerances governing a solve and its post-checks.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Largest acceptable primal constraint or bound violation.
    pub feasibility: f64,
    /// Relative duality-gap bound for accepting a solution as optimal.
    pub gap_rel: f64,
    /// Agreement required between a reported dual and its finite-difference
    /// estimate in [`dual_perturbation_check`].
    pub dual_check: f64,
    /// Threshold below which a reduced cost does not qualify for entering.
    pub reduced_cost: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot: f64,
    /// Iterations between recomputation of the iterate from the inverse.
    pub refresh_interval: usize,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-7,
            gap_rel: 1e-6,
            dual_check: 1e-4,
            reduced_cost: 1e-8,
            pivot: 1e-8,
            refresh_interval: 256,
            max_iterations: 200_000,
        }
    }
}

/// Status of a completed solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The solver could not certify any of the above within its iteration
    /// budget or numerical limits. Never reported as a silent optimum.
    Numerical,
}

/// A primal-dual solution at a basic optimum.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    /// Value per column, in column order.
    pub primal: Vec<f64>,
    /// Dual value per row: the derivative of the optimal objective with
    /// respect to that row's right-hand side.
    pub row_duals: Vec<f64>,
    /// Reduced cost per column.
    pub reduced_costs: Vec<f64>,
    /// Left-hand-side activity per row.
    pub row_activity: Vec<f64>,
    pub iterations: usize,
}

/// Result of a solve: a certified solution or a definite classification.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(Box<LpSolution>),
    Infeasible,
    Unbounded,
    Numerical,
}

impl LpOutcome {
    pub fn status(&self) -> SolveStatus {
        match self {
            LpOutcome::Optimal(_) => SolveStatus::Optimal,
            LpOutcome::Infeasible => SolveStatus::Infeasible,
            LpOutcome::Unbounded => SolveStatus::Unbounded,
            LpOutcome::Numerical => SolveStatus::Numerical,
        }
    }

    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(sol) => Some(sol),
            _ => None,
        }
    }

    /// Unwrap the optimal solution or surface the status as an error.
    pub fn into_optimal(self) -> Result<LpSolution, LpError> {
        match self {
            LpOutcome::Optimal(sol) => Ok(*sol),
            other => Err(LpError::NotOptimal(other.status())),
        }
    }
}

/// Anything that can solve a [`LinearProgram`] under this crate's contract.
///
/// The bundled [`SimplexSolver`] is the reference implementation; an adapter
/// for an external solver only has to fill in this trait and honour the same
/// dual sign convention.
pub trait Solver {
    fn solve(&self, lp: &LinearProgram, tol: &Tolerances) -> Result<LpOutcome, LpError>;
}

/// Reference bounded-variable revised simplex solver.
#[derive(Debug, Default, Clone)]
pub struct SimplexSolver;

impl Solver for SimplexSolver {
    fn solve(&self, lp: &LinearProgram, tol: &Tolerances) -> Result<LpOutcome, LpError> {
        let violations = lp.validate();
        if !violations.is_empty() {
            return Err(LpError::InvalidProgram(violations.join("; ")));
        }
        let mut simplex = Simplex::new(lp, tol);
        let outcome = match simplex.solve() {
            RawOutcome::Optimal(raw) => {
                let row_activity = lp.row_activity(&raw.x);
                let solution = LpSolution {
                    objective: raw.objective,
                    primal: raw.x,
                    row_duals: raw.duals,
                    reduced_costs: raw.reduced_costs,
                    row_activity,
                    iterations: raw.iterations,
                };
                // A claimed optimum that fails its own certificates is
                // reported as a numerical failure, never as optimal.
                if verify_certificates(lp, &solution, tol).is_ok() {
                    LpOutcome::Optimal(Box::new(solution))
                } else {
                    LpOutcome::Numerical
                }
            }
            RawOutcome::Infeasible => LpOutcome::Infeasible,
            RawOutcome::Unbounded => LpOutcome::Unbounded,
            RawOutcome::Numerical => LpOutcome::Numerical,
        };
        Ok(outcome)
    }
}

/// Solve with the reference simplex solver.
pub fn solve(lp: &LinearProgram, tol: &Tolerances) -> Result<LpOutcome, LpError> {
    SimplexSolver.solve(lp, tol)
}

/// Check primal feasibility, dual feasibility, complementary slackness and
/// the duality gap of a claimed optimum. Returns every breached condition.
pub fn verify_certificates(
    lp: &LinearProgram,
    sol: &LpSolution,
    tol: &Tolerances,
) -> Result<(), Vec<String>> {
    let mut breaches = Vec::new();
    let feas = tol.feasibility;

    let mut scale = 1.0f64;
    for (_, row) in lp.rows() {
        scale = scale.max(row.rhs.abs());
        for &(_, v) in &row.coeffs {
            scale = scale.max(v.abs());
        }
    }
    let feas_scaled = feas * scale;

    for (id, col) in lp.cols() {
        let x = sol.primal[id.index()];
        if x < col.lower - feas_scaled || x > col.upper + feas_scaled {
            breaches.push(format!(
                "column {} value {x} outside bounds [{}, {}]",
                col.name, col.lower, col.upper
            ));
        }
    }

    for (id, row) in lp.rows() {
        let act = sol.row_activity[id.index()];
        let y = sol.row_duals[id.index()];
        let slack = row.rhs - act;
        let violated = match row.sense {
            RowSense::LessEq => slack < -feas_scaled,
            RowSense::Equal => slack.abs() > feas_scaled,
            RowSense::GreaterEq => slack > feas_scaled,
        };
        if violated {
            breaches.push(format!(
                "row {} activity {act} violates {} {}",
                row.name, row.sense, row.rhs
            ));
        }
        // Dual sign: for a minimisation, relaxing a <= row cannot increase
        // the optimum and tightening a >= row cannot decrease it.
        let dual_tol = feas * (1.0 + y.abs());
        match row.sense {
            RowSense::LessEq if y > dual_tol => {
                breaches.push(format!("row {}: dual {y} positive on <= row", row.name));
            }
            RowSense::GreaterEq if y < -dual_tol => {
                breaches.push(format!("row {}: dual {y} negative on >= row", row.name));
            }
            _ => {}
        }
        let cs = y * slack;
        if cs.abs() > feas * (1.0 + y.abs()) * (1.0 + slack.abs()) * 10.0 {
            breaches.push(format!(
                "row {}: complementary slackness violated (dual {y}, slack {slack})",
                row.name
            ));
        }
    }

    // Reduced-cost signs and column complementary slackness.
    for (id, col) in lp.cols() {
        let j = id.index();
        let d = sol.reduced_costs[j];
        let x = sol.primal[j];
        if col.lower == col.upper {
            continue;
        }
        let at_lower = col.lower.is_finite() && (x - col.lower).abs() <= feas_scaled;
        let at_upper = col.upper.is_finite() && (col.upper - x).abs() <= feas_scaled;
        let d_tol = feas * scale.max(1.0) * (1.0 + d.abs());
        if at_lower && !at_upper && d < -d_tol {
            breaches.push(format!(
                "column {}: negative reduced cost {d} at lower bound",
                col.name
            ));
        } else if at_upper && !at_lower && d > d_tol {
            breaches.push(format!(
                "column {}: positive reduced cost {d} at upper bound",
                col.name
            ));
        } else if !at_lower && !at_upper && d.abs() > d_tol {
            breaches.push(format!(
                "column {}: nonzero reduced cost {d} at interior value",
                col.name
            ));
        }
    }

    // Strong duality via the basic identity c'x = y'b + sum of bound terms.
    let mut dual_obj: f64 = sol
        .row_duals
        .iter()
        .zip(lp.rows())
        .map(|(y, (_, row))| y * row.rhs)
        .sum();
    for (id, _) in lp.cols() {
        let d = sol.reduced_costs[id.index()];
        if d != 0.0 {
            dual_obj += d * sol.primal[id.index()];
        }
    }
    let gap = (sol.objective - dual_obj).abs();
    if gap > tol.gap_rel * (1.0 + sol.objective.abs()) {
        breaches.push(format!(
            "duality gap {gap} exceeds tolerance (objective {}, dual objective {dual_obj})",
            sol.objective
        ));
    }

    if breaches.is_empty() {
        Ok(())
    } else {
        Err(breaches)
    }
}

/// Outcome of re-solving with a perturbed right-hand side.
#[derive(Debug, Clone)]
pub struct DualCheck {
    /// Finite-difference estimate `(obj' - obj) / epsilon`.
    pub numeric_dual: f64,
    /// Dual reported by the solver on the unperturbed problem.
    pub reported_dual: f64,
    /// Whether the two agree within the `dual_check` tolerance.
    pub agrees: bool,
}

/// Estimate a row's dual by re-solving with `rhs += epsilon` and compare it
/// with the reported dual. Meaningful when the optimum is non-degenerate at
/// the tested row and `epsilon` stays within the optimal basis range.
pub fn dual_perturbation_check(
    lp: &LinearProgram,
    row: RowId,
    epsilon: f64,
    tol: &Tolerances,
) -> Result<DualCheck, LpError> {
    if epsilon == 0.0 {
        return Err(LpError::ZeroPerturbation);
    }
    let base = solve(lp, tol)?
        .into_optimal()
        .map_err(|_| LpError::PerturbationBase)?;
    let reported = base.row_duals[row.index()];

    let mut shifted = lp.clone();
    shifted.shift_rhs(row, epsilon);
    let perturbed = match solve(&shifted, tol)? {
        LpOutcome::Optimal(sol) => sol,
        other => {
            return Err(LpError::PerturbationResolve {
                row: lp.row(row).name.clone(),
                status: other.status(),
            })
        }
    };
    let numeric = (perturbed.objective - base.objective) / epsilon;
    let agrees = (numeric - reported).abs() <= tol.dual_check * (1.0 + reported.abs());
    Ok(DualCheck {
        numeric_dual: numeric,
        reported_dual: reported,
        agrees,
    })
}
