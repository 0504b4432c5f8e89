//! Linear model container, exact branch-and-bound over integer domains,
//! LP-format export, and an independent feasibility checker.

mod lp;
mod model;
mod solve;

use thiserror::Error;

pub use lp::{export_lp, sanitize_names};
pub use model::{
    Assignment, Comparator, Constraint, LinearExpr, LinearModel, Objective, VarId, VarKind,
    Variable,
};
pub use solve::{solve, solve_within, Budget, Limits, SolveReport, SolveStatus};

/// Absolute feasibility tolerance used throughout.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum IlpError {
    #[error("ill-formed model: {0}")]
    IllFormed(String),
    #[error("no value for variable {0}")]
    MissingValue(String),
    #[error("invalid limit: {0}")]
    InvalidLimit(String),
    #[error("continuous variable {0} is not supported by the branch-and-bound core")]
    ContinuousUnsupported(String),
    #[error("integer variable {0} needs finite bounds")]
    UnboundedInteger(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Row,
    Bound,
    Integrality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Constraint name, or the variable name for bound/integrality entries.
    pub name: String,
    pub kind: ViolationKind,
    pub amount: f64,
}

/// Every constraint, bound, or integrality requirement that `a` violates by
/// more than `tol`. Evaluates rows directly; shares no code with the solver.
pub fn check(m: &LinearModel, a: &Assignment, tol: f64) -> Result<Vec<Violation>, IlpError> {
    let values = m.dense_values(a)?;
    let mut out = Vec::new();
    for (v, &x) in m.variables().iter().zip(&values) {
        let excess = (v.lower - x).max(x - v.upper).max(0.0);
        if excess > tol || x.is_nan() {
            out.push(Violation {
                name: v.name.clone(),
                kind: ViolationKind::Bound,
                amount: excess,
            });
        }
        if v.kind != VarKind::Continuous {
            let frac = (x - x.round()).abs();
            if frac > tol {
                out.push(Violation {
                    name: v.name.clone(),
                    kind: ViolationKind::Integrality,
                    amount: frac,
                });
            }
        }
    }
    for c in m.constraints() {
        let amount = c.violation(&values);
        if amount > tol || amount.is_nan() {
            out.push(Violation {
                name: c.name.clone(),
                kind: ViolationKind::Row,
                amount,
            });
        }
    }
    Ok(out)
}
