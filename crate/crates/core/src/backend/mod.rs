//! Solver backends. A backend takes a [`ModelProblem`] and returns a
//! [`SolveResult`]; the shipped [`ProcessBackend`] runs an external solver
//! over MPS files.

mod mps;
mod process;
mod solution;

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::formulation::{ModelProblem, ProblemClass};

pub use mps::{format_number, parse_mps, row_names, sanitize_name, write_mps, MpsError};
pub use process::{default_shim_path, ProcessBackend, ENV_SOLVER, ENV_SOLVER_CMD};
pub use solution::{parse_solution, write_solution, RawSolution, SolutionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    TimeLimit,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::TimeLimit => "time_limit",
            Status::Error => "error",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        Some(match s {
            "optimal" => Status::Optimal,
            "feasible" => Status::Feasible,
            "infeasible" => Status::Infeasible,
            "unbounded" => Status::Unbounded,
            "time_limit" => Status::TimeLimit,
            "error" => Status::Error,
            _ => return None,
        })
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub relax_integrality: bool,
    /// Seconds.
    pub time_limit: f64,
    pub rel_gap: f64,
    pub verbosity: u8,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            relax_integrality: false,
            time_limit: 600.0,
            rel_gap: 1e-4,
            verbosity: 0,
        }
    }
}

impl SolveOptions {
    /// LP subproblems: 0.5% relative gap.
    pub fn lp() -> Self {
        SolveOptions {
            rel_gap: 0.005,
            ..Default::default()
        }
    }

    /// Nonlinear (QCP) subproblems: 0.1% relative gap.
    pub fn qcp() -> Self {
        SolveOptions {
            rel_gap: 0.001,
            ..Default::default()
        }
    }

    /// Integer ellipsoid center MILP: 0.1% relative gap.
    pub fn milp() -> Self {
        SolveOptions {
            rel_gap: 0.001,
            ..Default::default()
        }
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = seconds;
        self
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.time_limit > 0.0) {
            return Err(BackendError::Options(format!("time_limit must be positive, got {}", self.time_limit)));
        }
        if !(0.0..1.0).contains(&self.rel_gap) {
            return Err(BackendError::Options(format!("rel_gap must lie in [0, 1), got {}", self.rel_gap)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    /// Objective recomputed from the clamped primal.
    pub objective: Option<f64>,
    /// Objective as printed by the solver.
    pub reported_objective: Option<f64>,
    /// Values in problem column order.
    pub primal: Option<Vec<f64>>,
    pub solve_time: f64,
    pub message: Option<String>,
}

impl SolveResult {
    pub fn has_primal(&self) -> bool {
        self.primal.is_some()
    }

    pub fn value_of(&self, problem: &ModelProblem, name: &str) -> Option<f64> {
        let j = problem.var_index(name)?;
        self.primal.as_ref().map(|p| p[j])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendCapabilities {
    pub supports: BTreeSet<ProblemClass>,
}

impl BackendCapabilities {
    pub fn all() -> Self {
        Self::new([
            ProblemClass::Lp,
            ProblemClass::Qp,
            ProblemClass::Milp,
            ProblemClass::Qcp,
            ProblemClass::Miqcp,
        ])
    }

    /// Builds the set closed under the implications MIQCP => QCP, MILP and
    /// QCP, MILP, QP => LP.
    pub fn new(classes: impl IntoIterator<Item = ProblemClass>) -> Self {
        let mut supports: BTreeSet<ProblemClass> = classes.into_iter().collect();
        if supports.contains(&ProblemClass::Miqcp) {
            supports.insert(ProblemClass::Qcp);
            supports.insert(ProblemClass::Milp);
        }
        if supports.iter().any(|c| *c != ProblemClass::Lp) {
            supports.insert(ProblemClass::Lp);
        }
        BackendCapabilities { supports }
    }

    pub fn supports(&self, class: ProblemClass) -> bool {
        self.supports.contains(&class)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("backend does not support {0} problems")]
    Unsupported(ProblemClass),
    #[error("invalid solve options: {0}")]
    Options(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solver process failed: {message} (files kept in {})", dir.display())]
    Process { message: String, dir: PathBuf },
    #[error("malformed solver output: {0}")]
    Output(String),
}

pub trait Backend {
    fn capabilities(&self) -> BackendCapabilities;

    fn solve(&self, problem: &ModelProblem, opts: &SolveOptions) -> Result<SolveResult, BackendError>;

    /// Class after applying `relax_integrality`.
    fn effective_class(&self, problem: &ModelProblem, opts: &SolveOptions) -> ProblemClass {
        match (problem.class(), opts.relax_integrality) {
            (ProblemClass::Milp, true) => ProblemClass::Lp,
            (ProblemClass::Miqcp, true) => ProblemClass::Qcp,
            (c, _) => c,
        }
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn capabilities(&self) -> BackendCapabilities {
        (**self).capabilities()
    }

    fn solve(&self, problem: &ModelProblem, opts: &SolveOptions) -> Result<SolveResult, BackendError> {
        (**self).solve(problem, opts)
    }
}

/// Clamps `values` into the column bounds, rounds integer columns that sit
/// within `1e-6` of an integer, and returns the largest bound excess seen.
pub fn clean_primal(problem: &ModelProblem, values: &mut [f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (v, var) in values.iter_mut().zip(&problem.vars) {
        let excess = (var.lb - *v).max(*v - var.ub).max(0.0);
        worst = worst.max(excess);
        *v = v.clamp(var.lb, var.ub);
        if var.integer && (*v - v.round()).abs() <= 1e-6 {
            *v = v.round();
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capabilities_close_under_implication() {
        let caps = BackendCapabilities::new([ProblemClass::Miqcp]);
        for c in [ProblemClass::Lp, ProblemClass::Milp, ProblemClass::Qcp] {
            assert!(caps.supports(c));
        }
        assert!(!caps.supports(ProblemClass::Qp));
        assert_eq!(BackendCapabilities::new([ProblemClass::Lp]).supports.len(), 1);
    }

    #[test]
    fn option_presets_and_validation() {
        assert_eq!(SolveOptions::lp().rel_gap, 0.005);
        assert_eq!(SolveOptions::qcp().rel_gap, 0.001);
        assert!(SolveOptions::lp().with_time_limit(0.0).validate().is_err());
        let mut bad = SolveOptions::lp();
        bad.rel_gap = 1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn status_text_round_trips() {
        for s in [
            Status::Optimal,
            Status::Feasible,
            Status::Infeasible,
            Status::Unbounded,
            Status::TimeLimit,
            Status::Error,
        ] {
            assert_eq!(Status::parse(s.as_str()), Some(s));
        }
        assert_eq!(Status::parse("done"), None);
    }
}
