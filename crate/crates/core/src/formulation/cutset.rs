use serde::{Deserialize, Serialize};

use crate::model::{eval_g, eval_objective, validate_solution, DecisionVector, Instance, ModelError};

use super::cuts::{inflated_nl_cut, perspective_cut, tangent_cut};
use super::problem::LinearConstraint;

/// Tolerance an incumbent must meet in `validate_solution`.
pub const INCUMBENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPoint {
    pub point: DecisionVector,
    /// `g` at the point when it was stored.
    pub g: f64,
    /// Set for incumbents promoted from the fixed-integer search.
    pub promoted: bool,
}

/// Linearization points on the boundary of `g` (the set Omega^R).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CutSet {
    pub points: Vec<CutPoint>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CutSetError {
    #[error("point has |g| = {g:e}, above the tolerance {tol:e}")]
    OffBoundary { g: f64, tol: f64 },
    #[error("incumbent is not binary-feasible")]
    NotBinary,
    #[error("incumbent violates the model: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl CutSet {
    pub fn new() -> Self {
        CutSet::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Stores a line-search output; rejects it unless `|g| <= tol`.
    pub fn push_boundary(&mut self, inst: &Instance, point: DecisionVector, tol: f64) -> Result<(), CutSetError> {
        self.push(inst, point, tol, false)
    }

    /// Stores an incumbent whose `g` is within `eps_g` of zero.
    pub fn push_promoted(&mut self, inst: &Instance, point: DecisionVector, eps_g: f64) -> Result<(), CutSetError> {
        self.push(inst, point, eps_g, true)
    }

    fn push(&mut self, inst: &Instance, point: DecisionVector, tol: f64, promoted: bool) -> Result<(), CutSetError> {
        let g = eval_g(inst, &point)?;
        if g.abs() > tol {
            return Err(CutSetError::OffBoundary { g, tol });
        }
        self.points.push(CutPoint { point, g, promoted });
        Ok(())
    }

    pub fn perspective_rows(&self, inst: &Instance) -> Vec<LinearConstraint> {
        self.rows(|x| perspective_cut(inst, x), "psp-cut")
    }

    pub fn tangent_rows(&self, inst: &Instance) -> Vec<LinearConstraint> {
        self.rows(|x| tangent_cut(inst, x), "tangent-cut")
    }

    /// Perspective rows inflated with `mu` on column `r_col`.
    pub fn inflated_rows(&self, inst: &Instance, mu: f64, r_col: usize) -> Vec<LinearConstraint> {
        self.rows(|x| inflated_nl_cut(inst, x, mu, r_col), "center-nl-cut")
    }

    fn rows(&self, f: impl Fn(&DecisionVector) -> LinearConstraint, tag: &str) -> Vec<LinearConstraint> {
        self.points
            .iter()
            .enumerate()
            .map(|(s, cp)| {
                let mut row = f(&cp.point);
                row.tag = format!("{tag} s={}", s + 1);
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub point: DecisionVector,
    pub objective: f64,
}

/// Integer-feasible solutions found so far (the set Omega^F).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IncumbentSet {
    pub solutions: Vec<Incumbent>,
    pub best: Option<usize>,
}

impl IncumbentSet {
    pub fn new() -> Self {
        IncumbentSet::default()
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Adds a binary-feasible point that validates clean; returns its objective.
    pub fn push(&mut self, inst: &Instance, point: DecisionVector) -> Result<f64, CutSetError> {
        if !point.is_binary_feasible() {
            return Err(CutSetError::NotBinary);
        }
        let report = validate_solution(inst, &point, INCUMBENT_TOL)?;
        if !report.is_clean() {
            return Err(CutSetError::Infeasible(report.to_string()));
        }
        let objective = eval_objective(inst, &point)?;
        self.solutions.push(Incumbent { point, objective });
        let k = self.solutions.len() - 1;
        if self.best.map_or(true, |b| objective < self.solutions[b].objective) {
            self.best = Some(k);
        }
        Ok(objective)
    }

    pub fn best(&self) -> Option<&Incumbent> {
        self.best.map(|b| &self.solutions[b])
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best().map(|b| b.objective)
    }
}
