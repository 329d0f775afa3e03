use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

/// A sparse linear row `sum coeffs[j] * x_j  (sense)  rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: BTreeMap<usize, f64>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: String,
}

impl LinearConstraint {
    pub fn new(tag: impl Into<String>, sense: Sense, rhs: f64) -> Self {
        LinearConstraint {
            coeffs: BTreeMap::new(),
            sense,
            rhs,
            tag: tag.into(),
        }
    }

    /// Accumulates `coef` on `var`; entries that cancel to zero are dropped.
    pub fn add(&mut self, var: usize, coef: f64) -> &mut Self {
        if coef == 0.0 {
            return self;
        }
        let entry = self.coeffs.entry(var).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.coeffs.remove(&var);
        }
        self
    }

    pub fn with(mut self, var: usize, coef: f64) -> Self {
        self.add(var, coef);
        self
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|(j, a)| a * x[*j]).sum()
    }

    /// Positive amount by which `x` violates the row.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }

    pub fn coefficient(&self, var: usize) -> f64 {
        self.coeffs.get(&var).copied().unwrap_or(0.0)
    }
}

/// `sum diag[j] * x_j^2 + linear . x <= rhs` with nonnegative diagonal terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadConstraint {
    pub diag: BTreeMap<usize, f64>,
    pub linear: BTreeMap<usize, f64>,
    pub rhs: f64,
    pub tag: String,
}

impl QuadConstraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.diag.iter().map(|(j, q)| q * x[*j] * x[*j]).sum::<f64>()
            + self.linear.iter().map(|(j, a)| a * x[*j]).sum::<f64>()
    }

    pub fn is_convex(&self) -> bool {
        self.diag.values().all(|q| *q >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub integer: bool,
}

/// Problem class, used for capability checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProblemClass {
    Lp,
    Qp,
    Milp,
    Qcp,
    Miqcp,
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemClass::Lp => "LP",
            ProblemClass::Qp => "QP",
            ProblemClass::Milp => "MILP",
            ProblemClass::Qcp => "QCP",
            ProblemClass::Miqcp => "MIQCP",
        })
    }
}

/// A solver-agnostic optimization problem with a linear objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProblem {
    pub name: String,
    pub vars: Vec<Variable>,
    pub rows: Vec<LinearConstraint>,
    pub quads: Vec<QuadConstraint>,
    pub objective: BTreeMap<usize, f64>,
    pub sense: ObjSense,
}

impl ModelProblem {
    pub fn new(name: impl Into<String>, sense: ObjSense) -> Self {
        ModelProblem {
            name: name.into(),
            vars: Vec::new(),
            rows: Vec::new(),
            quads: Vec::new(),
            objective: BTreeMap::new(),
            sense,
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, integer: bool) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            lb,
            ub,
            integer,
        });
        self.vars.len() - 1
    }

    pub fn push_row(&mut self, row: LinearConstraint) {
        self.rows.push(row);
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.integer)
    }

    pub fn class(&self) -> ProblemClass {
        match (self.has_integers(), !self.quads.is_empty()) {
            (false, false) => ProblemClass::Lp,
            (true, false) => ProblemClass::Milp,
            (false, true) => ProblemClass::Qcp,
            (true, true) => ProblemClass::Miqcp,
        }
    }

    /// Clears every integrality flag.
    pub fn relax(&mut self) {
        for v in &mut self.vars {
            v.integer = false;
        }
    }

    pub fn fix(&mut self, var: usize, value: f64) {
        self.vars[var].lb = value;
        self.vars[var].ub = value;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|(j, c)| c * x[*j]).sum()
    }

    pub fn rows_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a LinearConstraint> + 'a {
        self.rows.iter().filter(move |r| r.tag.starts_with(prefix))
    }

    /// Structural checks: row references, nonzero coefficients, tags, convexity.
    pub fn check(&self) -> Result<(), String> {
        let n = self.vars.len();
        for r in &self.rows {
            if r.tag.is_empty() {
                return Err("row with empty tag".into());
            }
            if let Some((j, _)) = r.coeffs.iter().find(|(j, a)| **j >= n || **a == 0.0 || !a.is_finite()) {
                return Err(format!("row {} has invalid entry on column {j}", r.tag));
            }
        }
        for q in &self.quads {
            if !q.is_convex() {
                return Err(format!("quadratic row {} is not convex", q.tag));
            }
            if q.diag.keys().chain(q.linear.keys()).any(|j| *j >= n) {
                return Err(format!("quadratic row {} references an unknown column", q.tag));
            }
        }
        for v in &self.vars {
            if v.lb > v.ub || v.lb.is_nan() || v.ub.is_nan() {
                return Err(format!("variable {} has bounds [{}, {}]", v.name, v.lb, v.ub));
            }
        }
        Ok(())
    }
}
