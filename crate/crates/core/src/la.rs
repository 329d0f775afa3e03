//! Linear approximation loop: an interior point of the emission constraint,
//! then LP relaxations tightened by perspective cuts placed on the boundary
//! of `g` by an exact line search.

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, BackendError, SolveOptions, Status};
use crate::formulation::{build_linear_base, emission_quadratic, ModelProblem, CutSet, CutSetError};
use crate::model::{eval_g, quadratic_emission, DecisionVector, Instance, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaParams {
    pub eps_lp: f64,
    pub k_max_lp: usize,
    /// Relative tolerance on `|g|` for line-search outputs, scaled by
    /// `max(1, |g(exterior)|)`.
    pub boundary_tol: f64,
    pub lp_options: SolveOptions,
    pub qcp_options: SolveOptions,
}

impl Default for LaParams {
    fn default() -> Self {
        LaParams {
            eps_lp: 1e-3,
            k_max_lp: 1000,
            boundary_tol: 1e-8,
            lp_options: SolveOptions::lp(),
            qcp_options: SolveOptions::qcp(),
        }
    }
}

impl LaParams {
    pub fn validate(&self) -> Result<(), LaError> {
        if !(self.eps_lp >= 0.0) || self.k_max_lp == 0 || !(self.boundary_tol > 0.0) {
            return Err(LaError::Params(format!(
                "need eps_lp >= 0, k_max_lp >= 1, boundary_tol > 0 (got {}, {}, {})",
                self.eps_lp, self.k_max_lp, self.boundary_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaIteration {
    pub k: usize,
    pub lp_value: f64,
    pub g_lp: f64,
    pub lambda: Option<f64>,
    pub cuts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaExit {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaResult {
    pub omega_r: CutSet,
    pub chi_cp: DecisionVector,
    pub g_cp: f64,
    /// Optimum of the last LP (the CP_LA continuous relaxation).
    pub relaxation_value: f64,
    pub last_lp: DecisionVector,
    /// LP solves performed.
    pub iterations: usize,
    pub trace: Vec<LaIteration>,
    pub exit: LaExit,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LineSearchError {
    #[error("interior endpoint has g = {0:e}, expected < 0")]
    Interior(f64),
    #[error("exterior endpoint has g = {0:e}, expected > 0")]
    Exterior(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, thiserror::Error)]
pub enum LaError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("the linear constraint set is infeasible ({0})")]
    Infeasible(String),
    #[error("no interior point: min g over the linear set is {0:e}")]
    NoInterior(f64),
    #[error("{stage} returned status {status}{}", message.as_ref().map(|m| format!(": {m}")).unwrap_or_default())]
    Solver {
        stage: &'static str,
        status: Status,
        message: Option<String>,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    LineSearch(#[from] LineSearchError),
    #[error(transparent)]
    CutSet(#[from] CutSetError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Solves `problem` and returns `(primal, objective)` when a primal exists.
pub(crate) fn solve_primal<B: Backend + ?Sized>(
    backend: &B,
    problem: &ModelProblem,
    opts: &SolveOptions,
    stage: &'static str,
) -> Result<(Vec<f64>, f64), LaError> {
    let res = backend.solve(problem, opts)?;
    match (res.status, res.primal, res.objective) {
        (Status::Optimal | Status::Feasible | Status::TimeLimit, Some(x), Some(v)) => Ok((x, v)),
        (Status::Infeasible, _, _) => Err(LaError::Infeasible(stage.to_string())),
        (status, _, _) => Err(LaError::Solver {
            stage,
            status,
            message: res.message,
        }),
    }
}

/// Relaxed linear base with an extra free column `h` and the row
/// `g(chi) - h <= 0`, minimizing `h`. Returns the problem and `h`'s column.
pub fn center_point_problem(inst: &Instance) -> (ModelProblem, usize) {
    let mut prob = build_linear_base(inst);
    prob.name = "ucet-center".into();
    prob.relax();
    let h = prob.add_var("h", f64::NEG_INFINITY, f64::INFINITY, false);
    prob.quads.push(emission_quadratic(inst, Some(h)));
    prob.objective.clear();
    prob.objective.insert(h, 1.0);
    (prob, h)
}

/// The minimizer of `g` over the relaxed linear set.
pub fn center_point<B: Backend + ?Sized>(
    inst: &Instance,
    backend: &B,
    opts: &SolveOptions,
) -> Result<(DecisionVector, f64), LaError> {
    let (prob, _) = center_point_problem(inst);
    let (x, _) = solve_primal(backend, &prob, opts, "center-point QCP")?;
    let chi = DecisionVector::from_flat(inst.layout(), &x)?;
    let g = eval_g(inst, &chi)?;
    log::debug!("center point: g = {g:e}");
    if g >= 0.0 {
        return Err(LaError::NoInterior(g));
    }
    Ok((chi, g))
}

/// Coefficients `(A, B, C)` of `phi(lambda) = g(lambda * int + (1 - lambda) * ext)`.
pub fn segment_quadratic(inst: &Instance, interior: &DecisionVector, exterior: &DecisionVector) -> (f64, f64, f64) {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (i, d) in inst.derived.iter().enumerate() {
        for t in 0..inst.horizon() {
            let k = interior.idx(i, t);
            let pe = exterior.p[k];
            let dir = interior.p[k] - pe;
            a += d.c_n * dir * dir;
            b += 2.0 * d.c_n * pe * dir;
            c += d.c_n * pe * pe;
        }
    }
    (a, b - (interior.eta - exterior.eta), c - exterior.eta)
}

fn g_at(inst: &Instance, interior: &DecisionVector, exterior: &DecisionVector, lambda: f64) -> f64 {
    let p: Vec<f64> = interior
        .p
        .iter()
        .zip(&exterior.p)
        .map(|(pi, pe)| lambda * pi + (1.0 - lambda) * pe)
        .collect();
    quadratic_emission(inst, &p) - (lambda * interior.eta + (1.0 - lambda) * exterior.eta)
}

/// Root of `g` on the segment by bisection, stopping when `|g| <= tol` or
/// the bracket collapses.
pub fn bisection_root(inst: &Instance, interior: &DecisionVector, exterior: &DecisionVector, tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut mid = 0.5;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let g = g_at(inst, interior, exterior, mid);
        if g.abs() <= tol || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Point `lambda * interior + (1 - lambda) * exterior` with `g = 0` up to
/// `boundary_tol * max(1, |g(exterior)|)`.
pub fn line_search(
    inst: &Instance,
    interior: &DecisionVector,
    exterior: &DecisionVector,
    boundary_tol: f64,
) -> Result<(DecisionVector, f64), LineSearchError> {
    let g_int = eval_g(inst, interior)?;
    let g_ext = eval_g(inst, exterior)?;
    if !(g_int < 0.0) {
        return Err(LineSearchError::Interior(g_int));
    }
    if !(g_ext > 0.0) {
        return Err(LineSearchError::Exterior(g_ext));
    }
    let tol = boundary_tol * g_ext.abs().max(1.0);
    let (a, b, c) = segment_quadratic(inst, interior, exterior);
    let closed = if a.abs() < 1e-14 * b.abs() {
        None
    } else {
        // phi(0) = C > 0 > phi(1) forces B < 0, so this form has no cancellation.
        let disc = (b * b - 4.0 * a * c).max(0.0);
        Some(2.0 * c / (-b + disc.sqrt()))
    };
    let lambda = match closed {
        Some(l) if l > 0.0 && l <= 1.0 && g_at(inst, interior, exterior, l).abs() <= tol => l,
        _ => bisection_root(inst, interior, exterior, tol),
    };
    Ok((interior.convex_combination(exterior, lambda), lambda))
}

/// Relaxed linear base with the perspective rows of `cuts`.
pub fn cp_la_relaxation(inst: &Instance, cuts: &CutSet) -> ModelProblem {
    let mut prob = build_linear_base(inst);
    prob.name = "ucet-cp-la".into();
    prob.relax();
    for row in cuts.perspective_rows(inst) {
        prob.push_row(row);
    }
    prob
}

pub fn run_la<B: Backend + ?Sized>(inst: &Instance, backend: &B, params: &LaParams) -> Result<LaResult, LaError> {
    params.validate()?;
    let (chi_cp, g_cp) = center_point(inst, backend, &params.qcp_options)?;
    let mut omega_r = CutSet::new();
    let mut trace = Vec::new();
    loop {
        let prob = cp_la_relaxation(inst, &omega_r);
        let (x, value) = solve_primal(backend, &prob, &params.lp_options, "LA linear relaxation")?;
        let chi_lp = DecisionVector::from_flat(inst.layout(), &x)?;
        let g_lp = eval_g(inst, &chi_lp)?;
        let k = trace.len();
        log::info!("LA k={k} lp={value:.6} g={g_lp:.3e} cuts={}", omega_r.len());
        trace.push(LaIteration {
            k,
            lp_value: value,
            g_lp,
            lambda: None,
            cuts: omega_r.len(),
        });
        let exit = if g_lp <= params.eps_lp {
            Some(LaExit::Converged)
        } else if omega_r.len() >= params.k_max_lp {
            Some(LaExit::MaxIterations)
        } else {
            None
        };
        if let Some(exit) = exit {
            return Ok(LaResult {
                omega_r,
                chi_cp,
                g_cp,
                relaxation_value: value,
                last_lp: chi_lp,
                iterations: trace.len(),
                trace,
                exit,
            });
        }
        let (hat, lambda) = line_search(inst, &chi_cp, &chi_lp, params.boundary_tol)?;
        trace.last_mut().expect("pushed above").lambda = Some(lambda);
        omega_r.push_boundary(inst, hat, params.boundary_tol * g_lp.abs().max(1.0))?;
    }
}
