//! Center-point search for integer solutions: integer ellipsoid centers of
//! the current polyhedral relaxation, a feasibility check on their
//! commitments, and fixed-commitment dispatch.

use std::collections::HashSet;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, SolveOptions};
use crate::formulation::{
    build_linear_base, emission_quadratic, objective_cut, CutSet, Incumbent, IncumbentSet, ModelProblem, ObjSense,
};
use crate::la::{line_search, run_la, solve_primal, LaError, LaParams, LaResult};
use crate::model::{
    eval_g, eval_objective, quadratic_emission, validate_solution, Commitment, DecisionVector, Family, Instance,
};

/// `1 / (1 + 1000 e^{-3k})`.
pub fn mu_schedule(k: usize) -> f64 {
    1.0 / (1.0 + 1e3 * (-3.0 * k as f64).exp())
}

/// `1 - mu_schedule(k)`, kept separately because `mu_schedule` rounds to
/// exactly 1.0 from `k = 14` on while this stays representable.
pub fn mu_complement(k: usize) -> f64 {
    let a = 1e3 * (-3.0 * k as f64).exp();
    a / (1.0 + a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpParams {
    pub eps_r: f64,
    pub eps_g: f64,
    pub eps_h: f64,
    pub max_milp_iters: usize,
    /// Seconds of wall time for the whole loop, LA included.
    pub time_limit: f64,
    /// Constant ellipsoid factor replacing the schedule.
    pub mu_fixed: Option<f64>,
    /// Upper bound on the radius column.
    pub r_cap: f64,
    pub milp_options: SolveOptions,
    pub adjust_options: SolveOptions,
    pub search_options: SolveOptions,
}

impl Default for CpParams {
    fn default() -> Self {
        CpParams {
            eps_r: 1e-3,
            eps_g: 1e-3,
            eps_h: 1e-3,
            max_milp_iters: 100,
            time_limit: 600.0,
            mu_fixed: None,
            r_cap: 1e6,
            milp_options: SolveOptions::milp(),
            adjust_options: SolveOptions::qcp(),
            search_options: SolveOptions {
                rel_gap: 1e-6,
                ..SolveOptions::qcp()
            },
        }
    }
}

impl CpParams {
    pub fn mu(&self, k: usize) -> f64 {
        self.mu_fixed.unwrap_or_else(|| mu_schedule(k))
    }

    pub fn validate(&self) -> Result<(), CpError> {
        let tols_ok = [self.eps_r, self.eps_g, self.eps_h].iter().all(|v| *v >= 0.0);
        let mu_ok = self.mu_fixed.map_or(true, |m| m > 0.0 && m <= 1.0);
        if !tols_ok || self.max_milp_iters == 0 || !mu_ok || !(self.time_limit > 0.0) || !(self.r_cap > 0.0) {
            return Err(CpError::Params(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CpAction {
    #[serde(rename = "feasible→search")]
    FeasibleSearch,
    #[serde(rename = "infeasible→adjust")]
    InfeasibleAdjust,
    #[serde(rename = "adjust→linesearch")]
    AdjustLinesearch,
    #[serde(rename = "adjust→search")]
    AdjustSearch,
    #[serde(rename = "stop")]
    Stop,
}

impl CpAction {
    pub fn as_str(self) -> &'static str {
        match self {
            CpAction::FeasibleSearch => "feasible→search",
            CpAction::InfeasibleAdjust => "infeasible→adjust",
            CpAction::AdjustLinesearch => "adjust→linesearch",
            CpAction::AdjustSearch => "adjust→search",
            CpAction::Stop => "stop",
        }
    }
}

impl fmt::Display for CpAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpTraceRow {
    pub k: usize,
    pub mu: f64,
    pub r_hat: f64,
    /// NaN on a stop row where the center problem had no point.
    pub g_icp: f64,
    /// `None` when the commitment check was not run, infinite when the
    /// commitment admits no linearly feasible dispatch.
    pub h: Option<f64>,
    pub action: CpAction,
    /// Best incumbent after the iteration.
    pub incumbent_obj: Option<f64>,
    pub cum_time_s: f64,
    /// Objective of the center point itself.
    pub obj_icp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    OptimalByR,
    IterationLimit,
    TimeLimit,
    /// A repeated commitment produced neither a cut nor a better incumbent.
    Stalled,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::OptimalByR => "optimal-by-r",
            Termination::IterationLimit => "iteration-limit",
            Termination::TimeLimit => "time-limit",
            Termination::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpResult {
    pub best: Option<Incumbent>,
    pub omega_f: IncumbentSet,
    pub omega_r: CutSet,
    pub la: LaResult,
    pub trace: Vec<CpTraceRow>,
    pub termination: Termination,
    pub elapsed_s: f64,
    /// Wall-clock second at which each incumbent was found, in `omega_f` order.
    pub incumbent_times: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CpError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("integer ellipsoid center problem is infeasible")]
    CenterInfeasible,
    #[error(transparent)]
    La(#[from] LaError),
}

impl From<crate::model::ModelError> for CpError {
    fn from(e: crate::model::ModelError) -> Self {
        CpError::La(e.into())
    }
}

impl From<crate::backend::BackendError> for CpError {
    fn from(e: crate::backend::BackendError) -> Self {
        CpError::La(e.into())
    }
}

impl From<crate::la::LineSearchError> for CpError {
    fn from(e: crate::la::LineSearchError) -> Self {
        CpError::La(e.into())
    }
}

impl From<crate::formulation::CutSetError> for CpError {
    fn from(e: crate::formulation::CutSetError) -> Self {
        CpError::La(e.into())
    }
}

/// Integer ellipsoid center: maximize `r` over the linear set with integrality, the
/// inflated cuts of `omega_r` and, given an incumbent, the objective cut.
/// Returns the problem and the column of `r`.
pub fn center_problem(
    inst: &Instance,
    omega_r: &CutSet,
    best: Option<f64>,
    mu: f64,
    r_cap: f64,
) -> (ModelProblem, usize) {
    let mut prob = build_linear_base(inst);
    prob.name = "ucet-icp".into();
    let r = prob.add_var("r", 0.0, r_cap, false);
    for row in omega_r.inflated_rows(inst, mu, r) {
        prob.push_row(row);
    }
    if let Some(v) = best {
        prob.push_row(objective_cut(inst, v, mu, r));
    }
    prob.objective.clear();
    prob.objective.insert(r, 1.0);
    prob.sense = ObjSense::Maximize;
    (prob, r)
}

pub fn integer_ellipsoid_center<B: Backend + ?Sized>(
    inst: &Instance,
    omega_r: &CutSet,
    best: Option<f64>,
    mu: f64,
    r_cap: f64,
    backend: &B,
    opts: &SolveOptions,
) -> Result<(DecisionVector, f64), CpError> {
    let (prob, r) = center_problem(inst, omega_r, best, mu, r_cap);
    let (x, _) = match solve_primal(backend, &prob, opts, "integer ellipsoid center MILP") {
        Ok(v) => v,
        Err(LaError::Infeasible(_)) => return Err(CpError::CenterInfeasible),
        Err(e) => return Err(e.into()),
    };
    Ok((DecisionVector::from_flat(inst.layout(), &x)?, x[r].max(0.0)))
}

/// Linear base with `u` fixed, startups fixed to the minimal pattern and
/// every remaining integer column relaxed.
pub fn fixed_commitment_problem(inst: &Instance, u: &[u8]) -> ModelProblem {
    let l = inst.layout();
    let u0: Vec<u8> = inst.units.iter().map(|x| x.u0).collect();
    let c = Commitment::with_minimal_startups(l.units, l.periods, u.to_vec(), &u0, 0, 0);
    let mut prob = build_linear_base(inst);
    for i in 0..l.units {
        for t in 0..l.periods {
            prob.fix(l.u(i, t), c.u[l.cell(i, t)] as f64);
            prob.fix(l.s(i, t), c.s[l.cell(i, t)] as f64);
        }
    }
    prob.relax();
    prob
}

/// Families violated by `u` alone, with minimal startups.
fn commitment_conflicts(inst: &Instance, u: &[u8]) -> Vec<&'static str> {
    let l = inst.layout();
    let u0: Vec<u8> = inst.units.iter().map(|x| x.u0).collect();
    let c = Commitment::with_minimal_startups(l.units, l.periods, u.to_vec(), &u0, 0, 0);
    let mut x = DecisionVector::zeros(l.units, l.periods);
    x.u = c.u.iter().map(|v| *v as f64).collect();
    x.s = c.s.iter().map(|v| *v as f64).collect();
    let Ok(report) = validate_solution(inst, &x, 1e-9) else {
        return Vec::new();
    };
    [Family::MinUp, Family::MinDown, Family::InitialStatus, Family::State, Family::Reserve]
        .into_iter()
        .filter(|f| report.get(*f).is_some())
        .map(Family::tag)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adjustment {
    /// Minimal violation of `g`; infinite when no linearly feasible dispatch exists.
    pub h: f64,
    pub point: Option<DecisionVector>,
    /// Families blamed for linear infeasibility.
    pub infeasible_families: Vec<&'static str>,
}

/// Feasibility adjustment: `min h` with `u` fixed and `g(chi) <= h`, `h >= 0`.
pub fn feasibility_adjustment<B: Backend + ?Sized>(
    inst: &Instance,
    u: &[u8],
    backend: &B,
    opts: &SolveOptions,
) -> Result<Adjustment, CpError> {
    let mut prob = fixed_commitment_problem(inst, u);
    prob.name = "ucet-adjust".into();
    let h = prob.add_var("h", 0.0, f64::INFINITY, false);
    prob.quads.push(emission_quadratic(inst, Some(h)));
    prob.objective.clear();
    prob.objective.insert(h, 1.0);
    match solve_primal(backend, &prob, opts, "feasibility adjustment QCP") {
        Ok((x, v)) => Ok(Adjustment {
            h: v.max(0.0),
            point: Some(DecisionVector::from_flat(inst.layout(), &x)?),
            infeasible_families: Vec::new(),
        }),
        Err(LaError::Infeasible(_)) => {
            let mut fams = commitment_conflicts(inst, u);
            if fams.is_empty() {
                fams = vec![Family::PowerBalance.tag(), Family::RampUp.tag(), Family::RampDown.tag()];
            }
            log::debug!("commitment has no linear dispatch: {}", fams.join(", "));
            Ok(Adjustment {
                h: f64::INFINITY,
                point: None,
                infeasible_families: fams,
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// Replaces simultaneous buying and selling by the net trade and sets the
/// trade indicators to match. Never increases the objective.
pub fn net_trades(x: &mut DecisionVector) {
    let net = x.de_b - x.de_s;
    if net > 0.0 {
        x.de_b = net;
        x.de_s = 0.0;
        x.u_b = 1.0;
        x.u_s = 0.0;
    } else if net < 0.0 {
        x.de_b = 0.0;
        x.de_s = -net;
        x.u_b = 0.0;
        x.u_s = 1.0;
    } else {
        x.de_b = 0.0;
        x.de_s = 0.0;
        x.u_b = 0.0;
        x.u_s = 0.0;
    }
}

/// Fixed-integer search: minimize the objective with `u` fixed and `g <= 0`.
/// Returns `None` when the fixed problem is infeasible. The returned point
/// has netted trades and `eta` lowered to the quadratic emission, which
/// leaves the objective unchanged.
pub fn fixed_integer_search<B: Backend + ?Sized>(
    inst: &Instance,
    u: &[u8],
    backend: &B,
    opts: &SolveOptions,
) -> Result<Option<DecisionVector>, CpError> {
    let mut prob = fixed_commitment_problem(inst, u);
    prob.name = "ucet-search".into();
    prob.quads.push(emission_quadratic(inst, None));
    match solve_primal(backend, &prob, opts, "fixed-integer search QCP") {
        Ok((x, _)) => {
            let mut chi = DecisionVector::from_flat(inst.layout(), &x)?;
            net_trades(&mut chi);
            chi.eta = quadratic_emission(inst, &chi.p).max(0.0);
            Ok(Some(chi))
        }
        Err(LaError::Infeasible(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn u_pattern(x: &DecisionVector) -> Vec<u8> {
    x.commitment().u
}

pub fn run_cp<B: Backend + ?Sized>(
    inst: &Instance,
    backend: &B,
    la_params: &LaParams,
    params: &CpParams,
) -> Result<CpResult, CpError> {
    params.validate()?;
    let start = Instant::now();
    let la = run_la(inst, backend, la_params)?;
    let chi_cp = la.chi_cp.clone();
    let mut omega_r = la.omega_r.clone();
    let mut omega_f = IncumbentSet::new();
    let mut incumbent_times = Vec::new();
    let mut searched: HashSet<Vec<u8>> = HashSet::new();
    let mut trace = Vec::new();
    let mut termination = Termination::IterationLimit;

    let with_time = |opts: &SolveOptions| -> SolveOptions {
        let left = (params.time_limit - start.elapsed().as_secs_f64()).max(1.0);
        opts.clone().with_time_limit(opts.time_limit.min(left))
    };
    let add_incumbent = |omega_f: &mut IncumbentSet,
                             omega_r: &mut CutSet,
                             point: DecisionVector,
                             times: &mut Vec<f64>|
     -> Result<bool, CpError> {
        let g = eval_g(inst, &point)?;
        match omega_f.push(inst, point.clone()) {
            Ok(v) => {
                times.push(start.elapsed().as_secs_f64());
                log::info!("incumbent {v:.4}");
                if g.abs() <= params.eps_g {
                    omega_r.push_promoted(inst, point, params.eps_g)?;
                }
                Ok(true)
            }
            Err(e) => {
                log::warn!("candidate incumbent rejected: {e}");
                Ok(false)
            }
        }
    };
    let cut_tol = |g_ext: f64| la_params.boundary_tol * g_ext.abs().max(1.0);

    for k in 0..params.max_milp_iters {
        if start.elapsed().as_secs_f64() >= params.time_limit {
            termination = Termination::TimeLimit;
            break;
        }
        let mu = params.mu(k);
        let best = omega_f.best_value();
        let milp = with_time(&params.milp_options);
        let (chi_icp, r_hat) = match integer_ellipsoid_center(inst, &omega_r, best, mu, params.r_cap, backend, &milp) {
            Err(CpError::CenterInfeasible) if best.is_some() => {
                log::info!("CP k={k}: no point left under the objective cut");
                trace.push(CpTraceRow {
                    k,
                    mu,
                    r_hat: 0.0,
                    g_icp: f64::NAN,
                    h: None,
                    action: CpAction::Stop,
                    incumbent_obj: best,
                    cum_time_s: start.elapsed().as_secs_f64(),
                    obj_icp: f64::NAN,
                });
                termination = Termination::OptimalByR;
                break;
            }
            other => other?,
        };
        let g_icp = eval_g(inst, &chi_icp)?;
        let obj_icp = eval_objective(inst, &chi_icp)?;
        let u = u_pattern(&chi_icp);
        let repeated = searched.contains(&u);
        let mut h = None;
        log::info!("CP k={k} mu={mu:.6} r={r_hat:.3e} g={g_icp:.3e} obj={obj_icp:.4} repeated={repeated}");

        let action;
        let mut stop = false;
        if g_icp < params.eps_g {
            if r_hat < params.eps_r {
                action = CpAction::Stop;
                stop = true;
                termination = Termination::OptimalByR;
                if g_icp <= 0.0 && best.map_or(true, |b| obj_icp < b) {
                    add_incumbent(&mut omega_f, &mut omega_r, chi_icp.clone(), &mut incumbent_times)?;
                }
            } else {
                action = CpAction::FeasibleSearch;
                if !repeated {
                    searched.insert(u.clone());
                    if let Some(x) = fixed_integer_search(inst, &u, backend, &with_time(&params.search_options))? {
                        add_incumbent(&mut omega_f, &mut omega_r, x, &mut incumbent_times)?;
                    } else if g_icp > 0.0 {
                        let (hat, _) = line_search(inst, &chi_cp, &chi_icp, la_params.boundary_tol)?;
                        omega_r.push_boundary(inst, hat, cut_tol(g_icp))?;
                    }
                } else if g_icp > 0.0 {
                    let (hat, _) = line_search(inst, &chi_cp, &chi_icp, la_params.boundary_tol)?;
                    omega_r.push_boundary(inst, hat, cut_tol(g_icp))?;
                } else if !(best.map_or(true, |b| obj_icp < b)
                    && add_incumbent(&mut omega_f, &mut omega_r, chi_icp.clone(), &mut incumbent_times)?)
                {
                    stop = true;
                    termination = Termination::Stalled;
                }
            }
        } else if repeated && r_hat < params.eps_r {
            action = CpAction::Stop;
            stop = true;
            termination = Termination::OptimalByR;
        } else {
            let adj = if repeated {
                None
            } else {
                Some(feasibility_adjustment(inst, &u, backend, &with_time(&params.adjust_options))?)
            };
            h = adj.as_ref().map(|a| a.h);
            match adj {
                Some(a) if a.h < params.eps_h => {
                    action = CpAction::AdjustSearch;
                    searched.insert(u.clone());
                    match fixed_integer_search(inst, &u, backend, &with_time(&params.search_options))? {
                        Some(x) => {
                            add_incumbent(&mut omega_f, &mut omega_r, x, &mut incumbent_times)?;
                        }
                        None => {
                            let (hat, _) = line_search(inst, &chi_cp, &chi_icp, la_params.boundary_tol)?;
                            omega_r.push_boundary(inst, hat, cut_tol(g_icp))?;
                        }
                    }
                }
                other => {
                    action = match other {
                        Some(a) if a.h.is_infinite() => CpAction::InfeasibleAdjust,
                        _ => CpAction::AdjustLinesearch,
                    };
                    let (hat, _) = line_search(inst, &chi_cp, &chi_icp, la_params.boundary_tol)?;
                    omega_r.push_boundary(inst, hat, cut_tol(g_icp))?;
                }
            }
        }
        trace.push(CpTraceRow {
            k,
            mu,
            r_hat,
            g_icp,
            h,
            action,
            incumbent_obj: omega_f.best_value(),
            cum_time_s: start.elapsed().as_secs_f64(),
            obj_icp,
        });
        if stop {
            break;
        }
    }

    Ok(CpResult {
        best: omega_f.best().cloned(),
        omega_f,
        omega_r,
        la,
        trace,
        termination,
        elapsed_s: start.elapsed().as_secs_f64(),
        incumbent_times,
    })
}

pub const TRACE_COLUMNS: [&str; 9] = [
    "k",
    "mu",
    "r_hat",
    "g_icp",
    "h",
    "action",
    "incumbent_obj",
    "cum_time_s",
    "obj_icp",
];

/// Trace as CSV; missing values are empty cells and an infinite `h` is `inf`.
pub fn trace_to_csv(trace: &[CpTraceRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS).expect("in-memory csv");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for r in trace {
        w.write_record([
            r.k.to_string(),
            format!("{:?}", r.mu),
            format!("{:?}", r.r_hat),
            format!("{:?}", r.g_icp),
            opt(r.h),
            r.action.to_string(),
            opt(r.incumbent_obj),
            format!("{:?}", r.cum_time_s),
            format!("{:?}", r.obj_icp),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
}

/// Trace as a JSON array; an infinite `h` is written as the string `"inf"`.
pub fn trace_to_json(trace: &[CpTraceRow]) -> serde_json::Value {
    let num = |v: f64| {
        if v.is_finite() {
            serde_json::json!(v)
        } else {
            serde_json::json!(if v > 0.0 { "inf" } else { "-inf" })
        }
    };
    trace
        .iter()
        .map(|r| {
            serde_json::json!({
                "k": r.k,
                "mu": r.mu,
                "r_hat": r.r_hat,
                "g_icp": r.g_icp,
                "h": r.h.map(num),
                "action": r.action.as_str(),
                "incumbent_obj": r.incumbent_obj,
                "cum_time_s": r.cum_time_s,
                "obj_icp": r.obj_icp,
            })
        })
        .collect()
}
