//! Brute-force reference solver for tiny instances.
//!
//! Every commitment pattern that survives the min up/down, initial status and
//! reserve rules is dispatched with a Kelley loop: an LP over the fixed-commitment
//! polytope, refined by emission tangents at each LP optimum. The LP solver is
//! `microlp`, so nothing here goes through the external solver backend.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;

use crate::formulation::{build_linear_base, fix_commitment, tangent_cut, ModelProblem, Sense};
use crate::model::{quadratic_emission, Commitment, DecisionVector, Instance, ModelError};

/// Largest `N*T + 2` the oracle accepts.
pub const ORACLE_BIT_CAP: usize = 26;
pub const DEFAULT_DISPATCH_TOL: f64 = 1e-7;
const MAX_REFINEMENTS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub optimum: f64,
    pub argmin: DecisionVector,
    /// `2^(N*T + 2)`: every assignment of `u, u_b, u_s`.
    pub enumerated: u64,
    /// Assignments left after the commitment rules and the trade exclusion.
    pub candidates: u64,
    /// Candidates with a feasible dispatch.
    pub feasible_patterns: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dispatch {
    pub objective: f64,
    pub point: DecisionVector,
    /// LP objective after each refinement, starting with the uncut LP.
    pub history: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("{bits} binary bits exceed the oracle cap of {ORACLE_BIT_CAP}")]
    BitCap { bits: usize },
    #[error("no feasible commitment among {enumerated} assignments")]
    Infeasible { enumerated: u64 },
    #[error("LP failure: {0}")]
    Lp(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Startups implied by `u` with minimal values, `s_t = max(0, u_t - u_{t-1})`.
fn minimal_startups(u: &[u8], u0: u8) -> Vec<u8> {
    let mut prev = u0;
    u.iter()
        .map(|&x| {
            let s = (x > prev) as u8;
            prev = x;
            s
        })
        .collect()
}

/// Direct check of one unit's pattern against the initial status, min up
/// and min down rules.
pub fn unit_pattern_ok(inst: &Instance, i: usize, u: &[u8]) -> bool {
    let unit = &inst.units[i];
    let d = &inst.derived[i];
    let horizon = inst.horizon();
    let s = minimal_startups(u, unit.u0);
    let pinned = (d.init_up + d.init_down).min(horizon);
    if u[..pinned].iter().any(|&x| x != unit.u0) {
        return false;
    }
    for t1 in 1..=horizon {
        if t1 > d.init_up {
            let lo = t1.saturating_sub(unit.t_on as usize) + 1;
            let started: u32 = (lo..=t1).map(|w| s[w - 1] as u32).sum();
            if started > u[t1 - 1] as u32 {
                return false;
            }
        }
        if t1 > d.init_down {
            let base = t1.saturating_sub(unit.t_off as usize);
            let started: u32 = (base + 1..=t1).map(|w| s[w - 1] as u32).sum();
            let before = if base == 0 { unit.u0 } else { u[base - 1] };
            if started + before as u32 > 1 {
                return false;
            }
        }
    }
    true
}

fn unit_patterns(inst: &Instance, i: usize) -> Vec<Vec<u8>> {
    let horizon = inst.horizon();
    (0u32..1 << horizon)
        .map(|bits| (0..horizon).map(|t| ((bits >> t) & 1) as u8).collect::<Vec<u8>>())
        .filter(|u| unit_pattern_ok(inst, i, u))
        .collect()
}

fn reserve_ok(inst: &Instance, u: &[u8]) -> bool {
    let l = inst.layout();
    (0..inst.horizon()).all(|t| {
        let cap: f64 = (0..inst.num_units())
            .map(|i| inst.units[i].p_max * u[l.cell(i, t)] as f64)
            .sum();
        cap >= inst.system.demand[t] + inst.system.reserve[t]
    })
}

/// Every unit-major commitment that passes the per-unit rules and reserve.
pub fn admissible_commitments(inst: &Instance) -> Vec<Vec<u8>> {
    let per_unit: Vec<Vec<Vec<u8>>> = (0..inst.num_units()).map(|i| unit_patterns(inst, i)).collect();
    let mut out: Vec<Vec<u8>> = vec![Vec::new()];
    for pats in &per_unit {
        out = out
            .iter()
            .flat_map(|head| {
                pats.iter().map(move |p| {
                    let mut v = head.clone();
                    v.extend_from_slice(p);
                    v
                })
            })
            .collect();
    }
    out.retain(|u| reserve_ok(inst, u));
    out
}

struct Lp {
    problem: Problem,
    cols: Vec<microlp::Variable>,
}

fn to_microlp(prob: &ModelProblem) -> Lp {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let cols: Vec<_> = prob
        .vars
        .iter()
        .enumerate()
        .map(|(j, v)| problem.add_var(prob.objective.get(&j).copied().unwrap_or(0.0), (v.lb, v.ub)))
        .collect();
    for row in &prob.rows {
        let terms: Vec<_> = row.coeffs.iter().map(|(j, a)| (cols[*j], *a)).collect();
        problem.add_constraint(terms.as_slice(), op(row.sense), row.rhs);
    }
    Lp { problem, cols }
}

fn op(sense: Sense) -> ComparisonOp {
    match sense {
        Sense::Le => ComparisonOp::Le,
        Sense::Ge => ComparisonOp::Ge,
        Sense::Eq => ComparisonOp::Eq,
    }
}

/// Minimizes the objective with the commitment fixed, refining tangents of
/// the emission quadratic until successive LP values differ by less than
/// `tol` (relative) and the LP point violates the quadratic by at most `tol`
/// relative to its size. Returns `None` when the fixed polytope is empty.
pub fn dispatch_refined(inst: &Instance, c: &Commitment, tol: f64) -> Result<Option<Dispatch>, OracleError> {
    let layout = inst.layout();
    let mut prob = build_linear_base(inst);
    fix_commitment(&mut prob, layout, c);
    let lp = to_microlp(&prob);
    let mut outcome = match lp.problem.solve() {
        Ok(o) => o,
        Err(microlp::Error::Infeasible) => return Ok(None),
        Err(e) => return Err(OracleError::Lp(e.to_string())),
    };
    let mut history = Vec::new();
    loop {
        let sol = match outcome.into_solution() {
            Ok(s) => s,
            Err(e) => return Err(OracleError::Lp(format!("interrupted: {e:?}"))),
        };
        let x: Vec<f64> = lp.cols.iter().map(|v| sol.var_value(*v)).collect();
        let obj = prob.objective_value(&x);
        let point = DecisionVector::from_flat(layout, &x)?;
        let q = quadratic_emission(inst, &point.p);
        let excess = q - point.eta;
        let settled = history
            .last()
            .map_or(false, |prev: &f64| (obj - prev).abs() <= tol * obj.abs().max(1.0));
        history.push(obj);
        let feasible = excess <= tol * q.max(point.eta).max(1.0);
        if excess <= 0.0 || (settled && feasible) || history.len() > MAX_REFINEMENTS {
            return Ok(Some(Dispatch {
                objective: obj,
                point,
                converged: history.len() <= MAX_REFINEMENTS,
                history,
            }));
        }
        let cut = tangent_cut(inst, &point);
        let terms: Vec<_> = cut.coeffs.iter().map(|(j, a)| (lp.cols[*j], *a)).collect();
        let warm = sol.add_constraint(terms.as_slice(), ComparisonOp::Le, cut.rhs);
        prob.push_row(cut);
        outcome = match warm {
            Ok(o) => o,
            Err(microlp::Error::Infeasible) => return Ok(None),
            // retry cold with every cut so far
            Err(microlp::Error::InternalError(_)) => match to_microlp(&prob).problem.solve() {
                Ok(o) => o,
                Err(microlp::Error::Infeasible) => return Ok(None),
                Err(e) => return Err(OracleError::Lp(e.to_string())),
            },
            Err(e) => return Err(OracleError::Lp(e.to_string())),
        };
    }
}

/// Global optimum over all commitments by enumeration.
///
/// Only minimal startups are tried, and `(u_b, u_s) = (0, 0)` is skipped
/// because its feasible set lies inside both single-trade cases.
pub fn enumerate_optimal(inst: &Instance, dispatch_tol: f64) -> Result<OracleResult, OracleError> {
    let (n, horizon) = (inst.num_units(), inst.horizon());
    let bits = n * horizon + 2;
    if bits > ORACLE_BIT_CAP {
        return Err(OracleError::BitCap { bits });
    }
    let enumerated = 1u64 << bits;
    let u0: Vec<u8> = inst.units.iter().map(|x| x.u0).collect();
    let jobs: Vec<Commitment> = admissible_commitments(inst)
        .into_iter()
        .flat_map(|u| {
            let u0 = &u0;
            [(1, 0), (0, 1)]
                .into_iter()
                .map(move |(b, s)| Commitment::with_minimal_startups(n, horizon, u.clone(), u0, b, s))
        })
        .collect();
    let results: Vec<Option<Dispatch>> = jobs
        .par_iter()
        .map(|c| dispatch_refined(inst, c, dispatch_tol))
        .collect::<Result<_, _>>()?;
    let feasible_patterns = results.iter().filter(|r| r.is_some()).count() as u64;
    let best = results
        .into_iter()
        .enumerate()
        .filter_map(|(k, r)| r.map(|d| (k, d)))
        .min_by(|(ka, a), (kb, b)| a.objective.total_cmp(&b.objective).then(ka.cmp(kb)));
    match best {
        Some((_, d)) => Ok(OracleResult {
            optimum: d.objective,
            argmin: d.point,
            enumerated,
            candidates: jobs.len() as u64,
            feasible_patterns,
        }),
        None => Err(OracleError::Infeasible { enumerated }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::{cet, unit};
    use crate::model::SystemParams;

    fn fleet(units: Vec<crate::model::UnitParams>, demand: Vec<f64>) -> Instance {
        let horizon = demand.len();
        Instance::derive(
            units,
            SystemParams {
                horizon,
                reserve: vec![0.0; horizon],
                demand,
            },
            cet(),
            4,
        )
        .unwrap()
    }

    #[test]
    fn minimal_startups_follow_rises() {
        assert_eq!(minimal_startups(&[1, 0, 1, 1], 0), vec![1, 0, 1, 0]);
        assert_eq!(minimal_startups(&[1, 1], 1), vec![0, 0]);
    }

    #[test]
    fn forced_on_pattern_is_unique() {
        let mut u = unit();
        u.t_on = 1;
        u.t_off = 1;
        u.t0 = 1;
        let inst = fleet(vec![u], vec![300.0, 300.0]);
        let pats = admissible_commitments(&inst);
        assert_eq!(pats, vec![vec![1, 1]]);
    }

    #[test]
    fn all_off_zero_demand_costs_nothing() {
        let mut u = unit();
        u.u0 = 0;
        u.t0 = -20;
        let inst = fleet(vec![u], vec![0.0; 3]);
        let c = Commitment::with_minimal_startups(1, 3, vec![0; 3], &[0], 0, 0);
        let d = dispatch_refined(&inst, &c, DEFAULT_DISPATCH_TOL).unwrap().unwrap();
        assert!(d.objective.abs() < 1e-9);
    }

    #[test]
    fn refinement_values_never_decrease() {
        let mut u = unit();
        u.c_e = 0.01;
        let mut inst = fleet(vec![u.clone(), u], vec![500.0, 700.0, 900.0]);
        inst.cet.e0 = 9600.0;
        let c = Commitment::with_minimal_startups(2, 3, vec![1; 6], &[1, 1], 1, 0);
        let d = dispatch_refined(&inst, &c, DEFAULT_DISPATCH_TOL).unwrap().unwrap();
        assert!(d.converged);
        assert!(d.history.len() > 1);
        for w in d.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-6 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn bit_cap_is_enforced() {
        let inst = fleet(vec![unit(); 4], vec![100.0; 7]);
        assert!(matches!(
            enumerate_optimal(&inst, DEFAULT_DISPATCH_TOL),
            Err(OracleError::BitCap { bits: 30 })
        ));
    }
}
