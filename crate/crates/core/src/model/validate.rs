//! Direct feasibility audit of a point against every constraint family.
//!
//! This evaluates the constraints from the instance data without going
//! through the model builder, so it doubles as a cross-check on the rows the
//! builder emits.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::eval::quadratic_emission;
use super::{DecisionVector, Instance, ModelError};

/// Constraint families of the unit-commitment model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    CostCut,
    StartupCost,
    GenLimit,
    PowerBalance,
    Reserve,
    RampUp,
    RampDown,
    MinUp,
    MinDown,
    InitialStatus,
    State,
    EmissionBudget,
    TradeBuy,
    TradeSell,
    TradeExclusive,
    EmissionLinear,
    EmissionQuadratic,
    Bounds,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::CostCut => "cost-cut",
            Family::StartupCost => "startup-cost",
            Family::GenLimit => "gen-limit",
            Family::PowerBalance => "power-balance",
            Family::Reserve => "reserve",
            Family::RampUp => "ramp-up",
            Family::RampDown => "ramp-down",
            Family::MinUp => "min-up",
            Family::MinDown => "min-down",
            Family::InitialStatus => "initial-status",
            Family::State => "state",
            Family::EmissionBudget => "emission-budget",
            Family::TradeBuy => "trade-buy",
            Family::TradeSell => "trade-sell",
            Family::TradeExclusive => "trade-exclusive",
            Family::EmissionLinear => "emission-linear",
            Family::EmissionQuadratic => "emission-quadratic",
            Family::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Worst violation seen within one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Raw violation in the row's own units (MW, $, tCO2, ...).
    pub absolute: f64,
    /// Violation divided by `max(1, |rhs|, sum |terms|)`.
    pub relative: f64,
    pub location: String,
}

/// Families whose relative violation exceeds the requested tolerance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub violations: BTreeMap<Family, Violation>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn get(&self, family: Family) -> Option<&Violation> {
        self.violations.get(&family)
    }

    pub fn max_relative(&self) -> f64 {
        self.violations.values().map(|v| v.relative).fold(0.0, f64::max)
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_clean() {
            return f.write_str("feasible");
        }
        for (fam, v) in &self.violations {
            writeln!(f, "{fam}: {:.3e} (rel {:.3e}) at {}", v.absolute, v.relative, v.location)?;
        }
        Ok(())
    }
}

struct Audit {
    tol: f64,
    report: ViolationReport,
}

impl Audit {
    /// `excess` is `lhs - rhs` of a `<=` row; `scale` the magnitude of its terms.
    fn le(&mut self, family: Family, excess: f64, scale: f64, location: impl FnOnce() -> String) {
        if excess <= 0.0 {
            return;
        }
        let relative = if excess.is_finite() {
            excess / scale.max(1.0)
        } else {
            f64::INFINITY
        };
        if relative <= self.tol {
            return;
        }
        let entry = self.report.violations.entry(family).or_insert(Violation {
            absolute: 0.0,
            relative: 0.0,
            location: String::new(),
        });
        if relative > entry.relative {
            *entry = Violation {
                absolute: excess,
                relative,
                location: location(),
            };
        }
    }

    fn eq(&mut self, family: Family, diff: f64, scale: f64, location: impl FnOnce() -> String) {
        self.le(family, diff.abs(), scale, location);
    }
}

fn abs_sum(terms: &[f64]) -> f64 {
    terms.iter().map(|v| v.abs()).sum()
}

/// Audits `x` against every family; rows count as satisfied when the violation
/// relative to the row magnitude is at most `tol`.
pub fn validate_solution(inst: &Instance, x: &DecisionVector, tol: f64) -> Result<ViolationReport, ModelError> {
    x.check_shape(inst.num_units(), inst.horizon())?;
    let mut a = Audit {
        tol,
        report: ViolationReport::default(),
    };
    let horizon = inst.horizon();
    let l_seg = inst.l_seg as f64;

    for (i, (unit, d)) in inst.units.iter().zip(&inst.derived).enumerate() {
        let k = |t: usize| x.idx(i, t);
        let u_at = |t1: usize| -> f64 {
            // 1-based period index, period 0 is the initial state
            if t1 == 0 {
                unit.u0 as f64
            } else {
                x.u[k(t1 - 1)]
            }
        };
        for t in 0..horizon {
            let (u, s, p, z, sc) = (x.u[k(t)], x.s[k(t)], x.p[k(t)], x.z[k(t)], x.sc[k(t)]);
            let at = || format!("unit {i} t={}", t + 1);

            for v in [u, s] {
                a.le(Family::Bounds, -v, 1.0, at);
                a.le(Family::Bounds, v - 1.0, 1.0, at);
            }

            for l in 0..=inst.l_seg {
                let frac = l as f64 / l_seg;
                let terms = [
                    (2.0 * d.gamma_n * frac + d.beta_n) * p,
                    (d.alpha_n - d.gamma_n * frac * frac) * u,
                    z,
                ];
                a.le(Family::CostCut, terms[0] + terms[1] - z, abs_sum(&terms), || {
                    format!("unit {i} t={} l={l}", t + 1)
                });
            }

            let t1 = t + 1;
            let kgap = unit.c_cold - unit.c_hot;
            let start = (t1 as i64 - unit.t_off as i64 - unit.t_cold as i64 - 1).max(1) as usize;
            let hist: f64 = (start..t1).map(|tau| x.u[k(tau - 1)]).sum();
            let f = d.f_init[t] as f64;
            let rhs = kgap * (s - hist - f);
            a.le(Family::StartupCost, -sc, sc.abs(), at);
            a.le(Family::StartupCost, rhs - sc, sc.abs() + kgap * (1.0 + hist + f), at);

            a.le(Family::GenLimit, -p, 1.0, at);
            a.le(Family::GenLimit, p - u, 1.0, at);

            if t >= 1 {
                let p_prev = x.p[k(t - 1)];
                let u_prev = x.u[k(t - 1)];
                let up = u * d.p_up_n + s * (d.p_start_n - d.p_up_n);
                a.le(Family::RampUp, p - p_prev - up, abs_sum(&[p, p_prev, up]), at);
                let down = u_prev * d.p_shut_n + (s - u) * (d.p_shut_n - d.p_down_n);
                a.le(Family::RampDown, p_prev - p - down, abs_sum(&[p, p_prev, down]), at);
            }

            if t1 > d.init_up {
                let lo = t1.saturating_sub(unit.t_on as usize) + 1;
                let sum: f64 = (lo..=t1).map(|w| x.s[k(w - 1)]).sum();
                a.le(Family::MinUp, sum - u, sum + u, at);
            }
            if t1 > d.init_down {
                let base = t1.saturating_sub(unit.t_off as usize);
                let sum: f64 = (base + 1..=t1).map(|w| x.s[k(w - 1)]).sum();
                let rhs = 1.0 - u_at(base);
                a.le(Family::MinDown, sum - rhs, sum + 1.0, at);
            }
            if t1 <= (d.init_up + d.init_down).min(horizon) {
                a.eq(Family::InitialStatus, u - unit.u0 as f64, 1.0, at);
            }
            a.le(Family::State, u - u_at(t) - s, 1.0, at);
        }
    }

    for t in 0..horizon {
        let at = || format!("t={}", t + 1);
        let mut gen = 0.0;
        let mut gen_mag = 0.0;
        let mut cap = 0.0;
        for (i, unit) in inst.units.iter().enumerate() {
            let k = x.idx(i, t);
            let mw = inst.power_mw(i, x.u[k], x.p[k]);
            gen += mw;
            gen_mag += mw.abs();
            cap += x.u[k] * unit.p_max;
        }
        let demand = inst.system.demand[t];
        a.eq(Family::PowerBalance, gen - demand, demand.max(gen_mag), at);
        let need = demand + inst.system.reserve[t];
        a.le(Family::Reserve, need - cap, need.max(cap), at);
    }

    let cet = &inst.cet;
    let mut linear = 0.0;
    let mut linear_mag = 0.0;
    for (i, d) in inst.derived.iter().enumerate() {
        for t in 0..horizon {
            let k = x.idx(i, t);
            let term = d.a_n * x.u[k] + d.b_n * x.p[k];
            linear += term;
            linear_mag += term.abs();
        }
    }
    let quad = quadratic_emission(inst, &x.p);
    let allowance = cet.e0 + x.de_b - x.de_s;
    let budget_scale = linear_mag + quad + cet.e0 + x.de_b.abs() + x.de_s.abs();
    a.le(Family::EmissionBudget, linear + quad - allowance, budget_scale, || "system".into());
    a.le(
        Family::EmissionLinear,
        linear + x.eta - allowance,
        budget_scale + x.eta.abs(),
        || "system".into(),
    );
    a.le(Family::EmissionQuadratic, quad - x.eta, quad + x.eta.abs(), || "system".into());
    a.le(Family::Bounds, -x.eta, 1.0, || "eta".into());

    a.le(Family::TradeBuy, -x.de_b, 1.0, || "de_b".into());
    a.le(Family::TradeBuy, x.de_b - x.u_b * cet.de_b_max, x.de_b.abs() + cet.de_b_max, || "de_b".into());
    a.le(Family::TradeSell, -x.de_s, 1.0, || "de_s".into());
    a.le(Family::TradeSell, x.de_s - x.u_s * cet.de_s_max, x.de_s.abs() + cet.de_s_max, || "de_s".into());
    a.le(Family::TradeExclusive, x.u_b + x.u_s - 1.0, 1.0, || "system".into());
    for v in [x.u_b, x.u_s] {
        a.le(Family::Bounds, -v, 1.0, || "trade flags".into());
        a.le(Family::Bounds, v - 1.0, 1.0, || "trade flags".into());
    }
    Ok(a.report)
}
