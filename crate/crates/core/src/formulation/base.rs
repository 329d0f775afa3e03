use std::collections::BTreeMap;

use crate::model::{Commitment, Family, Instance, VarLayout};

use super::problem::{LinearConstraint, ModelProblem, ObjSense, QuadConstraint, Sense};

const INF: f64 = f64::INFINITY;

fn tag_it(family: Family, i: usize, t: usize) -> String {
    format!("{} i={} t={}", family.tag(), i + 1, t + 1)
}

/// Declares every decision-vector column in canonical order.
fn declare_columns(inst: &Instance, p: &mut ModelProblem) {
    let (n, horizon) = (inst.num_units(), inst.horizon());
    let cells = || (0..n).flat_map(move |i| (0..horizon).map(move |t| (i, t)));
    for (i, t) in cells() {
        p.add_var(format!("u_{}_{}", i + 1, t + 1), 0.0, 1.0, true);
    }
    for (i, t) in cells() {
        p.add_var(format!("s_{}_{}", i + 1, t + 1), 0.0, 1.0, true);
    }
    p.add_var("u_b", 0.0, 1.0, true);
    p.add_var("u_s", 0.0, 1.0, true);
    for (i, t) in cells() {
        p.add_var(format!("p_{}_{}", i + 1, t + 1), 0.0, 1.0, false);
    }
    for (i, t) in cells() {
        p.add_var(format!("z_{}_{}", i + 1, t + 1), -INF, INF, false);
    }
    for (i, t) in cells() {
        p.add_var(format!("sc_{}_{}", i + 1, t + 1), 0.0, INF, false);
    }
    p.add_var("de_b", 0.0, inst.cet.de_b_max, false);
    p.add_var("de_s", 0.0, inst.cet.de_s_max, false);
    p.add_var("eta", 0.0, INF, false);
    debug_assert_eq!(p.vars.len(), inst.layout().len());
}

/// Coefficients of the linear objective over the decision-vector columns.
pub fn objective_coefficients(inst: &Instance) -> BTreeMap<usize, f64> {
    let l = inst.layout();
    let mut obj = BTreeMap::new();
    for (i, unit) in inst.units.iter().enumerate() {
        for t in 0..inst.horizon() {
            obj.insert(l.z(i, t), 1.0);
            if unit.c_hot != 0.0 {
                obj.insert(l.s(i, t), unit.c_hot);
            }
            obj.insert(l.sc(i, t), 1.0);
        }
    }
    if inst.cet.pi_b != 0.0 {
        obj.insert(l.de_b(), inst.cet.pi_b);
    }
    if inst.cet.pi_s != 0.0 {
        obj.insert(l.de_s(), -inst.cet.pi_s);
    }
    obj
}

/// Euclidean norm of the objective gradient.
pub fn objective_gradient_norm(inst: &Instance) -> f64 {
    objective_coefficients(inst).values().map(|c| c * c).sum::<f64>().sqrt()
}

/// The polytope of every linear constraint, minimizing the linear objective.
///
/// Integer flags are set on `u, s, u_b, u_s`; callers relax as needed.
pub fn build_linear_base(inst: &Instance) -> ModelProblem {
    let mut prob = ModelProblem::new("ucet", ObjSense::Minimize);
    declare_columns(inst, &mut prob);
    let l = inst.layout();
    let horizon = inst.horizon();

    for (i, (unit, d)) in inst.units.iter().zip(&inst.derived).enumerate() {
        for t in 0..horizon {
            for seg in 0..=inst.l_seg {
                let frac = seg as f64 / inst.l_seg as f64;
                let row = LinearConstraint::new(
                    format!("{} i={} t={} l={seg}", Family::CostCut.tag(), i + 1, t + 1),
                    Sense::Le,
                    0.0,
                )
                .with(l.p(i, t), 2.0 * d.gamma_n * frac + d.beta_n)
                .with(l.u(i, t), d.alpha_n - d.gamma_n * frac * frac)
                .with(l.z(i, t), -1.0);
                prob.push_row(row);
            }

            let kgap = unit.c_cold - unit.c_hot;
            prob.push_row(
                LinearConstraint::new(format!("startup-floor i={} t={}", i + 1, t + 1), Sense::Ge, 0.0)
                    .with(l.sc(i, t), 1.0),
            );
            let t1 = t + 1;
            let start = (t1 as i64 - unit.t_off as i64 - unit.t_cold as i64 - 1).max(1) as usize;
            let mut row = LinearConstraint::new(
                tag_it(Family::StartupCost, i, t),
                Sense::Ge,
                -kgap * d.f_init[t] as f64,
            )
            .with(l.sc(i, t), 1.0)
            .with(l.s(i, t), -kgap);
            for tau in start..t1 {
                row.add(l.u(i, tau - 1), kgap);
            }
            prob.push_row(row);

            prob.push_row(
                LinearConstraint::new(tag_it(Family::GenLimit, i, t), Sense::Le, 0.0)
                    .with(l.p(i, t), 1.0)
                    .with(l.u(i, t), -1.0),
            );

            if t >= 1 {
                prob.push_row(
                    LinearConstraint::new(tag_it(Family::RampUp, i, t), Sense::Le, 0.0)
                        .with(l.p(i, t), 1.0)
                        .with(l.p(i, t - 1), -1.0)
                        .with(l.u(i, t), -d.p_up_n)
                        .with(l.s(i, t), -(d.p_start_n - d.p_up_n)),
                );
                let shut_gap = d.p_shut_n - d.p_down_n;
                prob.push_row(
                    LinearConstraint::new(tag_it(Family::RampDown, i, t), Sense::Le, 0.0)
                        .with(l.p(i, t - 1), 1.0)
                        .with(l.p(i, t), -1.0)
                        .with(l.u(i, t - 1), -d.p_shut_n)
                        .with(l.s(i, t), -shut_gap)
                        .with(l.u(i, t), shut_gap),
                );
            }

            if t1 > d.init_up {
                let lo = t1.saturating_sub(unit.t_on as usize) + 1;
                let mut row = LinearConstraint::new(tag_it(Family::MinUp, i, t), Sense::Le, 0.0);
                for w in lo..=t1 {
                    row.add(l.s(i, w - 1), 1.0);
                }
                row.add(l.u(i, t), -1.0);
                prob.push_row(row);
            }
            if t1 > d.init_down {
                let base = t1.saturating_sub(unit.t_off as usize);
                let mut rhs = 1.0;
                let mut row = LinearConstraint::new(tag_it(Family::MinDown, i, t), Sense::Le, 0.0);
                for w in base + 1..=t1 {
                    row.add(l.s(i, w - 1), 1.0);
                }
                if base == 0 {
                    rhs -= unit.u0 as f64;
                } else {
                    row.add(l.u(i, base - 1), 1.0);
                }
                row.rhs = rhs;
                prob.push_row(row);
            }
            if t1 <= (d.init_up + d.init_down).min(horizon) {
                prob.push_row(
                    LinearConstraint::new(tag_it(Family::InitialStatus, i, t), Sense::Eq, unit.u0 as f64)
                        .with(l.u(i, t), 1.0),
                );
            }

            let mut state = LinearConstraint::new(tag_it(Family::State, i, t), Sense::Le, 0.0)
                .with(l.u(i, t), 1.0)
                .with(l.s(i, t), -1.0);
            if t == 0 {
                state.rhs = unit.u0 as f64;
            } else {
                state.add(l.u(i, t - 1), -1.0);
            }
            prob.push_row(state);
        }
    }

    for t in 0..horizon {
        let mut balance = LinearConstraint::new(
            format!("{} t={}", Family::PowerBalance.tag(), t + 1),
            Sense::Eq,
            inst.system.demand[t],
        );
        let mut reserve = LinearConstraint::new(
            format!("{} t={}", Family::Reserve.tag(), t + 1),
            Sense::Ge,
            inst.system.demand[t] + inst.system.reserve[t],
        );
        for (i, (unit, d)) in inst.units.iter().zip(&inst.derived).enumerate() {
            balance.add(l.p(i, t), d.span).add(l.u(i, t), unit.p_min);
            reserve.add(l.u(i, t), unit.p_max);
        }
        prob.push_row(balance);
        prob.push_row(reserve);
    }

    let mut emission = LinearConstraint::new(Family::EmissionLinear.tag(), Sense::Le, inst.cet.e0);
    for (i, d) in inst.derived.iter().enumerate() {
        for t in 0..horizon {
            emission.add(l.u(i, t), d.a_n).add(l.p(i, t), d.b_n);
        }
    }
    emission.add(l.eta(), 1.0).add(l.de_b(), -1.0).add(l.de_s(), 1.0);
    prob.push_row(emission);

    prob.push_row(
        LinearConstraint::new(Family::TradeBuy.tag(), Sense::Le, 0.0)
            .with(l.de_b(), 1.0)
            .with(l.u_b(), -inst.cet.de_b_max),
    );
    prob.push_row(
        LinearConstraint::new(Family::TradeSell.tag(), Sense::Le, 0.0)
            .with(l.de_s(), 1.0)
            .with(l.u_s(), -inst.cet.de_s_max),
    );
    prob.push_row(
        LinearConstraint::new(Family::TradeExclusive.tag(), Sense::Le, 1.0)
            .with(l.u_b(), 1.0)
            .with(l.u_s(), 1.0),
    );
    prob.push_row(LinearConstraint::new("eta-floor", Sense::Ge, 0.0).with(l.eta(), 1.0));

    prob.objective = objective_coefficients(inst);
    for (t, short) in inst.capacity_shortfalls() {
        log::warn!(
            "period {}: demand plus reserve exceeds installed capacity by {short:.3} MW",
            t + 1
        );
    }
    prob
}

/// The emission constraint `sum c_n p^2 - eta (- extra) <= 0`.
pub fn emission_quadratic(inst: &Instance, extra: Option<usize>) -> QuadConstraint {
    let l = inst.layout();
    let mut diag = BTreeMap::new();
    for (i, d) in inst.derived.iter().enumerate() {
        if d.c_n == 0.0 {
            continue;
        }
        for t in 0..inst.horizon() {
            diag.insert(l.p(i, t), d.c_n);
        }
    }
    let mut linear = BTreeMap::from([(l.eta(), -1.0)]);
    if let Some(col) = extra {
        linear.insert(col, -1.0);
    }
    QuadConstraint {
        diag,
        linear,
        rhs: 0.0,
        tag: Family::EmissionQuadratic.tag().into(),
    }
}

/// Pins the integer block to `c` and clears integrality.
pub fn fix_commitment(prob: &mut ModelProblem, layout: VarLayout, c: &Commitment) {
    for i in 0..layout.units {
        for t in 0..layout.periods {
            let k = layout.cell(i, t);
            prob.fix(layout.u(i, t), c.u[k] as f64);
            prob.fix(layout.s(i, t), c.s[k] as f64);
        }
    }
    prob.fix(layout.u_b(), c.u_b as f64);
    prob.fix(layout.u_s(), c.u_s as f64);
    prob.relax();
}

/// Closed-form row count of [`build_linear_base`].
pub fn expected_base_rows(inst: &Instance) -> usize {
    let horizon = inst.horizon();
    let mut rows = 0;
    for d in &inst.derived {
        rows += horizon * (inst.l_seg + 1); // cost cuts
        rows += 2 * horizon; // startup cost
        rows += horizon; // generation limit
        rows += 2 * (horizon - 1); // ramps
        rows += horizon - d.init_up; // min up
        rows += horizon - d.init_down; // min down
        rows += (d.init_up + d.init_down).min(horizon); // initial status
        rows += horizon; // state
    }
    rows + 2 * horizon + 5
}
