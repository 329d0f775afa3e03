//! Outer-approximation cuts for the emission constraint and the center-cut
//! rows used by the integer ellipsoid center problem.

use crate::model::{DecisionVector, Instance};

use super::base::objective_coefficients;
use super::problem::{LinearConstraint, Sense};

/// Tangent of `g` at `p_hat`: `sum (2 c p_hat p - c p_hat^2) - eta <= 0`.
pub fn tangent_cut(inst: &Instance, point: &DecisionVector) -> LinearConstraint {
    tangent_at(inst, &point.p, "tangent-cut".to_string())
}

/// Perspective cut at `p_hat`: `sum (2 c p_hat p - c p_hat^2 u) - eta <= 0`.
pub fn perspective_cut(inst: &Instance, point: &DecisionVector) -> LinearConstraint {
    perspective_at(inst, &point.p, "psp-cut".to_string())
}

pub(crate) fn tangent_at(inst: &Instance, p_hat: &[f64], tag: String) -> LinearConstraint {
    let l = inst.layout();
    let mut row = LinearConstraint::new(tag, Sense::Le, 0.0);
    for (i, d) in inst.derived.iter().enumerate() {
        for t in 0..inst.horizon() {
            let v = p_hat[l.cell(i, t)];
            row.add(l.p(i, t), 2.0 * d.c_n * v);
            row.rhs += d.c_n * v * v;
        }
    }
    row.add(l.eta(), -1.0);
    row
}

pub(crate) fn perspective_at(inst: &Instance, p_hat: &[f64], tag: String) -> LinearConstraint {
    let l = inst.layout();
    let mut row = LinearConstraint::new(tag, Sense::Le, 0.0);
    for (i, d) in inst.derived.iter().enumerate() {
        for t in 0..inst.horizon() {
            let v = p_hat[l.cell(i, t)];
            row.add(l.p(i, t), 2.0 * d.c_n * v);
            row.add(l.u(i, t), -d.c_n * v * v);
        }
    }
    row.add(l.eta(), -1.0);
    row
}

fn norm(row: &LinearConstraint) -> f64 {
    row.coeffs.values().map(|a| a * a).sum::<f64>().sqrt()
}

/// Perspective cut inflated by an inscribed-ball term on column `r`:
/// `g_hat(chi) + mu * ||grad g_hat||_2 * r <= 0`.
///
/// A zero gradient degenerates to the plain perspective cut.
pub fn inflated_nl_cut(inst: &Instance, point: &DecisionVector, mu: f64, r_col: usize) -> LinearConstraint {
    let mut row = perspective_at(inst, &point.p, "center-nl-cut".to_string());
    let grad = norm(&row);
    if grad > 0.0 {
        row.add(r_col, mu * grad);
    }
    row
}

/// Objective level cut `l(chi) + (1/mu) * ||grad l||_2 * r <= best`.
pub fn objective_cut(inst: &Instance, best: f64, mu: f64, r_col: usize) -> LinearConstraint {
    let coeffs = objective_coefficients(inst);
    let grad = coeffs.values().map(|c| c * c).sum::<f64>().sqrt();
    let mut row = LinearConstraint::new("center-obj-cut", Sense::Le, best);
    for (j, c) in coeffs {
        row.add(j, c);
    }
    if grad > 0.0 {
        row.add(r_col, grad / mu);
    }
    row
}

/// Breakpoints `k / (K - 1)` for `k = 0..K`.
pub fn piecewise_breakpoints(k: usize) -> Vec<f64> {
    assert!(k >= 2, "piecewise approximation needs at least two breakpoints");
    (0..k).map(|j| j as f64 / (k - 1) as f64).collect()
}

/// `K` cuts on `g` at evenly spaced output levels shared by every unit-period.
pub fn build_piecewise_emission(inst: &Instance, k: usize, perspective: bool) -> Vec<LinearConstraint> {
    let nt = inst.num_units() * inst.horizon();
    piecewise_breakpoints(k)
        .into_iter()
        .enumerate()
        .map(|(j, b)| {
            let p_hat = vec![b; nt];
            if perspective {
                perspective_at(inst, &p_hat, format!("pc-pw-cut k={}", j + 1))
            } else {
                tangent_at(inst, &p_hat, format!("s-pw-cut k={}", j + 1))
            }
        })
        .collect()
}
