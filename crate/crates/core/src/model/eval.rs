//! Exact evaluators for the objective and the emission constraint.

use super::{DecisionVector, Instance, ModelError};

fn shape(inst: &Instance, x: &DecisionVector) -> Result<(), ModelError> {
    x.check_shape(inst.num_units(), inst.horizon())
}

/// The linear objective: production epigraph, startup costs and trading.
pub fn eval_objective(inst: &Instance, x: &DecisionVector) -> Result<f64, ModelError> {
    shape(inst, x)?;
    let mut total = 0.0;
    for (i, unit) in inst.units.iter().enumerate() {
        for t in 0..inst.horizon() {
            let k = x.idx(i, t);
            total += x.z[k] + unit.c_hot * x.s[k] + x.sc[k];
        }
    }
    Ok(total + inst.cet.pi_b * x.de_b - inst.cet.pi_s * x.de_s)
}

/// `g(chi) = sum c_n * p^2 - eta`; the emission constraint is `g <= 0`.
pub fn eval_g(inst: &Instance, x: &DecisionVector) -> Result<f64, ModelError> {
    shape(inst, x)?;
    Ok(quadratic_emission(inst, &x.p) - x.eta)
}

/// `sum c_n * p^2` over every unit-period.
pub fn quadratic_emission(inst: &Instance, p: &[f64]) -> f64 {
    let t_len = inst.horizon();
    inst.derived
        .iter()
        .enumerate()
        .map(|(i, d)| {
            p[i * t_len..(i + 1) * t_len]
                .iter()
                .map(|v| d.c_n * v * v)
                .sum::<f64>()
        })
        .sum()
}

/// Gradient of `g`, nonzero only on the `p` and `eta` blocks.
pub fn eval_grad_g(inst: &Instance, x: &DecisionVector) -> Result<DecisionVector, ModelError> {
    shape(inst, x)?;
    let mut grad = DecisionVector::zeros(x.units, x.periods);
    for (i, d) in inst.derived.iter().enumerate() {
        for t in 0..inst.horizon() {
            let k = x.idx(i, t);
            grad.p[k] = 2.0 * d.c_n * x.p[k];
        }
    }
    grad.eta = -1.0;
    Ok(grad)
}

/// Un-linearized cost: the true quadratic fuel curve in MW plus startup and
/// trading terms. Requires an integral commitment.
pub fn eval_true_cost(inst: &Instance, x: &DecisionVector) -> Result<f64, ModelError> {
    shape(inst, x)?;
    if !x.is_binary_feasible() {
        return Err(ModelError::NotBinary);
    }
    let mut total = 0.0;
    for (i, unit) in inst.units.iter().enumerate() {
        for t in 0..inst.horizon() {
            let k = x.idx(i, t);
            if x.u[k] > 0.5 {
                let mw = inst.power_mw(i, 1.0, x.p[k]);
                total += unit.alpha + unit.beta * mw + unit.gamma * mw * mw;
            }
            total += unit.c_hot * x.s[k].round() + x.sc[k];
        }
    }
    Ok(total + inst.cet.pi_b * x.de_b - inst.cet.pi_s * x.de_s)
}

/// Emissions in tCO2 of an integral schedule, from the raw MW curves.
pub fn eval_emissions(inst: &Instance, x: &DecisionVector) -> Result<f64, ModelError> {
    shape(inst, x)?;
    let mut total = 0.0;
    for (i, unit) in inst.units.iter().enumerate() {
        for t in 0..inst.horizon() {
            let k = x.idx(i, t);
            if x.u[k] > 0.5 {
                let mw = inst.power_mw(i, 1.0, x.p[k]);
                total += unit.a_e + unit.b_e * mw + unit.c_e * mw * mw;
            }
        }
    }
    Ok(total)
}
