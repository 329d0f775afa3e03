//! Problem data, the decision-vector layout and exact evaluators.

mod eval;
mod instance;
mod io;
mod params;
mod validate;
mod vector;

pub use eval::{eval_emissions, eval_g, eval_grad_g, eval_objective, eval_true_cost, quadratic_emission};
pub use instance::{
    initial_down_window, initial_up_window, startup_history_flag, DerivedUnit, Instance, DEFAULT_L_SEG,
};
pub use io::{load_instance, parse_instance_json, parse_units_csv, save_instance, units_to_csv, InstanceFile, UnitsSection};
pub use params::{CetParams, SystemParams, UnitParams};
pub use validate::{validate_solution, Family, Violation, ViolationReport};
pub use vector::{Commitment, DecisionVector, VarLayout, INTEGRALITY_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid {field}{}: {reason}", unit.map(|i| format!(" of unit {i}")).unwrap_or_default())]
    Invalid {
        unit: Option<usize>,
        field: &'static str,
        reason: String,
    },
    #[error("decision vector shape {found:?} does not match instance {expected:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("flat vector has {found} entries, expected at least {expected}")]
    FlatLength { expected: usize, found: usize },
    #[error("point is not binary-feasible")]
    NotBinary,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn unit() -> UnitParams {
        UnitParams {
            alpha: 1000.0,
            beta: 16.19,
            gamma: 0.00048,
            c_hot: 4500.0,
            c_cold: 9000.0,
            t_cold: 5,
            p_min: 150.0,
            p_max: 455.0,
            p_up: 200.0,
            p_down: 200.0,
            p_start: 200.0,
            p_shut: 200.0,
            u0: 1,
            t0: 8,
            t_on: 8,
            t_off: 8,
            a_e: 50.0,
            b_e: 0.8,
            c_e: 0.0001,
        }
    }

    pub fn cet() -> CetParams {
        CetParams {
            pi_b: 30.0,
            pi_s: 25.0,
            e0: 1000.0,
            de_b_max: 200.0,
            de_s_max: 200.0,
        }
    }

    pub fn single(u: UnitParams, horizon: usize) -> Instance {
        Instance::derive(
            vec![u],
            SystemParams {
                horizon,
                demand: vec![0.0; horizon],
                reserve: vec![0.0; horizon],
            },
            cet(),
            DEFAULT_L_SEG,
        )
        .unwrap()
    }
}
