use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::Instance;

use super::base::{build_linear_base, emission_quadratic};
use super::cuts::build_piecewise_emission;
use super::problem::{LinearConstraint, ModelProblem};

/// Breakpoint count of the piecewise baselines.
pub const PIECEWISE_CUTS: usize = 5;

/// The four emission-constraint treatments compared by the tightness report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    Origin,
    CpLa,
    SPw,
    PcPw,
}

impl Formulation {
    pub const ALL: [Formulation; 4] = [Formulation::Origin, Formulation::CpLa, Formulation::SPw, Formulation::PcPw];

    pub fn label(self) -> &'static str {
        match self {
            Formulation::Origin => "ORIGIN",
            Formulation::CpLa => "CP_LA",
            Formulation::SPw => "S_PW",
            Formulation::PcPw => "PC_PW",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "origin" => Ok(Formulation::Origin),
            "cp_la" | "cp-la" => Ok(Formulation::CpLa),
            "s_pw" | "s-pw" => Ok(Formulation::SPw),
            "pc_pw" | "pc-pw" => Ok(Formulation::PcPw),
            other => Err(format!("unknown formulation '{other}' (expected cp_la, s_pw, pc_pw or origin)")),
        }
    }
}

/// Linear base plus the convex quadratic emission block.
pub fn build_original_qcp(inst: &Instance, integrality: bool) -> ModelProblem {
    let mut prob = build_linear_base(inst);
    prob.name = "ucet-origin".into();
    prob.quads.push(emission_quadratic(inst, None));
    if !integrality {
        prob.relax();
    }
    prob
}

/// Linear base plus the given emission cuts.
pub fn build_with_cuts(inst: &Instance, cuts: Vec<LinearConstraint>, integrality: bool) -> ModelProblem {
    let mut prob = build_linear_base(inst);
    for c in cuts {
        prob.push_row(c);
    }
    if !integrality {
        prob.relax();
    }
    prob
}

/// S_PW (`perspective = false`) or PC_PW (`perspective = true`) model.
pub fn build_piecewise(inst: &Instance, perspective: bool, integrality: bool) -> ModelProblem {
    let mut prob = build_with_cuts(inst, build_piecewise_emission(inst, PIECEWISE_CUTS, perspective), integrality);
    prob.name = if perspective { "ucet-pc-pw" } else { "ucet-s-pw" }.into();
    prob
}
