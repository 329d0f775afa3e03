//! Continuous-relaxation values of the four emission treatments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, SolveOptions};
use crate::formulation::{build_original_qcp, build_piecewise, Formulation, PIECEWISE_CUTS};
use crate::la::{run_la, solve_primal, LaError, LaParams};
use crate::model::Instance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationValue {
    pub value: f64,
    /// Emission cuts in the model; zero for ORIGIN.
    pub cuts: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub values: BTreeMap<Formulation, RelaxationValue>,
    /// Failures per formulation; the other entries are still reported.
    pub errors: BTreeMap<Formulation, String>,
}

impl TightnessReport {
    pub fn z(&self, f: Formulation) -> Option<f64> {
        self.values.get(&f).map(|v| v.value)
    }

    /// `Z(ORIGIN) - Z(f)`.
    pub fn difference(&self, f: Formulation) -> Option<f64> {
        Some(self.z(Formulation::Origin)? - self.z(f)?)
    }

    pub fn differences(&self) -> BTreeMap<Formulation, f64> {
        Formulation::ALL
            .into_iter()
            .filter_map(|f| self.difference(f).map(|d| (f, d)))
            .collect()
    }
}

/// Continuous relaxation value of one formulation.
pub fn relax<B: Backend + ?Sized>(
    inst: &Instance,
    formulation: Formulation,
    backend: &B,
    la_params: &LaParams,
) -> Result<RelaxationValue, LaError> {
    let start = std::time::Instant::now();
    let (value, cuts) = match formulation {
        Formulation::Origin => {
            let prob = build_original_qcp(inst, false);
            (solve_primal(backend, &prob, &la_params.qcp_options, "ORIGIN relaxation")?.1, 0)
        }
        Formulation::CpLa => {
            let la = run_la(inst, backend, la_params)?;
            (la.relaxation_value, la.omega_r.len())
        }
        Formulation::SPw | Formulation::PcPw => {
            let prob = build_piecewise(inst, formulation == Formulation::PcPw, false);
            let opts = SolveOptions {
                relax_integrality: true,
                ..la_params.lp_options.clone()
            };
            (solve_primal(backend, &prob, &opts, "piecewise relaxation")?.1, PIECEWISE_CUTS)
        }
    };
    Ok(RelaxationValue {
        value,
        cuts,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn tightness_report<B: Backend + ?Sized>(inst: &Instance, backend: &B, la_params: &LaParams) -> TightnessReport {
    let mut report = TightnessReport {
        values: BTreeMap::new(),
        errors: BTreeMap::new(),
    };
    for f in Formulation::ALL {
        match relax(inst, f, backend, la_params) {
            Ok(v) => {
                report.values.insert(f, v);
            }
            Err(e) => {
                log::warn!("{f} relaxation failed: {e}");
                report.errors.insert(f, e.to_string());
            }
        }
    }
    report
}
