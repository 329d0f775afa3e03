use serde::{Deserialize, Serialize};

use super::params::{CetParams, SystemParams, UnitParams};
use super::vector::VarLayout;
use super::ModelError;

/// Default number of cost-curve segments.
pub const DEFAULT_L_SEG: usize = 4;

/// Per-unit constants derived from the raw data.
///
/// Power is normalized as `p = (P - u*p_min) / (p_max - p_min)` so every
/// output variable lives in `[0, u]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedUnit {
    /// `p_max - p_min`.
    pub span: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
    pub gamma_n: f64,
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub p_up_n: f64,
    pub p_down_n: f64,
    pub p_start_n: f64,
    pub p_shut_n: f64,
    /// Periods the unit must stay online at the start of the horizon.
    pub init_up: usize,
    /// Periods the unit must stay offline at the start of the horizon.
    pub init_down: usize,
    /// Whether pre-horizon history already counts toward a hot start in period `t`.
    pub f_init: Vec<u8>,
}

/// Problem data with every derived constant populated.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub units: Vec<UnitParams>,
    pub system: SystemParams,
    pub cet: CetParams,
    pub derived: Vec<DerivedUnit>,
    pub l_seg: usize,
}

/// Window length the unit is pinned to its initial state by min up time.
pub fn initial_up_window(u: &UnitParams, horizon: usize) -> usize {
    let raw = u.u0 as i64 * (u.t_on as i64 - u.t0 as i64);
    raw.min(horizon as i64).max(0) as usize
}

/// Window length the unit is pinned to its initial state by min down time.
pub fn initial_down_window(u: &UnitParams, horizon: usize) -> usize {
    let raw = (1 - u.u0 as i64) * (u.t_off as i64 + u.t0 as i64);
    raw.min(horizon as i64).max(0) as usize
}

/// Hot-start history flag for period `t` (1-based).
pub fn startup_history_flag(u: &UnitParams, t: usize) -> u8 {
    let w = t as i64 - u.t_off as i64 - u.t_cold as i64 - 1;
    let offline = (-(u.t0 as i64)).max(0);
    (w <= 0 && offline < w.abs() + 1) as u8
}

impl DerivedUnit {
    fn from_raw(u: &UnitParams, horizon: usize) -> Self {
        let span = u.p_max - u.p_min;
        let pm = u.p_min;
        DerivedUnit {
            span,
            alpha_n: u.alpha + u.beta * pm + u.gamma * pm * pm,
            beta_n: span * (u.beta + 2.0 * u.gamma * pm),
            gamma_n: u.gamma * span * span,
            a_n: u.a_e + u.b_e * pm + u.c_e * pm * pm,
            b_n: span * (u.b_e + 2.0 * u.c_e * pm),
            c_n: u.c_e * span * span,
            p_up_n: u.p_up / span,
            p_down_n: u.p_down / span,
            p_start_n: (u.p_start - pm) / span,
            p_shut_n: (u.p_shut - pm) / span,
            init_up: initial_up_window(u, horizon),
            init_down: initial_down_window(u, horizon),
            f_init: (1..=horizon).map(|t| startup_history_flag(u, t)).collect(),
        }
    }
}

impl Instance {
    /// Validates the raw data and computes all derived constants.
    pub fn derive(
        units: Vec<UnitParams>,
        system: SystemParams,
        cet: CetParams,
        l_seg: usize,
    ) -> Result<Self, ModelError> {
        if units.is_empty() {
            return Err(ModelError::Invalid {
                unit: None,
                field: "units",
                reason: "fleet is empty".into(),
            });
        }
        if l_seg == 0 {
            return Err(ModelError::Invalid {
                unit: None,
                field: "l_seg",
                reason: "must be at least 1".into(),
            });
        }
        system.validate()?;
        cet.validate()?;
        for (i, u) in units.iter().enumerate() {
            u.validate(i)?;
        }
        let derived = units
            .iter()
            .map(|u| DerivedUnit::from_raw(u, system.horizon))
            .collect();
        Ok(Instance {
            units,
            system,
            cet,
            derived,
            l_seg,
        })
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn horizon(&self) -> usize {
        self.system.horizon
    }

    pub fn layout(&self) -> VarLayout {
        VarLayout::new(self.num_units(), self.horizon())
    }

    pub fn total_capacity(&self) -> f64 {
        self.units.iter().map(|u| u.p_max).sum()
    }

    /// Recovers MW output from a normalized value.
    pub fn power_mw(&self, i: usize, u: f64, p: f64) -> f64 {
        u * self.units[i].p_min + p * self.derived[i].span
    }

    /// Periods in which demand plus reserve exceeds the installed capacity.
    pub fn capacity_shortfalls(&self) -> Vec<(usize, f64)> {
        let cap = self.total_capacity();
        (0..self.horizon())
            .filter_map(|t| {
                let need = self.system.demand[t] + self.system.reserve[t];
                (need > cap).then_some((t, need - cap))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::unit;

    #[test]
    fn initial_windows_follow_clipped_formulas() {
        let mut u = unit();
        u.u0 = 1;
        u.t0 = 3;
        u.t_on = 5;
        assert_eq!(initial_up_window(&u, 24), 2);
        assert_eq!(initial_down_window(&u, 24), 0);

        u.t_on = 40;
        u.t0 = 1;
        assert_eq!(initial_up_window(&u, 24), 24);

        u.u0 = 0;
        u.t0 = -1;
        u.t_off = 4;
        assert_eq!(initial_up_window(&u, 24), 0);
        assert_eq!(initial_down_window(&u, 24), 3);
        u.t0 = -6;
        assert_eq!(initial_down_window(&u, 24), 0);
    }

    #[test]
    fn startup_history_flag_examples() {
        let mut u = unit();
        u.u0 = 0;
        u.t_off = 2;
        u.t_cold = 1;
        u.t0 = -2;
        // t - T_off - T_cold - 1 = -3, offline 2 < 4
        assert_eq!(startup_history_flag(&u, 1), 1);
        // t = 4: window start 0 and offline 2 >= 1
        assert_eq!(startup_history_flag(&u, 4), 0);
        // t = 5: window fully inside the horizon
        assert_eq!(startup_history_flag(&u, 5), 0);
        u.t0 = -5;
        assert_eq!(startup_history_flag(&u, 1), 0);
    }

    #[test]
    fn normalized_cost_coefficients() {
        let mut u = unit();
        u.p_min = 100.0;
        u.p_max = 400.0;
        u.alpha = 500.0;
        u.beta = 20.0;
        u.gamma = 0.01;
        let d = DerivedUnit::from_raw(&u, 24);
        assert_eq!(d.beta_n, 6600.0);
        assert_eq!(d.gamma_n, 0.01 * 300.0 * 300.0);
        assert_eq!(d.alpha_n, 500.0 + 2000.0 + 100.0);
        // cost at P = p_max equals alpha_n + beta_n + gamma_n
        let direct = 500.0 + 20.0 * 400.0 + 0.01 * 400.0 * 400.0;
        assert!((d.alpha_n + d.beta_n + d.gamma_n - direct).abs() < 1e-9);
    }

    #[test]
    fn derive_rejects_bad_unit_with_index() {
        let mut bad = unit();
        bad.p_max = bad.p_min;
        let err = Instance::derive(
            vec![unit(), bad],
            SystemParams {
                horizon: 1,
                demand: vec![10.0],
                reserve: vec![0.0],
            },
            crate::model::testutil::cet(),
            4,
        )
        .unwrap_err();
        match err {
            ModelError::Invalid { unit, field, .. } => {
                assert_eq!(unit, Some(1));
                assert_eq!(field, "p_max");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
