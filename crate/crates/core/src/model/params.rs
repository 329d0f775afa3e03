use serde::{Deserialize, Serialize};

use super::ModelError;

/// Raw data for one thermal unit, in physical units (MW, $, tCO2, periods).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitParams {
    /// Quadratic production cost `alpha + beta*P + gamma*P^2`.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c_hot: f64,
    pub c_cold: f64,
    pub t_cold: u32,
    pub p_min: f64,
    pub p_max: f64,
    pub p_up: f64,
    pub p_down: f64,
    pub p_start: f64,
    pub p_shut: f64,
    /// Commitment state at the end of period 0.
    pub u0: u8,
    /// Periods online (positive) or offline (negative) before the horizon.
    pub t0: i32,
    pub t_on: u32,
    pub t_off: u32,
    /// Emission curve `a_e + b_e*P + c_e*P^2` in tCO2/h.
    pub a_e: f64,
    pub b_e: f64,
    pub c_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub horizon: usize,
    pub demand: Vec<f64>,
    pub reserve: Vec<f64>,
}

/// Carbon emission trading market data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CetParams {
    pub pi_b: f64,
    pub pi_s: f64,
    pub e0: f64,
    pub de_b_max: f64,
    pub de_s_max: f64,
}

fn check(cond: bool, unit: Option<usize>, field: &'static str, reason: &str) -> Result<(), ModelError> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::Invalid {
            unit,
            field,
            reason: reason.to_string(),
        })
    }
}

impl UnitParams {
    pub fn validate(&self, index: usize) -> Result<(), ModelError> {
        let i = Some(index);
        let finite = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("c_hot", self.c_hot),
            ("c_cold", self.c_cold),
            ("p_min", self.p_min),
            ("p_max", self.p_max),
            ("p_up", self.p_up),
            ("p_down", self.p_down),
            ("p_start", self.p_start),
            ("p_shut", self.p_shut),
            ("a_e", self.a_e),
            ("b_e", self.b_e),
            ("c_e", self.c_e),
        ];
        for (name, v) in finite {
            check(v.is_finite(), i, name, "must be finite")?;
        }
        check(self.p_min >= 0.0, i, "p_min", "must be nonnegative")?;
        check(self.p_max > self.p_min, i, "p_max", "must exceed p_min")?;
        check(self.gamma >= 0.0, i, "gamma", "must be nonnegative")?;
        check(self.c_e >= 0.0, i, "c_e", "must be nonnegative")?;
        check(self.t_on >= 1, i, "t_on", "must be at least 1")?;
        check(self.t_off >= 1, i, "t_off", "must be at least 1")?;
        check(self.c_hot >= 0.0, i, "c_hot", "must be nonnegative")?;
        check(self.c_cold >= self.c_hot, i, "c_cold", "must be at least c_hot")?;
        check(self.u0 <= 1, i, "u0", "must be 0 or 1")?;
        check(
            (self.t0 > 0) == (self.u0 == 1) && self.t0 != 0,
            i,
            "t0",
            "sign must agree with u0 (positive iff online)",
        )?;
        check(self.p_up >= 0.0, i, "p_up", "must be nonnegative")?;
        check(self.p_down >= 0.0, i, "p_down", "must be nonnegative")?;
        check(self.p_start >= self.p_min, i, "p_start", "must be at least p_min")?;
        check(self.p_shut >= self.p_min, i, "p_shut", "must be at least p_min")?;
        Ok(())
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        check(self.horizon >= 1, None, "horizon", "must be at least 1")?;
        check(
            self.demand.len() == self.horizon,
            None,
            "demand",
            "length must equal horizon",
        )?;
        check(
            self.reserve.len() == self.horizon,
            None,
            "reserve",
            "length must equal horizon",
        )?;
        check(
            self.demand.iter().all(|d| d.is_finite() && *d >= 0.0),
            None,
            "demand",
            "entries must be finite and nonnegative",
        )?;
        check(
            self.reserve.iter().all(|r| r.is_finite() && *r >= 0.0),
            None,
            "reserve",
            "entries must be finite and nonnegative",
        )
    }
}

impl CetParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("pi_b", self.pi_b),
            ("pi_s", self.pi_s),
            ("e0", self.e0),
            ("de_b_max", self.de_b_max),
            ("de_s_max", self.de_s_max),
        ] {
            check(v.is_finite() && v >= 0.0, None, name, "must be finite and nonnegative")?;
        }
        check(
            self.pi_b >= self.pi_s,
            None,
            "pi_b",
            "buy price must be at least the sell price",
        )
    }
}
