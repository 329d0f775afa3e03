//! Plain-text solution files written by the solver shim:
//!
//! ```text
//! status optimal
//! message <free text>        (optional)
//! objective 12.5             (optional)
//! solve_time 0.01
//! x 1.5
//! y 0
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::Status;

#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    pub status: Status,
    pub message: Option<String>,
    pub objective: Option<f64>,
    pub solve_time: f64,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("solution line {line}: {message}")]
pub struct SolutionError {
    pub line: usize,
    pub message: String,
}

pub fn parse_solution(text: &str) -> Result<RawSolution, SolutionError> {
    let err = |line: usize, message: String| SolutionError { line, message };
    let mut status = None;
    let mut message = None;
    let mut objective = None;
    let mut solve_time = 0.0;
    let mut values = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let (key, rest) = raw.split_once(char::is_whitespace).unwrap_or((raw, ""));
        let rest = rest.trim();
        let num = |s: &str| -> Result<f64, SolutionError> {
            let v: f64 = s.parse().map_err(|_| err(line, format!("'{s}' is not a number")))?;
            if v.is_nan() {
                return Err(err(line, "NaN value".into()));
            }
            Ok(v)
        };
        match key {
            "status" => {
                if status.is_some() {
                    return Err(err(line, "repeated status line".into()));
                }
                status = Some(Status::parse(rest).ok_or_else(|| err(line, format!("unknown status '{rest}'")))?);
            }
            "message" if status.is_some() && values.is_empty() => message = Some(rest.to_string()),
            "objective" if status.is_some() && values.is_empty() => objective = Some(num(rest)?),
            "solve_time" if status.is_some() && values.is_empty() => solve_time = num(rest)?,
            name => {
                if status.is_none() {
                    return Err(err(line, "first entry must be the status line".into()));
                }
                if rest.contains(char::is_whitespace) || rest.is_empty() {
                    return Err(err(line, format!("expected '<name> <value>', got '{raw}'")));
                }
                if values.insert(name.to_string(), num(rest)?).is_some() {
                    return Err(err(line, format!("variable {name} listed twice")));
                }
            }
        }
    }
    let status = status.ok_or_else(|| err(0, "empty solution file".into()))?;
    Ok(RawSolution {
        status,
        message,
        objective,
        solve_time,
        values,
    })
}

pub fn write_solution(sol: &RawSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "status {}", sol.status);
    if let Some(m) = &sol.message {
        let _ = writeln!(out, "message {}", m.replace('\n', " "));
    }
    if let Some(o) = sol.objective {
        let _ = writeln!(out, "objective {o:?}");
    }
    let _ = writeln!(out, "solve_time {:?}", sol.solve_time);
    for (name, v) in &sol.values {
        let _ = writeln!(out, "{name} {v:?}");
    }
    out
}
