//! Performance profiles over a problems-by-methods metric matrix.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileInput {
    pub methods: Vec<String>,
    pub problems: Vec<String>,
    /// `metric[p][s]`, lower is better.
    pub metric: Vec<Vec<f64>>,
}

/// Right-continuous step function: `rho` holds from `tau[k]` up to `tau[k+1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub method: String,
    pub tau: Vec<f64>,
    pub rho: Vec<f64>,
}

impl ProfileCurve {
    pub fn rho_at(&self, tau: f64) -> f64 {
        match self.tau.iter().rposition(|t| *t <= tau) {
            Some(k) => self.rho[k],
            None => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub curves: Vec<ProfileCurve>,
    pub tau_max: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("need at least two methods, got {0}")]
    TooFewMethods(usize),
    #[error("need at least one problem")]
    NoProblems,
    #[error("row {0} has {1} entries, expected {2}")]
    Ragged(usize, usize, usize),
    #[error("metric for problem {problem}, method {method} is {value}; must be finite and positive")]
    BadMetric { problem: usize, method: usize, value: f64 },
}

pub fn performance_profile(input: &ProfileInput) -> Result<Profile, ProfileError> {
    let ns = input.methods.len();
    if ns < 2 {
        return Err(ProfileError::TooFewMethods(ns));
    }
    if input.metric.is_empty() {
        return Err(ProfileError::NoProblems);
    }
    for (p, row) in input.metric.iter().enumerate() {
        if row.len() != ns {
            return Err(ProfileError::Ragged(p, row.len(), ns));
        }
        for (s, v) in row.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(ProfileError::BadMetric {
                    problem: p,
                    method: s,
                    value: *v,
                });
            }
        }
    }
    let np = input.metric.len() as f64;
    let ratios: Vec<Vec<f64>> = input
        .metric
        .iter()
        .map(|row| {
            let best = row.iter().copied().fold(f64::INFINITY, f64::min);
            row.iter().map(|v| v / best).collect()
        })
        .collect();
    let tau_max = ratios.iter().flatten().copied().fold(1.0, f64::max);
    let curves = (0..ns)
        .map(|s| {
            let mut r: Vec<f64> = ratios.iter().map(|row| row[s]).collect();
            r.sort_by(f64::total_cmp);
            let mut tau = vec![1.0];
            let mut rho = vec![r.iter().filter(|x| **x <= 1.0).count() as f64 / np];
            for (k, x) in r.iter().enumerate() {
                if *x <= 1.0 || r.get(k + 1) == Some(x) {
                    continue;
                }
                tau.push(*x);
                rho.push((k + 1) as f64 / np);
            }
            if *tau.last().expect("starts at 1") < tau_max {
                tau.push(tau_max);
                rho.push(*rho.last().expect("nonempty"));
            }
            ProfileCurve {
                method: input.methods[s].clone(),
                tau,
                rho,
            }
        })
        .collect();
    Ok(Profile { curves, tau_max })
}

/// Breakpoints as `method,tau,rho` rows.
pub fn profile_to_csv(profile: &Profile) -> String {
    let mut out = String::from("method,tau,rho\n");
    for c in &profile.curves {
        for (t, r) in c.tau.iter().zip(&c.rho) {
            let _ = writeln!(out, "{},{t},{r}", c.method);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(metric: Vec<Vec<f64>>) -> ProfileInput {
        let ns = metric[0].len();
        ProfileInput {
            methods: (0..ns).map(|s| format!("m{s}")).collect(),
            problems: (0..metric.len()).map(|p| format!("p{p}")).collect(),
            metric,
        }
    }

    #[test]
    fn two_by_two_hand_case() {
        let prof = performance_profile(&input(vec![vec![1.0, 2.0], vec![2.0, 1.0]])).unwrap();
        for c in &prof.curves {
            assert_eq!(c.rho_at(1.0), 0.5);
            assert_eq!(c.rho_at(1.999), 0.5);
            assert_eq!(c.rho_at(2.0), 1.0);
        }
        assert_eq!(prof.tau_max, 2.0);
    }

    #[test]
    fn dominant_method_starts_at_one() {
        let prof = performance_profile(&input(vec![vec![1.0, 3.0], vec![5.0, 6.0], vec![2.0, 2.5]])).unwrap();
        assert_eq!(prof.curves[0].rho_at(1.0), 1.0);
        assert_eq!(prof.curves[0].tau, vec![1.0, 3.0]);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(matches!(
            performance_profile(&input(vec![vec![1.0]])),
            Err(ProfileError::TooFewMethods(1))
        ));
        assert!(matches!(
            performance_profile(&input(vec![vec![1.0, 0.0]])),
            Err(ProfileError::BadMetric { .. })
        ));
        assert!(matches!(
            performance_profile(&input(vec![vec![1.0, f64::NAN]])),
            Err(ProfileError::BadMetric { .. })
        ));
    }

    #[test]
    fn csv_lists_every_breakpoint() {
        let prof = performance_profile(&input(vec![vec![1.0, 2.0], vec![2.0, 1.0]])).unwrap();
        let csv = profile_to_csv(&prof);
        assert_eq!(csv.lines().count(), 1 + 4);
        assert!(csv.contains("m0,2,1"));
    }

    proptest! {
        #[test]
        fn curves_are_monotone_and_bounded(
            metric in prop::collection::vec(prop::collection::vec(0.1f64..100.0, 3), 1..12),
            probes in prop::collection::vec(1.0f64..1200.0, 20),
        ) {
            let prof = performance_profile(&input(metric.clone())).unwrap();
            let wins: f64 = prof.curves.iter().map(|c| c.rho_at(1.0)).sum();
            prop_assert!(wins >= 1.0 - 1e-12);
            let mut probes = probes;
            probes.sort_by(f64::total_cmp);
            for c in &prof.curves {
                prop_assert!(c.rho.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(c.rho.iter().all(|r| (0.0..=1.0).contains(r)));
                prop_assert_eq!(c.rho_at(prof.tau_max), 1.0);
                let vals: Vec<f64> = probes.iter().map(|t| c.rho_at(*t)).collect();
                prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
