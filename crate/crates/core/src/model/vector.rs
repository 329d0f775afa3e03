use serde::{Deserialize, Serialize};

use super::ModelError;

/// Integrality tolerance for the binary-feasible check.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Column positions of every decision-vector entry in a flat model.
///
/// Blocks are laid out as `u, s, u_b, u_s, p, z, sc, de_b, de_s, eta`;
/// per-unit blocks are unit-major (`i * T + t`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    pub units: usize,
    pub periods: usize,
}

impl VarLayout {
    pub fn new(units: usize, periods: usize) -> Self {
        VarLayout { units, periods }
    }

    fn nt(&self) -> usize {
        self.units * self.periods
    }

    #[inline]
    pub fn cell(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.units && t < self.periods);
        i * self.periods + t
    }

    pub fn u(&self, i: usize, t: usize) -> usize {
        self.cell(i, t)
    }
    pub fn s(&self, i: usize, t: usize) -> usize {
        self.nt() + self.cell(i, t)
    }
    pub fn u_b(&self) -> usize {
        2 * self.nt()
    }
    pub fn u_s(&self) -> usize {
        2 * self.nt() + 1
    }
    pub fn p(&self, i: usize, t: usize) -> usize {
        2 * self.nt() + 2 + self.cell(i, t)
    }
    pub fn z(&self, i: usize, t: usize) -> usize {
        3 * self.nt() + 2 + self.cell(i, t)
    }
    pub fn sc(&self, i: usize, t: usize) -> usize {
        4 * self.nt() + 2 + self.cell(i, t)
    }
    pub fn de_b(&self) -> usize {
        5 * self.nt() + 2
    }
    pub fn de_s(&self) -> usize {
        5 * self.nt() + 3
    }
    pub fn eta(&self) -> usize {
        5 * self.nt() + 4
    }
    /// Number of decision-vector columns.
    pub fn len(&self) -> usize {
        5 * self.nt() + 5
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Columns of the integer block `(u, s, u_b, u_s)`.
    pub fn integer_columns(&self) -> std::ops::Range<usize> {
        0..2 * self.nt() + 2
    }
}

/// A point `chi = (u; P; x)` with named blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionVector {
    pub units: usize,
    pub periods: usize,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub u_b: f64,
    pub u_s: f64,
    /// Normalized output in `[0, u]`.
    pub p: Vec<f64>,
    /// Production-cost epigraph.
    pub z: Vec<f64>,
    /// Incremental cold-startup cost.
    pub sc: Vec<f64>,
    pub de_b: f64,
    pub de_s: f64,
    pub eta: f64,
}

impl DecisionVector {
    pub fn zeros(units: usize, periods: usize) -> Self {
        let nt = units * periods;
        DecisionVector {
            units,
            periods,
            u: vec![0.0; nt],
            s: vec![0.0; nt],
            u_b: 0.0,
            u_s: 0.0,
            p: vec![0.0; nt],
            z: vec![0.0; nt],
            sc: vec![0.0; nt],
            de_b: 0.0,
            de_s: 0.0,
            eta: 0.0,
        }
    }

    pub fn layout(&self) -> VarLayout {
        VarLayout::new(self.units, self.periods)
    }

    #[inline]
    pub fn idx(&self, i: usize, t: usize) -> usize {
        i * self.periods + t
    }

    /// Checks every block length against the declared shape.
    pub fn check_shape(&self, units: usize, periods: usize) -> Result<(), ModelError> {
        let nt = units * periods;
        let ok = self.units == units
            && self.periods == periods
            && [&self.u, &self.s, &self.p, &self.z, &self.sc]
                .iter()
                .all(|b| b.len() == nt);
        if ok {
            Ok(())
        } else {
            Err(ModelError::Shape {
                expected: (units, periods),
                found: (self.units, self.periods),
            })
        }
    }

    pub fn from_flat(layout: VarLayout, values: &[f64]) -> Result<Self, ModelError> {
        if values.len() < layout.len() {
            return Err(ModelError::FlatLength {
                expected: layout.len(),
                found: values.len(),
            });
        }
        let nt = layout.units * layout.periods;
        let block = |start: usize| values[start..start + nt].to_vec();
        Ok(DecisionVector {
            units: layout.units,
            periods: layout.periods,
            u: block(0),
            s: block(nt),
            u_b: values[layout.u_b()],
            u_s: values[layout.u_s()],
            p: block(2 * nt + 2),
            z: block(3 * nt + 2),
            sc: block(4 * nt + 2),
            de_b: values[layout.de_b()],
            de_s: values[layout.de_s()],
            eta: values[layout.eta()],
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layout().len());
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.s);
        out.push(self.u_b);
        out.push(self.u_s);
        out.extend_from_slice(&self.p);
        out.extend_from_slice(&self.z);
        out.extend_from_slice(&self.sc);
        out.push(self.de_b);
        out.push(self.de_s);
        out.push(self.eta);
        out
    }

    /// `lambda * self + (1 - lambda) * other`, blockwise.
    pub fn convex_combination(&self, other: &Self, lambda: f64) -> Self {
        let a = self.to_flat();
        let b = other.to_flat();
        let mixed: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
            .collect();
        DecisionVector::from_flat(self.layout(), &mixed).expect("same layout")
    }

    /// Whether `u, s, u_b, u_s` are all within `INTEGRALITY_TOL` of 0 or 1.
    pub fn is_binary_feasible(&self) -> bool {
        let near = |v: f64| v.abs() <= INTEGRALITY_TOL || (v - 1.0).abs() <= INTEGRALITY_TOL;
        self.u.iter().chain(&self.s).all(|v| near(*v)) && near(self.u_b) && near(self.u_s)
    }

    /// Integer block rounded to exact 0/1 values.
    pub fn commitment(&self) -> Commitment {
        let r = |v: f64| (v > 0.5) as u8;
        Commitment {
            units: self.units,
            periods: self.periods,
            u: self.u.iter().map(|v| r(*v)).collect(),
            s: self.s.iter().map(|v| r(*v)).collect(),
            u_b: r(self.u_b),
            u_s: r(self.u_s),
        }
    }
}

/// A rounded integer assignment `(u, s, u_b, u_s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    pub units: usize,
    pub periods: usize,
    pub u: Vec<u8>,
    pub s: Vec<u8>,
    pub u_b: u8,
    pub u_s: u8,
}

impl Commitment {
    /// Builds a commitment whose startups are the minimal ones implied by `u`.
    pub fn with_minimal_startups(units: usize, periods: usize, u: Vec<u8>, u0: &[u8], u_b: u8, u_s: u8) -> Self {
        let mut s = vec![0u8; units * periods];
        for i in 0..units {
            for t in 0..periods {
                let prev = if t == 0 { u0[i] } else { u[i * periods + t - 1] };
                s[i * periods + t] = (u[i * periods + t] > prev) as u8;
            }
        }
        Commitment {
            units,
            periods,
            u,
            s,
            u_b,
            u_s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_round_trip_and_offsets() {
        let l = VarLayout::new(2, 3);
        assert_eq!(l.len(), 35);
        assert_eq!(l.u_b(), 12);
        assert_eq!(l.p(1, 2), 14 + 5);
        assert_eq!(l.eta(), 34);
        let vals: Vec<f64> = (0..l.len()).map(|v| v as f64).collect();
        let x = DecisionVector::from_flat(l, &vals).unwrap();
        assert_eq!(x.p[x.idx(1, 2)], l.p(1, 2) as f64);
        assert_eq!(x.sc[x.idx(0, 1)], l.sc(0, 1) as f64);
        assert_eq!(x.to_flat(), vals);
    }

    #[test]
    fn binary_flag_uses_tolerance() {
        let mut x = DecisionVector::zeros(1, 2);
        x.u = vec![1.0 - 5e-7, 0.0];
        assert!(x.is_binary_feasible());
        x.s[1] = 0.3;
        assert!(!x.is_binary_feasible());
    }

    #[test]
    fn minimal_startups() {
        let c = Commitment::with_minimal_startups(1, 4, vec![1, 0, 1, 1], &[0], 0, 0);
        assert_eq!(c.s, vec![1, 0, 1, 0]);
    }
}
