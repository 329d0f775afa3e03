//! Linear constraint system, emission cuts and full model assembly.

mod base;
mod cuts;
mod cutset;
mod problem;
mod variants;

pub use base::{
    build_linear_base, emission_quadratic, expected_base_rows, fix_commitment, objective_coefficients,
    objective_gradient_norm,
};
pub use cuts::{
    build_piecewise_emission, inflated_nl_cut, objective_cut, perspective_cut, piecewise_breakpoints, tangent_cut,
};
pub use cutset::{CutPoint, CutSet, CutSetError, Incumbent, IncumbentSet, INCUMBENT_TOL};
pub use problem::{LinearConstraint, ModelProblem, ObjSense, ProblemClass, QuadConstraint, Sense, Variable};
pub use variants::{build_original_qcp, build_piecewise, build_with_cuts, Formulation, PIECEWISE_CUTS};

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::model::testutil::{cet, single, unit};
    use crate::model::{eval_g, DecisionVector, Instance, SystemParams, DEFAULT_L_SEG};

    fn two_by_three() -> Instance {
        let mut b = unit();
        b.u0 = 0;
        b.t0 = -3;
        b.t_on = 2;
        b.t_off = 2;
        Instance::derive(
            vec![unit(), b],
            SystemParams {
                horizon: 3,
                demand: vec![300.0, 500.0, 400.0],
                reserve: vec![10.0; 3],
            },
            cet(),
            DEFAULT_L_SEG,
        )
        .unwrap()
    }

    #[test]
    fn single_cell_has_five_cost_cuts() {
        let inst = single(unit(), 1);
        let prob = build_linear_base(&inst);
        assert_eq!(prob.rows_with_prefix("cost-cut i=1 t=1 ").count(), 5);
        prob.check().unwrap();
    }

    #[test]
    fn period_rows_and_closed_form_count() {
        let inst = two_by_three();
        let prob = build_linear_base(&inst);
        assert_eq!(prob.rows_with_prefix("power-balance").count(), 3);
        assert_eq!(prob.rows_with_prefix("reserve").count(), 3);
        assert!(prob.rows_with_prefix("power-balance").all(|r| r.sense == Sense::Eq));
        assert_eq!(prob.rows.len(), expected_base_rows(&inst));
        assert_eq!(prob.class(), ProblemClass::Milp);
        prob.check().unwrap();
    }

    #[test]
    fn min_up_rows_start_after_initial_window() {
        let mut u = unit();
        u.t_on = 5;
        u.t0 = 3;
        let inst = single(u, 6);
        assert_eq!(inst.derived[0].init_up, 2);
        let prob = build_linear_base(&inst);
        let tags: Vec<_> = prob.rows_with_prefix("min-up").map(|r| r.tag.clone()).collect();
        assert_eq!(tags.first().map(String::as_str), Some("min-up i=1 t=3"));
        assert_eq!(tags.len(), 4);
    }

    #[test]
    fn origin_has_one_diagonal_block() {
        let inst = two_by_three();
        let relaxed = build_original_qcp(&inst, false);
        assert_eq!(relaxed.quads.len(), 1);
        assert!(relaxed.quads[0].is_convex());
        assert_eq!(relaxed.class(), ProblemClass::Qcp);
        assert_eq!(build_original_qcp(&inst, true).class(), ProblemClass::Miqcp);
        assert_eq!(build_piecewise(&inst, true, false).rows_with_prefix("pc-pw-cut").count(), 5);
    }

    fn random_feasible(inst: &Instance, rng: &mut ChaCha8Rng, binary: bool) -> DecisionVector {
        let l = inst.layout();
        let mut x = DecisionVector::zeros(l.units, l.periods);
        for k in 0..x.u.len() {
            x.u[k] = if binary { rng.gen_range(0..2) as f64 } else { rng.gen() };
            x.p[k] = x.u[k] * rng.gen::<f64>();
        }
        x.eta = eval_g(inst, &x).unwrap() + rng.gen::<f64>() * 3.0;
        x
    }

    #[test]
    fn cuts_are_valid_on_random_feasible_points() {
        let inst = two_by_three();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let anchors: Vec<_> = (0..20).map(|_| random_feasible(&inst, &mut rng, false)).collect();
        let mut rows = Vec::new();
        for a in &anchors {
            rows.push(tangent_cut(&inst, a));
            rows.push(perspective_cut(&inst, a));
        }
        rows.extend(build_piecewise_emission(&inst, 5, false));
        rows.extend(build_piecewise_emission(&inst, 5, true));
        for _ in 0..10_000 {
            let x = random_feasible(&inst, &mut rng, false);
            // Perspective rows need the perspective of g; the point set keeps p <= u.
            let persp_ok = {
                let mut y = x.clone();
                let d = &inst.derived;
                let mut g_persp = 0.0;
                for i in 0..y.units {
                    for t in 0..y.periods {
                        let k = y.idx(i, t);
                        if y.u[k] > 0.0 {
                            g_persp += d[i].c_n * y.p[k] * y.p[k] / y.u[k];
                        }
                    }
                }
                y.eta = y.eta.max(g_persp);
                y
            };
            let flat = x.to_flat();
            let flat_p = persp_ok.to_flat();
            for r in &rows {
                let v = if r.tag.starts_with("psp") || r.tag.starts_with("pc-pw") {
                    r.violation(&flat_p)
                } else {
                    r.violation(&flat)
                };
                assert!(v <= 1e-9, "{} violated by {v}", r.tag);
            }
        }
    }

    #[test]
    fn perspective_dominates_tangent_activity() {
        let inst = two_by_three();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let lhs = |r: &LinearConstraint, x: &[f64]| r.activity(x) - r.rhs;
            // Equality on a binary face needs the anchor to share the commitment.
            let bin = random_feasible(&inst, &mut rng, true);
            let mut anchor = random_feasible(&inst, &mut rng, false);
            for k in 0..anchor.p.len() {
                anchor.p[k] *= bin.u[k];
            }
            let (tr, pr) = (tangent_cut(&inst, &anchor), perspective_cut(&inst, &anchor));
            let bin = bin.to_flat();
            assert!((lhs(&pr, &bin) - lhs(&tr, &bin)).abs() <= 1e-12 * (1.0 + lhs(&tr, &bin).abs()));

            let anchor = random_feasible(&inst, &mut rng, false);
            let (tr, pr) = (tangent_cut(&inst, &anchor), perspective_cut(&inst, &anchor));
            let frac = random_feasible(&inst, &mut rng, false).to_flat();
            assert!(lhs(&pr, &frac) >= lhs(&tr, &frac) - 1e-12);
        }
    }

    #[test]
    fn incumbent_set_rejects_fractional_points() {
        let inst = two_by_three();
        let mut set = IncumbentSet::new();
        let mut x = DecisionVector::zeros(2, 3);
        x.u[0] = 0.5;
        assert!(matches!(set.push(&inst, x), Err(CutSetError::NotBinary)));
        assert!(set.best().is_none());
    }

    #[test]
    fn cut_set_checks_boundary() {
        let inst = single(unit(), 1);
        let mut set = CutSet::new();
        let mut x = DecisionVector::zeros(1, 1);
        x.eta = 1.0;
        assert!(set.push_boundary(&inst, x.clone(), 1e-8).is_err());
        x.eta = 0.0;
        set.push_boundary(&inst, x, 1e-8).unwrap();
        assert_eq!(set.perspective_rows(&inst)[0].tag, "psp-cut s=1");
    }
}
