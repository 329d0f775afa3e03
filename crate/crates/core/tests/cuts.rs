use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ucet_core::formulation::{perspective_cut, tangent_cut, LinearConstraint};
use ucet_core::harness::tiny_instance;
use ucet_core::model::{quadratic_emission, DecisionVector, Instance};

fn point(inst: &Instance, rng: &mut ChaCha8Rng, binary: bool) -> DecisionVector {
    let l = inst.layout();
    let mut x = DecisionVector::zeros(l.units, l.periods);
    for k in 0..x.u.len() {
        x.u[k] = if binary { rng.gen_range(0..2) as f64 } else { rng.gen() };
        x.p[k] = x.u[k] * rng.gen::<f64>();
    }
    x.eta = quadratic_emission(inst, &x.p) * rng.gen_range(0.5..1.5);
    x
}

fn slack(row: &LinearConstraint, x: &DecisionVector) -> f64 {
    row.activity(&x.to_flat()) - row.rhs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cuts_agree_on_the_commitment_face(seed in 0u64..1000, n in 1usize..4, t in 1usize..6) {
        let inst = tiny_instance(seed % 8, n, t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = point(&inst, &mut rng, true);
        let mut anchor = x.clone();
        for k in 0..anchor.p.len() {
            anchor.p[k] = anchor.u[k] * rng.gen::<f64>();
        }
        let (pr, tr) = (slack(&perspective_cut(&inst, &anchor), &x), slack(&tangent_cut(&inst, &anchor), &x));
        prop_assert!((pr - tr).abs() <= 1e-12 * pr.abs().max(tr.abs()).max(1.0));
    }

    #[test]
    fn perspective_dominates_at_fractional_u(seed in 0u64..1000, n in 1usize..4, t in 1usize..6) {
        let inst = tiny_instance(seed % 8, n, t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = point(&inst, &mut rng, false);
        let anchor = point(&inst, &mut rng, false);
        prop_assert!(slack(&perspective_cut(&inst, &anchor), &x) >= slack(&tangent_cut(&inst, &anchor), &x));
    }

    #[test]
    fn perspective_cut_is_valid_for_emission_feasible_points(seed in 0u64..1000, n in 1usize..4, t in 1usize..6) {
        let inst = tiny_instance(seed % 8, n, t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = point(&inst, &mut rng, true);
        x.eta = quadratic_emission(&inst, &x.p);
        let anchor = point(&inst, &mut rng, true);
        let s = slack(&perspective_cut(&inst, &anchor), &x);
        prop_assert!(s <= 1e-9 * x.eta.max(1.0), "slack {}", s);
    }
}
