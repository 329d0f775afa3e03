use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ucet_core::harness::tiny_instance;
use ucet_core::la::{bisection_root, line_search, segment_quadratic};
use ucet_core::model::{eval_g, quadratic_emission, DecisionVector, Instance};

fn pair(inst: &Instance, rng: &mut ChaCha8Rng) -> Option<(DecisionVector, DecisionVector)> {
    let l = inst.layout();
    let mut int = DecisionVector::zeros(l.units, l.periods);
    let mut ext = int.clone();
    for k in 0..int.p.len() {
        int.p[k] = rng.gen();
        ext.p[k] = rng.gen();
    }
    let (qi, qe) = (quadratic_emission(inst, &int.p), quadratic_emission(inst, &ext.p));
    if qe <= 0.0 {
        return None;
    }
    int.eta = qi + rng.gen_range(0.01..2.0) * qe.max(1.0);
    ext.eta = qe * rng.gen_range(0.0..0.99);
    Some((int, ext))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn boundary_point_and_roots_agree(seed in 0u64..10_000, n in 1usize..4, t in 1usize..6) {
        let inst = tiny_instance(seed % 8, n, t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some((int, ext)) = pair(&inst, &mut rng) else { return Ok(()) };
        let g_ext = eval_g(&inst, &ext).unwrap();
        let (hat, lambda) = line_search(&inst, &int, &ext, 1e-8).unwrap();
        prop_assert!(lambda > 0.0 && lambda <= 1.0);
        prop_assert!(eval_g(&inst, &hat).unwrap().abs() <= 1e-8 * g_ext.abs().max(1.0));
        let (a, b, c) = segment_quadratic(&inst, &int, &ext);
        let closed = 2.0 * c / (-b + (b * b - 4.0 * a * c).max(0.0).sqrt());
        prop_assert!((closed - bisection_root(&inst, &int, &ext, 0.0)).abs() <= 1e-10);
    }
}

#[test]
fn rejects_misordered_endpoints() {
    let inst = tiny_instance(0, 2, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (int, ext) = pair(&inst, &mut rng).unwrap();
    assert!(line_search(&inst, &ext, &int, 1e-8).is_err());
    assert!(line_search(&inst, &int, &int, 1e-8).is_err());
}
