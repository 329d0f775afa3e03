use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ucet_core::harness::tiny_instance;
use ucet_core::model::{eval_g, eval_grad_g, DecisionVector};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences(seed in 0u64..10_000, n in 1usize..4, t in 1usize..6) {
        let inst = tiny_instance(seed % 8, n, t).unwrap();
        let l = inst.layout();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = DecisionVector::zeros(l.units, l.periods);
        for k in 0..x.p.len() {
            x.u[k] = rng.gen();
            x.p[k] = rng.gen::<f64>() * x.u[k];
        }
        x.eta = rng.gen_range(0.0..10.0);
        let grad = eval_grad_g(&inst, &x).unwrap().to_flat();
        let base = x.to_flat();
        let scale = grad.iter().map(|g| g.abs()).fold(1e-12, f64::max);
        for j in 0..base.len() {
            let h = 1e-5 * base[j].abs().max(1.0);
            let at = |d: f64| {
                let mut v = base.clone();
                v[j] += d;
                eval_g(&inst, &DecisionVector::from_flat(l, &v).unwrap()).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            prop_assert!((fd - grad[j]).abs() / scale < 1e-6, "column {} fd {} analytic {}", j, fd, grad[j]);
        }
    }
}
