use ucet_core::backend::ProcessBackend;
use ucet_core::harness::tiny_instance;
use ucet_core::la::{run_la, LaParams};
use ucet_core::model::{eval_g, quadratic_emission};
use ucet_core::oracle::{enumerate_optimal, DEFAULT_DISPATCH_TOL};

#[test]
fn la_stops_on_the_lp_tolerance_with_boundary_cuts() {
    let backend = ProcessBackend::from_env();
    let params = LaParams::default();
    for (seed, n, t) in [(0, 2, 3), (2, 3, 3), (0, 1, 6)] {
        let inst = tiny_instance(seed, n, t).unwrap();
        let la = run_la(&inst, &backend, &params).unwrap();
        let last = la.trace.last().unwrap();
        assert!(last.g_lp <= params.eps_lp || la.iterations >= params.k_max_lp);
        for w in la.trace.windows(2) {
            assert!(w[1].lp_value >= w[0].lp_value * (1.0 - 0.005), "{:?}", la.trace);
            assert_eq!(w[1].cuts, w[0].cuts + 1);
        }
        for cp in &la.omega_r.points {
            let scale = quadratic_emission(&inst, &cp.point.p).max(cp.point.eta).max(1.0);
            assert!(eval_g(&inst, &cp.point).unwrap().abs() <= 1e-6 * scale);
        }
        let optimum = enumerate_optimal(&inst, DEFAULT_DISPATCH_TOL).unwrap().optimum;
        assert!(la.relaxation_value <= optimum * (1.0 + 1e-6), "{} > {optimum}", la.relaxation_value);
    }
}
