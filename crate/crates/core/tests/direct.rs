use tfsolve::direct::run_direct;
use tfsolve::expr::DataFn;
use tfsolve::harness::{compare_slices, oracle_l1_fd, synthesize};
use tfsolve::mittag_leffler::ml_on_grid;
use tfsolve::problem::ProblemSpec;

fn spec(alpha: f64) -> ProblemSpec {
    let mut spec = ProblemSpec::new(alpha, 1.0, 1.0);
    spec.p = DataFn::expr("1 + x/2", "x").unwrap();
    spec.q = DataFn::expr("x", "x").unwrap();
    spec.phi = DataFn::expr("sin(pi*x)*x*(1-x)", "x").unwrap();
    spec.h = DataFn::expr("x*(1-x)*(1+x)", "x").unwrap();
    spec.f = Some(DataFn::expr("1 + t^2", "t").unwrap());
    spec.m = 100;
    spec.k = 100;
    spec
}

#[test]
fn near_unit_order_matches_implicit_euler() {
    let s = spec(0.99);
    let (_, sol) = run_direct(&s).unwrap();
    let mut euler = s.clone();
    euler.alpha = 1.0;
    let oracle = oracle_l1_fd(&euler, 100, 2000).unwrap();
    let last = sol.field().last().unwrap();
    let report = compare_slices(oracle.field.last().unwrap(), last).unwrap();
    assert!(report.linf_rel < 2e-2, "{}", report.linf_rel);
}

#[test]
fn zero_source_observation_is_relaxation_sum() {
    let mut s = spec(0.5);
    s.f = Some(DataFn::constant(0.0));
    let data = synthesize(&s).unwrap();
    let setup = data.setup();
    let c = &setup.coeffs;
    let grid = setup.time;
    let mut expect = vec![0.0; grid.steps() + 1];
    for n in 0..setup.modes() {
        let e = ml_on_grid(0.5, 1.0, c.lambdas[n], grid.tau(), grid.steps()).unwrap();
        for (x, v) in expect.iter_mut().zip(e) {
            *x += c.h[n] * c.phi[n] * v;
        }
    }
    for (x, v) in expect.iter().zip(data.g_exact.values()) {
        assert!((x - v).abs() < 1e-13, "{x} vs {v}");
    }
}

#[test]
fn synthesis_uses_the_seed() {
    let mut s = spec(0.5);
    s.noise.eps = 1e-2;
    s.noise.seed = 3;
    let a = synthesize(&s).unwrap();
    let b = synthesize(&s).unwrap();
    assert_eq!(a.g_noisy.values(), b.g_noisy.values());
    for (e, n) in a.g_exact.values().iter().zip(a.g_noisy.values()) {
        assert!((n - e).abs() <= 1e-2 * e.abs() + 1e-300);
    }
    let c = a.renoise(1e-2, 4).unwrap();
    assert_ne!(a.g_noisy.values(), c.g_noisy.values());
}
