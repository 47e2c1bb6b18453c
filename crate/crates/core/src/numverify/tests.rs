use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::*;
use crate::model::{parse_expr, FixtureId};
use crate::sample::DEFAULT_SEED;

fn gen(m: &ModelDef, eta: &[&str], chi: &[&str]) -> Generator {
    let p = |s: &&str| parse_expr(s, &m.table).unwrap();
    Generator { eta: eta.iter().map(p).collect(), chi: chi.iter().map(p).collect(), normalized: false }
}

fn at(m: &ModelDef, pairs: &[(&str, f64)]) -> BTreeMap<SymbolId, f64> {
    pairs.iter().map(|&(n, v)| (m.table.lookup(n).unwrap(), v)).collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn decay_flow_translates() {
    let m = FixtureId::Decay.model();
    let g = gen(&m, &["1/lambda", "-1/lambda"], &["1", "-1", "0"]);
    let seed = at(&m, &[("u", 1.0), ("v", 0.0), ("kappa1", 2.0), ("kappa2", 3.0), ("lambda", 1.0)]);
    let req = FlowRequest { generator: g, epsilon_values: vec![0.5], seed_point: seed };
    let out = integrate_flow(&m, &req).unwrap();
    let p = &out[0].point;
    let want = [("u", 1.5), ("v", -0.5), ("kappa1", 2.5), ("kappa2", 2.5), ("lambda", 1.0)];
    for (n, v) in want {
        assert!(close(p[&m.table.lookup(n).unwrap()], v, 1e-12), "{n}");
    }
    assert!(out[0].closed_form_error.unwrap() <= CLOSED_FORM_TOL);
}

#[test]
fn linear_flow_scales() {
    let m = FixtureId::Linear.model();
    let g = gen(&m, &["0", "-z"], &["0", "b", "0"]);
    let seed = at(&m, &[("x", 1.2), ("z", 0.7), ("a", 1.1), ("b", 1.9), ("c", 0.6)]);
    let req = FlowRequest { generator: g, epsilon_values: vec![1.0, 0.0], seed_point: seed.clone() };
    let out = integrate_flow(&m, &req).unwrap();
    let e = core::f64::consts::E;
    let (b, z) = (m.table.lookup("b").unwrap(), m.table.lookup("z").unwrap());
    assert!(close(out[0].point[&b], 1.9 * e, 1e-9));
    assert!(close(out[0].point[&z], 0.7 / e, 1e-9));
    // ε = 0 is the identity
    for (s, v) in &out[1].point {
        assert_eq!(*v, seed[s]);
    }
}

#[test]
fn non_affine_flow_has_no_closed_form() {
    let m = FixtureId::Sei.model();
    let g = gen(&m, &["0", "0", "0"], &["0", "0", "0", "0", "0", "0", "upsilon*(1 - upsilon)", "0", "0"]);
    let seed = seed_point(&m, &[&g], DEFAULT_SEED);
    let req = FlowRequest { generator: g, epsilon_values: vec![0.1], seed_point: seed };
    assert_eq!(integrate_flow(&m, &req).unwrap()[0].closed_form_error, None);
}

#[test]
fn singular_flow_is_reported() {
    let m = FixtureId::Decay.model();
    // λ' = -1 reaches zero at ε = 1 and the entry 1/λ on u blows up there
    let g = gen(&m, &["1/lambda", "0"], &["0", "0", "-1"]);
    let seed = at(&m, &[("u", 1.0), ("v", 1.0), ("kappa1", 1.0), ("kappa2", 1.0), ("lambda", 1.0)]);
    let req = FlowRequest { generator: g, epsilon_values: vec![0.5, 1.5], seed_point: seed };
    assert_eq!(integrate_flow(&m, &req), Err(NumError::FlowSingularity(1.5)));
}

#[test]
fn decay_relaxes_to_fixed_point() {
    let m = FixtureId::Decay.model();
    let cfg = SimConfig { t_end: 20.0, ..SimConfig::for_model(&m, InputFn::Zero) };
    let p = at(&m, &[("u", 1.0), ("v", 0.0), ("kappa1", 2.0), ("kappa2", 3.0), ("lambda", 1.0)]);
    let tr = simulate(&m, &p, &cfg).unwrap();
    assert_eq!(tr.times.len(), 101);
    assert_eq!(*tr.times.last().unwrap(), 20.0);
    let last = tr.states.last().unwrap();
    // deviation from the fixed point is e^{-20}
    assert!((last[0] - 2.0).abs() < 1e-6 && (last[1] - 3.0).abs() < 1e-6);
}

#[test]
fn linear_solution_matches_exponential() {
    let m = FixtureId::Linear.model();
    let cfg = SimConfig::for_model(&m, InputFn::Zero);
    let p = at(&m, &[("x", 1.0), ("z", 1.0), ("a", 0.5), ("b", 1.0), ("c", -1.0)]);
    let tr = simulate(&m, &p, &cfg).unwrap();
    assert!((tr.times[10] - 1.0).abs() < 1e-12);
    assert!((tr.states[10][1] - libm::exp(-1.0)).abs() < 1e-6);
}

#[test]
fn glucose_step_halving_is_consistent() {
    let m = FixtureId::Glucose.model();
    let cfg = SimConfig::for_model(&m, InputFn::Sin);
    let p = seed_point(&m, &[], DEFAULT_SEED);
    let a = simulate(&m, &p, &cfg).unwrap();
    let b = simulate(&m, &p, &SimConfig { rk4_step: 5e-4, ..cfg.clone() }).unwrap();
    for (ra, rb) in a.states.iter().zip(&b.states) {
        for (&x, &y) in ra.iter().zip(rb) {
            assert!(x.is_finite());
            assert!(relative(y, x) <= 1e-7);
        }
    }
}

#[test]
fn blow_up_is_reported() {
    let m = crate::model::parse_model("model q\nstates x\nparams k\ndx/dt = k*x^2\noutput y = x\n").unwrap();
    let cfg = SimConfig::for_model(&m, InputFn::Zero);
    let p = at(&m, &[("x", 1.0), ("k", 1.0)]);
    assert!(matches!(simulate(&m, &p, &cfg), Err(NumError::BlowUp(t)) if t > 0.9 && t < 1.1));
}

#[test]
fn config_is_validated() {
    let m = FixtureId::Glucose.model();
    let p = seed_point(&m, &[], DEFAULT_SEED);
    let cfg = SimConfig::for_model(&m, InputFn::Sin);
    assert!(simulate(&m, &p, &SimConfig { inputs: Vec::new(), ..cfg.clone() }).is_err());
    assert!(simulate(&m, &p, &SimConfig { rk4_step: 1.0, ..cfg }).is_err());
}

fn eps_grid() -> Vec<f64> {
    DEFAULT_EPS.to_vec()
}

#[test]
fn glucose_generator_preserves_output() {
    let m = FixtureId::Glucose.model();
    let g = gen(&m, &["0", "-x2"], &["0", "p2", "0", "-p4", "0"]);
    let seed = seed_point(&m, &[&g], DEFAULT_SEED);
    let cfg = SimConfig::for_model(&m, InputFn::Sin);
    let req = FlowRequest { generator: g, epsilon_values: vec![0.5], seed_point: seed };
    let inv = ["p2*p4", "x2*p2", "x1"].map(|s| parse_expr(s, &m.table).unwrap());
    let c = &verify_symmetry(&m, &cfg, &req, &inv).unwrap()[0];
    assert!(c.max_output_deviation <= 1e-6, "{c:?}");
    assert!(c.max_invariant_drift <= 1e-8, "{c:?}");
    assert!(c.structure_residual <= 1e-6, "{c:?}");
    assert!(c.closed_form_error.is_some());
}

#[test]
fn zero_generator_is_exact() {
    let m = FixtureId::Decay.model();
    let g = Generator::zero(&m);
    let seed = seed_point(&m, &[], DEFAULT_SEED);
    let cfg = SimConfig::for_model(&m, InputFn::Zero);
    let req = FlowRequest { generator: g.clone(), epsilon_values: eps_grid(), seed_point: seed.clone() };
    for c in verify_symmetry(&m, &cfg, &req, &[]).unwrap() {
        assert_eq!(c.max_output_deviation, 0.0);
        assert_eq!(c.structure_residual, 0.0);
    }
    assert_eq!(fd_output_invariance(&m, &g, &seed, 1e-4, &[]), 0.0);
}

#[test]
fn corrupted_decay_generator_is_detected() {
    let m = FixtureId::Decay.model();
    let g = gen(&m, &["1", "-1"], &["lambda", "-lambda", "1"]);
    let seed = seed_point(&m, &[&g], DEFAULT_SEED);
    let cfg = SimConfig::for_model(&m, InputFn::Zero);
    let req = FlowRequest { generator: g, epsilon_values: vec![0.5], seed_point: seed };
    assert!(verify_symmetry(&m, &cfg, &req, &[]).unwrap()[0].max_output_deviation > 1e-2);
}

fn output_derivative(m: &ModelDef, g: &Generator, point: &BTreeMap<SymbolId, f64>) -> f64 {
    let x = dense(m, point);
    m.outputs.iter().map(|(_, y)| Compiled::new(&g.apply(m, y)).eval(&x).abs()).fold(0.0, f64::max)
}

#[test]
fn finite_differences_on_sei() {
    let m = FixtureId::Sei.model();
    // scaling of E and k_E leaves k_E*E fixed
    let g = gen(&m, &["0", "E", "0"], &["0", "0", "0", "0", "0", "0", "0", "-k_E", "0"]);
    let seed = seed_point(&m, &[&g], DEFAULT_SEED);
    assert!(fd_output_invariance(&m, &g, &seed, 1e-4, &[]) <= 1e-7);

    let bad = corrupt(&g);
    let reference = output_derivative(&m, &bad, &seed);
    assert!(reference > 0.1);
    let r = |h| (fd_output_invariance(&m, &bad, &seed, h, &[]) - reference).abs();
    assert!(r(1e-4) <= 1e-6 * reference);
    // the central difference error is second order in h
    let ratio = r(1e-3) / r(5e-4);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn corrupt_flips_first_chi() {
    let m = FixtureId::Decay.model();
    let g = gen(&m, &["1", "-1"], &["lambda", "-lambda", "0"]);
    let c = corrupt(&g);
    assert_eq!(c.chi[0], -&g.chi[0]);
    assert_eq!(c.chi[1], g.chi[1]);
    let h = corrupt(&gen(&m, &["1", "-1"], &["0", "0", "0"]));
    assert_eq!(h.eta[0], RationalFunction::int(-1));
}

#[test]
fn seed_points_avoid_small_denominators() {
    let m = FixtureId::Glucose.model();
    let g = gen(&m, &["0", "1/(p2 - 1)"], &["0", "0", "0", "0", "0"]);
    let p = seed_point(&m, &[&g], 3);
    let p2 = p[&m.table.lookup("p2").unwrap()];
    assert!((p2 - 1.0).abs() > 1e-3);
    assert!(p.values().all(|v| (0.5..2.0).contains(v)));
    assert_eq!(p, seed_point(&m, &[&g], 3));
}
