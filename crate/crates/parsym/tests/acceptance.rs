//! One pass/fail line per acceptance criterion. Exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use num_traits::Zero;
use parsym::cli::run;
use parsym::load::resolve_inputs;
use parsym::pipeline::{verify, Options};
use parsym_core::invariants::{apply_generator, classify, find_invariants, functional_equivalence, generic_rank, InvariantSet};
use parsym_core::model::{FixtureId, ModelDef};
use parsym_core::sample::DEFAULT_SEED;
use parsym_core::sym::{collect, differentiate, RationalFunction, SparsePoly, SymbolId, Q};
use parsym_core::symmetry::linalg::rref;
use parsym_core::symmetry::{check_generator, eliminate, nullspace, AnsatzConfig, GeneratorBasis};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

struct Run {
    m: ModelDef,
    basis: GeneratorBasis,
    inv: InvariantSet,
    elapsed: Duration,
}

fn analyze(id: FixtureId) -> Run {
    let m = id.model();
    let t = Instant::now();
    let basis = eliminate(&m, AnsatzConfig::default()).unwrap();
    let inv = find_invariants(&basis, &m, Default::default()).unwrap();
    classify(&inv, &basis, &m);
    Run { m, basis, inv, elapsed: t.elapsed() }
}

impl Run {
    fn vars(&self) -> Vec<SymbolId> {
        self.m.states.iter().chain(&self.m.params).copied().collect()
    }

    fn sym(&self, name: &str) -> SymbolId {
        self.m.table.lookup(name).unwrap()
    }

    fn equivalent_to(&self, want: &[&str]) -> bool {
        let want: Vec<_> = want.iter().map(|s| mex(&self.m, s)).collect();
        functional_equivalence(&self.inv.exprs(), &want, &self.vars(), DEFAULT_SEED).unwrap()
    }

    fn verdict(&self, name: &str) -> bool {
        let v = classify(&self.inv, &self.basis, &self.m);
        let s = self.sym(name);
        v.params.iter().chain(&v.states).find(|(x, _)| *x == s).unwrap().1
    }

    fn chi_zero(&self, p: &str) -> bool {
        let l = self.m.param_index(self.sym(p)).unwrap();
        self.basis.all().all(|g| g.chi[l].is_zero())
    }

    fn in_time(&self, limit: u64) -> String {
        assert!(self.elapsed <= Duration::from_secs(limit), "took {:?}", self.elapsed);
        format!("{:.2}s", self.elapsed.as_secs_f64())
    }
}

fn span_rank(rows: Vec<Vec<RationalFunction>>) -> usize {
    let n = rows.first().map_or(0, Vec::len);
    rref(rows, n).1.len()
}

fn criterion_1() -> String {
    let r = analyze(FixtureId::Decay);
    assert_eq!(r.inv.invariants.len(), 3);
    assert!(r.equivalent_to(&["lambda", "kappa1 + kappa2", "u + v"]));
    assert!(r.verdict("lambda"));
    for s in ["kappa1", "kappa2", "u", "v"] {
        assert!(!r.verdict(s), "{s}");
    }
    r.in_time(5)
}

fn criterion_2() -> String {
    let r = analyze(FixtureId::Linear);
    assert!(r.equivalent_to(&["a", "c", "x", "b*z"]));
    assert!(r.verdict("a") && r.verdict("c") && r.verdict("x"));
    assert!(!r.verdict("z"));
    r.in_time(5)
}

fn criterion_3() -> String {
    let r = analyze(FixtureId::Glucose);
    assert!(r.equivalent_to(&["p1", "p3", "V_p", "p2*p4", "x1", "p2*x2"]));
    assert!(["p1", "p3", "V_p"].iter().all(|p| r.chi_zero(p)));
    assert!(r.basis.all().all(|g| g.eta[0].is_zero()));
    assert!(r.verdict("x1"));
    r.in_time(10)
}

fn criterion_4() -> String {
    let r = analyze(FixtureId::Sei);
    let cols: Vec<SymbolId> = ["upsilon", "k_I", "k_E", "mu_E", "mu_I", "delta"]
        .map(|p| r.basis.table.lookup(&format!("chi_{p}")).unwrap())
        .to_vec();
    let e = |s: &str| mex(&r.m, s);
    let expected = vec![
        vec![e("0"), e("k_I/k_E"), e("1"), e("0"), e("0"), e("0")],
        vec![e("upsilon^2/delta"), e("k_I*upsilon/(delta*upsilon - delta)"), e("0"), e("1"), e("0"), e("0")],
        vec![e("upsilon/delta"), e("k_I/(delta*upsilon - delta)"), e("0"), e("0"), e("0"), e("1")],
    ];
    let hit = r.basis.system.stages().into_iter().any(|s| {
        r.basis.system.stage_matrix(s, &cols).is_some_and(|mat| {
            let ns = nullspace(&mat, cols.len());
            ns.len() == 3 && {
                let both = span_rank(ns.iter().chain(&expected).cloned().collect());
                both == 3 && span_rank(ns.clone()) == 3
            }
        })
    });
    assert!(hit, "no stage with the expected three-dimensional nullspace");
    assert_eq!(generic_rank(&r.basis, &r.m, DEFAULT_SEED).unwrap(), 2);
    assert!(r.chi_zero("mu_S") && r.chi_zero("mu_I"));
    assert_eq!(r.inv.invariants.len(), 10);
    assert!(r.equivalent_to(&[
        "S/c",
        "k_E*E",
        "k_I*I",
        "mu_S",
        "mu_I",
        "mu_E + delta",
        "k_I/beta",
        "delta*(1 - upsilon)/upsilon",
        "beta*c*upsilon",
        "beta*delta/k_E",
    ]));
    r.in_time(60)
}

fn criterion_5() -> String {
    let want = [(FixtureId::Decay, 5, 2, 3), (FixtureId::Linear, 5, 1, 4), (FixtureId::Glucose, 7, 1, 6), (FixtureId::Sei, 12, 2, 10)];
    let mut seen = Vec::new();
    for (id, np, rank, count) in want {
        let r = analyze(id);
        let measured = generic_rank(&r.basis, &r.m, DEFAULT_SEED).unwrap();
        let got = (r.m.states.len() + r.m.params.len(), measured, r.inv.invariants.len());
        assert_eq!(got, (np, rank, count), "{id}");
        assert_eq!(got.2, got.0 - got.1);
        seen.push(format!("{id} {got:?}"));
    }
    seen.join(", ")
}

fn criterion_6() -> String {
    let mut n = 0;
    for id in FixtureId::ALL {
        let r = analyze(id);
        for g in &r.basis.generators {
            assert!(check_generator(g, &r.m), "{id}: {}", g.display(&r.m));
            n += 1;
        }
        // slot generators only promise output invariance
        for g in &r.basis.synthetic {
            assert!(r.m.outputs.iter().all(|(_, y)| apply_generator(g, &r.m, y).is_zero()), "{id}");
        }
    }
    format!("{n} exact generators")
}

fn criterion_7() -> String {
    let opts = Options { eps: vec![-0.5, -0.1, 0.1, 0.5], ..Options::default() };
    let mut worst = (0.0f64, 0.0f64);
    let mut least_corrupt = f64::INFINITY;
    for id in FixtureId::ALL {
        let r = analyze(id);
        let (inputs, _) = resolve_inputs(&r.m, &[]).unwrap();
        let v = verify(&r.m, &r.basis, &r.inv, &opts, &inputs).unwrap();
        for j in &v.jobs {
            let c = j.result.as_ref().unwrap();
            assert!(j.passed(&opts), "{id} generator {} eps {}: {c:?}", j.generator, j.eps);
            worst.0 = worst.0.max(c.max_output_deviation);
            worst.1 = worst.1.max(c.max_invariant_drift);
        }
        let bad = Options { eps: vec![0.5], corrupt: Some(0), ..Options::default() };
        let v = verify(&r.m, &r.basis, &r.inv, &bad, &inputs).unwrap();
        let dev = v.jobs.iter().filter(|j| j.corrupted).map(|j| j.result.as_ref().unwrap().max_output_deviation).fold(0.0, f64::max);
        assert!(dev > 1e-2, "{id}: corrupted deviation {dev}");
        least_corrupt = least_corrupt.min(dev);
    }
    format!("max deviation {:.1e}, max drift {:.1e}, corrupted >= {:.2}", worst.0, worst.1, least_corrupt)
}

fn criterion_8() -> String {
    let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    runner
        .run(&small_matrix(), |(ncols, raw)| {
            let a: Vec<Vec<Q>> = raw.iter().map(|r| r.iter().map(|&(n, d)| q(n, d)).collect()).collect();
            let sym: Vec<Vec<RationalFunction>> =
                a.iter().map(|r| r.iter().map(|x| RationalFunction::constant(x.clone())).collect()).collect();
            let ns: Vec<Vec<Q>> = nullspace(&sym, ncols)
                .into_iter()
                .map(|v| v.into_iter().map(|x| x.as_constant().unwrap()).collect())
                .collect();
            let want = oracle_nullspace(&a, ncols);
            prop_assert_eq!(oracle_rank(ns.clone(), ncols), want.len());
            prop_assert_eq!(ns.len(), want.len());
            for v in &ns {
                for row in &a {
                    prop_assert!(row.iter().zip(v).fold(Q::zero(), |acc, (x, y)| acc + x * y).is_zero());
                }
            }
            prop_assert_eq!(oracle_rank(ns.iter().chain(&want).cloned().collect(), ncols), want.len());
            Ok(())
        })
        .unwrap();
    "100 matrices".into()
}

fn criterion_9() -> String {
    let cfg = || Config { cases: 100, failure_persistence: None, ..Config::default() };
    TestRunner::new(cfg())
        .run(&(poly(6, 4, 5), poly(6, 4, 5), poly(6, 4, 5)), |(a, b, c)| {
            prop_assert!((&(&(&a + &b) + &c) - &(&a + &(&b + &c))).is_zero());
            prop_assert!((&(&a * &(&b + &c)) - &(&(&a * &b) + &(&a * &c))).is_zero());
            prop_assert!((&(&a * &b) - &(&b * &a)).is_zero());
            Ok(())
        })
        .unwrap();
    TestRunner::new(cfg())
        .run(&(rational(6, 3), rational(6, 3), 0u32..6), |(f, g, s)| {
            let s = SymbolId(s);
            let lhs = differentiate(&(&f * &g), s);
            let rhs = &(&differentiate(&f, s) * &g) + &(&f * &differentiate(&g, s));
            prop_assert!((&lhs - &rhs).is_zero());
            Ok(())
        })
        .unwrap();
    TestRunner::new(cfg())
        .run(&(poly(6, 4, 8), 0u32..64), |(p, mask)| {
            let along: BTreeSet<SymbolId> = (0..6).filter(|i| mask & (1 << i) != 0).map(SymbolId).collect();
            let mut back = SparsePoly::zero();
            for (k, v) in collect(&p, &along) {
                back = &back + &v.mul_monomial(&k);
            }
            prop_assert_eq!(back, p);
            Ok(())
        })
        .unwrap();
    TestRunner::new(cfg())
        .run(&(poly(6, 4, 5), nonzero_poly(6, 3, 4)), |(n, d)| {
            let once = RationalFunction::new(n, d).unwrap();
            let mut twice = once.clone();
            twice.normalize();
            prop_assert!(once.num() == twice.num() && once.den() == twice.den());
            Ok(())
        })
        .unwrap();
    "4 properties x 100 cases".into()
}

fn report(id: FixtureId) -> String {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(["parsym", "analyze", id.name(), "--json", "-"], &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    String::from_utf8(out).unwrap()
}

fn criterion_10() -> String {
    for id in FixtureId::ALL {
        assert_eq!(report(id), report(id), "{id}");
    }
    "4 fixtures".into()
}

fn main() {
    let criteria: [(&str, fn() -> String); 10] = [
        ("decay invariants and verdicts", criterion_1),
        ("linear invariants and verdicts", criterion_2),
        ("glucose invariants and verdicts", criterion_3),
        ("SEI nullspace, rank and invariants", criterion_4),
        ("count identity", criterion_5),
        ("symbolic soundness", criterion_6),
        ("numerical verification", criterion_7),
        ("nullspace against RREF oracle", criterion_8),
        ("kernel properties", criterion_9),
        ("deterministic reports", criterion_10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail})", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {:>2} FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
