mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use parsym_core::sym::{
    collect, differentiate, is_zero, substitute, KernelError, Monomial, RationalFunction, SparsePoly, SymbolId,
};
use proptest::prelude::*;

#[test]
fn additive_identity() {
    let t = table(&["u", "v"]);
    let e = ex(&t, "u + v");
    assert_eq!(&e + &RationalFunction::zero(), e);
}

#[test]
fn quotient_cancels_exactly() {
    let t = table(&["delta", "upsilon"]);
    let r = &ex(&t, "delta*upsilon - delta") * &ex(&t, "1/(upsilon - 1)");
    assert!(r.is_polynomial());
    assert_eq!(r.num(), ex(&t, "delta").num());
    // oracle: δ·(υ−1) = (δυ−δ)·1
    assert!(is_zero(&(&(&ex(&t, "delta") * &ex(&t, "upsilon - 1")) - &ex(&t, "delta*upsilon - delta"))));
}

#[test]
fn distributes_over_products() {
    let t = table(&["beta", "upsilon", "I", "S"]);
    let e = ex(&t, "beta*(1 - upsilon)*I*S");
    assert_eq!(e.num(), ex(&t, "beta*I*S - beta*upsilon*I*S").num());
    assert_eq!(e.num().num_terms(), 2);
}

#[test]
fn division_by_zero_is_an_error() {
    let t = table(&["x"]);
    assert_eq!(ex(&t, "x").div(&RationalFunction::zero()), Err(KernelError::DivisionByZero));
    assert!(RationalFunction::new(SparsePoly::one(), SparsePoly::zero()).is_err());
}

#[test]
fn derivatives() {
    let t = table(&["delta", "upsilon", "kappa1", "kappa2", "lambda", "beta", "c"]);
    let id = |n| t.lookup(n).unwrap();
    let d = differentiate(&ex(&t, "delta*(1 - upsilon)/upsilon"), id("upsilon"));
    assert_eq!(d, ex(&t, "-delta/upsilon^2"));
    assert!(differentiate(&ex(&t, "kappa1 + kappa2"), id("lambda")).is_zero());
    assert_eq!(differentiate(&ex(&t, "beta*c*upsilon"), id("c")), ex(&t, "beta*upsilon"));
}

#[test]
fn substitution() {
    let t = table(&["kappa1", "lambda", "u", "eps", "p2", "x2", "s"]);
    let id = |n| t.lookup(n).unwrap();
    let b = BTreeMap::from([(id("u"), ex(&t, "u + eps/lambda"))]);
    assert_eq!(substitute(&ex(&t, "kappa1 - lambda*u"), &b).unwrap(), ex(&t, "kappa1 - lambda*u - eps"));

    let e = ex(&t, "kappa1*u/lambda");
    let identity: BTreeMap<SymbolId, RationalFunction> = [id("u"), id("lambda")].map(|s| (s, RationalFunction::var(s))).into();
    assert_eq!(substitute(&e, &identity).unwrap(), e);

    let b = BTreeMap::from([(id("p2"), ex(&t, "p2*s")), (id("x2"), ex(&t, "x2/s"))]);
    assert_eq!(substitute(&ex(&t, "p2*x2"), &b).unwrap(), ex(&t, "p2*x2"));

    let swap = BTreeMap::from([(id("u"), ex(&t, "lambda")), (id("lambda"), ex(&t, "u"))]);
    assert!(matches!(substitute(&e, &swap), Err(KernelError::CyclicBinding { .. })));
}

#[test]
fn collection() {
    let t = table(&["S", "u", "v", "lambda"]);
    let id = |n| t.lookup(n).unwrap();
    assert!(collect(&SparsePoly::zero(), &BTreeSet::from([id("S")])).is_empty());
    let p = ex(&t, "2*u*lambda + 3*v + u").num().clone();
    let got = collect(&p, &BTreeSet::from([id("u"), id("v")]));
    let want = BTreeMap::from([
        (Monomial::var(id("u")), ex(&t, "2*lambda + 1").num().clone()),
        (Monomial::var(id("v")), SparsePoly::int(3)),
    ]);
    assert_eq!(got, want);
}

#[test]
fn zero_testing() {
    let t = table(&["upsilon", "lambda"]);
    assert!(!is_zero(&ex(&t, "1/lambda")));
    assert!(is_zero(&(&ex(&t, "upsilon^2 - upsilon") - &ex(&t, "upsilon*(upsilon - 1)"))));
}

#[test]
fn normal_form() {
    let t = table(&["x", "y"]);
    // integer content, shared monomials and the denominator sign are removed
    let e = ex(&t, "(4*x^2*y)/(-6*x*y^2 - 2*x)");
    assert_eq!(e, ex(&t, "-2*x*y/(3*y^2 + 1)"));
    assert!(e.den().leading_coefficient() > num_traits::Zero::zero());
    assert_eq!(e.den().numerator_gcd(), 1.into());
}

fn structurally_equal(a: &RationalFunction, b: &RationalFunction) -> bool {
    a.num() == b.num() && a.den() == b.den()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn polynomial_ring_axioms(a in poly(6, 4, 5), b in poly(6, 4, 5), c in poly(6, 4, 5)) {
        prop_assert!((&(&(&a + &b) + &c) - &(&a + &(&b + &c))).is_zero());
        prop_assert!((&(&a * &(&b + &c)) - &(&(&a * &b) + &(&a * &c))).is_zero());
        prop_assert!((&(&(&a * &b) * &c) - &(&a * &(&b * &c))).is_zero());
        prop_assert!((&(&a * &b) - &(&b * &a)).is_zero());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn rational_field_axioms(a in rational(6, 3), b in rational(6, 3), c in rational(6, 3)) {
        prop_assert!(is_zero(&(&(&(&a + &b) + &c) - &(&a + &(&b + &c)))));
        prop_assert!(is_zero(&(&(&a * &(&b + &c)) - &(&(&a * &b) + &(&a * &c)))));
        if !b.is_zero() {
            let q = a.div(&b).unwrap();
            prop_assert!(is_zero(&(&(&q * &b) - &a)));
        }
    }

    #[test]
    fn product_rule(f in rational(6, 3), g in rational(6, 3), s in 0u32..6) {
        let s = SymbolId(s);
        let lhs = differentiate(&(&f * &g), s);
        let rhs = &(&differentiate(&f, s) * &g) + &(&f * &differentiate(&g, s));
        prop_assert!(is_zero(&(&lhs - &rhs)));
    }

    #[test]
    fn collect_round_trip(p in poly(6, 4, 8), mask in 0u32..64) {
        let along: BTreeSet<SymbolId> = (0..6).filter(|i| mask & (1 << i) != 0).map(SymbolId).collect();
        let parts = collect(&p, &along);
        let mut back = SparsePoly::zero();
        for (k, v) in &parts {
            prop_assert!(!v.is_zero());
            prop_assert!(v.symbols().is_disjoint(&along));
            prop_assert!(k.symbols().all(|s| along.contains(&s)));
            back = &back + &v.mul_monomial(k);
        }
        prop_assert_eq!(back, p);
    }

    #[test]
    fn normalization_is_idempotent(n in poly(6, 4, 5), d in nonzero_poly(6, 3, 4)) {
        let once = RationalFunction::new(n, d).unwrap();
        let mut twice = once.clone();
        twice.normalize();
        prop_assert!(structurally_equal(&once, &twice));
        let rebuilt = RationalFunction::new(once.num().clone(), once.den().clone()).unwrap();
        prop_assert!(structurally_equal(&once, &rebuilt));
    }
}
