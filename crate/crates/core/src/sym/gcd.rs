//! Multivariate polynomial gcd over Q by recursive primitive remainder
//! sequences. Results are primitive integer polynomials with positive
//! leading coefficient.

use alloc::vec::Vec;

use super::{Monomial, SparsePoly, SymbolId};

pub fn gcd(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    if a.is_zero() {
        return b.primitive();
    }
    if b.is_zero() {
        return a.primitive();
    }
    if a.is_constant() || b.is_constant() {
        return SparsePoly::one();
    }
    let (ma, mb) = (a.monomial_content(), b.monomial_content());
    let mono = ma.gcd(&mb);
    let (a, b) = (a.div_monomial(&ma), b.div_monomial(&mb));
    let g = gcd_no_monomial(&a, &b);
    g.mul_monomial(&mono).primitive()
}

pub fn gcd_many<'a>(polys: impl IntoIterator<Item = &'a SparsePoly>) -> SparsePoly {
    let mut g = SparsePoly::zero();
    for p in polys {
        g = gcd(&g, p);
        if g.is_one() {
            break;
        }
    }
    g
}

fn main_variable(a: &SparsePoly, b: &SparsePoly) -> Option<SymbolId> {
    let sa = a.symbols();
    let sb = b.symbols();
    // prefer a shared variable of lowest degree
    sa.intersection(&sb).copied().min_by_key(|&s| (a.degree_in(s).max(b.degree_in(s)), s))
}

fn gcd_no_monomial(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    if a.is_zero() {
        return b.primitive();
    }
    if b.is_zero() {
        return a.primitive();
    }
    if a.is_constant() || b.is_constant() {
        return SparsePoly::one();
    }
    let Some(v) = main_variable(a, b) else {
        // no shared variable: any common factor is free of every variable of
        // one side, so it divides that side's coefficients in the other.
        let s = *a.symbols().iter().next().expect("non-constant");
        let ca = content_in(a, s);
        return gcd_no_monomial(&ca, b);
    };
    let (ca, cb) = (content_in(a, v), content_in(b, v));
    let c = gcd(&ca, &cb);
    let mut p = a.exact_div(&ca).expect("content divides");
    let mut q = b.exact_div(&cb).expect("content divides");
    if p.degree_in(v) < q.degree_in(v) {
        core::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = pseudo_remainder(&p, &q, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            q = SparsePoly::one();
            break;
        }
        p = q;
        let cr = content_in(&r, v);
        q = r.exact_div(&cr).expect("content divides");
    }
    let cq = content_in(&q, v);
    let q = q.exact_div(&cq).expect("content divides");
    (&c * &q).primitive()
}

/// gcd of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content_in(p: &SparsePoly, v: SymbolId) -> SparsePoly {
    let coeffs: Vec<SparsePoly> = p.coefficients_in(v).into_iter().filter(|c| !c.is_zero()).collect();
    let mut g = SparsePoly::zero();
    for c in &coeffs {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn pseudo_remainder(p: &SparsePoly, q: &SparsePoly, v: SymbolId) -> SparsePoly {
    let n = q.degree_in(v);
    let qc = q.coefficients_in(v);
    let lq = qc[n as usize].clone();
    let mut r = p.clone();
    while !r.is_zero() && r.degree_in(v) >= n {
        let d = r.degree_in(v);
        let lr = r.coefficients_in(v)[d as usize].clone();
        let shift = Monomial::var_pow(v, d - n);
        r = &(&r * &lq) - &(&lr * &q.mul_monomial(&shift));
        // keep coefficient growth in check
        r = r.primitive();
    }
    r
}
