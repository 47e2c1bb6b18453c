#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use parsym_core::model::{parse_expr, ModelDef};
use parsym_core::sym::{Monomial, RationalFunction, SparsePoly, SymbolId, SymbolKind, SymbolTable, Q};
use proptest::prelude::*;

pub fn table(names: &[&str]) -> SymbolTable {
    let mut t = SymbolTable::new();
    for n in names {
        t.declare(n, SymbolKind::Param).unwrap();
    }
    t
}

pub fn ex(t: &SymbolTable, s: &str) -> RationalFunction {
    parse_expr(s, t).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn mex(m: &ModelDef, s: &str) -> RationalFunction {
    ex(&m.table, s)
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Random polynomial over symbols `0..nsyms` with total degree at most
/// `max_deg` and small rational coefficients.
pub fn poly(nsyms: u32, max_deg: u32, max_terms: usize) -> impl Strategy<Value = SparsePoly> {
    let term = (prop::collection::vec((0..nsyms, 1..=max_deg), 0..=max_deg as usize), -9i64..=9, 1i64..=4);
    prop::collection::vec(term, 0..=max_terms).prop_map(move |terms| {
        SparsePoly::from_terms(terms.into_iter().map(|(factors, n, d)| {
            let mut pairs: Vec<(SymbolId, u32)> = Vec::new();
            let mut left = max_deg;
            for (s, e) in factors {
                let e = e.min(left);
                left -= e;
                if e > 0 {
                    pairs.push((SymbolId(s), e));
                }
            }
            (Monomial::from_pairs(pairs), q(n, d))
        }))
    })
}

pub fn nonzero_poly(nsyms: u32, max_deg: u32, max_terms: usize) -> impl Strategy<Value = SparsePoly> {
    poly(nsyms, max_deg, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

pub fn rational(nsyms: u32, max_deg: u32) -> impl Strategy<Value = RationalFunction> {
    (poly(nsyms, max_deg, 4), nonzero_poly(nsyms, max_deg.min(2), 3))
        .prop_map(|(n, d)| RationalFunction::new(n, d).unwrap())
}

// Independent exact oracle: reduced row echelon form over Q.
pub fn oracle_rref(mut a: Vec<Vec<Q>>, ncols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..ncols {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn oracle_nullspace(a: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let (r, pivots) = oracle_rref(a.to_vec(), ncols);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); ncols];
            v[free] = Q::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            v
        })
        .collect()
}

pub fn oracle_rank(rows: Vec<Vec<Q>>, ncols: usize) -> usize {
    oracle_rref(rows, ncols).1.len()
}

/// Up to 6x8, entries sparse small rationals as (num, den).
pub fn small_matrix() -> impl Strategy<Value = (usize, Vec<Vec<(i64, i64)>>)> {
    (1usize..=6, 1usize..=8).prop_flat_map(|(r, c)| {
        let entry = prop_oneof![3 => Just((0i64, 1i64)), 2 => (-6i64..=6, 1i64..=3)];
        (Just(c), prop::collection::vec(prop::collection::vec(entry, c), r))
    })
}
