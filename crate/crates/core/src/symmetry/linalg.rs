//! Exact linear algebra over `Q` and over rational functions.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::sym::{gcd, gcd_many, RationalFunction, SparsePoly, SymbolId, Q};

fn lcm(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    let g = gcd(a, b);
    &a.exact_div(&g).expect("gcd divides") * b
}

/// Scales a vector of rational functions to polynomials with no common
/// polynomial factor, making the first nonzero entry's leading coefficient
/// positive.
pub fn clear_denominators(v: &[RationalFunction]) -> Vec<SparsePoly> {
    clear_denominators_keeping(v, &BTreeSet::new())
}

/// As [`clear_denominators`], but only common factors free of `keep` are
/// divided out.
pub fn clear_denominators_keeping(v: &[RationalFunction], keep: &BTreeSet<SymbolId>) -> Vec<SparsePoly> {
    let mut l = SparsePoly::one();
    for e in v.iter().filter(|e| !e.is_zero()) {
        if !e.den().is_constant() {
            l = lcm(&l, e.den());
        }
    }
    let mut out: Vec<SparsePoly> = v
        .iter()
        .map(|e| {
            if e.is_zero() {
                SparsePoly::zero()
            } else {
                let f = l.exact_div(e.den()).expect("lcm divisible by each denominator");
                &f * e.num()
            }
        })
        .collect();
    let g = if keep.is_empty() {
        gcd_many(out.iter().filter(|p| !p.is_zero()))
    } else {
        let parts: Vec<SparsePoly> = out.iter().flat_map(|p| p.collect(keep).into_values()).collect();
        gcd_many(parts.iter())
    };
    let sign_neg = out.iter().find(|p| !p.is_zero()).is_some_and(|p| p.leading_coefficient().is_negative());
    if g.is_zero() {
        return out;
    }
    for p in out.iter_mut() {
        if !p.is_zero() {
            let mut q = p.exact_div(&g).expect("gcd divides");
            if sign_neg {
                q = -q;
            }
            *p = q;
        }
    }
    out
}

fn row_to_polys(row: &[RationalFunction]) -> Vec<SparsePoly> {
    clear_denominators(row)
}

/// Fraction-free row echelon form. Returns the echelon rows and pivot columns.
///
/// Bareiss elimination with exact division by the previous pivot; if a
/// division is ever inexact the remaining steps fall back to primitive rows.
pub fn bareiss_echelon(mut a: Vec<Vec<SparsePoly>>, ncols: usize) -> (Vec<Vec<SparsePoly>>, Vec<usize>) {
    let nrows = a.len();
    let mut prev = SparsePoly::one();
    let mut exact = true;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| (a[i][c].num_terms(), i)) else {
            continue;
        };
        a.swap(r, p);
        let (top, rest) = a.split_at_mut(r + 1);
        let piv_row = &top[r];
        for row in rest.iter_mut() {
            let f = core::mem::take(&mut row[c]);
            for j in c + 1..ncols {
                let mut t = &piv_row[c] * &row[j];
                if !f.is_zero() && !piv_row[j].is_zero() {
                    t = &t - &(&f * &piv_row[j]);
                }
                row[j] = t;
            }
        }
        if exact && !prev.is_one() {
            let divided: Option<Vec<Vec<SparsePoly>>> = rest
                .iter()
                .map(|row| row.iter().map(|e| if e.is_zero() { Some(SparsePoly::zero()) } else { e.exact_div(&prev) }).collect())
                .collect();
            match divided {
                Some(d) => rest.clone_from_slice(&d),
                None => exact = false,
            }
        }
        if !exact {
            for row in rest.iter_mut() {
                make_primitive(row);
            }
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

fn make_primitive(row: &mut [SparsePoly]) {
    let g = gcd_many(row.iter().filter(|p| !p.is_zero()));
    if !g.is_zero() && !g.is_one() {
        for e in row.iter_mut().filter(|p| !p.is_zero()) {
            *e = e.exact_div(&g).expect("gcd divides");
        }
    }
}

/// Basis of the right nullspace of `m` (rows of length `ncols`).
///
/// Each vector has polynomial entries with no common factor and a positive
/// leading coefficient at its free column. Vectors are returned in order of
/// their free column.
pub fn nullspace(m: &[Vec<RationalFunction>], ncols: usize) -> Vec<Vec<RationalFunction>> {
    let rows: Vec<Vec<SparsePoly>> =
        m.iter().filter(|r| r.iter().any(|e| !e.is_zero())).map(|r| row_to_polys(r)).collect();
    let (u, pivots) = bareiss_echelon(rows, ncols);
    let mut out = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![RationalFunction::zero(); ncols];
        x[f] = RationalFunction::one();
        for (i, &pc) in pivots.iter().enumerate().rev() {
            let mut acc = RationalFunction::zero();
            for j in pc + 1..ncols {
                if !u[i][j].is_zero() && !x[j].is_zero() {
                    acc = &acc + &(&RationalFunction::from_poly(u[i][j].clone()) * &x[j]);
                }
            }
            if !acc.is_zero() {
                x[pc] = (-acc).div(&RationalFunction::from_poly(u[i][pc].clone())).expect("pivot nonzero");
            }
        }
        let mut v = clear_denominators(&x);
        if v[f].leading_coefficient().is_negative() {
            v.iter_mut().for_each(|p| *p = -core::mem::take(p));
        }
        out.push(v.into_iter().map(RationalFunction::from_poly).collect());
    }
    out
}

/// Gauss-Jordan reduced row echelon form over rational functions.
pub fn rref(mut a: Vec<Vec<RationalFunction>>, ncols: usize) -> (Vec<Vec<RationalFunction>>, Vec<usize>) {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("pivot nonzero");
        for j in c..ncols {
            if !a[r][j].is_zero() {
                a[r][j] = &a[r][j] * &inv;
            }
        }
        for i in 0..nrows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..ncols {
                if !a[r][j].is_zero() {
                    a[i][j] = &a[i][j] - &(&f * &a[r][j]);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Rank of a matrix over `Q`.
pub fn rank_q(rows: &[Vec<Q>]) -> usize {
    let mut a: Vec<Vec<Q>> = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..a.len() {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &a[r][c];
            for j in c..ncols {
                let t = &f * &a[r][j];
                a[i][j] -= t;
            }
        }
        r += 1;
        if r == a.len() {
            break;
        }
    }
    r
}
