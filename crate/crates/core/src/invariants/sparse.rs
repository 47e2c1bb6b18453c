//! Sparse exact elimination over `Q`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::sym::Q;

pub type SparseRow = BTreeMap<usize, Q>;

/// Incrementally built echelon form; each stored row has a unit leading entry.
#[derive(Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
}

fn axpy(r: &mut SparseRow, f: &Q, p: &SparseRow) {
    for (c, v) in p {
        let e = r.entry(*c).or_insert_with(Q::zero);
        *e -= f * v;
        if e.is_zero() {
            r.remove(c);
        }
    }
}

impl Echelon {
    /// Reduces `r` against the stored rows; returns the remainder.
    pub fn reduce(&self, mut r: SparseRow) -> SparseRow {
        let mut from = 0;
        loop {
            let Some((c, v)) = r.range(from..).next().map(|(c, v)| (*c, v.clone())) else { return r };
            match self.pivots.get(&c) {
                Some(p) => axpy(&mut r, &v, p),
                None => from = c + 1,
            }
        }
    }

    /// Adds a row; returns whether it increased the rank.
    pub fn insert(&mut self, r: SparseRow) -> bool {
        let mut r = r;
        r.retain(|_, v| !v.is_zero());
        loop {
            let Some((c, v)) = r.iter().next().map(|(c, v)| (*c, v.clone())) else { return false };
            match self.pivots.get(&c) {
                Some(p) => axpy(&mut r, &v, p),
                None => {
                    if !v.is_one() {
                        let inv = v.recip();
                        r.values_mut().for_each(|x| *x *= &inv);
                    }
                    self.pivots.insert(c, r);
                    return true;
                }
            }
        }
    }

    /// Kernel basis of the row space's orthogonal complement in `ncols`
    /// columns. The vector for free column `f` has `f` as its largest
    /// nonzero column.
    pub fn kernel(&self, ncols: usize) -> Vec<SparseRow> {
        // back-reduce in descending pivot order; reduced rows carry no other
        // pivot columns, so one pass per row suffices
        let mut reduced: BTreeMap<usize, SparseRow> = BTreeMap::new();
        for (&pc, row) in self.pivots.iter().rev() {
            let mut row = row.clone();
            let hits: Vec<(usize, Q)> = row
                .range(pc + 1..)
                .filter(|(c, _)| reduced.contains_key(c))
                .map(|(c, v)| (*c, v.clone()))
                .collect();
            for (c, v) in hits {
                axpy(&mut row, &v, &reduced[&c]);
            }
            reduced.insert(pc, row);
        }
        let mut by_free: BTreeMap<usize, Vec<(usize, Q)>> = BTreeMap::new();
        for (&pc, row) in &reduced {
            for (&c, v) in row.range(pc + 1..) {
                by_free.entry(c).or_default().push((pc, v.clone()));
            }
        }
        (0..ncols)
            .filter(|c| !reduced.contains_key(c))
            .map(|f| {
                let mut v = SparseRow::new();
                v.insert(f, Q::one());
                for (pc, x) in by_free.remove(&f).unwrap_or_default() {
                    v.insert(pc, -x);
                }
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn kernel_of_small_system() {
        let mut e = Echelon::default();
        // x0 + x1 = 0, x1 - x2 = 0
        assert!(e.insert([(0, q(1)), (1, q(1))].into_iter().collect()));
        assert!(e.insert([(1, q(1)), (2, q(-1))].into_iter().collect()));
        assert!(!e.insert([(0, q(2)), (2, q(2))].into_iter().collect()));
        let k = e.kernel(3);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert_eq!(v.get(&2), Some(&q(1)));
        assert_eq!(v.get(&1), Some(&q(1)));
        assert_eq!(v.get(&0), Some(&q(-1)));
    }
}
