use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::SymbolId;

/// Power product of symbols, stored sparsely as `(symbol, exponent)` pairs
/// sorted by symbol id with no zero exponents.
///
/// Ordering is graded lexicographic: total degree first, then the exponent
/// of the lowest symbol id decides.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(SymbolId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(id: SymbolId) -> Self {
        Monomial(alloc::vec![(id, 1)])
    }

    pub fn var_pow(id: SymbolId, exp: u32) -> Self {
        if exp == 0 {
            Self::one()
        } else {
            Monomial(alloc::vec![(id, exp)])
        }
    }

    /// Builds a monomial from arbitrary pairs; duplicates are merged and zeros dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (SymbolId, u32)>) -> Self {
        let mut v: Vec<(SymbolId, u32)> = pairs.into_iter().filter(|p| p.1 > 0).collect();
        v.sort_by_key(|p| p.0);
        let mut out: Vec<(SymbolId, u32)> = Vec::with_capacity(v.len());
        for (s, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == s => last.1 += e,
                _ => out.push((s, e)),
            }
        }
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|p| p.1).sum()
    }

    pub fn exponent(&self, id: SymbolId) -> u32 {
        match self.0.binary_search_by_key(&id, |p| p.0) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, id: SymbolId) -> bool {
        self.exponent(id) > 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.0.iter().map(|p| p.0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(s, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < s {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == s {
                let d = other.0[j].1;
                j += 1;
                if d > e {
                    return None;
                }
                if d < e {
                    out.push((s, e - d));
                }
            } else {
                out.push((s, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        other.div(self).is_some()
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|&(s, e)| {
                    let f = other.exponent(s);
                    (f > 0).then(|| (s, e.min(f)))
                })
                .collect(),
        )
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut m = self.mul(other);
        let g = self.gcd(other);
        m = m.div(&g).expect("gcd divides product");
        m
    }

    pub fn pow(&self, k: u32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(s, e)| (s, e * k)).collect())
    }

    /// Splits into the factor over `along` and the remaining cofactor.
    pub fn split(&self, along: &BTreeSet<SymbolId>) -> (Monomial, Monomial) {
        let (inside, outside): (Vec<_>, Vec<_>) = self.0.iter().partition(|p| along.contains(&p.0));
        (Monomial(inside), Monomial(outside))
    }

    /// Removes one factor of `id`, returning the lowered monomial and the old exponent.
    pub fn lower(&self, id: SymbolId) -> Option<(Monomial, u32)> {
        let i = self.0.binary_search_by_key(&id, |p| p.0).ok()?;
        let e = self.0[i].1;
        let mut v = self.0.clone();
        if e == 1 {
            v.remove(i);
        } else {
            v[i].1 -= 1;
        }
        Some((Monomial(v), e))
    }

    /// Removes `id` entirely, returning the cofactor and the exponent removed.
    pub fn strip(&self, id: SymbolId) -> (Monomial, u32) {
        match self.0.binary_search_by_key(&id, |p| p.0) {
            Ok(i) => {
                let mut v = self.0.clone();
                let (_, e) = v.remove(i);
                (Monomial(v), e)
            }
            Err(_) => (self.clone(), 0),
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                // `self` has a positive exponent on an earlier symbol.
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    let c = a[i].1.cmp(&b[j].1);
                    if c != Ordering::Equal {
                        return c;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        (a.len() - i).cmp(&(b.len() - j))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(i: u32) -> SymbolId {
        SymbolId(i)
    }

    #[test]
    fn grlex_order() {
        let x = Monomial::var(s(0));
        let y = Monomial::var(s(1));
        assert!(x > y);
        assert!(y.mul(&y) > x);
        assert!(x.mul(&y) < x.mul(&x));
        assert!(Monomial::one() < y);
        assert_eq!(x.mul(&y).cmp(&y.mul(&x)), Ordering::Equal);
    }

    #[test]
    fn division_and_gcd() {
        let m = Monomial::from_pairs([(s(2), 3), (s(0), 1)]);
        let d = Monomial::from_pairs([(s(2), 1)]);
        assert_eq!(m.div(&d), Some(Monomial::from_pairs([(s(0), 1), (s(2), 2)])));
        assert_eq!(d.div(&m), None);
        assert_eq!(m.gcd(&Monomial::from_pairs([(s(2), 5), (s(1), 1)])), Monomial::var_pow(s(2), 3));
        assert_eq!(Monomial::var(s(0)).div(&Monomial::var(s(1))), None);
    }
}
