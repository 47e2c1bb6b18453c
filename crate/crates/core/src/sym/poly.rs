//! Sparse multivariate polynomials with exact rational coefficients.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Monomial, Q, SymbolId};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    terms: BTreeMap<Monomial, Q>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn int(c: i64) -> Self {
        Self::constant(Q::from_integer(c.into()))
    }

    pub fn var(id: SymbolId) -> Self {
        Self::term(Monomial::var(id), Q::one())
    }

    pub fn term(m: Monomial, c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.terms.is_empty() {
            return Some(Q::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Q)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> Q {
        self.leading_term().map(|t| t.1.clone()).unwrap_or_else(Q::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, id: SymbolId) -> u32 {
        self.terms.keys().map(|m| m.exponent(id)).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> BTreeSet<SymbolId> {
        self.terms.keys().flat_map(|m| m.symbols()).collect()
    }

    pub fn contains_symbol(&self, id: SymbolId) -> bool {
        self.terms.keys().any(|m| m.contains(id))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        SparsePoly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        SparsePoly { terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect() }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        SparsePoly { terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect() }
    }

    /// Divides every term by `m`; caller guarantees divisibility.
    pub fn div_monomial(&self, m: &Monomial) -> Self {
        SparsePoly {
            terms: self
                .terms
                .iter()
                .map(|(k, a)| (k.div(m).expect("monomial divides every term"), a.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn differentiate(&self, id: SymbolId) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if let Some((lowered, e)) = m.lower(id) {
                out.add_term(lowered, c * Q::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// gcd of all monomials (the largest monomial dividing every term).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Least common multiple of coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// gcd of coefficient numerators (meaningful for integer polynomials).
    pub fn numerator_gcd(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
    }

    /// Scales to integer coefficients with gcd 1 and positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let l = self.denominator_lcm();
        let scaled = self.scale(&Q::from_integer(l));
        let g = scaled.numerator_gcd();
        let mut p = scaled.scale(&Q::new(BigInt::one(), g));
        if p.leading_coefficient().is_negative() {
            p = -p;
        }
        p
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a remainder.
    pub fn exact_div(&self, divisor: &SparsePoly) -> Option<SparsePoly> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (lm, lc) = divisor.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        if divisor.is_monomial() {
            let mut out = Self::zero();
            for (m, c) in &self.terms {
                out.add_term(m.div(&lm)?, c / &lc);
            }
            return Some(out);
        }
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.div(&lm)?;
            let qc = c / &lc;
            rem = &rem - &divisor.mul_term(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Simultaneous polynomial substitution.
    pub fn substitute_poly(&self, bindings: &BTreeMap<SymbolId, SparsePoly>) -> SparsePoly {
        let mut cache: BTreeMap<(SymbolId, u32), SparsePoly> = BTreeMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut rest = Vec::new();
            let mut factor = SparsePoly::constant(c.clone());
            for (s, e) in m.iter() {
                match bindings.get(&s) {
                    Some(p) => {
                        let pw = cache.entry((s, e)).or_insert_with(|| p.pow(e)).clone();
                        factor = &factor * &pw;
                    }
                    None => rest.push((s, e)),
                }
            }
            let rest = Monomial::from_pairs(rest);
            for (k, a) in factor.terms {
                out.add_term(k.mul(&rest), a);
            }
        }
        out
    }

    /// Groups terms by their power product over `along`. Values carry no
    /// symbol from `along`; zero groups are never produced.
    pub fn collect(&self, along: &BTreeSet<SymbolId>) -> BTreeMap<Monomial, SparsePoly> {
        let mut out: BTreeMap<Monomial, SparsePoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest) = m.split(along);
            out.entry(key).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Coefficients with respect to the powers of `id`: `self = Σ out[k]·id^k`.
    pub fn coefficients_in(&self, id: SymbolId) -> Vec<SparsePoly> {
        let mut out = alloc::vec![SparsePoly::zero(); self.degree_in(id) as usize + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.strip(id);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coefficients_in(id: SymbolId, coeffs: &[SparsePoly]) -> SparsePoly {
        let mut out = Self::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let m = Monomial::var_pow(id, k as u32);
            for (t, a) in &c.terms {
                out.add_term(t.mul(&m), a.clone());
            }
        }
        out
    }

    /// Exact evaluation of the bound symbols; unbound symbols stay symbolic.
    pub fn eval_partial(&self, values: &BTreeMap<SymbolId, Q>) -> SparsePoly {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (s, e) in m.iter() {
                match values.get(&s) {
                    Some(v) => coeff *= num_traits::pow::pow(v.clone(), e as usize),
                    None => rest.push((s, e)),
                }
            }
            out.add_term(Monomial::from_pairs(rest), coeff);
        }
        out
    }

    /// Exact evaluation; `None` if a symbol is missing from `values`.
    pub fn eval(&self, values: &BTreeMap<SymbolId, Q>) -> Option<Q> {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (s, e) in m.iter() {
                t *= num_traits::pow::pow(values.get(&s)?.clone(), e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Floating point evaluation with `values` indexed by symbol id.
    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter().fold(c.to_f64().unwrap_or(f64::NAN), |acc, (s, e)| {
                    acc * libm::pow(values[s.index()], e as f64)
                })
            })
            .sum()
    }
}

impl Neg for SparsePoly {
    type Output = SparsePoly;
    fn neg(mut self) -> SparsePoly {
        for c in self.terms.values_mut() {
            *c = -core::mem::take(c);
        }
        self
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        -self.clone()
    }
}

impl Add<&SparsePoly> for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        let (big, small) = if self.terms.len() >= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&SparsePoly> for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&SparsePoly> for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a.mul(b), x * y);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<SparsePoly> for SparsePoly {
            type Output = SparsePoly;
            fn $f(self, rhs: SparsePoly) -> SparsePoly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&SparsePoly> for SparsePoly {
            type Output = SparsePoly;
            fn $f(self, rhs: &SparsePoly) -> SparsePoly {
                (&self).$f(rhs)
            }
        }
        impl $tr<SparsePoly> for &SparsePoly {
            type Output = SparsePoly;
            fn $f(self, rhs: SparsePoly) -> SparsePoly {
                self.$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
