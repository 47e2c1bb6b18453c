//! Rational functions kept in a lightweight normal form.

use alloc::collections::BTreeMap;
use core::ops::{Add, Mul, Neg, Sub};
use core::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{gcd, KernelError, Monomial, SparsePoly, SymbolId, Q};

static GCD_TERM_THRESHOLD: AtomicUsize = AtomicUsize::new(200);

/// Term count above which normalization runs a full multivariate gcd.
pub fn gcd_term_threshold() -> usize {
    GCD_TERM_THRESHOLD.load(Ordering::Relaxed)
}

pub fn set_gcd_term_threshold(n: usize) {
    GCD_TERM_THRESHOLD.store(n, Ordering::Relaxed);
}

/// `num / den` with `den != 0`.
///
/// Normal form: integer coefficients with joint content 1, no monomial
/// factor shared by numerator and denominator, positive leading
/// denominator coefficient, and `den == 1` whenever the denominator divides
/// the numerator. Equality is decided by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: SparsePoly,
    den: SparsePoly,
}

impl RationalFunction {
    pub fn new(num: SparsePoly, den: SparsePoly) -> Result<Self, KernelError> {
        if den.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        let mut r = RationalFunction { num, den };
        r.normalize();
        Ok(r)
    }

    pub fn zero() -> Self {
        Self::from_poly(SparsePoly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(SparsePoly::one())
    }

    pub fn from_poly(p: SparsePoly) -> Self {
        let mut r = RationalFunction { num: p, den: SparsePoly::one() };
        r.normalize();
        r
    }

    pub fn constant(c: Q) -> Self {
        Self::from_poly(SparsePoly::constant(c))
    }

    pub fn int(c: i64) -> Self {
        Self::from_poly(SparsePoly::int(c))
    }

    pub fn var(id: SymbolId) -> Self {
        Self::from_poly(SparsePoly::var(id))
    }

    pub fn num(&self) -> &SparsePoly {
        &self.num
    }

    pub fn den(&self) -> &SparsePoly {
        &self.den
    }

    pub fn into_parts(self) -> (SparsePoly, SparsePoly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_polynomial(&self) -> Option<SparsePoly> {
        let c = self.den.as_constant()?;
        Some(self.num.scale(&c.recip()))
    }

    pub fn as_constant(&self) -> Option<Q> {
        Some(self.num.as_constant()? / self.den.as_constant()?)
    }

    pub fn contains_symbol(&self, id: SymbolId) -> bool {
        self.num.contains_symbol(id) || self.den.contains_symbol(id)
    }

    pub fn symbols(&self) -> alloc::collections::BTreeSet<SymbolId> {
        let mut s = self.num.symbols();
        s.extend(self.den.symbols());
        s
    }

    /// Re-establishes the normal form. Idempotent.
    pub fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = SparsePoly::one();
            return;
        }
        // integer content of the pair
        let l = num_integer::lcm(self.num.denominator_lcm(), self.den.denominator_lcm());
        if !l.is_one() {
            let f = Q::from_integer(l);
            self.num = self.num.scale(&f);
            self.den = self.den.scale(&f);
        }
        let g = num_integer::gcd(self.num.numerator_gcd(), self.den.numerator_gcd());
        if !g.is_one() {
            let f = Q::new(BigInt::one(), g);
            self.num = self.num.scale(&f);
            self.den = self.den.scale(&f);
        }
        // shared monomial factor
        let m = self.num.monomial_content().gcd(&self.den.monomial_content());
        if !m.is_one() {
            self.num = self.num.div_monomial(&m);
            self.den = self.den.div_monomial(&m);
        }
        if let Some(c) = self.den.as_constant() {
            self.num = self.num.scale(&c.recip());
            self.den = SparsePoly::one();
            return;
        }
        if !self.den.is_monomial() {
            if let Some(q) = self.num.exact_div(&self.den) {
                self.num = q;
                self.den = SparsePoly::one();
                return;
            }
            if self.num.num_terms().max(self.den.num_terms()) > gcd_term_threshold() {
                let g = gcd::gcd(&self.num, &self.den);
                if !g.is_constant() {
                    self.num = self.num.exact_div(&g).expect("gcd divides");
                    self.den = self.den.exact_div(&g).expect("gcd divides");
                    self.normalize();
                    return;
                }
            }
        }
        if self.den.leading_coefficient().is_negative() {
            self.num = -core::mem::take(&mut self.num);
            self.den = -core::mem::take(&mut self.den);
        }
    }

    /// Cancels the full polynomial gcd of numerator and denominator.
    pub fn reduce(&self) -> Self {
        if self.den.is_constant() || self.num.is_zero() {
            return self.clone();
        }
        let g = gcd::gcd(&self.num, &self.den);
        if g.is_constant() {
            return self.clone();
        }
        Self::new(self.num.exact_div(&g).expect("gcd divides"), self.den.exact_div(&g).expect("gcd divides"))
            .expect("nonzero denominator")
    }

    pub fn inv(&self) -> Result<Self, KernelError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &RationalFunction) -> Result<Self, KernelError> {
        if rhs.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        Self::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.num.scale(c), self.den.clone()).expect("nonzero denominator")
    }

    pub fn pow(&self, k: i32) -> Result<Self, KernelError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let e = k.unsigned_abs();
        Self::new(base.num.pow(e), base.den.pow(e))
    }

    pub fn differentiate(&self, id: SymbolId) -> Self {
        let dn = self.num.differentiate(id);
        if self.den.is_one() {
            return Self::from_poly(dn);
        }
        let dd = self.den.differentiate(id);
        if dd.is_zero() {
            return Self::new(dn, self.den.clone()).expect("nonzero denominator");
        }
        Self::new(&(&dn * &self.den) - &(&self.num * &dd), self.den.pow(2)).expect("nonzero denominator")
    }

    /// Simultaneous substitution of symbols by rational functions. A
    /// replacement may mention its own symbol (`u -> u + e`) but no other
    /// bound symbol.
    pub fn substitute(&self, bindings: &BTreeMap<SymbolId, RationalFunction>) -> Result<Self, KernelError> {
        for (s, r) in bindings {
            if let Some(bad) = bindings.keys().find(|&&k| k != *s && r.contains_symbol(k)) {
                return Err(KernelError::CyclicBinding { bound: *s, occurs: *bad });
            }
        }
        let relevant: BTreeMap<SymbolId, RationalFunction> = bindings
            .iter()
            .filter(|(s, _)| self.contains_symbol(**s))
            .map(|(s, r)| (*s, r.clone()))
            .collect();
        if relevant.is_empty() {
            return Ok(self.clone());
        }
        let (n, nd) = substitute_poly(&self.num, &relevant);
        let (d, dd) = substitute_poly(&self.den, &relevant);
        Self::new(&n * &dd, &d * &nd)
    }

    /// Exact evaluation; `None` when a symbol is unbound, `Some(Err)` at a pole.
    pub fn eval(&self, values: &BTreeMap<SymbolId, Q>) -> Option<Result<Q, KernelError>> {
        let n = self.num.eval(values)?;
        let d = self.den.eval(values)?;
        if d.is_zero() {
            return Some(Err(KernelError::DivisionByZero));
        }
        Some(Ok(n / d))
    }

    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        self.num.eval_f64(values) / self.den.eval_f64(values)
    }
}

/// Substitutes into a polynomial over a common denominator: returns
/// `(N, D)` with `p[bindings] = N / D`.
fn substitute_poly(p: &SparsePoly, bindings: &BTreeMap<SymbolId, RationalFunction>) -> (SparsePoly, SparsePoly) {
    let max_deg: BTreeMap<SymbolId, u32> = bindings.keys().map(|&s| (s, p.degree_in(s))).collect();
    let mut common = SparsePoly::one();
    for (s, r) in bindings {
        common = &common * &r.den.pow(max_deg[s]);
    }
    let mut pow_cache: BTreeMap<(SymbolId, u32, bool), SparsePoly> = BTreeMap::new();
    let mut out = SparsePoly::zero();
    for (m, c) in p.terms() {
        let mut rest = alloc::vec::Vec::new();
        let mut factor = SparsePoly::constant(c.clone());
        let mut used: BTreeMap<SymbolId, u32> = BTreeMap::new();
        for (s, e) in m.iter() {
            if let Some(r) = bindings.get(&s) {
                let np = pow_cache.entry((s, e, true)).or_insert_with(|| r.num.pow(e)).clone();
                factor = &factor * &np;
                used.insert(s, e);
            } else {
                rest.push((s, e));
            }
        }
        for (s, r) in bindings {
            let e = used.get(s).copied().unwrap_or(0);
            let k = max_deg[s] - e;
            if k > 0 {
                let dp = pow_cache.entry((*s, k, false)).or_insert_with(|| r.den.pow(k)).clone();
                factor = &factor * &dp;
            }
        }
        out = &out + &factor.mul_monomial(&Monomial::from_pairs(rest));
    }
    (out, common)
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        &self.num * &other.den == &other.num * &self.den
    }
}

impl From<SparsePoly> for RationalFunction {
    fn from(p: SparsePoly) -> Self {
        Self::from_poly(p)
    }
}

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -self.num, den: self.den }
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -self.clone()
    }
}

impl Add<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero denominator");
        }
        if rhs.den.is_one() {
            return RationalFunction::new(&self.num + &(&rhs.num * &self.den), self.den.clone()).expect("nonzero");
        }
        if self.den.is_one() {
            return RationalFunction::new(&(&self.num * &rhs.den) + &rhs.num, rhs.den.clone()).expect("nonzero");
        }
        RationalFunction::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
            .expect("nonzero denominator")
    }
}

impl Sub<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominator")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $f(self, rhs: RationalFunction) -> RationalFunction {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $f(self, rhs: &RationalFunction) -> RationalFunction {
                (&self).$f(rhs)
            }
        }
        impl $tr<RationalFunction> for &RationalFunction {
            type Output = RationalFunction;
            fn $f(self, rhs: RationalFunction) -> RationalFunction {
                self.$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}
