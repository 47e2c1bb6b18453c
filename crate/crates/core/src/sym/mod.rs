//! Exact symbolic kernel: rationals, sparse polynomials, rational
//! functions, differentiation, substitution and coefficient collection.

mod gcd;
mod monomial;
mod poly;
mod print;
mod rational;
mod symbol;

use alloc::collections::{BTreeMap, BTreeSet};

pub use gcd::{content_in, gcd, gcd_many};
pub use monomial::Monomial;
pub use poly::SparsePoly;
pub use print::{Pretty, PrettyExt};
pub use rational::{gcd_term_threshold, set_gcd_term_threshold, RationalFunction};
pub use symbol::{Symbol, SymbolId, SymbolKind, SymbolTable};

/// Arbitrary-precision rational coefficient.
pub type Q = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("cyclic substitution: replacement for {bound} contains bound symbol {occurs}")]
    CyclicBinding { bound: SymbolId, occurs: SymbolId },
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(alloc::string::String),
}

/// Partial derivative of `e` with respect to `s`.
pub fn differentiate(e: &RationalFunction, s: SymbolId) -> RationalFunction {
    e.differentiate(s)
}

pub fn substitute(
    e: &RationalFunction,
    bindings: &BTreeMap<SymbolId, RationalFunction>,
) -> Result<RationalFunction, KernelError> {
    e.substitute(bindings)
}

pub fn collect(e: &SparsePoly, along: &BTreeSet<SymbolId>) -> BTreeMap<Monomial, SparsePoly> {
    e.collect(along)
}

pub fn is_zero(e: &RationalFunction) -> bool {
    e.is_zero()
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}
