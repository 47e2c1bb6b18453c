//! Infix printing in the model-file expression grammar.

use core::fmt;

use num_traits::{One, Signed};

use super::{Monomial, RationalFunction, SparsePoly, SymbolTable, Q};

/// Pairs a value with the table needed to name its symbols.
pub struct Pretty<'a, T: ?Sized> {
    value: &'a T,
    table: &'a SymbolTable,
}

pub trait PrettyExt {
    fn pretty<'a>(&'a self, table: &'a SymbolTable) -> Pretty<'a, Self> {
        Pretty { value: self, table }
    }
}

impl PrettyExt for Monomial {}
impl PrettyExt for SparsePoly {}
impl PrettyExt for RationalFunction {}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial, table: &SymbolTable) -> fmt::Result {
    for (i, (s, e)) in m.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        f.write_str(table.name(s))?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Q) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Pretty<'_, Monomial> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value.is_one() {
            return f.write_str("1");
        }
        write_monomial(f, self.value, self.table)
    }
}

impl fmt::Display for Pretty<'_, SparsePoly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.value.terms().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write_rational(f, &a)?;
            } else {
                if !a.is_one() {
                    write_rational(f, &a)?;
                    f.write_str("*")?;
                }
                write_monomial(f, m, self.table)?;
            }
        }
        Ok(())
    }
}

fn needs_parens(p: &SparsePoly) -> bool {
    p.num_terms() > 1 || p.terms().any(|(m, c)| !c.is_one() || m.degree() > 1 || c.is_negative())
}

impl fmt::Display for Pretty<'_, RationalFunction> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.value;
        if r.den().is_one() {
            return write!(f, "{}", r.num().pretty(self.table));
        }
        if r.num().num_terms() > 1 {
            write!(f, "({})", r.num().pretty(self.table))?;
        } else {
            write!(f, "{}", r.num().pretty(self.table))?;
        }
        if needs_parens(r.den()) {
            write!(f, "/({})", r.den().pretty(self.table))
        } else {
            write!(f, "/{}", r.den().pretty(self.table))
        }
    }
}
