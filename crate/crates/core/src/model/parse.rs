//! Line-oriented model file grammar.
//!
//! ```text
//! model <ident>
//! states <ident>(, <ident>)*
//! params <ident>(, <ident>)*
//! inputs <ident>(, <ident>)*          optional
//! d<state>/dt = <expr>                one per state
//! output <ident> = <expr>             at least one
//! ```
//!
//! Expressions use `+ - * / ^` with integer exponents, parentheses and
//! integer or decimal literals. `#` starts a comment.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;

use super::{ModelDef, TIME_NAME};
use crate::sym::{RationalFunction, SymbolId, SymbolKind, SymbolTable, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax { found: String, expected: &'static str },
    Undeclared { name: String },
    Duplicate { name: String },
    MissingDynamics { state: String },
    NonRational { token: String, reason: &'static str },
    TimeInExpression,
    DivisionByZero { token: String },
    Missing { what: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}: ", self.line, self.col)?;
        }
        match &self.kind {
            ParseErrorKind::Syntax { found, expected } => write!(f, "syntax error at `{found}`, expected {expected}"),
            ParseErrorKind::Undeclared { name } => write!(f, "undeclared symbol `{name}`"),
            ParseErrorKind::Duplicate { name } => write!(f, "duplicate declaration of `{name}`"),
            ParseErrorKind::MissingDynamics { state } => write!(f, "missing dynamics for state `{state}`"),
            ParseErrorKind::NonRational { token, reason } => write!(f, "non-rational construct at `{token}`: {reason}"),
            ParseErrorKind::TimeInExpression => write!(f, "time symbol `{TIME_NAME}` may not appear in expressions"),
            ParseErrorKind::DivisionByZero { token } => write!(f, "division by zero at `{token}`"),
            ParseErrorKind::Missing { what } => write!(f, "model has no {what}"),
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Q, String),
    Op(char),
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(_, s) => s.clone(),
            Tok::Op(c) => c.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex(line_no: usize, line: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let value = parse_decimal(&text).ok_or_else(|| ParseError {
                line: line_no,
                col,
                kind: ParseErrorKind::Syntax { found: text.clone(), expected: "a number" },
            })?;
            out.push(Spanned { tok: Tok::Number(value, text), col });
            continue;
        }
        if "+-*/^()=,".contains(c) {
            out.push(Spanned { tok: Tok::Op(c), col });
            i += 1;
            continue;
        }
        return Err(ParseError {
            line: line_no,
            col,
            kind: ParseErrorKind::Syntax { found: c.to_string(), expected: "an expression token" },
        });
    }
    Ok(out)
}

fn parse_decimal(text: &str) -> Option<Q> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits: String = [int, frac].concat();
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow::pow(BigInt::from(10), frac.len());
    Some(Q::new(n, d))
}

struct ExprParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    table: &'a SymbolTable,
    line_len: usize,
}

impl ExprParser<'_> {
    fn err(&self, col: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, col, kind }
    }

    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn peek_op(&self, c: char) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Op(o), .. }) if *o == c)
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(s) => self.err(s.col, ParseErrorKind::Syntax { found: s.tok.text(), expected }),
            None => self.err(self.line_len + 1, ParseErrorKind::Syntax { found: "end of line".into(), expected }),
        }
    }

    fn expr(&mut self) -> Result<RationalFunction, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.peek_op('+') {
                self.pos += 1;
                acc = &acc + &self.term()?;
            } else if self.peek_op('-') {
                self.pos += 1;
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.peek_op('*') {
                self.pos += 1;
                acc = &acc * &self.unary()?;
            } else if self.peek_op('/') {
                let col = self.peek().unwrap().col;
                self.pos += 1;
                let start = self.pos;
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    let token = self.toks[start..self.pos].iter().map(|s| s.tok.text()).collect::<String>();
                    return Err(self.err(col, ParseErrorKind::DivisionByZero { token }));
                }
                acc = acc.div(&rhs).expect("nonzero divisor");
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction, ParseError> {
        if self.peek_op('-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.peek_op('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction, ParseError> {
        let base = self.atom()?;
        if !self.peek_op('^') {
            return Ok(base);
        }
        let caret_col = self.peek().unwrap().col;
        self.pos += 1;
        let exp = self.exponent()?;
        if base.is_zero() && exp < 0 {
            return Err(self.err(caret_col, ParseErrorKind::DivisionByZero { token: "^".into() }));
        }
        Ok(base.pow(exp).expect("nonzero base"))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = self.peek_op('(');
        if paren {
            self.pos += 1;
        }
        let neg = self.peek_op('-');
        if neg {
            self.pos += 1;
        }
        let Some(s) = self.peek().cloned() else {
            return Err(self.unexpected("an integer exponent"));
        };
        let value = match &s.tok {
            Tok::Number(v, text) if v.is_integer() && !text.contains('.') => {
                let n: i32 = text.parse().map_err(|_| {
                    self.err(s.col, ParseErrorKind::NonRational { token: text.clone(), reason: "exponent too large" })
                })?;
                n
            }
            Tok::Number(_, text) => {
                return Err(self.err(
                    s.col,
                    ParseErrorKind::NonRational { token: text.clone(), reason: "non-integer exponent" },
                ))
            }
            Tok::Ident(name) => {
                return Err(self.err(
                    s.col,
                    ParseErrorKind::NonRational { token: name.clone(), reason: "symbolic exponent" },
                ))
            }
            Tok::Op(_) => return Err(self.unexpected("an integer exponent")),
        };
        self.pos += 1;
        if paren {
            if !self.peek_op(')') {
                return Err(self.unexpected("`)`"));
            }
            self.pos += 1;
        }
        Ok(if neg { -value } else { value })
    }

    fn atom(&mut self) -> Result<RationalFunction, ParseError> {
        let Some(s) = self.peek().cloned() else {
            return Err(self.unexpected("an operand"));
        };
        match s.tok {
            Tok::Number(v, _) => {
                self.pos += 1;
                Ok(RationalFunction::constant(v))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if self.peek_op('(') {
                    return Err(self.err(s.col, ParseErrorKind::NonRational { token: name, reason: "function call" }));
                }
                let Some(id) = self.table.lookup(&name) else {
                    return Err(self.err(s.col, ParseErrorKind::Undeclared { name }));
                };
                if self.table.kind(id) == SymbolKind::Time {
                    return Err(self.err(s.col, ParseErrorKind::TimeInExpression));
                }
                Ok(RationalFunction::var(id))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.peek_op(')') {
                    return Err(self.unexpected("`)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Tok::Op(_) => Err(self.unexpected("an operand")),
        }
    }
}

/// Parses a standalone expression against `table`.
pub fn parse_expr(text: &str, table: &SymbolTable) -> Result<RationalFunction, ParseError> {
    let toks = lex(1, text)?;
    parse_tokens(&toks, 1, text.chars().count(), table)
}

fn parse_tokens(toks: &[Spanned], line: usize, line_len: usize, table: &SymbolTable) -> Result<RationalFunction, ParseError> {
    let mut p = ExprParser { toks, pos: 0, line, table, line_len };
    let e = p.expr()?;
    if p.pos < toks.len() {
        return Err(p.unexpected("an operator or end of line"));
    }
    Ok(e)
}

fn ident_list(line_no: usize, toks: &[Spanned]) -> Result<Vec<(String, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut expect_ident = true;
    for s in toks {
        match (&s.tok, expect_ident) {
            (Tok::Ident(n), true) => out.push((n.clone(), s.col)),
            (Tok::Op(','), false) => {}
            (t, true) => {
                return Err(ParseError {
                    line: line_no,
                    col: s.col,
                    kind: ParseErrorKind::Syntax { found: t.text(), expected: "an identifier" },
                })
            }
            (t, false) => {
                return Err(ParseError {
                    line: line_no,
                    col: s.col,
                    kind: ParseErrorKind::Syntax { found: t.text(), expected: "`,`" },
                })
            }
        }
        expect_ident = !expect_ident;
    }
    if out.is_empty() || expect_ident {
        let col = toks.last().map(|s| s.col + 1).unwrap_or(1);
        return Err(ParseError {
            line: line_no,
            col,
            kind: ParseErrorKind::Syntax { found: "end of line".into(), expected: "an identifier" },
        });
    }
    Ok(out)
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<ModelDef, ParseError> {
    let lines: Vec<(usize, &str, Vec<Spanned>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| lex(i + 1, l).map(|t| (i + 1, l, t)))
        .collect::<Result<_, _>>()?;

    let mut name: Option<String> = None;
    let mut states: Vec<(String, usize, usize)> = Vec::new();
    let mut params: Vec<(String, usize, usize)> = Vec::new();
    let mut inputs: Vec<(String, usize, usize)> = Vec::new();
    let mut equations: Vec<(usize, usize, &[Spanned])> = Vec::new();

    for (line_no, raw, toks) in &lines {
        let Some(first) = toks.first() else { continue };
        let kw = match &first.tok {
            Tok::Ident(s) => s.as_str(),
            t => {
                return Err(ParseError {
                    line: *line_no,
                    col: first.col,
                    kind: ParseErrorKind::Syntax { found: t.text(), expected: "a statement keyword" },
                })
            }
        };
        match kw {
            "model" => {
                if name.is_some() {
                    return Err(ParseError {
                        line: *line_no,
                        col: first.col,
                        kind: ParseErrorKind::Duplicate { name: "model".into() },
                    });
                }
                let ids = ident_list(*line_no, &toks[1..])?;
                if ids.len() != 1 {
                    return Err(ParseError {
                        line: *line_no,
                        col: ids[1].1,
                        kind: ParseErrorKind::Syntax { found: ids[1].0.clone(), expected: "end of line" },
                    });
                }
                name = Some(ids[0].0.clone());
            }
            "states" | "params" | "inputs" => {
                let target = match kw {
                    "states" => &mut states,
                    "params" => &mut params,
                    _ => &mut inputs,
                };
                for (n, col) in ident_list(*line_no, &toks[1..])? {
                    target.push((n, *line_no, col));
                }
            }
            _ => {
                equations.push((*line_no, raw.chars().count(), toks.as_slice()));
            }
        }
    }

    // missing statements are reported at the end of the input
    let eof = lines.len().max(1);
    let name = name.ok_or(ParseError { line: eof, col: 1, kind: ParseErrorKind::Missing { what: "`model` line" } })?;
    if states.is_empty() {
        return Err(ParseError { line: eof, col: 1, kind: ParseErrorKind::Missing { what: "states" } });
    }

    let mut table = SymbolTable::new();
    let time = table.declare(TIME_NAME, SymbolKind::Time).expect("fresh table");
    let declare = |list: &[(String, usize, usize)], kind: SymbolKind, table: &mut SymbolTable| {
        list.iter()
            .map(|(n, line, col)| {
                table.declare(n, kind).map_err(|_| ParseError {
                    line: *line,
                    col: *col,
                    kind: ParseErrorKind::Duplicate { name: n.clone() },
                })
            })
            .collect::<Result<Vec<SymbolId>, ParseError>>()
    };
    let state_ids = declare(&states, SymbolKind::State, &mut table)?;
    let param_ids = declare(&params, SymbolKind::Param, &mut table)?;
    let input_ids = declare(&inputs, SymbolKind::Input, &mut table)?;

    let mut dynamics: BTreeMap<SymbolId, RationalFunction> = BTreeMap::new();
    let mut outputs: Vec<(String, RationalFunction)> = Vec::new();

    for (line_no, len, toks) in equations {
        let err_at = |s: &Spanned, expected: &'static str| ParseError {
            line: line_no,
            col: s.col,
            kind: ParseErrorKind::Syntax { found: s.tok.text(), expected },
        };
        let first = &toks[0];
        let Tok::Ident(head) = &first.tok else { unreachable!("checked above") };
        if head == "output" {
            let Some(n) = toks.get(1) else {
                return Err(ParseError {
                    line: line_no,
                    col: len + 1,
                    kind: ParseErrorKind::Syntax { found: "end of line".into(), expected: "an output name" },
                });
            };
            let Tok::Ident(out_name) = &n.tok else { return Err(err_at(n, "an output name")) };
            match toks.get(2) {
                Some(Spanned { tok: Tok::Op('='), .. }) => {}
                Some(s) => return Err(err_at(s, "`=`")),
                None => {
                    return Err(ParseError {
                        line: line_no,
                        col: len + 1,
                        kind: ParseErrorKind::Syntax { found: "end of line".into(), expected: "`=`" },
                    })
                }
            }
            if outputs.iter().any(|(o, _)| o == out_name) || table.lookup(out_name).is_some() {
                return Err(ParseError {
                    line: line_no,
                    col: n.col,
                    kind: ParseErrorKind::Duplicate { name: out_name.clone() },
                });
            }
            let e = parse_tokens(&toks[3..], line_no, len, &table)?;
            outputs.push((out_name.clone(), e));
            continue;
        }
        // d<state>/dt = expr
        let shape_ok = head.len() > 1
            && head.starts_with('d')
            && matches!(toks.get(1), Some(Spanned { tok: Tok::Op('/'), .. }))
            && matches!(toks.get(2), Some(Spanned { tok: Tok::Ident(t), .. }) if t == "dt")
            && matches!(toks.get(3), Some(Spanned { tok: Tok::Op('='), .. }));
        if !shape_ok {
            return Err(err_at(first, "`model`, `states`, `params`, `inputs`, `output` or `d<state>/dt`"));
        }
        let state_name = &head[1..];
        let id = match table.lookup(state_name) {
            Some(id) if table.kind(id) == SymbolKind::State => id,
            _ => {
                return Err(ParseError {
                    line: line_no,
                    col: first.col + 1,
                    kind: ParseErrorKind::Undeclared { name: state_name.into() },
                })
            }
        };
        if dynamics.contains_key(&id) {
            return Err(ParseError {
                line: line_no,
                col: first.col,
                kind: ParseErrorKind::Duplicate { name: head.clone() },
            });
        }
        let e = parse_tokens(&toks[4..], line_no, len, &table)?;
        dynamics.insert(id, e);
    }

    let mut dyn_vec = Vec::with_capacity(state_ids.len());
    for (&s, (_, line, col)) in state_ids.iter().zip(&states) {
        match dynamics.remove(&s) {
            Some(e) => dyn_vec.push(e),
            None => {
                return Err(ParseError {
                    line: *line,
                    col: *col,
                    kind: ParseErrorKind::MissingDynamics { state: table.name(s).into() },
                })
            }
        }
    }
    if outputs.is_empty() {
        return Err(ParseError { line: eof, col: 1, kind: ParseErrorKind::Missing { what: "outputs" } });
    }
    Ok(ModelDef {
        name,
        table,
        time,
        states: state_ids,
        params: param_ids,
        inputs: input_ids,
        dynamics: dyn_vec,
        outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.25"), Some(Q::new(1.into(), 4.into())));
        assert_eq!(parse_decimal("12"), Some(Q::from_integer(12.into())));
        assert_eq!(parse_decimal("1.2.3"), None);
        assert!(parse_decimal(".5").is_some_and(|q| q == Q::new(1.into(), 2.into())));
    }

    #[test]
    fn expression_precedence() {
        let mut t = SymbolTable::new();
        let x = t.declare("x", SymbolKind::State).unwrap();
        let e = parse_expr("-x^2 + 3*x/2 - (x - 1)^-1", &t).unwrap();
        let xv = RationalFunction::var(x);
        let expected = &(&(-xv.pow(2).unwrap()) + &xv.scale(&Q::new(3.into(), 2.into())))
            - &(&xv - &RationalFunction::one()).inv().unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn rejects_non_rational() {
        let mut t = SymbolTable::new();
        t.declare("x", SymbolKind::State).unwrap();
        let e = parse_expr("exp(x)", &t).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::NonRational { ref token, .. } if token == "exp"));
        let e = parse_expr("x^0.5", &t).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::NonRational { ref token, .. } if token == "0.5"));
        let e = parse_expr("x^x", &t).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::NonRational { .. }));
        assert!(matches!(parse_expr("x/0", &t).unwrap_err().kind, ParseErrorKind::DivisionByZero { .. }));
        assert!(matches!(parse_expr("x +", &t).unwrap_err().kind, ParseErrorKind::Syntax { .. }));
        assert!(matches!(parse_expr("x $ 2", &t).unwrap_err().kind, ParseErrorKind::Syntax { .. }));
    }
}
