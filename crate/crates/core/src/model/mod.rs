//! Model definitions, the `.psm` text format, and structured export.

mod document;
mod fixtures;
mod parse;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

pub use document::{export_model, import_model, ModelDocument, OrderedMap};
pub use fixtures::{FixtureId, FIXTURE_DIR};
pub use parse::{parse_expr, parse_model, ParseError, ParseErrorKind};

use crate::sym::{PrettyExt, RationalFunction, SymbolId, SymbolKind, SymbolTable};

/// Name of the implicit time symbol.
pub const TIME_NAME: &str = "t";

/// A validated ODE model `dx/dt = f(x, θ, u)`, `y = h(x, θ, u)`.
#[derive(Debug, Clone)]
pub struct ModelDef {
    pub name: String,
    pub table: SymbolTable,
    pub time: SymbolId,
    pub states: Vec<SymbolId>,
    pub params: Vec<SymbolId>,
    pub inputs: Vec<SymbolId>,
    /// Right-hand sides aligned with `states`.
    pub dynamics: Vec<RationalFunction>,
    pub outputs: Vec<(String, RationalFunction)>,
}

impl ModelDef {
    pub fn state_index(&self, id: SymbolId) -> Option<usize> {
        self.states.iter().position(|&s| s == id)
    }

    pub fn param_index(&self, id: SymbolId) -> Option<usize> {
        self.params.iter().position(|&s| s == id)
    }

    pub fn rhs(&self, state: SymbolId) -> Option<&RationalFunction> {
        self.state_index(state).map(|i| &self.dynamics[i])
    }

    pub fn name_of(&self, id: SymbolId) -> &str {
        self.table.name(id)
    }

    pub fn state_set(&self) -> BTreeSet<SymbolId> {
        self.states.iter().copied().collect()
    }

    pub fn input_set(&self) -> BTreeSet<SymbolId> {
        self.inputs.iter().copied().collect()
    }

    /// Size of a `Vec<f64>` indexed by symbol id that covers every model symbol.
    pub fn slot_count(&self) -> usize {
        self.table.len()
    }

    /// Renders the model in the `.psm` grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |ids: &[SymbolId]| ids.iter().map(|&s| self.table.name(s)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "model {}", self.name);
        let _ = writeln!(out, "states {}", join(&self.states));
        if !self.params.is_empty() {
            let _ = writeln!(out, "params {}", join(&self.params));
        }
        if !self.inputs.is_empty() {
            let _ = writeln!(out, "inputs {}", join(&self.inputs));
        }
        for (s, f) in self.states.iter().zip(&self.dynamics) {
            let _ = writeln!(out, "d{}/dt = {}", self.table.name(*s), f.pretty(&self.table));
        }
        for (n, h) in &self.outputs {
            let _ = writeln!(out, "output {} = {}", n, h.pretty(&self.table));
        }
        out
    }

    pub fn expr_text(&self, e: &RationalFunction) -> String {
        format!("{}", e.pretty(&self.table))
    }

    /// Symbols of the given kind in declaration order.
    pub fn symbols_of(&self, kind: SymbolKind) -> &[SymbolId] {
        match kind {
            SymbolKind::State => &self.states,
            SymbolKind::Param => &self.params,
            SymbolKind::Input => &self.inputs,
            _ => &[],
        }
    }
}

/// Structural equality: same names in the same order and equal expressions.
impl PartialEq for ModelDef {
    fn eq(&self, other: &Self) -> bool {
        let names = |m: &ModelDef, ids: &[SymbolId]| ids.iter().map(|&s| String::from(m.table.name(s))).collect::<Vec<_>>();
        self.name == other.name
            && names(self, &self.states) == names(other, &other.states)
            && names(self, &self.params) == names(other, &other.params)
            && names(self, &self.inputs) == names(other, &other.inputs)
            && self.table.len() == other.table.len()
            && self.states == other.states
            && self.params == other.params
            && self.inputs == other.inputs
            && self.dynamics == other.dynamics
            && self.outputs == other.outputs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn undeclared_state_is_reported() {
        let err = parse_model("model m\nstates y\nparams a\ndx/dt = a*x\ndy/dt = a\noutput o = y\n").unwrap_err();
        assert_eq!(err.line, 4);
        assert!(matches!(err.kind, ParseErrorKind::Undeclared { ref name } if name == "x"));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_model("model m\nstates x\nparams a\ndx/dt = a*q\noutput o = x\n").unwrap_err();
        assert_eq!((err.line, err.col), (4, 11));
        assert!(err.to_string().contains("`q`"));
        let err = parse_model("model m\nstates x, x\nparams a\ndx/dt = a\noutput o = x\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Duplicate { .. }));
        let err = parse_model("model m\nstates x\nparams a\noutput o = x\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::MissingDynamics { .. }));
        let err = parse_model("model m\nstates x\nparams a\ndx/dt = a*t\noutput o = x\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TimeInExpression);
        let err = parse_model("model m\nstates x\nparams a\ndx/dt = a\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Missing { what: "outputs" }));
        let err = parse_model("model m\nstates x\nparams a\ndx/dt = a\noutput x = x\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Duplicate { .. }));
    }

    #[test]
    fn symbol_ids_follow_declaration_order() {
        let m = parse_model("model m\ninputs w\nparams b, a\nstates z\ndz/dt = a*z + b*w\noutput y = z\n").unwrap();
        assert_eq!(m.time.0, 0);
        assert_eq!(m.states, [SymbolId(1)]);
        assert_eq!(m.params, [SymbolId(2), SymbolId(3)]);
        assert_eq!(m.inputs, [SymbolId(4)]);
        assert_eq!(m.table.name(SymbolId(2)), "b");
    }

    #[test]
    fn text_round_trip() {
        let m = parse_model(
            "model r\nstates x, y\nparams k\ndx/dt = (x - 2*y)/(k*x^2 + 1)\ndy/dt = -3/4*x*y^-2\noutput o = x/(k*y)\n",
        )
        .unwrap();
        let again = parse_model(&m.to_text()).unwrap();
        assert_eq!(m, again);
    }
}
