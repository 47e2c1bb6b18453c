//! Typed symbol table shared by every expression in an analysis.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::KernelError;

/// Index of a symbol in its [`SymbolTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    Time,
    State,
    Param,
    Input,
    /// Linear unknowns introduced during elimination (infinitesimals, ansatz coefficients).
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub id: SymbolId,
    pub name: String,
    pub kind: SymbolKind,
}

/// Append-only table of symbols. Ids are assigned in declaration order and
/// never reused, so expressions built against a prefix of a table remain
/// valid against every extension of it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
    by_name: BTreeMap<String, SymbolId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, kind: SymbolKind) -> Result<SymbolId, KernelError> {
        if self.by_name.contains_key(name) {
            return Err(KernelError::DuplicateSymbol(name.into()));
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(Symbol { id, name: name.into(), kind });
        self.by_name.insert(name.into(), id);
        Ok(id)
    }

    /// Declares `base`, or `base_1`, `base_2`, ... when the name is taken.
    pub fn declare_fresh(&mut self, base: &str, kind: SymbolKind) -> SymbolId {
        if !self.by_name.contains_key(base) {
            return self.declare(base, kind).expect("name checked free");
        }
        let mut k = 1usize;
        loop {
            let name = alloc::format!("{base}_{k}");
            if !self.by_name.contains_key(&name) {
                return self.declare(&name, kind).expect("name checked free");
            }
            k += 1;
        }
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.index()]
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.index()].name
    }

    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.symbols[id.index()].kind
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter()
    }

    pub fn of_kind(&self, kind: SymbolKind) -> Vec<SymbolId> {
        self.symbols.iter().filter(|s| s.kind == kind).map(|s| s.id).collect()
    }
}
