//! Parameter-state symmetry generators: condition construction, the
//! elimination pipeline, and exact verification.

mod eliminate;
pub mod linalg;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use eliminate::{eliminate, SymmetryError};
pub use linalg::nullspace;

use crate::model::ModelDef;
use crate::sym::{Monomial, PrettyExt, RationalFunction, SymbolId, SymbolKind, SymbolTable};

/// Degrees of the polynomial ansatz used when elimination stalls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub eta_state_degree: u32,
    /// Accepted for interface compatibility. Ansatz coefficients are free
    /// over the parameter function field, which contains every polynomial
    /// degree.
    pub eta_param_degree: u32,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig { eta_state_degree: 1, eta_param_degree: 2 }
    }
}

/// Infinitesimal generator `Σ η_i ∂x_i + Σ χ_l ∂θ_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    /// Aligned with the model's states.
    pub eta: Vec<RationalFunction>,
    /// Aligned with the model's parameters.
    pub chi: Vec<RationalFunction>,
    pub normalized: bool,
}

impl Generator {
    pub fn zero(m: &ModelDef) -> Self {
        Generator {
            eta: alloc::vec![RationalFunction::zero(); m.states.len()],
            chi: alloc::vec![RationalFunction::zero(); m.params.len()],
            normalized: true,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.eta.iter().chain(&self.chi).all(RationalFunction::is_zero)
    }

    /// Directional derivative `X(e)`.
    pub fn apply(&self, m: &ModelDef, e: &RationalFunction) -> RationalFunction {
        let mut acc = RationalFunction::zero();
        for (&s, eta) in m.states.iter().zip(&self.eta) {
            if !eta.is_zero() && e.contains_symbol(s) {
                acc = &acc + &(eta * &e.differentiate(s));
            }
        }
        for (&p, chi) in m.params.iter().zip(&self.chi) {
            if !chi.is_zero() && e.contains_symbol(p) {
                acc = &acc + &(chi * &e.differentiate(p));
            }
        }
        acc
    }

    pub fn scale(&self, c: &RationalFunction) -> Self {
        Generator {
            eta: self.eta.iter().map(|e| e * c).collect(),
            chi: self.chi.iter().map(|e| e * c).collect(),
            normalized: false,
        }
    }

    /// All entries in state order then parameter order.
    pub fn entries(&self) -> impl Iterator<Item = &RationalFunction> {
        self.eta.iter().chain(&self.chi)
    }

    pub fn display<'a>(&'a self, m: &'a ModelDef) -> GeneratorDisplay<'a> {
        GeneratorDisplay { g: self, m }
    }
}

pub struct GeneratorDisplay<'a> {
    g: &'a Generator,
    m: &'a ModelDef,
}

impl fmt::Display for GeneratorDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.m;
        let syms = m.states.iter().chain(&m.params);
        let mut first = true;
        for (&s, e) in syms.zip(self.g.entries()) {
            if e.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({})*d_{}", e.pretty(&m.table), m.table.name(s))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// An η left undetermined up to a scalar PDE in its own state direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSlot {
    pub state: SymbolId,
    /// The slot state followed by states whose η is forced to follow it.
    pub support: Vec<SymbolId>,
    /// `(x_j, r_j)` meaning `η_j = r_j · η_slot`.
    pub relations: Vec<(SymbolId, RationalFunction)>,
    /// Residual condition in the slot's formal `eta_*` / `deta_*` unknowns.
    pub coupling: RationalFunction,
    /// Exact generators with `χ ≡ 0` found in the slot's ansatz space.
    pub witnesses: Vec<Generator>,
}

impl FreeSlot {
    pub fn witnessed(&self) -> bool {
        !self.witnesses.is_empty()
    }
}

/// One row of the collected linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    /// State/input monomial this row is the coefficient of.
    pub key: Monomial,
    /// Equation the residual came from.
    pub source: String,
    /// Aligned with `LinearSystem::unknowns`.
    pub coeffs: Vec<RationalFunction>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearSystem {
    pub unknowns: Vec<SymbolId>,
    pub rows: Vec<LinearRow>,
}

impl LinearSystem {
    /// Distinct row sources in first-seen order.
    pub fn stages(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.source.as_str()) {
                out.push(&r.source);
            }
        }
        out
    }

    /// Rows of one stage restricted to the given unknown columns. `None` if
    /// some row of the stage has a nonzero coefficient outside `columns`.
    pub fn stage_matrix(&self, source: &str, columns: &[SymbolId]) -> Option<Vec<Vec<RationalFunction>>> {
        let idx: Vec<usize> = columns.iter().map(|c| self.unknowns.iter().position(|u| u == c)).collect::<Option<_>>()?;
        let mut out = Vec::new();
        for r in self.rows.iter().filter(|r| r.source == source) {
            let outside = r.coeffs.iter().enumerate().any(|(i, c)| !c.is_zero() && !idx.contains(&i));
            if outside {
                return None;
            }
            out.push(idx.iter().map(|&i| r.coeffs[i].clone()).collect());
        }
        Some(out)
    }

    pub fn matrix(&self) -> Vec<Vec<RationalFunction>> {
        self.rows.iter().map(|r| r.coeffs.clone()).collect()
    }
}

/// Record of one elimination decision, for reports.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceStep {
    Solved { source: String, state: SymbolId, expr: RationalFunction },
    Residual { source: String },
    DerivativeEliminated { source: String, state: SymbolId },
    Slot { state: SymbolId },
    Ansatz { states: Vec<SymbolId>, degree: u32 },
}

impl TraceStep {
    pub fn describe(&self, table: &SymbolTable) -> String {
        match self {
            TraceStep::Solved { source, state, expr } => {
                format!("{source}: eta_{} = {}", table.name(*state), expr.pretty(table))
            }
            TraceStep::Residual { source } => format!("{source}: residual constraint"),
            TraceStep::DerivativeEliminated { source, state } => {
                format!("{source}: eliminated D_t eta_{}", table.name(*state))
            }
            TraceStep::Slot { state } => format!("free slot eta_{}", table.name(*state)),
            TraceStep::Ansatz { states, degree } => {
                let names: Vec<&str> = states.iter().map(|&s| table.name(s)).collect();
                format!("degree-{degree} ansatz for eta of {}", names.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    pub generators: Vec<Generator>,
    pub free_slots: Vec<FreeSlot>,
    pub synthetic: Vec<Generator>,
    pub ansatz_config: AnsatzConfig,
    /// Model symbols followed by the pipeline's unknowns.
    pub table: SymbolTable,
    pub system: LinearSystem,
    pub trace: Vec<TraceStep>,
}

impl GeneratorBasis {
    pub fn empty(m: &ModelDef, cfg: AnsatzConfig) -> Self {
        GeneratorBasis {
            generators: Vec::new(),
            free_slots: Vec::new(),
            synthetic: Vec::new(),
            ansatz_config: cfg,
            table: m.table.clone(),
            system: LinearSystem::default(),
            trace: Vec::new(),
        }
    }

    /// Generators followed by synthetic slot generators.
    pub fn all(&self) -> impl Iterator<Item = &Generator> {
        self.generators.iter().chain(&self.synthetic)
    }

    pub fn slot_states(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.free_slots.iter().flat_map(|s| s.support.iter().copied())
    }
}

/// `D_t e = Σ f_i ∂e/∂x_i` with inputs held constant.
pub fn total_derivative_on_shell(e: &RationalFunction, m: &ModelDef) -> RationalFunction {
    let mut acc = RationalFunction::zero();
    for (&s, f) in m.states.iter().zip(&m.dynamics) {
        if e.contains_symbol(s) {
            acc = &acc + &(f * &e.differentiate(s));
        }
    }
    acc
}

/// First prolongation of a state infinitesimal when `ξ = 0`.
pub fn prolong_eta(eta: &RationalFunction, m: &ModelDef) -> RationalFunction {
    total_derivative_on_shell(eta, m)
}

/// Formal unknowns of the symmetry conditions.
#[derive(Debug, Clone)]
pub struct Unknowns {
    pub table: SymbolTable,
    pub eta: Vec<SymbolId>,
    pub deta: Vec<SymbolId>,
    pub chi: Vec<SymbolId>,
}

impl Unknowns {
    pub fn new(m: &ModelDef) -> Self {
        let mut table = m.table.clone();
        let make = |prefix: &str, ids: &[SymbolId], table: &mut SymbolTable| -> Vec<SymbolId> {
            ids.iter()
                .map(|&s| {
                    let name = format!("{prefix}_{}", m.table.name(s));
                    table.declare(&name, SymbolKind::Unknown).unwrap_or_else(|_| table.declare_fresh(&name, SymbolKind::Unknown))
                })
                .collect()
        };
        let eta = make("eta", &m.states, &mut table);
        let deta = make("deta", &m.states, &mut table);
        let chi = make("chi", &m.params, &mut table);
        Unknowns { table, eta, deta, chi }
    }

    /// `D_t` extended to formal η's: `eta_k ↦ deta_k`.
    pub fn total_derivative(&self, e: &RationalFunction, m: &ModelDef) -> RationalFunction {
        let mut acc = total_derivative_on_shell(e, m);
        for (&eta, &deta) in self.eta.iter().zip(&self.deta) {
            if e.contains_symbol(eta) {
                acc = &acc + &(&RationalFunction::var(deta) * &e.differentiate(eta));
            }
        }
        acc
    }

    fn formal(&self) -> Generator {
        Generator {
            eta: self.eta.iter().map(|&s| RationalFunction::var(s)).collect(),
            chi: self.chi.iter().map(|&s| RationalFunction::var(s)).collect(),
            normalized: false,
        }
    }
}

/// A symbolic condition `expr = 0` with its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub source: String,
    pub expr: RationalFunction,
}

/// `X(h_j) = 0` for every output, in the formal unknowns.
pub fn build_output_conditions(m: &ModelDef, u: &Unknowns) -> Vec<Condition> {
    let x = u.formal();
    m.outputs
        .iter()
        .map(|(name, h)| Condition { source: format!("output {name}"), expr: x.apply(m, h) })
        .collect()
}

/// `D_t η_i − Σ η_k ∂f_i/∂x_k − Σ χ_l ∂f_i/∂θ_l = 0` for every state, with
/// the solved η's in `current` (keyed by state index) substituted.
pub fn build_linsym_conditions(
    m: &ModelDef,
    u: &Unknowns,
    current: &BTreeMap<usize, RationalFunction>,
) -> Vec<Condition> {
    let x = u.formal();
    let mut bindings = BTreeMap::new();
    for (&k, sol) in current {
        bindings.insert(u.eta[k], sol.clone());
        bindings.insert(u.deta[k], u.total_derivative(sol, m));
    }
    m.states
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let lhs = RationalFunction::var(u.deta[i]);
            let rhs = x.apply(m, &m.dynamics[i]);
            let mut expr = &lhs - &rhs;
            if !bindings.is_empty() {
                expr = expr.substitute(&bindings).expect("solutions are free of bound unknowns");
            }
            Condition { source: format!("d{}/dt", m.table.name(s)), expr }
        })
        .collect()
}

/// Exact check of the output and linearised symmetry conditions.
pub fn check_generator(g: &Generator, m: &ModelDef) -> bool {
    if g.eta.len() != m.states.len() || g.chi.len() != m.params.len() {
        return false;
    }
    let state_or_input = |e: &RationalFunction| m.states.iter().chain(&m.inputs).any(|&s| e.contains_symbol(s));
    if g.chi.iter().any(state_or_input) || g.eta.iter().any(|e| m.inputs.iter().any(|&s| e.contains_symbol(s))) {
        return false;
    }
    if m.outputs.iter().any(|(_, h)| !g.apply(m, h).is_zero()) {
        return false;
    }
    m.dynamics.iter().zip(&g.eta).all(|(f, eta)| (&prolong_eta(eta, m) - &g.apply(m, f)).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FixtureId;
    use crate::sym::q;

    fn var(m: &ModelDef, n: &str) -> RationalFunction {
        RationalFunction::var(m.table.lookup(n).unwrap())
    }

    #[test]
    fn total_derivative_examples() {
        let m = FixtureId::Decay.model();
        let d = total_derivative_on_shell(&var(&m, "u"), &m);
        assert_eq!(d, &var(&m, "kappa1") - &(&var(&m, "lambda") * &var(&m, "u")));
        assert!(total_derivative_on_shell(&var(&m, "lambda"), &m).is_zero());
        assert!(prolong_eta(&RationalFunction::int(7), &m).is_zero());
    }

    #[test]
    fn output_conditions_decay_and_sei() {
        let m = FixtureId::Decay.model();
        let u = Unknowns::new(&m);
        let c = build_output_conditions(&m, &u);
        assert_eq!(c.len(), 1);
        let expected = &RationalFunction::var(u.eta[0]) + &RationalFunction::var(u.eta[1]);
        assert_eq!(c[0].expr, expected);

        let m = FixtureId::Sei.model();
        let u = Unknowns::new(&m);
        let c = build_output_conditions(&m, &u);
        // k_E η_E + χ_{k_E} E = 0
        let ke = var(&m, "k_E");
        let e = var(&m, "E");
        let chi_ke = RationalFunction::var(u.chi[m.param_index(m.table.lookup("k_E").unwrap()).unwrap()]);
        let expected = &(&ke * &RationalFunction::var(u.eta[1])) + &(&chi_ke * &e);
        assert_eq!(c[0].expr, expected);
    }

    #[test]
    fn linsym_decay_right_hand_sides() {
        let m = FixtureId::Decay.model();
        let u = Unknowns::new(&m);
        let c = build_linsym_conditions(&m, &u, &BTreeMap::new());
        let l = var(&m, "lambda");
        let chi = |i: usize| RationalFunction::var(u.chi[i]);
        let rhs = &(&(-&l * &RationalFunction::var(u.eta[0])) + &chi(0)) - &(&chi(2) * &var(&m, "u"));
        assert_eq!(c[0].expr, &RationalFunction::var(u.deta[0]) - &rhs);
    }

    #[test]
    fn check_generator_cases() {
        let m = FixtureId::Glucose.model();
        let mut g = Generator::zero(&m);
        assert!(check_generator(&g, &m));
        let p2 = m.param_index(m.table.lookup("p2").unwrap()).unwrap();
        let p4 = m.param_index(m.table.lookup("p4").unwrap()).unwrap();
        g.chi[p2] = var(&m, "p2");
        g.chi[p4] = -var(&m, "p4");
        g.eta[1] = -var(&m, "x2");
        assert!(check_generator(&g, &m));
        g.eta[1] = var(&m, "x2").scale(&q(-2, 1));
        assert!(!check_generator(&g, &m));

        let m = FixtureId::Decay.model();
        let mut g = Generator::zero(&m);
        g.chi[2] = RationalFunction::one();
        assert!(!check_generator(&g, &m));
    }
}
