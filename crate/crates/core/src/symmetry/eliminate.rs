//! The elimination pipeline: output conditions, worklist solving of the
//! linearised conditions, free slots, ansatz fallback, and the final
//! collected linear system.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use super::linalg::{clear_denominators_keeping, nullspace, rref};
use super::{
    build_linsym_conditions, build_output_conditions, check_generator, total_derivative_on_shell, AnsatzConfig,
    FreeSlot, Generator, GeneratorBasis, LinearRow, LinearSystem, TraceStep, Unknowns,
};
use crate::model::ModelDef;
use crate::sym::{KernelError, Monomial, RationalFunction, SparsePoly, SymbolId, SymbolKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymmetryError {
    #[error("no output depends on a state; outputs carry no information")]
    NoInformation,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("emitted generator {0} fails the symmetry conditions")]
    Unsound(usize),
}

#[derive(Debug, Clone)]
struct Row {
    poly: SparsePoly,
    source: String,
}

struct Pipeline<'a> {
    m: &'a ModelDef,
    u: Unknowns,
    cfg: AnsatzConfig,
    sols: BTreeMap<usize, RationalFunction>,
    rows: Vec<Row>,
    residuals: Vec<Row>,
    slots: Vec<(usize, Row)>,
    trace: Vec<TraceStep>,
    inputs: BTreeSet<SymbolId>,
    unknowns: BTreeSet<SymbolId>,
    eta_of: BTreeMap<SymbolId, usize>,
    deta_of: BTreeMap<SymbolId, usize>,
    ansatz: BTreeMap<usize, Vec<(SymbolId, Monomial)>>,
}

impl<'a> Pipeline<'a> {
    fn new(m: &'a ModelDef, cfg: AnsatzConfig) -> Self {
        let u = Unknowns::new(m);
        let unknowns = u.eta.iter().chain(&u.deta).chain(&u.chi).copied().collect();
        let eta_of = u.eta.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let deta_of = u.deta.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Pipeline {
            m,
            u,
            cfg,
            sols: BTreeMap::new(),
            rows: Vec::new(),
            residuals: Vec::new(),
            slots: Vec::new(),
            trace: Vec::new(),
            inputs: m.input_set(),
            unknowns,
            eta_of,
            deta_of,
            ansatz: BTreeMap::new(),
        }
    }

    /// Numerator with integer content and non-unknown monomial factors removed.
    fn clean(&self, p: SparsePoly) -> SparsePoly {
        if p.is_zero() {
            return p;
        }
        let mc = p.monomial_content();
        let strip = Monomial::from_pairs(mc.iter().filter(|(s, _)| !self.unknowns.contains(s)));
        p.div_monomial(&strip).primitive()
    }

    fn row_from(&self, expr: &RationalFunction, source: String) -> Row {
        Row { poly: self.clean(expr.num().clone()), source }
    }

    fn etas(&self, p: &SparsePoly) -> BTreeSet<usize> {
        p.symbols().iter().filter_map(|s| self.eta_of.get(s).copied()).collect()
    }

    fn detas(&self, p: &SparsePoly) -> BTreeSet<usize> {
        p.symbols().iter().filter_map(|s| self.deta_of.get(s).copied()).collect()
    }

    fn is_slot(&self, k: usize) -> bool {
        self.slots.iter().any(|(s, _)| *s == k)
    }

    fn open(&self, k: usize) -> bool {
        !self.sols.contains_key(&k) && !self.is_slot(k) && !self.ansatz.contains_key(&k)
    }

    fn unknown_count(&self, p: &SparsePoly) -> usize {
        p.symbols().iter().filter(|s| self.unknowns.contains(s)).count()
    }

    fn substitute_rows(&mut self, bindings: &BTreeMap<SymbolId, RationalFunction>, include_all: bool) {
        let touch = |p: &SparsePoly| bindings.keys().any(|&k| p.contains_symbol(k));
        let mut lists = vec![core::mem::take(&mut self.rows)];
        if include_all {
            lists.push(core::mem::take(&mut self.residuals));
            lists.push(self.slots.iter().map(|(_, r)| r.clone()).collect());
        }
        let mut out: Vec<Vec<Row>> = Vec::new();
        for list in lists {
            out.push(
                list.into_iter()
                    .map(|r| {
                        if touch(&r.poly) {
                            let e = RationalFunction::from_poly(r.poly)
                                .substitute(bindings)
                                .expect("replacements are free of bound symbols");
                            self.row_from(&e, r.source)
                        } else {
                            r
                        }
                    })
                    .collect(),
            );
        }
        let mut it = out.into_iter();
        self.rows = it.next().unwrap();
        if include_all {
            self.residuals = it.next().unwrap();
            let slot_rows = it.next().unwrap();
            for ((_, r), new) in self.slots.iter_mut().zip(slot_rows) {
                *r = new;
            }
        }
        for sol in self.sols.values_mut() {
            if bindings.keys().any(|&k| sol.contains_symbol(k)) {
                *sol = sol.substitute(bindings).expect("replacements are free of bound symbols");
            }
        }
    }

    fn solve(&mut self, idx: usize, k: usize) {
        let row = self.rows.remove(idx);
        let eta = self.u.eta[k];
        let c = row.poly.coefficients_in(eta);
        debug_assert_eq!(c.len(), 2, "conditions are linear in eta");
        let sol = RationalFunction::new(-c[0].clone(), c[1].clone()).expect("eta coefficient nonzero").reduce();
        let mut b = BTreeMap::new();
        b.insert(eta, sol.clone());
        b.insert(self.u.deta[k], self.u.total_derivative(&sol, self.m));
        self.substitute_rows(&b, false);
        self.trace.push(TraceStep::Solved { source: row.source, state: self.m.states[k], expr: sol.clone() });
        self.sols.insert(k, sol);
    }

    /// Splits derivative-free rows along input monomials and retires rows
    /// with no open η or D_t η.
    fn tidy(&mut self) {
        let mut kept = Vec::new();
        for r in core::mem::take(&mut self.rows) {
            if r.poly.is_zero() {
                continue;
            }
            let pieces = if !self.inputs.is_empty() && self.detas(&r.poly).is_empty() {
                r.poly
                    .collect(&self.inputs)
                    .into_values()
                    .map(|p| Row { poly: self.clean(p), source: r.source.clone() })
                    .collect()
            } else {
                vec![r]
            };
            for p in pieces {
                let open_eta = self.etas(&p.poly).into_iter().any(|k| self.open(k));
                if !open_eta && self.detas(&p.poly).is_empty() {
                    self.trace.push(TraceStep::Residual { source: p.source.clone() });
                    self.residuals.push(p);
                } else {
                    kept.push(p);
                }
            }
        }
        self.rows = kept;
    }

    fn pick_candidate(&self) -> Option<(usize, usize)> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| self.detas(&r.poly).is_empty())
            .filter_map(|(i, r)| {
                let k = self.etas(&r.poly).into_iter().find(|&k| self.open(k))?;
                Some((self.unknown_count(&r.poly), k, i))
            })
            .min()
            .map(|(_, k, i)| (i, k))
    }

    fn eliminate_derivative(&mut self) -> bool {
        for k in 0..self.m.states.len() {
            if !self.open(k) {
                continue;
            }
            let deta = self.u.deta[k];
            let with: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i].poly.contains_symbol(deta)).collect();
            if with.len() < 2 {
                continue;
            }
            let own = format!("d{}/dt", self.m.table.name(self.m.states[k]));
            let pivot = with
                .iter()
                .copied()
                .min_by_key(|&i| (self.rows[i].source != own, self.unknown_count(&self.rows[i].poly), i))
                .unwrap();
            let c = self.rows[pivot].poly.coefficients_in(deta);
            if c.len() != 2 {
                continue;
            }
            let val = RationalFunction::new(-c[0].clone(), c[1].clone()).expect("nonzero").reduce();
            let mut b = BTreeMap::new();
            b.insert(deta, val);
            for &i in with.iter().filter(|&&i| i != pivot) {
                let r = &self.rows[i];
                let e = RationalFunction::from_poly(r.poly.clone()).substitute(&b).expect("acyclic");
                self.rows[i] = self.row_from(&e, r.source.clone());
            }
            self.trace.push(TraceStep::DerivativeEliminated {
                source: self.rows[pivot].source.clone(),
                state: self.m.states[k],
            });
            return true;
        }
        false
    }

    fn detect_slot(&mut self) -> bool {
        for k in 0..self.m.states.len() {
            if !self.open(k) {
                continue;
            }
            let deta = self.u.deta[k];
            let with: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i].poly.contains_symbol(deta)).collect();
            if with.len() != 1 {
                continue;
            }
            let p = &self.rows[with[0]].poly;
            let others = self.etas(p).into_iter().chain(self.detas(p)).any(|j| j != k && self.open(j));
            if others {
                continue;
            }
            let row = self.rows.remove(with[0]);
            self.slots.push((k, row));
            self.trace.push(TraceStep::Slot { state: self.m.states[k] });
            return true;
        }
        false
    }

    fn run_worklist(&mut self) {
        loop {
            self.tidy();
            if let Some((i, k)) = self.pick_candidate() {
                self.solve(i, k);
                continue;
            }
            if self.rows.is_empty() {
                break;
            }
            if self.eliminate_derivative() {
                continue;
            }
            if self.detect_slot() {
                continue;
            }
            break;
        }
    }

    fn state_monomials(&self, degree: u32) -> Vec<Monomial> {
        let mut out = vec![Monomial::one()];
        let mut frontier = vec![Monomial::one()];
        for _ in 0..degree {
            let mut next = BTreeSet::new();
            for mono in &frontier {
                for &s in &self.m.states {
                    next.insert(mono.mul(&Monomial::var(s)));
                }
            }
            frontier = next.into_iter().collect();
            out.extend(frontier.iter().cloned());
        }
        out.sort();
        out.reverse();
        out
    }

    fn ansatz_expr(&self, k: usize) -> RationalFunction {
        let p = SparsePoly::from_terms(core::iter::empty());
        let mut p = p;
        for (a, mono) in &self.ansatz[&k] {
            p = &p + &SparsePoly::var(*a).mul_monomial(mono);
        }
        RationalFunction::from_poly(p)
    }

    fn apply_ansatz(&mut self, states: &[usize]) {
        if states.is_empty() {
            return;
        }
        let monos = self.state_monomials(self.cfg.eta_state_degree);
        for &k in states {
            let name = self.m.table.name(self.m.states[k]);
            let coeffs = monos
                .iter()
                .enumerate()
                .map(|(i, mono)| {
                    let a = self.u.table.declare_fresh(&format!("a_{name}_{i}"), SymbolKind::Unknown);
                    self.unknowns.insert(a);
                    (a, mono.clone())
                })
                .collect();
            self.ansatz.insert(k, coeffs);
        }
        let mut b = BTreeMap::new();
        for &k in states {
            let a = self.ansatz_expr(k);
            b.insert(self.u.deta[k], total_derivative_on_shell(&a, self.m));
            b.insert(self.u.eta[k], a);
        }
        self.substitute_rows(&b, true);
        self.trace.push(TraceStep::Ansatz {
            states: states.iter().map(|&k| self.m.states[k]).collect(),
            degree: self.cfg.eta_state_degree,
        });
    }

    fn columns(&self) -> Vec<SymbolId> {
        let mut cols = self.u.chi.clone();
        for coeffs in self.ansatz.values() {
            cols.extend(coeffs.iter().map(|(a, _)| *a));
        }
        cols
    }

    fn linear_system(&self) -> LinearSystem {
        let cols = self.columns();
        let col_of: BTreeMap<SymbolId, usize> = cols.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut along: BTreeSet<SymbolId> = self.m.state_set();
        along.extend(&self.inputs);
        along.extend(cols.iter().copied());
        let colset: BTreeSet<SymbolId> = cols.iter().copied().collect();
        let mut rows = Vec::new();
        let all = self.residuals.iter().chain(self.slots.iter().map(|(_, r)| r)).chain(&self.rows);
        for r in all {
            let mut grouped: BTreeMap<Monomial, Vec<RationalFunction>> = BTreeMap::new();
            for (key, coeff) in r.poly.collect(&along) {
                let (unk, x) = key.split(&colset);
                let Some(&(s, 1)) = unk.iter().collect::<Vec<_>>().first() else {
                    panic!("residual not linear in unknowns: {:?}", key);
                };
                debug_assert_eq!(unk.degree(), 1);
                let row = grouped.entry(x).or_insert_with(|| vec![RationalFunction::zero(); cols.len()]);
                row[col_of[&s]] = &row[col_of[&s]] + &RationalFunction::from_poly(coeff);
            }
            for (key, coeffs) in grouped {
                if coeffs.iter().any(|c| !c.is_zero()) {
                    rows.push(LinearRow { key, source: r.source.clone(), coeffs });
                }
            }
        }
        LinearSystem { unknowns: cols, rows }
    }
}

fn normalize_generator(mut g: Generator, m: &ModelDef) -> Generator {
    for e in g.eta.iter_mut().chain(g.chi.iter_mut()) {
        *e = e.reduce();
    }
    let state_free = |p: &SparsePoly| m.states.iter().all(|&s| !p.contains_symbol(s));
    if !g.entries().all(|e| state_free(e.den())) {
        g.normalized = false;
        return g;
    }
    let v: Vec<RationalFunction> = g.entries().cloned().collect();
    let cleared = clear_denominators_keeping(&v, &m.state_set());
    let mut entries: Vec<RationalFunction> = cleared.into_iter().map(RationalFunction::from_poly).collect();
    let lead = g.chi.len();
    let n = g.eta.len();
    let first = entries[n..n + lead].iter().chain(&entries[..n]).find(|e| !e.is_zero()).cloned();
    if let Some(f) = first {
        if f.num().leading_coefficient().is_negative() {
            entries.iter_mut().for_each(|e| *e = -&*e);
        }
    }
    let chi = entries.split_off(n);
    Generator { eta: entries, chi, normalized: true }
}

/// Runs the full elimination and returns an exact generator basis.
pub fn eliminate(m: &ModelDef, cfg: AnsatzConfig) -> Result<GeneratorBasis, SymmetryError> {
    if m.outputs.iter().all(|(_, h)| m.states.iter().all(|&s| !h.contains_symbol(s))) {
        return Err(SymmetryError::NoInformation);
    }
    let mut p = Pipeline::new(m, cfg);
    let outputs = build_output_conditions(m, &p.u);
    let linsym = build_linsym_conditions(m, &p.u, &BTreeMap::new());
    p.rows = linsym.iter().map(|c| p.row_from(&c.expr, c.source.clone())).collect();

    // output conditions first, in output order
    for c in outputs {
        let r = p.row_from(&c.expr, c.source.clone());
        let pieces: Vec<SparsePoly> = if p.inputs.is_empty() {
            vec![r.poly]
        } else {
            r.poly.collect(&p.inputs).into_values().collect()
        };
        for piece in pieces {
            let piece = p.clean(piece);
            if piece.is_zero() {
                continue;
            }
            match p.etas(&piece).into_iter().find(|&k| p.open(k)) {
                Some(k) => {
                    p.rows.insert(0, Row { poly: piece, source: c.source.clone() });
                    p.solve(0, k);
                }
                None => {
                    p.trace.push(TraceStep::Residual { source: c.source.clone() });
                    p.residuals.push(Row { poly: piece, source: c.source.clone() });
                }
            }
        }
    }

    p.run_worklist();

    // slot relations before ansatz substitution hides them
    let mut slot_meta = Vec::new();
    for (k, row) in &p.slots {
        let eta = p.u.eta[*k];
        let mut support = vec![m.states[*k]];
        let mut relations = Vec::new();
        for (&j, sol) in &p.sols {
            if sol.contains_symbol(eta) {
                support.push(m.states[j]);
                relations.push((m.states[j], sol.differentiate(eta).reduce()));
            }
        }
        slot_meta.push((*k, support, relations, RationalFunction::from_poly(row.poly.clone())));
    }

    let slot_states: Vec<usize> = p.slots.iter().map(|(k, _)| *k).collect();
    let stalled: Vec<usize> = (0..m.states.len()).filter(|&k| p.open(k)).collect();
    let mut ansatz_states: Vec<usize> = slot_states.iter().chain(&stalled).copied().collect();
    ansatz_states.sort();
    p.apply_ansatz(&ansatz_states);
    for r in core::mem::take(&mut p.rows) {
        p.residuals.push(r);
    }

    let system = p.linear_system();
    let ncols = system.unknowns.len();
    let kernel = nullspace(&system.matrix(), ncols);
    let nchi = m.params.len();
    let vectors = if p.ansatz.is_empty() { kernel } else { rref(kernel, ncols).0 };

    let slot_cols: BTreeMap<SymbolId, usize> =
        slot_states.iter().flat_map(|&k| p.ansatz[&k].iter().map(move |(a, _)| (*a, k))).collect();
    let col_state: Vec<Option<usize>> = system.unknowns.iter().map(|a| slot_cols.get(a).copied()).collect();

    let mut generators = Vec::new();
    let mut witnesses: BTreeMap<usize, Vec<Generator>> = BTreeMap::new();
    for v in vectors {
        let mut b = BTreeMap::new();
        for (s, val) in system.unknowns.iter().zip(&v) {
            b.insert(*s, val.clone());
        }
        let mut eta = vec![RationalFunction::zero(); m.states.len()];
        for (k, e) in eta.iter_mut().enumerate() {
            if let Some(sol) = p.sols.get(&k) {
                *e = sol.substitute(&b)?;
            } else if p.ansatz.contains_key(&k) {
                *e = p.ansatz_expr(k).substitute(&b)?;
            }
        }
        let g = normalize_generator(Generator { eta, chi: v[..nchi].to_vec(), normalized: false }, m);
        if g.is_zero() {
            continue;
        }
        let chi_zero = v[..nchi].iter().all(RationalFunction::is_zero);
        let nonzero_cols: Vec<usize> = (nchi..ncols).filter(|&i| !v[i].is_zero()).collect();
        if chi_zero && !nonzero_cols.is_empty() && nonzero_cols.iter().all(|&i| col_state[i].is_some()) {
            let owners: BTreeSet<usize> = nonzero_cols.iter().filter_map(|&i| col_state[i]).collect();
            for k in owners {
                witnesses.entry(k).or_default().push(g.clone());
            }
        } else {
            generators.push(g);
        }
    }

    for (i, g) in generators.iter().enumerate() {
        if !check_generator(g, m) {
            return Err(SymmetryError::Unsound(i));
        }
    }

    let mut free_slots = Vec::new();
    let mut synthetic = Vec::new();
    for (k, support, relations, coupling) in slot_meta {
        let mut g = Generator::zero(m);
        g.eta[k] = RationalFunction::one();
        for (s, r) in &relations {
            g.eta[m.state_index(*s).unwrap()] = r.clone();
        }
        synthetic.push(normalize_generator(g, m));
        free_slots.push(FreeSlot {
            state: m.states[k],
            support,
            relations,
            coupling,
            witnesses: witnesses.remove(&k).unwrap_or_default(),
        });
    }

    Ok(GeneratorBasis {
        generators,
        free_slots,
        synthetic,
        ansatz_config: cfg,
        table: p.u.table,
        system,
        trace: p.trace,
    })
}
