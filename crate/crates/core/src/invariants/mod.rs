//! Universal invariants of a generator basis, found by a bounded ansatz
//! `P / m` with `P` a polynomial and `m` a monomial, then reduced to a
//! functionally independent set and classified.

mod sparse;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::model::ModelDef;
use crate::sample::{Sampler, DEFAULT_SEED};
use crate::sym::{Monomial, RationalFunction, SparsePoly, SymbolId, Q};
use crate::symmetry::linalg::{clear_denominators, rank_q};
use crate::symmetry::{Generator, GeneratorBasis};
use sparse::{Echelon, SparseRow};

const SAMPLE_POINTS: usize = 5;
const MAX_RESAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantConfig {
    pub num_degree: u32,
    pub den_degree: u32,
    pub seed: u64,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        InvariantConfig { num_degree: 3, den_degree: 2, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InvariantKind {
    ParameterInvariant,
    StateInvariant,
    ParameterStateInvariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invariant {
    pub expr: RationalFunction,
    pub kind: InvariantKind,
    /// Numerator total degree and denominator degree.
    pub degree: (u32, u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet {
    pub invariants: Vec<Invariant>,
    pub generic_rank: usize,
    pub expected_count: usize,
    pub config: InvariantConfig,
}

impl InvariantSet {
    pub fn exprs(&self) -> Vec<RationalFunction> {
        self.invariants.iter().map(|i| i.expr.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvariantError {
    #[error("degenerate sampling: ranks disagree across sample points after {0} attempts")]
    DegenerateSampling(usize),
}

/// `X(e)` for a single generator.
pub fn apply_generator(g: &Generator, m: &ModelDef, e: &RationalFunction) -> RationalFunction {
    g.apply(m, e)
}

pub fn kind_of(e: &RationalFunction, m: &ModelDef) -> InvariantKind {
    let has_state = m.states.iter().any(|&s| e.contains_symbol(s));
    let has_param = m.params.iter().any(|&s| e.contains_symbol(s));
    match (has_state, has_param) {
        (false, _) => InvariantKind::ParameterInvariant,
        (true, false) => InvariantKind::StateInvariant,
        (true, true) => InvariantKind::ParameterStateInvariant,
    }
}

/// Whether every generator of the basis annihilates `e`.
pub fn is_invariant(e: &RationalFunction, basis: &GeneratorBasis, m: &ModelDef) -> bool {
    basis.all().all(|g| g.apply(m, e).is_zero())
}

fn analysis_vars(m: &ModelDef) -> Vec<SymbolId> {
    m.states.iter().chain(&m.params).copied().collect()
}

fn eval_vector(g: &Generator, pt: &BTreeMap<SymbolId, Q>) -> Option<Vec<Q>> {
    g.entries().map(|e| e.eval(pt).and_then(Result::ok)).collect()
}

/// Rank of the generator directions at random points, counting synthetic
/// slot generators.
pub fn generic_rank(basis: &GeneratorBasis, m: &ModelDef, seed: u64) -> Result<usize, InvariantError> {
    let gens: Vec<&Generator> = basis.all().collect();
    if gens.is_empty() {
        return Ok(0);
    }
    let vars = analysis_vars(m);
    let mut sampler = Sampler::new(seed);
    'attempt: for _ in 0..MAX_RESAMPLES {
        let mut ranks = BTreeSet::new();
        for pt in sampler.points(&vars, SAMPLE_POINTS) {
            let Some(rows) = gens.iter().map(|g| eval_vector(g, &pt)).collect::<Option<Vec<_>>>() else {
                continue 'attempt;
            };
            ranks.insert(rank_q(&rows));
        }
        if ranks.len() == 1 {
            return Ok(ranks.into_iter().next().unwrap());
        }
    }
    Err(InvariantError::DegenerateSampling(MAX_RESAMPLES))
}

fn monomials_up_to(vars: &[SymbolId], degree: u32) -> Vec<Monomial> {
    let mut all = BTreeSet::new();
    all.insert(Monomial::one());
    let mut frontier = alloc::vec![Monomial::one()];
    for _ in 0..degree {
        let mut next = BTreeSet::new();
        for mono in &frontier {
            for &v in vars {
                next.insert(mono.mul(&Monomial::var(v)));
            }
        }
        all.extend(next.iter().cloned());
        frontier = next.into_iter().collect();
    }
    all.into_iter().collect()
}

/// `X(μ)` for a polynomial vector field given per variable.
fn apply_poly(field: &[(SymbolId, SparsePoly)], mono: &Monomial) -> SparsePoly {
    let mut acc = SparsePoly::zero();
    for (s, e) in field {
        if let Some((rest, k)) = mono.lower(*s) {
            let c = Q::from_integer(k.into());
            acc = &acc + &e.mul_term(&rest, &c);
        }
    }
    acc
}

struct Candidate {
    expr: RationalFunction,
    key: (InvariantKind, u32, usize, u32),
}

fn gradient(e: &RationalFunction, vars: &[SymbolId], pt: &BTreeMap<SymbolId, Q>) -> Option<SparseRow> {
    let den = e.den().eval(pt)?;
    if den.is_zero() {
        return None;
    }
    let num = e.num().eval(pt)?;
    let mut out = SparseRow::new();
    for (i, &v) in vars.iter().enumerate() {
        if !e.contains_symbol(v) {
            continue;
        }
        let dn = e.num().differentiate(v).eval(pt)?;
        let dd = e.den().differentiate(v).eval(pt)?;
        let g = (&dn * &den - &num * &dd) / (&den * &den);
        if !g.is_zero() {
            out.insert(i, g);
        }
    }
    Some(out)
}

fn canonical(e: RationalFunction) -> RationalFunction {
    let (num, den) = e.into_parts();
    let neg = num.leading_coefficient().is_negative();
    let (pn, pd) = (num.primitive(), den.primitive());
    let mut r = RationalFunction::new(pn, pd).expect("nonzero denominator");
    if neg != r.num().leading_coefficient().is_negative() {
        r = -r;
    }
    if r.num().leading_coefficient().is_negative() {
        r = -r;
    }
    r
}

/// Searches invariants `P/m` up to the configured degrees and keeps a
/// functionally independent subset of size at most `n + p - r`.
pub fn find_invariants(
    basis: &GeneratorBasis,
    m: &ModelDef,
    cfg: InvariantConfig,
) -> Result<InvariantSet, InvariantError> {
    let vars = analysis_vars(m);
    let r = generic_rank(basis, m, cfg.seed)?;
    let expected = vars.len() - r;

    // polynomial fields, scaled freely since only X(I) = 0 matters
    let mut fields = Vec::new();
    let mut den_monos: BTreeSet<Monomial> = monomials_up_to(&vars, cfg.den_degree).into_iter().collect();
    for g in basis.all() {
        for e in g.entries() {
            if e.den().is_monomial() && !e.den().is_constant() {
                den_monos.insert(e.den().leading_term().unwrap().0.clone());
            }
        }
        let cleared = clear_denominators(&g.entries().cloned().collect::<Vec<_>>());
        let field: Vec<(SymbolId, SparsePoly)> =
            vars.iter().copied().zip(cleared).filter(|(_, p)| !p.is_zero()).collect();
        if !field.is_empty() {
            fields.push(field);
        }
    }

    let cols = monomials_up_to(&vars, cfg.num_degree);
    let x_mono: Vec<Vec<SparsePoly>> = fields.iter().map(|f| cols.iter().map(|c| apply_poly(f, c)).collect()).collect();

    let mut candidates = Vec::new();
    for mstar in &den_monos {
        let x_m: Vec<SparsePoly> = fields.iter().map(|f| apply_poly(f, mstar)).collect();
        let mut rows: BTreeMap<(usize, Monomial), SparseRow> = BTreeMap::new();
        for (gi, _) in fields.iter().enumerate() {
            for (ci, mono) in cols.iter().enumerate() {
                // X(μ/m*)·m*² = X(μ)·m* − μ·X(m*)
                let t = &x_mono[gi][ci].mul_monomial(mstar) - &x_m[gi].mul_monomial(mono);
                for (k, c) in t.into_terms() {
                    rows.entry((gi, k)).or_default().insert(ci, c);
                }
            }
        }
        let mut ech = Echelon::default();
        for (_, row) in rows {
            ech.insert(row);
        }
        for v in ech.kernel(cols.len()) {
            let p = SparsePoly::from_terms(v.into_iter().map(|(c, q)| (cols[c].clone(), q)));
            let e = RationalFunction::new(p, SparsePoly::term(mstar.clone(), Q::from_integer(1.into())))
                .expect("monomial denominator");
            // reducible fractions are found again at the smaller denominator
            if e.as_constant().is_some() || e.den().degree() < mstar.degree() {
                continue;
            }
            let key = (kind_of(&e, m), e.num().degree() + e.den().degree(), e.num().num_terms(), e.den().degree());
            candidates.push(Candidate { expr: e, key });
        }
    }
    candidates.sort_by_key(|c| c.key);

    let mut sampler = Sampler::new(cfg.seed ^ 0x9e37_79b9);
    for _ in 0..MAX_RESAMPLES {
        let points = sampler.points(&vars, SAMPLE_POINTS);
        let mut echelons: Vec<Echelon> = (0..SAMPLE_POINTS).map(|_| Echelon::default()).collect();
        let mut kept: Vec<RationalFunction> = Vec::new();
        let mut consistent = true;
        for c in &candidates {
            if kept.len() == expected {
                break;
            }
            // the first point screens; the rest must agree on fresh candidates
            let Some(g0) = gradient(&c.expr, &vars, &points[0]) else {
                consistent = false;
                break;
            };
            if echelons[0].reduce(g0.clone()).is_empty() {
                continue;
            }
            let Some(rest) = points[1..].iter().map(|pt| gradient(&c.expr, &vars, pt)).collect::<Option<Vec<_>>>() else {
                consistent = false;
                break;
            };
            if rest.iter().zip(&echelons[1..]).any(|(g, ech)| ech.reduce(g.clone()).is_empty()) {
                consistent = false;
                break;
            }
            for (g, ech) in core::iter::once(g0).chain(rest).zip(echelons.iter_mut()) {
                ech.insert(g);
            }
            kept.push(c.expr.clone());
        }
        if !consistent {
            continue;
        }
        let invariants = kept
            .into_iter()
            .map(|e| {
                let e = canonical(e);
                Invariant { kind: kind_of(&e, m), degree: (e.num().degree(), e.den().degree()), expr: e }
            })
            .collect();
        return Ok(InvariantSet { invariants, generic_rank: r, expected_count: expected, config: cfg });
    }
    Err(InvariantError::DegenerateSampling(MAX_RESAMPLES))
}

/// Per-symbol verdicts and the invariants sorted by interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisVerdicts {
    /// `(parameter, identifiable)` in model order.
    pub params: Vec<(SymbolId, bool)>,
    /// `(state, observable)` in model order.
    pub states: Vec<(SymbolId, bool)>,
    pub identifiable_combinations: Vec<RationalFunction>,
    pub observable_state_combinations: Vec<RationalFunction>,
    pub observable_parameter_state_combinations: Vec<RationalFunction>,
}

impl AnalysisVerdicts {
    pub fn identifiable(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.params.iter().filter(|(_, ok)| *ok).map(|(s, _)| *s)
    }

    pub fn observable(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.states.iter().filter(|(_, ok)| *ok).map(|(s, _)| *s)
    }
}

pub fn classify(inv: &InvariantSet, basis: &GeneratorBasis, m: &ModelDef) -> AnalysisVerdicts {
    let slot: BTreeSet<SymbolId> = basis.slot_states().collect();
    let params = m
        .params
        .iter()
        .enumerate()
        .map(|(l, &p)| (p, basis.all().all(|g| g.chi[l].is_zero())))
        .collect();
    let states = m
        .states
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, !slot.contains(&s) && basis.all().all(|g| g.eta[i].is_zero())))
        .collect();
    let pick = |k: InvariantKind| -> Vec<RationalFunction> {
        inv.invariants.iter().filter(|i| i.kind == k).map(|i| i.expr.clone()).collect()
    };
    AnalysisVerdicts {
        params,
        states,
        identifiable_combinations: pick(InvariantKind::ParameterInvariant),
        observable_state_combinations: pick(InvariantKind::StateInvariant),
        observable_parameter_state_combinations: pick(InvariantKind::ParameterStateInvariant),
    }
}

/// Whether two lists of functions have the same gradient span at random
/// points over `vars`.
pub fn functional_equivalence(
    a: &[RationalFunction],
    b: &[RationalFunction],
    vars: &[SymbolId],
    seed: u64,
) -> Result<bool, InvariantError> {
    let mut sampler = Sampler::new(seed);
    'attempt: for _ in 0..MAX_RESAMPLES {
        let mut verdicts = BTreeSet::new();
        for pt in sampler.points(vars, SAMPLE_POINTS) {
            let grads = |fs: &[RationalFunction]| -> Option<Vec<Vec<Q>>> {
                fs.iter()
                    .map(|f| {
                        let g = gradient(f, vars, &pt)?;
                        Some((0..vars.len()).map(|i| g.get(&i).cloned().unwrap_or_else(Q::zero)).collect())
                    })
                    .collect()
            };
            let (Some(ga), Some(gb)) = (grads(a), grads(b)) else { continue 'attempt };
            let ra = rank_q(&ga);
            let rb = rank_q(&gb);
            let both: Vec<Vec<Q>> = ga.into_iter().chain(gb).collect();
            let rab = rank_q(&both);
            verdicts.insert((ra, rb, rab));
        }
        if verdicts.len() == 1 {
            let (ra, rb, rab) = verdicts.into_iter().next().unwrap();
            return Ok(ra == rb && rb == rab);
        }
    }
    Err(InvariantError::DegenerateSampling(MAX_RESAMPLES))
}

/// Convenience: display names for a list of expressions.
pub fn names(exprs: &[RationalFunction], m: &ModelDef) -> Vec<String> {
    exprs.iter().map(|e| m.expr_text(e)).collect()
}
