//! Structured reports. Every field is a function of the model and the
//! options; timing lives outside the document.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use parsym_core::invariants::InvariantKind;
use parsym_core::model::ModelDef;
use parsym_core::symmetry::{check_generator, Generator, GeneratorBasis};

use crate::pipeline::{Analysis, Options, Timing, Verification};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Named {
    pub name: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub source: String,
    pub states: Vec<String>,
    pub params: Vec<String>,
    pub inputs: Vec<String>,
    pub dynamics: Vec<Named>,
    pub outputs: Vec<Named>,
}

impl ModelSummary {
    pub fn new(m: &ModelDef, source: &str) -> Self {
        let names = |ids: &[parsym_core::sym::SymbolId]| ids.iter().map(|&s| m.name_of(s).to_string()).collect();
        ModelSummary {
            name: m.name.clone(),
            source: source.into(),
            states: names(&m.states),
            params: names(&m.params),
            inputs: names(&m.inputs),
            dynamics: m
                .states
                .iter()
                .zip(&m.dynamics)
                .map(|(&s, f)| Named { name: m.name_of(s).into(), expr: m.expr_text(f) })
                .collect(),
            outputs: m.outputs.iter().map(|(n, h)| Named { name: n.clone(), expr: m.expr_text(h) }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub num_degree: u32,
    pub den_degree: u32,
    pub eta_state_degree: u32,
    pub eta_param_degree: u32,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub tol_output: f64,
    pub tol_invariant: f64,
    pub t_end: f64,
    pub n_samples: usize,
    pub rk4_step: f64,
    pub corrupt: Option<usize>,
}

impl ConfigEcho {
    pub fn new(opts: &Options) -> Self {
        ConfigEcho {
            num_degree: opts.invariants.num_degree,
            den_degree: opts.invariants.den_degree,
            eta_state_degree: opts.ansatz.eta_state_degree,
            eta_param_degree: opts.ansatz.eta_param_degree,
            seed: opts.invariants.seed,
            eps: opts.eps.clone(),
            tol_output: opts.tol_output,
            tol_invariant: opts.tol_invariant,
            t_end: 10.0,
            n_samples: 101,
            rk4_step: 1e-3,
            corrupt: opts.corrupt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub index: usize,
    /// `exact` or `synthetic`.
    pub kind: String,
    pub text: String,
    pub eta: Vec<Named>,
    pub chi: Vec<Named>,
    /// Exact symmetry-condition check; `null` for synthetic generators.
    pub verified: Option<bool>,
}

fn generator_entry(m: &ModelDef, g: &Generator, index: usize, synthetic: bool) -> GeneratorEntry {
    let side = |ids: &[parsym_core::sym::SymbolId], es: &[parsym_core::sym::RationalFunction]| {
        ids.iter()
            .zip(es)
            .filter(|(_, e)| !e.is_zero())
            .map(|(&s, e)| Named { name: m.name_of(s).into(), expr: m.expr_text(e) })
            .collect()
    };
    GeneratorEntry {
        index,
        kind: if synthetic { "synthetic" } else { "exact" }.into(),
        text: g.display(m).to_string(),
        eta: side(&m.states, &g.eta),
        chi: side(&m.params, &g.chi),
        verified: (!synthetic).then(|| check_generator(g, m)),
    }
}

pub fn generator_entries(m: &ModelDef, basis: &GeneratorBasis) -> Vec<GeneratorEntry> {
    let exact = basis.generators.iter().map(|g| (g, false));
    let synth = basis.synthetic.iter().map(|g| (g, true));
    exact.chain(synth).enumerate().map(|(i, (g, s))| generator_entry(m, g, i, s)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotEntry {
    pub state: String,
    pub support: Vec<String>,
    pub relations: Vec<Named>,
    pub coupling: String,
    pub witnessed: bool,
    pub notice: String,
}

fn slot_entries(m: &ModelDef, basis: &GeneratorBasis) -> Vec<SlotEntry> {
    basis
        .free_slots
        .iter()
        .map(|s| {
            let support: Vec<String> = s.support.iter().map(|&x| m.name_of(x).to_string()).collect();
            let witnessed = s.witnessed();
            let notice = format!(
                "slot assumption: eta_{} is treated as a free function shared by {{{}}}; {}",
                m.name_of(s.state),
                support.join(", "),
                if witnessed {
                    "non-constant solutions of its coupling equation exist"
                } else {
                    "no solution of its coupling equation was found within the ansatz"
                }
            );
            SlotEntry {
                state: m.name_of(s.state).into(),
                support,
                relations: s
                    .relations
                    .iter()
                    .map(|(x, e)| Named { name: m.name_of(*x).into(), expr: m.expr_text(e) })
                    .collect(),
                coupling: parsym_core::sym::PrettyExt::pretty(&s.coupling, &basis.table).to_string(),
                witnessed,
                notice,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantEntry {
    pub expr: String,
    pub kind: String,
    pub num_degree: u32,
    pub den_degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSection {
    pub generic_rank: usize,
    pub expected_count: usize,
    pub num_degree_bound: u32,
    pub den_degree_bound: u32,
    pub items: Vec<InvariantEntry>,
}

pub fn kind_label(k: InvariantKind) -> &'static str {
    match k {
        InvariantKind::ParameterInvariant => "parameter",
        InvariantKind::StateInvariant => "state",
        InvariantKind::ParameterStateInvariant => "parameter-state",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictSection {
    pub parameters: Vec<Verdict>,
    pub states: Vec<Verdict>,
    pub identifiable_combinations: Vec<String>,
    pub observable_state_combinations: Vec<String>,
    pub observable_parameter_state_combinations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobEntry {
    pub generator: usize,
    pub eps: f64,
    pub synthetic: bool,
    pub corrupted: bool,
    pub max_output_deviation: Option<f64>,
    pub max_invariant_drift: Option<f64>,
    pub structure_residual: Option<f64>,
    pub closed_form_error: Option<f64>,
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSection {
    pub seed_point: Vec<(String, f64)>,
    pub seed_note: String,
    pub inputs: Vec<Named>,
    pub jobs: Vec<JobEntry>,
    pub failures: usize,
    pub passed: bool,
}

impl VerificationSection {
    pub fn new(v: &Verification, opts: &Options) -> Self {
        let jobs: Vec<JobEntry> = v
            .jobs
            .iter()
            .map(|j| {
                let ok = j.result.as_ref().ok();
                JobEntry {
                    generator: j.generator,
                    eps: j.eps,
                    synthetic: j.synthetic,
                    corrupted: j.corrupted,
                    max_output_deviation: ok.map(|c| c.max_output_deviation),
                    max_invariant_drift: ok.map(|c| c.max_invariant_drift),
                    structure_residual: ok.map(|c| c.structure_residual),
                    closed_form_error: ok.and_then(|c| c.closed_form_error),
                    error: j.result.as_ref().err().cloned(),
                    passed: j.passed(opts),
                }
            })
            .collect();
        VerificationSection {
            seed_point: v.seed_point.clone(),
            seed_note: "seed point drawn uniformly from [0.5, 2]; a pragmatic stand-in for the region where the model is locally identifiable".into(),
            inputs: v.inputs.iter().map(|c| Named { name: c.input.clone(), expr: c.label.clone() }).collect(),
            failures: v.failures,
            passed: v.failures == 0,
            jobs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub model: ModelSummary,
    pub config: ConfigEcho,
    pub generators: Vec<GeneratorEntry>,
    pub free_slots: Vec<SlotEntry>,
    pub invariants: InvariantSection,
    pub verdicts: VerdictSection,
    pub verification: VerificationSection,
    pub notices: Vec<String>,
}

impl AnalysisReport {
    pub fn new(m: &ModelDef, source: &str, a: &Analysis, opts: &Options, mut notices: Vec<String>) -> Self {
        let free_slots = slot_entries(m, &a.basis);
        notices.extend(free_slots.iter().map(|s| s.notice.clone()));
        let v = &a.verdicts;
        let exprs = |es: &[parsym_core::sym::RationalFunction]| es.iter().map(|e| m.expr_text(e)).collect();
        AnalysisReport {
            model: ModelSummary::new(m, source),
            config: ConfigEcho::new(opts),
            generators: generator_entries(m, &a.basis),
            free_slots,
            invariants: InvariantSection {
                generic_rank: a.invariants.generic_rank,
                expected_count: a.invariants.expected_count,
                num_degree_bound: a.invariants.config.num_degree,
                den_degree_bound: a.invariants.config.den_degree,
                items: a
                    .invariants
                    .invariants
                    .iter()
                    .map(|i| InvariantEntry {
                        expr: m.expr_text(&i.expr),
                        kind: kind_label(i.kind).into(),
                        num_degree: i.degree.0,
                        den_degree: i.degree.1,
                    })
                    .collect(),
            },
            verdicts: VerdictSection {
                parameters: v
                    .params
                    .iter()
                    .map(|&(p, ok)| Verdict {
                        name: m.name_of(p).into(),
                        verdict: if ok { "identifiable" } else { "unidentifiable" }.into(),
                    })
                    .collect(),
                states: v
                    .states
                    .iter()
                    .map(|&(s, ok)| Verdict {
                        name: m.name_of(s).into(),
                        verdict: if ok { "observable" } else { "unobservable" }.into(),
                    })
                    .collect(),
                identifiable_combinations: exprs(&v.identifiable_combinations),
                observable_state_combinations: exprs(&v.observable_state_combinations),
                observable_parameter_state_combinations: exprs(&v.observable_parameter_state_combinations),
            },
            verification: VerificationSection::new(&a.verification, opts),
            notices,
        }
    }

    pub fn to_text(&self, timing: Option<&Timing>) -> String {
        let mut out = String::new();
        model_text(&mut out, &self.model);
        generators_text(&mut out, &self.generators);
        if !self.free_slots.is_empty() {
            let _ = writeln!(out, "\nfree slots:");
            for s in &self.free_slots {
                let _ = writeln!(out, "  eta_{} over {{{}}}", s.state, s.support.join(", "));
                for r in &s.relations {
                    let _ = writeln!(out, "    eta_{} = ({})*eta_{}", r.name, r.expr, s.state);
                }
                let _ = writeln!(out, "    coupling: {} = 0", s.coupling);
            }
        }
        let inv = &self.invariants;
        let _ = writeln!(
            out,
            "\ninvariants ({} found, {} expected from rank {}; degree bounds {}/{}):",
            inv.items.len(),
            inv.expected_count,
            inv.generic_rank,
            inv.num_degree_bound,
            inv.den_degree_bound
        );
        let width = inv.items.iter().map(|i| i.expr.len()).max().unwrap_or(0);
        for i in &inv.items {
            let _ = writeln!(out, "  {:<width$}  {}", i.expr, i.kind);
        }
        let v = &self.verdicts;
        let _ = writeln!(out, "\nverdicts:");
        for p in v.parameters.iter().chain(&v.states) {
            let _ = writeln!(out, "  {:<12} {}", p.name, p.verdict);
        }
        let list = |xs: &[String]| if xs.is_empty() { "none".to_string() } else { xs.join(", ") };
        let _ = writeln!(out, "  identifiable combinations: {}", list(&v.identifiable_combinations));
        let _ = writeln!(out, "  observable state combinations: {}", list(&v.observable_state_combinations));
        let _ = writeln!(
            out,
            "  observable parameter-state combinations: {}",
            list(&v.observable_parameter_state_combinations)
        );
        verification_text(&mut out, &self.verification);
        notices_text(&mut out, &self.notices);
        if let Some(t) = timing {
            timing_text(&mut out, t);
        }
        out
    }
}

fn model_text(out: &mut String, m: &ModelSummary) {
    let _ = writeln!(out, "model {} ({})", m.name, m.source);
    let _ = writeln!(out, "  states: {}", m.states.join(", "));
    let _ = writeln!(out, "  params: {}", m.params.join(", "));
    if !m.inputs.is_empty() {
        let _ = writeln!(out, "  inputs: {}", m.inputs.join(", "));
    }
    for d in &m.dynamics {
        let _ = writeln!(out, "  d{}/dt = {}", d.name, d.expr);
    }
    for o in &m.outputs {
        let _ = writeln!(out, "  {} = {}", o.name, o.expr);
    }
}

fn generators_text(out: &mut String, gens: &[GeneratorEntry]) {
    let _ = writeln!(out, "\ngenerators:");
    if gens.is_empty() {
        let _ = writeln!(out, "  none");
    }
    for g in gens {
        let tag = match g.verified {
            Some(true) => "exact, checked",
            Some(false) => "exact, CHECK FAILED",
            None => "synthetic",
        };
        let _ = writeln!(out, "  [{}] {}  ({tag})", g.index, g.text);
    }
}

fn fmt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.2e}"))
}

fn verification_text(out: &mut String, v: &VerificationSection) {
    let _ = writeln!(out, "\nverification:");
    let point: Vec<String> = v.seed_point.iter().map(|(n, x)| format!("{n}={x:.4}")).collect();
    let _ = writeln!(out, "  seed point: {}", point.join(" "));
    for i in &v.inputs {
        let _ = writeln!(out, "  input {} = {}", i.name, i.expr);
    }
    let _ = writeln!(out, "  gen  eps      output     drift      structure  closed-form  status");
    for j in &v.jobs {
        let mut tag = String::new();
        if j.corrupted {
            tag.push_str(" corrupted");
        }
        if let Some(e) = &j.error {
            let _ = write!(tag, " ({e})");
        }
        let _ = writeln!(
            out,
            "  {:<4} {:<8} {:<10} {:<10} {:<10} {:<12} {}{}",
            j.generator,
            j.eps,
            fmt_num(j.max_output_deviation),
            fmt_num(j.max_invariant_drift),
            fmt_num(j.structure_residual),
            fmt_num(j.closed_form_error),
            if j.passed { "ok" } else { "FAIL" },
            tag
        );
    }
    if v.passed {
        let _ = writeln!(out, "  all {} checks passed", v.jobs.len());
    } else {
        let _ = writeln!(out, "  {} of {} checks failed", v.failures, v.jobs.len());
    }
}

fn notices_text(out: &mut String, notices: &[String]) {
    if !notices.is_empty() {
        let _ = writeln!(out, "\nnotices:");
        for n in notices {
            let _ = writeln!(out, "  {n}");
        }
    }
}

fn timing_text(out: &mut String, t: &Timing) {
    let _ = writeln!(
        out,
        "\ntiming: symmetry {:.3}s, invariants {:.3}s, verification {:.3}s",
        t.symmetry.as_secs_f64(),
        t.invariants.as_secs_f64(),
        t.verification.as_secs_f64()
    );
}

/// Output of `verify`: the generators, invariants used for drift, and the
/// numerical checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub model: ModelSummary,
    pub config: ConfigEcho,
    pub generators: Vec<GeneratorEntry>,
    pub invariants: Vec<String>,
    pub verification: VerificationSection,
    pub notices: Vec<String>,
}

impl VerifyReport {
    pub fn from_analysis(report: AnalysisReport) -> Self {
        VerifyReport {
            model: report.model,
            config: report.config,
            generators: report.generators,
            invariants: report.invariants.items.into_iter().map(|i| i.expr).collect(),
            verification: report.verification,
            notices: report.notices,
        }
    }

    pub fn to_text(&self, timing: Option<&Timing>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model {} ({})", self.model.name, self.model.source);
        generators_text(&mut out, &self.generators);
        let _ = writeln!(out, "\ninvariants checked for drift: {}", self.invariants.join(", "));
        verification_text(&mut out, &self.verification);
        notices_text(&mut out, &self.notices);
        if let Some(t) = timing {
            timing_text(&mut out, t);
        }
        out
    }
}
