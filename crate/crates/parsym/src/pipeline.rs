//! analyze → invariants → classify → verify.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use parsym_core::invariants::{
    classify, find_invariants, AnalysisVerdicts, InvariantConfig, InvariantError, InvariantSet,
};
use parsym_core::model::ModelDef;
use parsym_core::numverify::{
    corrupt, seed_point, verify_symmetry, EpsilonCheck, FlowRequest, NumError, SimConfig, DEFAULT_EPS,
};
use parsym_core::symmetry::{eliminate, AnsatzConfig, Generator, GeneratorBasis, SymmetryError};

use crate::load::InputChoice;

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub invariants: InvariantConfig,
    pub ansatz: AnsatzConfig,
    pub eps: Vec<f64>,
    pub tol_output: f64,
    pub tol_invariant: f64,
    /// Basis generator (exact then synthetic numbering) whose sign is flipped
    /// before verification.
    pub corrupt: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            invariants: InvariantConfig::default(),
            ansatz: AnsatzConfig::default(),
            eps: DEFAULT_EPS.to_vec(),
            tol_output: 1e-6,
            tol_invariant: 1e-8,
            corrupt: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("symmetry: {0}")]
    Symmetry(#[from] SymmetryError),
    #[error("invariants: {0}")]
    Invariants(#[from] InvariantError),
    #[error("numverify: {0}")]
    Numerics(#[from] NumError),
}

#[derive(Debug, Clone, Default)]
pub struct Timing {
    pub symmetry: Duration,
    pub invariants: Duration,
    pub verification: Duration,
}

/// Outcome of one (generator, ε) job.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub generator: usize,
    pub synthetic: bool,
    pub corrupted: bool,
    pub eps: f64,
    pub result: Result<EpsilonCheck, String>,
}

impl Job {
    /// Structure residual only binds exact generators.
    pub fn passed(&self, opts: &Options) -> bool {
        match &self.result {
            Ok(c) => {
                c.max_output_deviation <= opts.tol_output
                    && c.max_invariant_drift <= opts.tol_invariant
                    && (self.synthetic || c.structure_residual <= opts.tol_output)
            }
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    /// States then parameters, model order.
    pub seed_point: Vec<(String, f64)>,
    pub inputs: Vec<InputChoice>,
    pub jobs: Vec<Job>,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub basis: GeneratorBasis,
    pub invariants: InvariantSet,
    pub verdicts: AnalysisVerdicts,
    pub verification: Verification,
    pub timing: Timing,
}

pub fn analyze(m: &ModelDef, opts: &Options, inputs: &[InputChoice]) -> Result<Analysis, PipelineError> {
    let mut timing = Timing::default();
    let t = Instant::now();
    let basis = eliminate(m, opts.ansatz)?;
    timing.symmetry = t.elapsed();
    let t = Instant::now();
    let invariants = find_invariants(&basis, m, opts.invariants)?;
    timing.invariants = t.elapsed();
    let verdicts = classify(&invariants, &basis, m);
    let t = Instant::now();
    let verification = verify(m, &basis, &invariants, opts, inputs)?;
    timing.verification = t.elapsed();
    Ok(Analysis { basis, invariants, verdicts, verification, timing })
}

/// Runs every (generator, ε) job in parallel; results keep job order.
pub fn verify(
    m: &ModelDef,
    basis: &GeneratorBasis,
    invariants: &InvariantSet,
    opts: &Options,
    inputs: &[InputChoice],
) -> Result<Verification, PipelineError> {
    let gens: Vec<(&Generator, bool)> =
        basis.generators.iter().map(|g| (g, false)).chain(basis.synthetic.iter().map(|g| (g, true))).collect();
    let all: Vec<&Generator> = gens.iter().map(|(g, _)| *g).collect();
    let seed = seed_point(m, &all, opts.invariants.seed);
    let mut cfg = SimConfig::for_model(m, parsym_core::numverify::InputFn::Zero);
    cfg.inputs = inputs.iter().map(|c| c.func.clone()).collect();
    let exprs = invariants.exprs();
    let keys: Vec<(usize, f64)> = (0..gens.len()).flat_map(|i| opts.eps.iter().map(move |&e| (i, e))).collect();
    let jobs: Vec<Job> = keys
        .par_iter()
        .map(|&(i, eps)| {
            let (g, synthetic) = gens[i];
            let corrupted = opts.corrupt == Some(i);
            let generator = if corrupted { corrupt(g) } else { g.clone() };
            let req = FlowRequest { generator, epsilon_values: vec![eps], seed_point: seed.clone() };
            let result = match verify_symmetry(m, &cfg, &req, &exprs) {
                Ok(mut v) => Ok(v.remove(0)),
                Err(e @ NumError::Config(_)) => return Err(e),
                Err(e) => Err(e.to_string()),
            };
            Ok(Job { generator: i, synthetic, corrupted, eps, result })
        })
        .collect::<Result<_, NumError>>()?;
    let failures = jobs.iter().filter(|j| !j.passed(opts)).count();
    let seed_point = m.states.iter().chain(&m.params).map(|s| (m.name_of(*s).to_string(), seed[s])).collect();
    Ok(Verification { seed_point, inputs: inputs.to_vec(), jobs, failures })
}
