//! Numerical cross-checks: flows of generators in the group parameter,
//! fixed-step RK4 simulation, and output/invariant preservation.

mod compiled;
mod input;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use compiled::Compiled;
pub use input::{InputError, InputFn};

use crate::model::ModelDef;
use crate::sample::Sampler;
use crate::sym::{RationalFunction, SymbolId};
use crate::symmetry::Generator;

/// Step of the RK4 integration in the group parameter.
pub const FLOW_STEP: f64 = 1e-3;

/// Relative agreement required between RK4 and closed-form flows.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Default ε grid.
pub const DEFAULT_EPS: [f64; 4] = [-0.5, -0.1, 0.1, 0.5];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumError {
    #[error("flow singularity at eps = {0}")]
    FlowSingularity(f64),
    #[error("blow-up at t = {0}")]
    BlowUp(f64),
    #[error("closed-form flow disagrees with RK4 at eps = {eps} (relative {err:e})")]
    ClosedForm { eps: f64, err: f64 },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}

/// Simulation settings. `inputs` is aligned with the model's inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub n_samples: usize,
    pub rk4_step: f64,
    pub inputs: Vec<InputFn>,
}

impl SimConfig {
    /// Defaults with every input set to `input`.
    pub fn for_model(m: &ModelDef, input: InputFn) -> Self {
        SimConfig { t_end: 10.0, n_samples: 101, rk4_step: 1e-3, inputs: vec![input; m.inputs.len()] }
    }

    fn check(&self, m: &ModelDef) -> Result<(), NumError> {
        if self.n_samples < 2 {
            return Err(NumError::Config("need at least two samples"));
        }
        if !(self.t_end > 0.0) || !(self.rk4_step > 0.0) || self.rk4_step > self.t_end / self.n_samples as f64 {
            return Err(NumError::Config("rk4 step must be positive and at most t_end/n_samples"));
        }
        if self.inputs.len() != m.inputs.len() {
            return Err(NumError::Config("one input function per declared input"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowRequest {
    pub generator: Generator,
    pub epsilon_values: Vec<f64>,
    /// States (initial values) and parameters.
    pub seed_point: BTreeMap<SymbolId, f64>,
}

/// One transformed point of a flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub eps: f64,
    pub point: BTreeMap<SymbolId, f64>,
    /// Relative RK4-vs-closed-form difference, when a closed form exists.
    pub closed_form_error: Option<f64>,
}

/// Sampled solution of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `states[k][i]`: state `i` at sample `k`.
    pub states: Vec<Vec<f64>>,
    /// `outputs[k][j]`: output `j` at sample `k`.
    pub outputs: Vec<Vec<f64>>,
}

/// Verification numbers for one ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCheck {
    pub eps: f64,
    pub max_output_deviation: f64,
    pub max_invariant_drift: f64,
    /// Distance between the transformed trajectory and the image of the
    /// original one. Only meaningful for exact symmetries.
    pub structure_residual: f64,
    pub closed_form_error: Option<f64>,
}

/// Dense symbol-indexed vector built from a point map.
fn dense(m: &ModelDef, point: &BTreeMap<SymbolId, f64>) -> Vec<f64> {
    let mut x = vec![0.0; m.table.len()];
    for (&s, &v) in point {
        x[s.index()] = v;
    }
    x
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs())
}

/// Coordinates moved by a flow: states then parameters.
fn coordinates(m: &ModelDef) -> Vec<SymbolId> {
    m.states.iter().chain(&m.params).copied().collect()
}

/// Compiled vector field of a generator on `coordinates(m)`.
struct Field {
    coords: Vec<SymbolId>,
    entries: Vec<Option<Compiled>>,
}

impl Field {
    fn new(m: &ModelDef, g: &Generator) -> Self {
        let entries = g.eta.iter().chain(&g.chi).map(|e| (!e.is_zero()).then(|| Compiled::new(e))).collect();
        Field { coords: coordinates(m), entries }
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.entries) {
            *o = e.as_ref().map_or(0.0, |c| c.eval(x));
        }
    }

    fn dens(&self, x: &[f64]) -> Vec<f64> {
        self.entries.iter().flatten().map(|c| c.den(x)).collect()
    }

    /// One RK4 step of size `h` in place.
    fn step(&self, x: &mut [f64], h: f64) {
        let n = self.coords.len();
        let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut y = x.to_vec();
        for (stage, frac) in [0.0, 0.5, 0.5, 1.0].into_iter().enumerate() {
            if stage > 0 {
                for (i, s) in self.coords.iter().enumerate() {
                    y[s.index()] = x[s.index()] + frac * h * k[stage - 1][i];
                }
            }
            self.eval(&y, &mut k[stage]);
        }
        for (i, s) in self.coords.iter().enumerate() {
            x[s.index()] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
    }
}

/// `a + c·z` with `a`, `c` depending only on coordinates the flow fixes.
struct AffineEntry {
    a: Compiled,
    c: Compiled,
}

/// Closed form of the flow when every entry is affine in its own coordinate
/// with coefficients constant along the flow (translations and scalings).
fn closed_form(m: &ModelDef, g: &Generator) -> Option<Vec<Option<AffineEntry>>> {
    let coords = coordinates(m);
    let entries: Vec<&RationalFunction> = g.eta.iter().chain(&g.chi).collect();
    let moving: Vec<SymbolId> = coords.iter().zip(&entries).filter(|(_, e)| !e.is_zero()).map(|(&s, _)| s).collect();
    let mut out = Vec::with_capacity(coords.len());
    for (&z, e) in coords.iter().zip(&entries) {
        if e.is_zero() {
            out.push(None);
            continue;
        }
        let c = e.differentiate(z);
        let a = *e - &(&c * &RationalFunction::var(z));
        if moving.iter().any(|&s| a.contains_symbol(s) || c.contains_symbol(s)) {
            return None;
        }
        out.push(Some(AffineEntry { a: Compiled::new(&a), c: Compiled::new(&c) }));
    }
    Some(out)
}

fn closed_form_point(x0: &[f64], coords: &[SymbolId], form: &[Option<AffineEntry>], eps: f64) -> Vec<f64> {
    let mut x = x0.to_vec();
    for (s, f) in coords.iter().zip(form) {
        let Some(f) = f else { continue };
        let (a, c, z) = (f.a.eval(x0), f.c.eval(x0), x0[s.index()]);
        x[s.index()] = if c == 0.0 {
            z + a * eps
        } else {
            (z + a / c) * libm::exp(c * eps) - a / c
        };
    }
    x
}

fn max_relative_error(a: &[f64], b: &[f64], coords: &[SymbolId]) -> f64 {
    coords.iter().map(|s| relative(b[s.index()], a[s.index()])).fold(0.0, f64::max)
}

/// Flows `x0` (dense) to `eps` by RK4 with step at most [`FLOW_STEP`].
fn flow_dense(field: &Field, x0: &[f64], eps: f64) -> Result<Vec<f64>, NumError> {
    let mut x = x0.to_vec();
    if eps == 0.0 {
        return Ok(x);
    }
    let n = libm::ceil(eps.abs() / FLOW_STEP).max(1.0) as usize;
    let h = eps / n as f64;
    let mut prev = field.dens(&x);
    if prev.contains(&0.0) {
        return Err(NumError::FlowSingularity(eps));
    }
    for _ in 0..n {
        field.step(&mut x, h);
        let dens = field.dens(&x);
        let crossed = dens.iter().zip(&prev).any(|(&d, &p)| d == 0.0 || d.signum() != p.signum());
        if crossed || field.coords.iter().any(|s| !x[s.index()].is_finite()) {
            return Err(NumError::FlowSingularity(eps));
        }
        prev = dens;
    }
    Ok(x)
}

/// Integrates `dz/dε = X(z)` from the seed point to every requested ε.
pub fn integrate_flow(m: &ModelDef, req: &FlowRequest) -> Result<Vec<FlowPoint>, NumError> {
    let x0 = dense(m, &req.seed_point);
    let field = Field::new(m, &req.generator);
    let form = closed_form(m, &req.generator);
    let mut out = Vec::with_capacity(req.epsilon_values.len());
    for &eps in &req.epsilon_values {
        let x = flow_dense(&field, &x0, eps)?;
        let closed_form_error = match &form {
            Some(f) => {
                let exact = closed_form_point(&x0, &field.coords, f, eps);
                let err = max_relative_error(&exact, &x, &field.coords);
                if !(err <= CLOSED_FORM_TOL) {
                    return Err(NumError::ClosedForm { eps, err });
                }
                Some(err)
            }
            None => None,
        };
        let point = field.coords.iter().map(|&s| (s, x[s.index()])).collect();
        out.push(FlowPoint { eps, point, closed_form_error });
    }
    Ok(out)
}

struct CompiledModel {
    rhs: Vec<Compiled>,
    outputs: Vec<Compiled>,
}

impl CompiledModel {
    fn new(m: &ModelDef) -> Self {
        CompiledModel {
            rhs: m.dynamics.iter().map(Compiled::new).collect(),
            outputs: m.outputs.iter().map(|(_, e)| Compiled::new(e)).collect(),
        }
    }
}

fn set_inputs(m: &ModelDef, cfg: &SimConfig, x: &mut [f64], t: f64) {
    x[m.time.index()] = t;
    for (&u, f) in m.inputs.iter().zip(&cfg.inputs) {
        x[u.index()] = f.eval(t);
    }
}

/// Fixed-step RK4 simulation from a point holding initial states and
/// parameters. Outputs are sampled at `n_samples` uniform times on
/// `[0, t_end]`.
pub fn simulate(m: &ModelDef, point: &BTreeMap<SymbolId, f64>, cfg: &SimConfig) -> Result<Trajectory, NumError> {
    cfg.check(m)?;
    simulate_dense(m, &CompiledModel::new(m), &dense(m, point), cfg)
}

fn simulate_dense(m: &ModelDef, cm: &CompiledModel, x0: &[f64], cfg: &SimConfig) -> Result<Trajectory, NumError> {
    let n = m.states.len();
    let dt = cfg.t_end / (cfg.n_samples - 1) as f64;
    let sub = libm::ceil(dt / cfg.rk4_step - 1e-9).max(1.0) as usize;
    let h = dt / sub as f64;
    let mut x = x0.to_vec();
    let mut y = x.clone();
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let sample = |x: &mut [f64], t: f64, tr: &mut Trajectory| {
        set_inputs(m, cfg, x, t);
        tr.times.push(t);
        tr.states.push(m.states.iter().map(|s| x[s.index()]).collect());
        tr.outputs.push(cm.outputs.iter().map(|o| o.eval(x)).collect());
    };
    let mut tr = Trajectory { times: Vec::new(), states: Vec::new(), outputs: Vec::new() };
    sample(&mut x, 0.0, &mut tr);
    for step in 1..cfg.n_samples {
        let t_start = (step - 1) as f64 * dt;
        for j in 0..sub {
            let t = t_start + j as f64 * h;
            y.copy_from_slice(&x);
            for (stage, (frac, tfrac)) in [(0.0, 0.0), (0.5, 0.5), (0.5, 0.5), (1.0, 1.0)].into_iter().enumerate() {
                if stage > 0 {
                    for (i, s) in m.states.iter().enumerate() {
                        y[s.index()] = x[s.index()] + frac * h * k[stage - 1][i];
                    }
                }
                set_inputs(m, cfg, &mut y, t + tfrac * h);
                for (i, f) in cm.rhs.iter().enumerate() {
                    k[stage][i] = f.eval(&y);
                }
            }
            for (i, s) in m.states.iter().enumerate() {
                let v = x[s.index()] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
                if !v.is_finite() {
                    return Err(NumError::BlowUp(t + h));
                }
                x[s.index()] = v;
            }
        }
        sample(&mut x, step as f64 * dt, &mut tr);
    }
    Ok(tr)
}

/// Flows the seed point along the generator and compares simulations,
/// invariant values and trajectory structure for each ε.
pub fn verify_symmetry(
    m: &ModelDef,
    cfg: &SimConfig,
    req: &FlowRequest,
    invariants: &[RationalFunction],
) -> Result<Vec<EpsilonCheck>, NumError> {
    cfg.check(m)?;
    let cm = CompiledModel::new(m);
    let field = Field::new(m, &req.generator);
    let inv: Vec<Compiled> = invariants.iter().map(Compiled::new).collect();
    let x0 = dense(m, &req.seed_point);
    let base = simulate_dense(m, &cm, &x0, cfg)?;
    let flows = integrate_flow(m, req)?;
    let mut out = Vec::with_capacity(flows.len());
    for fp in flows {
        let mut x1 = x0.clone();
        for (&s, &v) in &fp.point {
            x1[s.index()] = v;
        }
        let moved = simulate_dense(m, &cm, &x1, cfg)?;
        let max_output_deviation = base
            .outputs
            .iter()
            .zip(&moved.outputs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(&a, &b)| relative(a, b)))
            .fold(0.0, f64::max);
        let max_invariant_drift = inv.iter().map(|c| relative(c.eval(&x0), c.eval(&x1))).fold(0.0, f64::max);
        let structure_residual = structure_residual(m, &field, &x0, &base, &moved, fp.eps)?;
        let check = EpsilonCheck {
            eps: fp.eps,
            max_output_deviation,
            max_invariant_drift,
            structure_residual,
            closed_form_error: fp.closed_form_error,
        };
        if !check.max_output_deviation.is_finite() || !check.max_invariant_drift.is_finite() {
            return Err(NumError::BlowUp(cfg.t_end));
        }
        out.push(check);
    }
    Ok(out)
}

/// Max relative distance between the flowed original states and the
/// transformed trajectory over the sample times.
fn structure_residual(
    m: &ModelDef,
    field: &Field,
    x0: &[f64],
    base: &Trajectory,
    moved: &Trajectory,
    eps: f64,
) -> Result<f64, NumError> {
    let mut worst: f64 = 0.0;
    let mut x = x0.to_vec();
    for (orig, img) in base.states.iter().zip(&moved.states) {
        for (s, &v) in m.states.iter().zip(orig) {
            x[s.index()] = v;
        }
        let y = flow_dense(field, &x, eps)?;
        for (s, &v) in m.states.iter().zip(img) {
            worst = worst.max(relative(v, y[s.index()]));
        }
    }
    Ok(worst)
}

/// Central difference of the outputs along the flow at `point`:
/// `max_j |y_j(ẑ(h)) − y_j(ẑ(−h))| / (2h)`, inputs taken at `t = 0`.
pub fn fd_output_invariance(m: &ModelDef, g: &Generator, point: &BTreeMap<SymbolId, f64>, h: f64, inputs: &[InputFn]) -> f64 {
    let mut x0 = dense(m, point);
    for (&u, f) in m.inputs.iter().zip(inputs) {
        x0[u.index()] = f.eval(0.0);
    }
    let field = Field::new(m, g);
    let (Ok(plus), Ok(minus)) = (flow_dense(&field, &x0, h), flow_dense(&field, &x0, -h)) else {
        return f64::INFINITY;
    };
    m.outputs
        .iter()
        .map(|(_, e)| {
            let c = Compiled::new(e);
            ((c.eval(&plus) - c.eval(&minus)) / (2.0 * h)).abs()
        })
        .fold(0.0, f64::max)
}

/// Copy of `g` with the sign of its first non-zero χ flipped (first
/// non-zero η when every χ vanishes).
pub fn corrupt(g: &Generator) -> Generator {
    let mut c = g.clone();
    c.normalized = false;
    let slot = c.chi.iter_mut().find(|e| !e.is_zero()).or_else(|| c.eta.iter_mut().find(|e| !e.is_zero()));
    if let Some(e) = slot {
        *e = -&*e;
    }
    c
}

/// Draws states and parameters uniformly in `[0.5, 2]`, redrawing while any
/// model or generator denominator is within `1e-3` of zero.
pub fn seed_point(m: &ModelDef, generators: &[&Generator], seed: u64) -> BTreeMap<SymbolId, f64> {
    let mut dens: Vec<Compiled> = m.dynamics.iter().chain(m.outputs.iter().map(|(_, e)| e)).map(Compiled::new).collect();
    for g in generators {
        dens.extend(g.entries().filter(|e| !e.is_zero()).map(Compiled::new));
    }
    let coords = coordinates(m);
    let mut rng = Sampler::new(seed);
    loop {
        let point: BTreeMap<SymbolId, f64> = coords.iter().map(|&s| (s, rng.real(0.5, 2.0))).collect();
        let mut x = dense(m, &point);
        // inputs range over the same box for the screen
        for &u in &m.inputs {
            x[u.index()] = rng.real(0.5, 2.0);
        }
        if dens.iter().all(|c| c.den(&x).abs() > 1e-3) {
            return point;
        }
    }
}

#[cfg(test)]
mod tests;
