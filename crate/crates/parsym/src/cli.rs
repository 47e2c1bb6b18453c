//! Command-line interface. `run` never exits the process so tests can drive
//! it in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use parsym_core::invariants::InvariantConfig;
use parsym_core::model::{export_model, parse_model, FixtureId, FIXTURE_DIR};
use parsym_core::sample::DEFAULT_SEED;
use parsym_core::symmetry::AnsatzConfig;

use crate::load::{load_model, resolve_inputs, LoadError};
use crate::pipeline::{analyze, Options, PipelineError};
use crate::report::{AnalysisReport, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PIPELINE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "parsym", version, about = "Parameter-state symmetries and universal invariants of rational ODE models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute generators, invariants and verdicts, then verify numerically.
    Analyze(RunArgs),
    /// Numerically verify the computed generators and invariants.
    Verify(RunArgs),
    /// List the bundled example models.
    Fixtures,
    /// Print a model as a structured JSON document (or as .psm text).
    Export {
        model: PathBuf,
        /// Emit the .psm text form instead of JSON.
        #[arg(long)]
        psm: bool,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Model file (.psm or JSON document) or a bundled fixture name.
    pub model: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub num_degree: u32,
    #[arg(long, default_value_t = 2)]
    pub den_degree: u32,
    #[arg(long, default_value_t = 1)]
    pub eta_state_degree: u32,
    #[arg(long, default_value_t = 2)]
    pub eta_param_degree: u32,
    /// Comma-separated flow parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.5, -0.1, 0.1, 0.5])]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_output: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_invariant: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the structured report to this file (`-` for standard output).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Input function: zero, one, sin, step(t0) or a two-column table file;
    /// `name=...` targets one input. Repeatable.
    #[arg(long)]
    pub input: Vec<String>,
    /// Flip the sign of one coefficient of generator K before verifying.
    #[arg(long, value_name = "K")]
    pub corrupt: Option<usize>,
}

impl RunArgs {
    pub fn options(&self) -> Result<Options, LoadError> {
        if self.eps.iter().any(|e| !e.is_finite()) {
            return Err(LoadError::Option("--eps values must be finite".into()));
        }
        if !(self.tol_output > 0.0 && self.tol_invariant > 0.0) {
            return Err(LoadError::Option("tolerances must be positive".into()));
        }
        Ok(Options {
            invariants: InvariantConfig { num_degree: self.num_degree, den_degree: self.den_degree, seed: self.seed },
            ansatz: AnsatzConfig { eta_state_degree: self.eta_state_degree, eta_param_degree: self.eta_param_degree },
            eps: self.eps.clone(),
            tol_output: self.tol_output,
            tol_invariant: self.tol_invariant,
            corrupt: self.corrupt,
        })
    }
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Write(#[from] std::io::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Load(_) => EXIT_INPUT,
            Failure::Pipeline(_) | Failure::Write(_) => EXIT_PIPELINE,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => run_pipeline(a, false, out, err),
        Command::Verify(a) => run_pipeline(a, true, out, err),
        Command::Fixtures => fixtures(out).map_err(Failure::from),
        Command::Export { model, psm } => export(model, *psm, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn run_pipeline(a: &RunArgs, verify_only: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let opts = a.options()?;
    let (source, m) = load_model(&a.model)?;
    let (inputs, notices) = resolve_inputs(&m, &a.input)?;
    let analysis = analyze(&m, &opts, &inputs)?;
    let generator_count = analysis.basis.generators.len() + analysis.basis.synthetic.len();
    if let Some(k) = opts.corrupt.filter(|&k| k >= generator_count) {
        return Err(LoadError::Option(format!("--corrupt {k}: the basis has {generator_count} generators")).into());
    }
    let report = AnalysisReport::new(&m, &source.label(), &analysis, &opts, notices);
    let failures = report.verification.failures;
    let (json, text) = if verify_only {
        let r = VerifyReport::from_analysis(report);
        (serde_json::to_string_pretty(&r), r.to_text(Some(&analysis.timing)))
    } else {
        (serde_json::to_string_pretty(&report), report.to_text(Some(&analysis.timing)))
    };
    let json = json.expect("report serializes") + "\n";
    match a.json.as_deref() {
        Some(p) if p == Path::new("-") => {
            out.write_all(json.as_bytes())?;
            let t = &analysis.timing;
            writeln!(
                err,
                "timing: symmetry {:.3}s, invariants {:.3}s, verification {:.3}s",
                t.symmetry.as_secs_f64(),
                t.invariants.as_secs_f64(),
                t.verification.as_secs_f64()
            )?;
        }
        Some(p) => {
            std::fs::write(p, json)?;
            out.write_all(text.as_bytes())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    if verify_only && failures > 0 {
        writeln!(err, "{failures} verification checks failed")?;
        return Ok(EXIT_FAILURES);
    }
    Ok(EXIT_OK)
}

fn fixtures(out: &mut dyn Write) -> std::io::Result<i32> {
    for id in FixtureId::ALL {
        writeln!(out, "{:<8} {}/{}", id.name(), FIXTURE_DIR, id.file_name())?;
    }
    Ok(EXIT_OK)
}

fn export(model: &Path, psm: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let (_, m) = load_model(model)?;
    let doc = export_model(&m);
    if psm {
        out.write_all(doc.to_text().as_bytes())?;
    } else {
        let text = serde_json::to_string_pretty(&doc).expect("document serializes");
        writeln!(out, "{text}")?;
    }
    debug_assert_eq!(parse_model(&doc.to_text()).as_ref(), Ok(&m));
    Ok(EXIT_OK)
}
