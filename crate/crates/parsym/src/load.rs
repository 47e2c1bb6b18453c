//! Model and input-table loading.

use std::fs;
use std::path::{Path, PathBuf};

use parsym_core::model::{import_model, parse_model, FixtureId, ModelDef, ModelDocument, ParseError};
use parsym_core::numverify::{InputError, InputFn};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: invalid model document: {source}")]
    Document { path: PathBuf, source: serde_json::Error },
    #[error("input `{spec}`: {source}")]
    Input { spec: String, source: InputError },
    #[error("{0}")]
    Option(String),
}

/// Where a model came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    Fixture(FixtureId),
}

impl Source {
    /// Existing paths win; otherwise `decay`, `decay.psm`, ... name a bundled
    /// fixture.
    pub fn resolve(arg: &Path) -> Source {
        if arg.exists() {
            return Source::File(arg.to_path_buf());
        }
        let name = arg.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let stem = name.strip_suffix(".psm").unwrap_or(name);
        match stem.parse::<FixtureId>() {
            Ok(id) if arg.parent().is_none_or(|p| p.as_os_str().is_empty()) => Source::Fixture(id),
            _ => Source::File(arg.to_path_buf()),
        }
    }

    /// Short label for reports; never an absolute path.
    pub fn label(&self) -> String {
        match self {
            Source::File(p) => p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()),
            Source::Fixture(id) => id.file_name().to_string(),
        }
    }
}

/// Reads a `.psm` file, or a JSON model document when the file starts with `{`.
pub fn load_model(arg: &Path) -> Result<(Source, ModelDef), LoadError> {
    let source = Source::resolve(arg);
    let m = match &source {
        Source::Fixture(id) => id.model(),
        Source::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| LoadError::Io { path: path.clone(), source: e })?;
            if text.trim_start().starts_with('{') {
                let doc: ModelDocument = serde_json::from_str(&text)
                    .map_err(|e| LoadError::Document { path: path.clone(), source: e })?;
                import_model(&doc).map_err(|e| LoadError::Parse { path: path.clone(), source: e })?
            } else {
                parse_model(&text).map_err(|e| LoadError::Parse { path: path.clone(), source: e })?
            }
        }
    };
    Ok((source, m))
}

/// A resolved `--input` choice: function plus the label echoed in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct InputChoice {
    pub input: String,
    pub label: String,
    pub func: InputFn,
}

fn parse_input_value(value: &str) -> Result<(String, InputFn), LoadError> {
    match InputFn::parse_name(value) {
        Ok(f) => Ok((f.to_string(), f)),
        Err(name_err) => {
            let path = Path::new(value);
            if !path.is_file() {
                return Err(LoadError::Input { spec: value.into(), source: name_err });
            }
            let text = fs::read_to_string(path).map_err(|e| LoadError::Io { path: path.into(), source: e })?;
            let f = InputFn::parse_table(&text).map_err(|e| LoadError::Input { spec: value.into(), source: e })?;
            let name = path.file_name().map_or_else(|| value.to_string(), |n| n.to_string_lossy().into_owned());
            Ok((format!("table({name})"), f))
        }
    }
}

/// Resolves `--input` values (`sin`, `step(2)`, `table.txt`, or `u=...`)
/// against the model's inputs. Unassigned inputs get `sin`, which the
/// caller reports as a notice.
pub fn resolve_inputs(m: &ModelDef, specs: &[String]) -> Result<(Vec<InputChoice>, Vec<String>), LoadError> {
    let names: Vec<&str> = m.inputs.iter().map(|&u| m.name_of(u)).collect();
    let mut chosen: Vec<Option<(String, InputFn)>> = vec![None; names.len()];
    for spec in specs {
        let (target, value) = match spec.split_once('=') {
            Some((k, v)) if names.contains(&k.trim()) => (Some(k.trim()), v.trim()),
            Some((k, _)) => return Err(LoadError::Option(format!("--input {spec}: `{}` is not a declared input", k.trim()))),
            None => (None, spec.trim()),
        };
        let parsed = parse_input_value(value)?;
        match target {
            Some(k) => {
                let i = names.iter().position(|n| *n == k).expect("checked above");
                chosen[i] = Some(parsed);
            }
            None => chosen.iter_mut().for_each(|c| *c = Some(parsed.clone())),
        }
    }
    if names.is_empty() && !specs.is_empty() {
        return Err(LoadError::Option(format!("--input given but model `{}` declares no inputs", m.name)));
    }
    let mut notices = Vec::new();
    let choices = names
        .iter()
        .zip(chosen)
        .map(|(n, c)| {
            let (label, func) = c.unwrap_or_else(|| {
                notices.push(format!("input {n} has no numeric function; using sin for verification"));
                ("sin".into(), InputFn::Sin)
            });
            InputChoice { input: n.to_string(), label, func }
        })
        .collect();
    Ok((choices, notices))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_names_resolve() {
        assert_eq!(Source::resolve(Path::new("sei")), Source::Fixture(FixtureId::Sei));
        assert_eq!(Source::resolve(Path::new("decay.psm")), Source::Fixture(FixtureId::Decay));
        assert!(matches!(Source::resolve(Path::new("models/decay.psm")), Source::File(_)));
        assert_eq!(Source::File("/a/b/m.psm".into()).label(), "m.psm");
    }

    #[test]
    fn inputs_resolve() {
        let m = FixtureId::Glucose.model();
        let (c, notices) = resolve_inputs(&m, &[]).unwrap();
        assert_eq!((c[0].label.as_str(), notices.len()), ("sin", 1));
        let (c, notices) = resolve_inputs(&m, &["u=step(1.5)".into()]).unwrap();
        assert_eq!(c[0].func, InputFn::Step(1.5));
        assert!(notices.is_empty());
        assert!(matches!(resolve_inputs(&m, &["w=sin".into()]), Err(LoadError::Option(_))));
        assert!(matches!(resolve_inputs(&m, &["cos".into()]), Err(LoadError::Input { .. })));
        let decay = FixtureId::Decay.model();
        assert!(resolve_inputs(&decay, &["sin".into()]).is_err());
        assert_eq!(resolve_inputs(&decay, &[]).unwrap().0, vec![]);
    }
}
