use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Numeric signal for a declared input.
#[derive(Debug, Clone, PartialEq)]
pub enum InputFn {
    Zero,
    One,
    Sin,
    /// 0 before `t0`, 1 from `t0` on.
    Step(f64),
    /// `(t, value)` samples, linearly interpolated and held constant outside.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InputError {
    #[error("unknown input function `{0}` (expected zero, one, sin, step(t0))")]
    UnknownName(String),
    #[error("input table line {line}: {reason}")]
    BadTable { line: usize, reason: &'static str },
}

impl InputFn {
    /// Parses `zero`, `one`, `sin` or `step(t0)`.
    pub fn parse_name(s: &str) -> Result<Self, InputError> {
        let t = s.trim();
        match t {
            "zero" => return Ok(InputFn::Zero),
            "one" => return Ok(InputFn::One),
            "sin" => return Ok(InputFn::Sin),
            _ => {}
        }
        if let Some(arg) = t.strip_prefix("step(").and_then(|r| r.strip_suffix(')')) {
            if let Ok(t0) = arg.trim().parse::<f64>() {
                if t0.is_finite() {
                    return Ok(InputFn::Step(t0));
                }
            }
        }
        Err(InputError::UnknownName(String::from(t)))
    }

    /// Parses a two-column whitespace- or comma-separated table. Lines
    /// starting with `#` are ignored; times must increase strictly.
    pub fn parse_table(text: &str) -> Result<Self, InputError> {
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
            let bad = |reason| InputError::BadTable { line: i + 1, reason };
            let t: f64 = it.next().and_then(|s| s.parse().ok()).ok_or(bad("expected a time value"))?;
            let v: f64 = it.next().and_then(|s| s.parse().ok()).ok_or(bad("expected a second column"))?;
            if it.next().is_some() {
                return Err(bad("more than two columns"));
            }
            if !t.is_finite() || !v.is_finite() {
                return Err(bad("non-finite value"));
            }
            if rows.last().is_some_and(|&(t0, _)| t <= t0) {
                return Err(bad("times must increase"));
            }
            rows.push((t, v));
        }
        if rows.is_empty() {
            return Err(InputError::BadTable { line: 0, reason: "no data rows" });
        }
        Ok(InputFn::Table(rows))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            InputFn::Zero => 0.0,
            InputFn::One => 1.0,
            InputFn::Sin => libm::sin(t),
            InputFn::Step(t0) => {
                if t >= *t0 {
                    1.0
                } else {
                    0.0
                }
            }
            InputFn::Table(rows) => {
                let i = rows.partition_point(|&(ti, _)| ti <= t);
                if i == 0 {
                    return rows[0].1;
                }
                if i == rows.len() {
                    return rows[i - 1].1;
                }
                let (t0, v0) = rows[i - 1];
                let (t1, v1) = rows[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

impl fmt::Display for InputFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputFn::Zero => f.write_str("zero"),
            InputFn::One => f.write_str("one"),
            InputFn::Sin => f.write_str("sin"),
            InputFn::Step(t0) => write!(f, "step({t0})"),
            InputFn::Table(rows) => write!(f, "table({} rows)", rows.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_functions() {
        assert_eq!(InputFn::parse_name("sin").unwrap(), InputFn::Sin);
        assert_eq!(InputFn::parse_name("step(2.5)").unwrap(), InputFn::Step(2.5));
        assert!(InputFn::parse_name("cos").is_err());
        assert_eq!(InputFn::Step(1.0).eval(0.5), 0.0);
        assert_eq!(InputFn::Step(1.0).eval(1.0), 1.0);
    }

    #[test]
    fn table_interpolation() {
        let f = InputFn::parse_table("# t u\n0 0\n1, 2\n3 2\n").unwrap();
        assert_eq!(f.eval(-1.0), 0.0);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(2.0), 2.0);
        assert_eq!(f.eval(9.0), 2.0);
        assert!(InputFn::parse_table("0 1\n0 2\n").is_err());
        assert!(InputFn::parse_table("0 1 2\n").is_err());
    }
}
