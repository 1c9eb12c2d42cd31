use std::collections::hash_map::RandomState;
use std::fs;
use std::hash::BuildHasher;
use std::io::Write;
use std::path::Path;

use permsoup::scalar::format_rational;
use permsoup::{parse_rational, Matrix, Rational, Scalar, SquareMatrix};
use serde_json::{json, Value};

use crate::Format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unreadable input.
    Usage(String),
    /// The library rejected the input.
    Domain(permsoup::Error),
}

impl From<permsoup::Error> for CliError {
    fn from(e: permsoup::Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub struct Input {
    pub matrix: SquareMatrix,
    pub labels: Option<Vec<String>>,
}

pub fn load_matrix(path: &Path) -> CliResult<Input> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let (matrix, labels) = SquareMatrix::from_json_labeled(&text)?;
    Ok(Input { matrix, labels })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Alpha {
    Exact(Rational),
    Float(f64),
}

impl Alpha {
    pub fn parse(s: &str) -> CliResult<Self> {
        let s = s.trim();
        if s.contains(['.', 'e', 'E']) || s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("nan") {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Alpha::Float(v)),
                _ => usage(format!("invalid alpha {s:?}")),
            }
        } else {
            parse_rational(s)
                .map(Alpha::Exact)
                .map_err(|_| CliError::Usage(format!("invalid alpha {s:?}")))
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Alpha::Exact(r) => permsoup::scalar::rational_to_f64(r),
            Alpha::Float(v) => *v,
        }
    }

    /// α for the samplers, which need it positive.
    pub fn positive(s: &str) -> CliResult<f64> {
        let a = Self::parse(s)?.to_f64();
        if a > 0.0 {
            Ok(a)
        } else {
            usage(format!("alpha must be positive, got {s}"))
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Alpha::Exact(r) => json!(format_rational(r)),
            Alpha::Float(v) => json!(v),
        }
    }
}

/// JSON rendering of scalars: exact values as "p/q" strings, floats as numbers.
pub trait JsonScalar {
    fn json(&self) -> Value;
}

impl JsonScalar for f64 {
    fn json(&self) -> Value {
        json!(self)
    }
}

impl JsonScalar for Rational {
    fn json(&self) -> Value {
        json!(format_rational(self))
    }
}

pub fn matrix_json<S: Scalar + JsonScalar>(m: &Matrix<S>) -> Value {
    Value::Array(
        (0..m.dim())
            .map(|i| Value::Array(m.row(i).iter().map(JsonScalar::json).collect()))
            .collect(),
    )
}

pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| RandomState::new().hash_one(std::time::SystemTime::now()))
}

/// Converts 1-based vertex indices from the command line.
pub fn zero_based(v: &[usize], d: usize) -> CliResult<Vec<usize>> {
    v.iter()
        .map(|&x| {
            if (1..=d).contains(&x) {
                Ok(x - 1)
            } else {
                usage(format!("vertex {x} out of range 1..={d}"))
            }
        })
        .collect()
}

pub fn block_spec(q: &Option<Vec<u32>>, d: usize) -> CliResult<permsoup::BlockSpec> {
    match q {
        None => Ok(permsoup::BlockSpec::ones(d)),
        Some(v) if v.len() == d => Ok(permsoup::BlockSpec::new(v.clone())),
        Some(v) => usage(format!("q has {} entries, matrix has {d} rows", v.len())),
    }
}

pub fn report(command: &str, config: Value, body: Value) -> Value {
    let mut out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
    });
    if let (Some(o), Value::Object(b)) = (out.as_object_mut(), body) {
        o.extend(b);
    }
    out
}

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Pretty => serde_json::to_string_pretty(v),
        Format::Json => serde_json::to_string(v),
    }
    .expect("values built from json! always serialize")
}

pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}
