//! Dense square matrices over a [`Scalar`] field, plus the JSON matrix
//! format shared by every command.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, rational_from_f64, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    d: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(d: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != d * d {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {d}x{d} matrix, got {}",
                d * d,
                data.len()
            )));
        }
        Ok(Self { d, data })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let d = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {d}",
                row.len()
            )));
        }
        Ok(Self {
            d,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            data: vec![S::zero(); d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.data[i * d + i] = S::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.d + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        (0..self.d).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            d: self.d,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "matrix dimensions differ");
        let d = self.d;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).clone() + a.clone() * b.clone();
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "matrix dimensions differ");
        Self {
            d: self.d,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Self {
        Self::identity(self.d).sub(self)
    }

    pub fn row_sums(&self) -> Vec<S> {
        (0..self.d)
            .map(|i| self.row(i).iter().cloned().fold(S::zero(), |a, b| a + b))
            .collect()
    }

    pub fn trace(&self) -> S {
        (0..self.d).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    /// Principal submatrix on the listed indices, in the given order.
    pub fn principal(&self, keep: &[usize]) -> Self {
        let k = keep.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in keep {
            for &j in keep {
                data.push(self.get(i, j).clone());
            }
        }
        Self { d: k, data }
    }

    /// Determinant by Gaussian elimination, pivoting on the largest magnitude.
    pub fn det(&self) -> S {
        let d = self.d;
        let mut a = self.data.clone();
        let mut det = S::one();
        for col in 0..d {
            let pivot = (col..d)
                .filter(|&r| !a[r * d + col].is_zero())
                .max_by(|&x, &y| {
                    a[x * d + col]
                        .magnitude()
                        .partial_cmp(&a[y * d + col].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            let Some(p) = pivot else {
                return S::zero();
            };
            if p != col {
                for j in 0..d {
                    a.swap(p * d + j, col * d + j);
                }
                det = -det;
            }
            let pv = a[col * d + col].clone();
            det = det * pv.clone();
            for r in col + 1..d {
                let f = a[r * d + col].clone();
                if f.is_zero() {
                    continue;
                }
                let f = f / pv.clone();
                for j in col..d {
                    let v = a[r * d + j].clone() - f.clone() * a[col * d + j].clone();
                    a[r * d + j] = v;
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse. Fails with [`Error::Singular`] when no nonzero
    /// pivot exists (exactly zero in rational mode).
    pub fn inverse(&self) -> Result<Self> {
        let d = self.d;
        let mut a = self.data.clone();
        let mut inv = Self::identity(d).data;
        for col in 0..d {
            let p = (col..d)
                .filter(|&r| !a[r * d + col].is_zero())
                .max_by(|&x, &y| {
                    a[x * d + col]
                        .magnitude()
                        .partial_cmp(&a[y * d + col].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .ok_or(Error::Singular)?;
            if !S::EXACT && a[p * d + col].magnitude() < 1e-300 {
                return Err(Error::Singular);
            }
            if p != col {
                for j in 0..d {
                    a.swap(p * d + j, col * d + j);
                    inv.swap(p * d + j, col * d + j);
                }
            }
            let pv = a[col * d + col].clone();
            for j in 0..d {
                a[col * d + j] = a[col * d + j].clone() / pv.clone();
                inv[col * d + j] = inv[col * d + j].clone() / pv.clone();
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = a[r * d + col].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let v = a[r * d + j].clone() - f.clone() * a[col * d + j].clone();
                    a[r * d + j] = v;
                    let w = inv[r * d + j].clone() - f.clone() * inv[col * d + j].clone();
                    inv[r * d + j] = w;
                }
            }
        }
        Ok(Self { d, data: inv })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Rational,
    Float,
}

/// A square matrix as read from or written to JSON, carrying its scalar mode.
#[derive(Clone, Debug, PartialEq)]
pub enum SquareMatrix {
    Rational(Matrix<Rational>),
    Float(Matrix<f64>),
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    d: usize,
    mode: ScalarMode,
    entries: Vec<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl SquareMatrix {
    pub fn dim(&self) -> usize {
        match self {
            Self::Rational(m) => m.dim(),
            Self::Float(m) => m.dim(),
        }
    }

    pub fn mode(&self) -> ScalarMode {
        match self {
            Self::Rational(_) => ScalarMode::Rational,
            Self::Float(_) => ScalarMode::Float,
        }
    }

    /// Exact rational view; float entries convert to their exact binary value.
    pub fn to_rational(&self) -> Result<Matrix<Rational>> {
        match self {
            Self::Rational(m) => Ok(m.clone()),
            Self::Float(m) => {
                let data = m
                    .entries()
                    .iter()
                    .map(|&v| rational_from_f64(v))
                    .collect::<Result<Vec<_>>>()?;
                Matrix::new(m.dim(), data)
            }
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            Self::Rational(m) => m.to_f64(),
            Self::Float(m) => m.clone(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(Self::from_json_labeled(s)?.0)
    }

    /// Parses matrix JSON; also returns the optional vertex labels of the
    /// chain variant of the format.
    pub fn from_json_labeled(s: &str) -> Result<(Self, Option<Vec<String>>)> {
        let raw: MatrixJson = serde_json::from_str(s)?;
        if raw.d == 0 {
            return Err(Error::Dimension("d must be positive".into()));
        }
        if raw.entries.len() != raw.d || raw.entries.iter().any(|r| r.len() != raw.d) {
            return Err(Error::Dimension(format!(
                "entries must be a {0}x{0} array",
                raw.d
            )));
        }
        if let Some(labels) = &raw.labels {
            if labels.len() != raw.d {
                return Err(Error::Dimension(format!(
                    "{} labels given for {} vertices",
                    labels.len(),
                    raw.d
                )));
            }
        }
        let cells = raw.entries.iter().flatten();
        let m = match raw.mode {
            ScalarMode::Rational => {
                let data = cells.map(value_to_rational).collect::<Result<Vec<_>>>()?;
                Self::Rational(Matrix::new(raw.d, data)?)
            }
            ScalarMode::Float => {
                let data = cells.map(value_to_f64).collect::<Result<Vec<_>>>()?;
                Self::Float(Matrix::new(raw.d, data)?)
            }
        };
        Ok((m, raw.labels))
    }

    pub fn to_json_value(&self) -> Value {
        let (mode, entries): (_, Vec<Vec<Value>>) = match self {
            Self::Rational(m) => (
                ScalarMode::Rational,
                m.rows()
                    .iter()
                    .map(|r| r.iter().map(|x| Value::String(format_rational(x))).collect())
                    .collect(),
            ),
            Self::Float(m) => (
                ScalarMode::Float,
                m.rows()
                    .iter()
                    .map(|r| r.iter().map(|&x| serde_json::json!(x)).collect())
                    .collect(),
            ),
        };
        serde_json::to_value(MatrixJson {
            d: self.dim(),
            mode,
            entries,
            labels: None,
        })
        .expect("matrix json is always serializable")
    }
}

fn value_to_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_integer(i.into()))
            } else {
                parse_rational(&n.to_string())
            }
        }
        other => Err(Error::Parse(format!("matrix entry {other} is not a number"))),
    }
}

fn value_to_f64(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("matrix entry {n} is not finite"))),
        Value::String(s) => Ok(parse_rational(s)?.to_f64()),
        other => Err(Error::Parse(format!("matrix entry {other} is not a number"))),
    }
}
