//! Truncated multivariate power series in `z_1..z_d` with dense storage over
//! the box `0 <= q_i <= cap_i`, and the check of
//! `det(I - ZA)^{-α} = Σ_q per_α(A[q]) Π z_i^{q_i} / q_i!`.

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SquareMatrix};
use crate::model::BlockSpec;
use crate::permanent::per_alpha_block;
use crate::scalar::{factorial, format_rational, Rational, Scalar};

/// Largest dimension accepted by the Leibniz expansion of `det(I - ZA)`.
pub const MAX_LEIBNIZ_DIM: usize = 6;

/// Every stored coefficient is the true coefficient of the untruncated
/// result of the operations applied so far.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSeries<S> {
    caps: Vec<u32>,
    strides: Vec<usize>,
    coeffs: Vec<S>,
}

impl<S: Scalar> MultiSeries<S> {
    pub fn zero(caps: &[u32]) -> Self {
        let mut strides = vec![1usize; caps.len()];
        for k in (0..caps.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (caps[k + 1] as usize + 1);
        }
        let len = caps.iter().map(|&c| c as usize + 1).product();
        Self {
            caps: caps.to_vec(),
            strides,
            coeffs: vec![S::zero(); len],
        }
    }

    pub fn one(caps: &[u32]) -> Self {
        let mut s = Self::zero(caps);
        s.coeffs[0] = S::one();
        s
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    pub fn vars(&self) -> usize {
        self.caps.len()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Dense slot of a multi-index, or `None` outside the box.
    pub fn index(&self, q: &[u32]) -> Option<usize> {
        if q.len() != self.caps.len() || q.iter().zip(&self.caps).any(|(a, c)| a > c) {
            return None;
        }
        Some(q.iter().zip(&self.strides).map(|(&a, &s)| a as usize * s).sum())
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<u32> {
        self.strides
            .iter()
            .map(|&s| {
                let a = idx / s;
                idx %= s;
                a as u32
            })
            .collect()
    }

    pub fn coeff(&self, q: &[u32]) -> S {
        self.index(q)
            .map(|i| self.coeffs[i].clone())
            .unwrap_or_else(S::zero)
    }

    pub fn set_coeff(&mut self, q: &[u32], v: S) -> Result<()> {
        let i = self
            .index(q)
            .ok_or_else(|| Error::Dimension(format!("multi-index {q:?} outside the box")))?;
        self.coeffs[i] = v;
        Ok(())
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    fn check_same_box(&self, other: &Self) -> Result<()> {
        if self.caps != other.caps {
            return Err(Error::Dimension(format!(
                "series boxes differ: {:?} vs {:?}",
                self.caps, other.caps
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_box(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a = a.clone() + b.clone();
        }
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a = a.clone() * c.clone());
        out
    }

    /// Sub-box offsets `r <= q`, as (slot of r, slot of q - r).
    fn split_pairs(&self, q: &[u32]) -> Vec<(usize, usize)> {
        let sub_caps: Vec<u32> = q.to_vec();
        let mut out = vec![];
        for r in BlockSpec::boxed(&sub_caps) {
            let r = r.as_slice();
            let rest: Vec<u32> = q.iter().zip(r).map(|(a, b)| a - b).collect();
            out.push((
                self.index(r).expect("r <= q is inside the box"),
                self.index(&rest).expect("q - r is inside the box"),
            ));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_box(other)?;
        let mut out = Self::zero(&self.caps);
        for idx in 0..self.coeffs.len() {
            let q = self.multi_index(idx);
            let mut acc = S::zero();
            for (a, b) in self.split_pairs(&q) {
                if self.coeffs[a].is_zero() || other.coeffs[b].is_zero() {
                    continue;
                }
                acc = acc + self.coeffs[a].clone() * other.coeffs[b].clone();
            }
            out.coeffs[idx] = acc;
        }
        Ok(out)
    }

    /// Multiplies by `c0 + c1·z_var`.
    pub fn mul_linear(&self, c0: &S, c1: &S, var: usize) -> Self {
        let mut out = Self::zero(&self.caps);
        for idx in 0..self.coeffs.len() {
            let q = self.multi_index(idx);
            let mut v = c0.clone() * self.coeffs[idx].clone();
            if q[var] > 0 && !c1.is_zero() {
                v = v + c1.clone() * self.coeffs[idx - self.strides[var]].clone();
            }
            out.coeffs[idx] = v;
        }
        out
    }

    fn total_degree(q: &[u32]) -> i64 {
        q.iter().map(|&x| x as i64).sum()
    }

    /// `log S` for `S` with constant term 1, from `S·E(log S) = E(S)` where
    /// `E = Σ z_i ∂_i` multiplies the coefficient at `q` by `|q|`.
    pub fn log(&self) -> Result<Self> {
        if self.coeffs[0] != S::one() {
            return Err(Error::Domain("log needs a series with constant term 1".into()));
        }
        let mut out = Self::zero(&self.caps);
        for idx in 1..self.coeffs.len() {
            let q = self.multi_index(idx);
            let deg = Self::total_degree(&q);
            let mut acc = S::from_i64(deg) * self.coeffs[idx].clone();
            for (r, rest) in self.split_pairs(&q) {
                if r == 0 || r == idx || out.coeffs[r].is_zero() || self.coeffs[rest].is_zero() {
                    continue;
                }
                let rdeg = Self::total_degree(&self.multi_index(r));
                acc = acc - S::from_i64(rdeg) * out.coeffs[r].clone() * self.coeffs[rest].clone();
            }
            out.coeffs[idx] = acc / S::from_i64(deg);
        }
        Ok(out)
    }

    /// `exp T` for `T` with constant term 0, from `E(exp T) = exp T · E(T)`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Domain("exp needs a series with constant term 0".into()));
        }
        let mut out = Self::one(&self.caps);
        for idx in 1..self.coeffs.len() {
            let q = self.multi_index(idx);
            let deg = Self::total_degree(&q);
            let mut acc = S::zero();
            for (r, rest) in self.split_pairs(&q) {
                if r == 0 || self.coeffs[r].is_zero() || out.coeffs[rest].is_zero() {
                    continue;
                }
                let rdeg = Self::total_degree(&self.multi_index(r));
                acc = acc + S::from_i64(rdeg) * self.coeffs[r].clone() * out.coeffs[rest].clone();
            }
            out.coeffs[idx] = acc / S::from_i64(deg);
        }
        Ok(out)
    }

    /// `S^{-α} = exp(-α log S)`.
    pub fn neg_alpha_power(&self, alpha: &S) -> Result<Self> {
        if self.coeffs[0] != S::one() {
            return Err(Error::Domain(
                "power series base must have constant term 1".into(),
            ));
        }
        self.log()?.scale(&(-alpha.clone())).exp()
    }
}

/// The polynomial `det(I - ZA)` by Leibniz expansion, truncated to `caps`.
pub fn series_det_i_minus_za<S: Scalar>(a: &Matrix<S>, caps: &[u32]) -> Result<MultiSeries<S>> {
    let d = a.dim();
    if d > MAX_LEIBNIZ_DIM {
        return Err(Error::SizeCap {
            order: d,
            cap: MAX_LEIBNIZ_DIM,
        });
    }
    if caps.len() != d {
        return Err(Error::Dimension(format!(
            "{} degree caps for a {d}x{d} matrix",
            caps.len()
        )));
    }
    let mut total = MultiSeries::zero(caps);
    for (perm, odd) in permutations_with_parity(d) {
        let mut term = MultiSeries::one(caps);
        for (i, &j) in perm.iter().enumerate() {
            let c0 = if i == j { S::one() } else { S::zero() };
            let c1 = -a.get(i, j).clone();
            term = term.mul_linear(&c0, &c1, i);
        }
        if odd {
            term = term.scale(&-S::one());
        }
        total = total.add(&term)?;
    }
    Ok(total)
}

/// All permutations of `0..n` (Heap's algorithm) with their parity.
fn permutations_with_parity(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut odd = false;
    let mut out = vec![(a.clone(), odd)];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            odd = !odd;
            out.push((a.clone(), odd));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// α for the MacMahon check: exact rational or float.
#[derive(Clone, Debug, PartialEq)]
pub enum AlphaValue {
    Exact(Rational),
    Float(f64),
}

/// Relative residual bound in float mode.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct MacMahonRow {
    pub q: Vec<u32>,
    pub series_coeff: String,
    pub permanent_coeff: String,
    pub residual: String,
    #[serde(skip)]
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MacMahonReport {
    pub exact: bool,
    pub rows: Vec<MacMahonRow>,
    pub passed: bool,
}

/// Compares every coefficient of `det(I - ZA)^{-α}` on the box `q <= caps`
/// with `per_α(A[q]) / Π q_i!`.
pub fn macmahon_check(
    a: &SquareMatrix,
    alpha: &AlphaValue,
    caps: &[u32],
    brute_cap: usize,
) -> Result<MacMahonReport> {
    let exact_a = a.to_rational()?;
    let qs = BlockSpec::boxed(caps);
    let perms: Vec<_> = qs
        .par_iter()
        .map(|q| per_alpha_block(&exact_a, q, brute_cap))
        .collect::<Result<Vec<_>>>()?;
    let q_factorials: Vec<Rational> = qs
        .iter()
        .map(|q| {
            Rational::from_integer(
                q.as_slice()
                    .iter()
                    .fold(num::BigInt::one(), |acc, &x| acc * factorial(x)),
            )
        })
        .collect();

    let rows: Vec<MacMahonRow> = match alpha {
        AlphaValue::Exact(al) => {
            let series = series_det_i_minus_za(&exact_a, caps)?.neg_alpha_power(al)?;
            qs.iter()
                .zip(&perms)
                .zip(&q_factorials)
                .map(|((q, p), f)| {
                    let s = series.coeff(q.as_slice());
                    let pc = p.eval(al) / f;
                    let r = &s - &pc;
                    MacMahonRow {
                        q: q.0.clone(),
                        series_coeff: format_rational(&s),
                        permanent_coeff: format_rational(&pc),
                        ok: r.is_zero(),
                        residual: format_rational(&r.abs()),
                    }
                })
                .collect()
        }
        AlphaValue::Float(al) => {
            let float_a = a.to_f64();
            let series = series_det_i_minus_za(&float_a, caps)?.neg_alpha_power(al)?;
            qs.iter()
                .zip(&perms)
                .zip(&q_factorials)
                .map(|((q, p), f)| {
                    let s = series.coeff(q.as_slice());
                    let pc = p.eval_f64(*al) / f.to_f64();
                    let r = relative_residual(s, pc);
                    MacMahonRow {
                        q: q.0.clone(),
                        series_coeff: format!("{s:.17e}"),
                        permanent_coeff: format!("{pc:.17e}"),
                        ok: r <= FLOAT_TOLERANCE,
                        residual: format!("{r:.17e}"),
                    }
                })
                .collect()
        }
    };
    let passed = rows.iter().all(|r| r.ok);
    Ok(MacMahonReport {
        exact: matches!(alpha, AlphaValue::Exact(_)),
        rows,
        passed,
    })
}

fn relative_residual(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
