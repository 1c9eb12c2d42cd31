//! Sub-Markovian chains on a finite vertex set, their Green functions, and
//! the two reductions used by the cascade sampler: the h-transform, which
//! moves all killing to a root, and the star expansion, which replaces
//! self-loops by two-step excursions through copy vertices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::CrossingMatrix;
use crate::scalar::Scalar;

/// Row sums may exceed 1 by this much in float mode.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;
/// A chain is transient when its spectral radius is below `1 - TRANSIENCE_MARGIN`.
pub const TRANSIENCE_MARGIN: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SubMarkovChain<S> {
    p: Matrix<S>,
    killing: Vec<S>,
    labels: Option<Vec<String>>,
}

/// Spectral radius of a nonnegative matrix, as `lim ||P^k||^{1/k}` along
/// `k = 2^m` with the matrix renormalised after every squaring.
pub fn spectral_radius(p: &Matrix<f64>) -> f64 {
    let norm = |m: &Matrix<f64>| {
        (0..m.dim())
            .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let n0 = norm(p);
    if n0 == 0.0 {
        return 0.0;
    }
    let mut m = p.map(|x| x / n0);
    let mut log_scale = n0.ln();
    let mut power = 1.0f64;
    for _ in 0..48 {
        let sq = m.mul(&m);
        let n = norm(&sq);
        if n == 0.0 {
            return 0.0;
        }
        m = sq.map(|x| x / n);
        log_scale = 2.0 * log_scale + n.ln();
        power *= 2.0;
    }
    (log_scale / power).exp()
}

impl<S: Scalar> SubMarkovChain<S> {
    /// Checks nonnegativity, row sums `<= 1` and transience.
    pub fn new(p: Matrix<S>) -> Result<Self> {
        let d = p.dim();
        if d == 0 {
            return Err(Error::Dimension("chain needs at least one vertex".into()));
        }
        for i in 0..d {
            for j in 0..d {
                if p.get(i, j).is_negative() {
                    return Err(Error::Domain(format!(
                        "negative transition probability at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let sums = p.row_sums();
        let mut killing = Vec::with_capacity(d);
        for (i, s) in sums.into_iter().enumerate() {
            let k = S::one() - s.clone();
            let over = if S::EXACT {
                k.is_negative()
            } else {
                k.to_f64() < -ROW_SUM_TOLERANCE
            };
            if over {
                return Err(Error::NotSubMarkovian {
                    row: i + 1,
                    sum: s.to_f64(),
                });
            }
            killing.push(if k.is_negative() { S::zero() } else { k });
        }
        let radius = spectral_radius(&p.to_f64());
        if !(radius < 1.0 - TRANSIENCE_MARGIN) {
            return Err(Error::NotTransient { radius });
        }
        Ok(Self {
            p,
            killing,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.dim()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.p
    }

    pub fn p(&self, x: usize, y: usize) -> &S {
        self.p.get(x, y)
    }

    /// `P_{xΔ} = 1 - Σ_y P_xy`.
    pub fn killing(&self) -> &[S] {
        &self.killing
    }

    /// External (1-based unless labelled) name of vertex `x`.
    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => (x + 1).to_string(),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn to_f64(&self) -> SubMarkovChain<f64> {
        SubMarkovChain {
            p: self.p.to_f64(),
            killing: self.killing.iter().map(|k| k.to_f64()).collect(),
            labels: self.labels.clone(),
        }
    }

    /// `G = (I - P)^{-1}`.
    pub fn green_function(&self) -> Result<Matrix<S>> {
        self.p
            .identity_minus()
            .inverse()
            .map_err(|_| Error::Internal("I - P is singular for a transient chain".into()))
    }

    pub fn det_i_minus_p(&self) -> S {
        self.p.identity_minus().det()
    }

    /// `-log det(I - P)`, the total mass of the loop measure.
    pub fn total_mass(&self) -> f64 {
        -self.det_i_minus_p().to_f64().ln()
    }

    /// Chain restricted to `keep` (the others become killing states).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let mut c = Self::new(self.p.principal(keep))?;
        if let Some(l) = &self.labels {
            c.labels = Some(keep.iter().map(|&i| l[i].clone()).collect());
        }
        Ok(c)
    }

    /// Checks `det(I - P) = [Π_j G_{V∖{x_0..x_{j-1}}}(x_j, x_j)]^{-1}` for the
    /// given vertex ordering.
    pub fn det_identity_check(&self, ordering: &[usize]) -> Result<DetIdentityReport<S>> {
        let d = self.dim();
        let mut seen = vec![false; d];
        if ordering.len() != d
            || ordering
                .iter()
                .any(|&x| x >= d || std::mem::replace(&mut seen[x], true))
        {
            return Err(Error::Domain("ordering must be a permutation of the vertices".into()));
        }
        let mut factors = Vec::with_capacity(d);
        for j in 0..d {
            let keep: Vec<usize> = ordering[j..].to_vec();
            let sub = self.p.principal(&keep);
            let g = sub
                .identity_minus()
                .inverse()
                .map_err(|_| Error::Internal("killed sub-chain has singular I - P".into()))?;
            // ordering[j] sits at position 0 of `keep`
            factors.push(g.get(0, 0).clone());
        }
        let product = factors.iter().cloned().fold(S::one(), |a, b| a * b);
        let det = self.det_i_minus_p();
        let lhs = S::one() / product.clone();
        let holds = if S::EXACT {
            lhs == det
        } else {
            let (a, b) = (lhs.to_f64(), det.to_f64());
            (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
        };
        Ok(DetIdentityReport {
            ordering: ordering.to_vec(),
            diagonal_factors: factors,
            product,
            det,
            holds,
        })
    }

    /// h-transform with `h(x) = P^x(T_{x0} < ∞) = G(x, x0) / G(x0, x0)`.
    ///
    /// The transformed chain `P^h_xy = P_xy h(y) / h(x)` is killed only at
    /// `x0`. Returns the chain and `h`.
    pub fn h_transform(&self, x0: usize) -> Result<(Self, Vec<S>)> {
        let d = self.dim();
        if x0 >= d {
            return Err(Error::Dimension(format!("root {} out of range", x0 + 1)));
        }
        let g = self.green_function()?;
        let g00 = g.get(x0, x0).clone();
        let h: Vec<S> = (0..d).map(|x| g.get(x, x0).clone() / g00.clone()).collect();
        if let Some(x) = (0..d).find(|&x| h[x].is_zero() || h[x].to_f64() <= 0.0) {
            return Err(Error::Unreachable { vertex: x + 1 });
        }
        let mut ph = Matrix::zeros(d);
        for x in 0..d {
            for y in 0..d {
                let v = self.p.get(x, y).clone();
                if v.is_zero() {
                    continue;
                }
                ph.set(x, y, v * h[y].clone() / h[x].clone());
            }
        }
        let mut chain = Self::new(ph)?;
        chain.labels = self.labels.clone();
        // Rows other than x0 are stochastic up to rounding.
        if !S::EXACT {
            for (x, k) in chain.killing.iter_mut().enumerate() {
                if x != x0 && k.to_f64().abs() < 1e-12 {
                    *k = S::zero();
                }
            }
        }
        Ok((chain, h))
    }

    /// Star expansion: every self-looped vertex `x` gets a copy `x*` with
    /// `P*_{x x*} = P_xx`, `P*_{x* x} = 1` and `P*_xx = 0`. With `full`, a
    /// copy is added for every vertex.
    pub fn star_expand(&self, full: bool) -> Result<StarExpansion<S>> {
        let d = self.dim();
        let copied: Vec<usize> = (0..d)
            .filter(|&x| full || !self.p.get(x, x).is_zero())
            .collect();
        let size = d + copied.len();
        let mut ps = Matrix::zeros(size);
        for x in 0..d {
            for y in 0..d {
                if x != y {
                    ps.set(x, y, self.p.get(x, y).clone());
                }
            }
        }
        let mut copy_of = vec![None; d];
        let mut origin: Vec<usize> = (0..d).collect();
        for (k, &x) in copied.iter().enumerate() {
            let star = d + k;
            copy_of[x] = Some(star);
            origin.push(x);
            ps.set(x, star, self.p.get(x, x).clone());
            ps.set(star, x, S::one());
        }
        let mut chain = Self::new(ps)?;
        if let Some(l) = &self.labels {
            let mut labels = l.clone();
            labels.extend(copied.iter().map(|&x| format!("{}*", l[x])));
            chain.labels = Some(labels);
        }
        Ok(StarExpansion {
            chain,
            base_dim: d,
            origin,
            copy_of,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DetIdentityReport<S> {
    pub ordering: Vec<usize>,
    pub diagonal_factors: Vec<S>,
    pub product: S,
    pub det: S,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct StarExpansion<S> {
    pub chain: SubMarkovChain<S>,
    pub base_dim: usize,
    /// Expanded vertex -> original vertex.
    pub origin: Vec<usize>,
    /// Original vertex -> its copy, when one exists.
    pub copy_of: Vec<Option<usize>>,
}

impl<S> StarExpansion<S> {
    /// Projects crossings on `V ∪ V*` back to `V`: `n_xx = n*_{x x*}` and
    /// `n_xy = n*_xy` for distinct original vertices.
    pub fn project_crossings(&self, star: &CrossingMatrix) -> CrossingMatrix {
        let d = self.base_dim;
        let mut n = CrossingMatrix::zeros(d);
        for x in 0..d {
            for y in 0..d {
                if x != y {
                    n.set(x, y, star.get(x, y));
                }
            }
            if let Some(s) = self.copy_of[x] {
                n.set(x, x, star.get(x, s));
            }
        }
        n
    }
}
