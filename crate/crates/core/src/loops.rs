//! Rooted and unrooted oriented loops and the loop measure
//! `μ(γ) = (Π transition probabilities along γ) / J(γ)`.

use std::fmt;

use crate::chain::SubMarkovChain;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Vertex sequence `(x_0, …, x_{n-1})` traversed cyclically, returning
/// from `x_{n-1}` to `x_0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootedLoop(pub Vec<usize>);

impl RootedLoop {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn unrooted(&self) -> UnrootedLoop {
        UnrootedLoop::from_rooted(&self.0)
    }

    /// Ordered steps `(x_i, x_{i+1 mod n})`.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.0.len();
        (0..n).map(move |i| (self.0[i], self.0[(i + 1) % n]))
    }
}

/// Rotation class of a rooted loop, stored as its lexicographically minimal
/// rotation. Orientation is kept: a loop and its reversal differ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnrootedLoop {
    canonical: Vec<usize>,
}

impl UnrootedLoop {
    pub fn from_rooted(seq: &[usize]) -> Self {
        let n = seq.len();
        if n == 0 {
            return Self { canonical: vec![] };
        }
        let best = (0..n)
            .min_by(|&a, &b| {
                (0..n)
                    .map(|k| seq[(a + k) % n])
                    .cmp((0..n).map(|k| seq[(b + k) % n]))
            })
            .expect("nonempty");
        Self {
            canonical: (0..n).map(|k| seq[(best + k) % n]).collect(),
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.canonical
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    pub fn rooted(&self) -> RootedLoop {
        RootedLoop(self.canonical.clone())
    }

    /// `J(γ)`: the largest `J` with `γ` a `J`-fold repetition of one loop.
    pub fn multiplicity(&self) -> usize {
        let n = self.canonical.len();
        if n == 0 {
            return 1;
        }
        let period = (1..=n)
            .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| self.canonical[i] == self.canonical[(i + p) % n]))
            .expect("n is always a period");
        n / period
    }

    /// Comma-separated vertex labels, 1-based unless `labels` is given.
    pub fn to_text(&self, labels: Option<&[String]>) -> String {
        self.canonical
            .iter()
            .map(|&v| match labels {
                Some(l) => l[v].clone(),
                None => (v + 1).to_string(),
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses the comma-separated text form and canonicalises it.
    pub fn parse(text: &str, labels: Option<&[String]>, d: usize) -> Result<Self> {
        let mut seq = vec![];
        for tok in text.split(',').map(str::trim) {
            let v = match labels {
                Some(l) => l
                    .iter()
                    .position(|x| x == tok)
                    .ok_or_else(|| Error::Parse(format!("unknown vertex label {tok:?}")))?,
                None => {
                    let k: usize = tok
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad vertex {tok:?}")))?;
                    if k == 0 {
                        return Err(Error::Parse("vertices are 1-based".into()));
                    }
                    k - 1
                }
            };
            if v >= d {
                return Err(Error::Parse(format!("vertex {tok} out of range")));
            }
            seq.push(v);
        }
        Ok(Self::from_rooted(&seq))
    }
}

impl fmt::Display for UnrootedLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(None))
    }
}

/// Product of the transition probabilities along the loop, without the
/// multiplicity correction.
pub fn loop_weight<S: Scalar>(lp: &RootedLoop, chain: &SubMarkovChain<S>) -> S {
    lp.steps()
        .fold(S::one(), |acc, (x, y)| acc * chain.p(x, y).clone())
}

/// `μ(γ)`; zero when the loop uses a transition of probability zero.
pub fn loop_measure<S: Scalar>(lp: &RootedLoop, chain: &SubMarkovChain<S>) -> Result<S> {
    if let Some(&v) = lp.0.iter().find(|&&v| v >= chain.dim()) {
        return Err(Error::Dimension(format!("loop vertex {} out of range", v + 1)));
    }
    if lp.is_empty() {
        return Err(Error::Domain("empty loop".into()));
    }
    let j = lp.unrooted().multiplicity();
    Ok(loop_weight(lp, chain) / S::from_i64(j as i64))
}

pub fn total_mass<S: Scalar>(chain: &SubMarkovChain<S>) -> f64 {
    chain.total_mass()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::scalar::{rat, Rational};

    fn p2() -> SubMarkovChain<Rational> {
        SubMarkovChain::new(
            Matrix::from_rows(vec![vec![rat(0, 1), rat(1, 2)], vec![rat(1, 2), rat(0, 1)]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn measure_examples() {
        let c = p2();
        assert_eq!(loop_measure(&RootedLoop(vec![0, 1]), &c).unwrap(), rat(1, 4));
        assert_eq!(loop_measure(&RootedLoop(vec![0, 1, 0, 1]), &c).unwrap(), rat(1, 32));
        assert_eq!(loop_measure(&RootedLoop(vec![0, 0]), &c).unwrap(), rat(0, 1));
    }

    #[test]
    fn total_mass_matches_series() {
        let c = p2();
        let mass = total_mass(&c);
        assert!((mass - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        let series: f64 = (1..200).map(|k| 0.25f64.powi(k) / k as f64).sum();
        assert!((mass - series).abs() < 1e-15);
    }

    #[test]
    fn canonical_form_keeps_orientation() {
        let a = UnrootedLoop::from_rooted(&[2, 0, 1]);
        assert_eq!(a.vertices(), &[0, 1, 2]);
        let rev = UnrootedLoop::from_rooted(&[2, 1, 0]);
        assert_eq!(rev.vertices(), &[0, 2, 1]);
        assert_ne!(a, rev);
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(UnrootedLoop::from_rooted(&[0, 1, 0, 1]).multiplicity(), 2);
        assert_eq!(UnrootedLoop::from_rooted(&[0, 0, 0]).multiplicity(), 3);
        assert_eq!(UnrootedLoop::from_rooted(&[0, 1, 1]).multiplicity(), 1);
    }

    #[test]
    fn text_round_trip() {
        let l = UnrootedLoop::from_rooted(&[1, 0, 2]);
        assert_eq!(l.to_text(None), "1,3,2");
        assert_eq!(UnrootedLoop::parse("3,2,1", None, 3).unwrap(), UnrootedLoop::from_rooted(&[2, 1, 0]));
        assert!(UnrootedLoop::parse("0,1", None, 3).is_err());
        assert!(UnrootedLoop::parse("1,4", None, 3).is_err());
        let labels = vec!["a".to_string(), "b".to_string()];
        let l = UnrootedLoop::parse("b,a", Some(&labels), 2).unwrap();
        assert_eq!(l.to_text(Some(&labels)), "a,b");
    }
}
