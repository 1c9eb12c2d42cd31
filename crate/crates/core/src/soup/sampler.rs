use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::chain::SubMarkovChain;
use crate::error::{Error, Result};
use crate::loops::{RootedLoop, UnrootedLoop};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Hard limit on sampled loop length.
pub const MAX_LOOP_LENGTH: usize = 1_000_000;

/// Draws loops from the normalised loop measure `μ / |μ|`.
///
/// A length `n` is drawn with probability `tr(P^n) / (n |μ|)` by sequential
/// inversion, a root `x` with probability `(P^n)_xx / tr(P^n)`, and then a
/// bridge of length `n` from `x` back to `x` step by step, moving from `z`
/// to `y` with probability `P_zy (P^{r-1})_yx / (P^r)_zx` when `r` steps
/// remain. Powers of `P` are cached as they are needed.
#[derive(Clone, Debug)]
pub struct LoopSampler {
    p: Matrix<f64>,
    total_mass: f64,
    powers: Vec<Matrix<f64>>,
    terms: Vec<f64>,
    cumulative: Vec<f64>,
}

impl LoopSampler {
    pub fn new<S: Scalar>(chain: &SubMarkovChain<S>) -> Self {
        let p = chain.matrix().to_f64();
        let total_mass = chain.total_mass().max(0.0);
        Self {
            powers: vec![Matrix::identity(p.dim())],
            p,
            total_mass,
            terms: vec![0.0],
            cumulative: vec![0.0],
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    fn ensure_power(&mut self, n: usize) -> Result<()> {
        if n > MAX_LOOP_LENGTH {
            return Err(Error::Sampling(format!(
                "loop length exceeded the safety cap of {MAX_LOOP_LENGTH} steps"
            )));
        }
        while self.powers.len() <= n {
            let next = self.powers.last().expect("P^0 is present").mul(&self.p);
            let k = self.powers.len();
            let term = next.trace() / k as f64;
            let cum = self.cumulative[k - 1] + term;
            self.terms.push(term);
            self.cumulative.push(cum);
            self.powers.push(next);
        }
        Ok(())
    }

    pub fn sample_length<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        let target = rng.random::<f64>() * self.total_mass;
        let window = self.p.dim() + 1;
        let mut last_positive = None;
        let mut n = 1;
        loop {
            self.ensure_power(n)?;
            if self.terms[n] > 0.0 {
                last_positive = Some(n);
            }
            if self.cumulative[n] > target {
                return Ok(n);
            }
            // Once no term in a full period can move the running sum, the
            // remaining gap to `target` is rounding error.
            if n > window {
                let ulp = self.cumulative[n] * f64::EPSILON;
                if self.terms[n + 1 - window..=n].iter().all(|&t| t < 0.5 * ulp) {
                    return last_positive
                        .ok_or_else(|| Error::Sampling("loop measure has no mass".into()));
                }
            }
            n += 1;
        }
    }

    pub fn sample_loop<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<RootedLoop> {
        let n = self.sample_length(rng)?;
        let d = self.p.dim();
        let pn = &self.powers[n];
        let root = pick(rng, (0..d).map(|x| *pn.get(x, x)))
            .ok_or_else(|| Error::Sampling(format!("no closed path of length {n}")))?;
        let mut seq = Vec::with_capacity(n);
        seq.push(root);
        let mut z = root;
        for remaining in (2..=n).rev() {
            let back = &self.powers[remaining - 1];
            let p = &self.p;
            let y = pick(rng, (0..d).map(|y| p.get(z, y) * back.get(y, root)))
                .ok_or_else(|| Error::Sampling("bridge has no continuation".into()))?;
            seq.push(y);
            z = y;
        }
        Ok(RootedLoop(seq))
    }

    /// Loops of one soup draw: a Poisson(`α |μ|`) number of i.i.d. loops.
    pub fn sample_soup<R: Rng + ?Sized>(
        &mut self,
        alpha: f64,
        rng: &mut R,
    ) -> Result<Vec<UnrootedLoop>> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        let lambda = alpha * self.total_mass;
        if lambda <= 0.0 {
            return Ok(vec![]);
        }
        let k = Poisson::new(lambda)
            .map_err(|e| Error::Sampling(format!("poisson({lambda}): {e}")))?
            .sample(rng) as usize;
        (0..k)
            .map(|_| self.sample_loop(rng).map(|l| l.unrooted()))
            .collect()
    }
}

/// Index drawn proportionally to the nonnegative weights.
fn pick<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = f64> + Clone) -> Option<usize> {
    let total: f64 = weights.clone().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in weights.enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if acc > target {
            return Some(i);
        }
    }
    last
}
