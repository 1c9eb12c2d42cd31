//! Generators and reference implementations shared by the integration
//! tests. The references are deliberately naive and share no code with the
//! library.
#![allow(dead_code)]

use num::{BigInt, One, Zero};
use permsoup::chain::SubMarkovChain;
use permsoup::model::InducedGraph;
use permsoup::scalar::rat;
use permsoup::{AlphaPolynomial, BlockSpec, CrossingMatrix, Matrix, Rational};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.random_range(1..=9), rng.random_range(1..=7))
}

/// Random matrix whose graph is a *-forest: a random forest with random
/// self-loops. Each tree edge is kept in one or both directions.
pub fn random_star_forest<R: Rng>(rng: &mut R, d: usize) -> Matrix<Rational> {
    let mut m = Matrix::zeros(d);
    for v in 1..d {
        if rng.random_bool(0.75) {
            let u = rng.random_range(0..v);
            match rng.random_range(0..4) {
                0 => m.set(u, v, small_rational(rng)),
                1 => m.set(v, u, small_rational(rng)),
                _ => {
                    m.set(u, v, small_rational(rng));
                    m.set(v, u, small_rational(rng));
                }
            }
        }
    }
    for v in 0..d {
        if rng.random_bool(0.4) {
            m.set(v, v, small_rational(rng));
        }
    }
    m
}

/// Random dense rational matrix, entries possibly zero or negative.
pub fn random_matrix<R: Rng>(rng: &mut R, d: usize) -> Matrix<Rational> {
    let data = (0..d * d)
        .map(|_| {
            if rng.random_bool(0.2) {
                Rational::zero()
            } else {
                rat(rng.random_range(-5..=9), rng.random_range(1..=5))
            }
        })
        .collect();
    Matrix::new(d, data).unwrap()
}

/// Random sub-Markovian chain with rational entries. Every row sum is at
/// most `1 - 1/den`, so the chain is transient.
pub fn random_chain<R: Rng>(rng: &mut R, d: usize, density: f64) -> SubMarkovChain<Rational> {
    let den: i64 = rng.random_range(d as i64 + 2..=3 * d as i64 + 4);
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        let mut budget = den - 1;
        for j in 0..d {
            if budget > 0 && rng.random_bool(density) {
                let k = rng.random_range(1..=budget.min(den / 2).max(1));
                m.set(i, j, rat(k, den));
                budget -= k;
            }
        }
    }
    SubMarkovChain::new(m).unwrap()
}

/// Random *-forest chain, transient by the same row-sum bound.
pub fn random_star_forest_chain<R: Rng>(rng: &mut R, d: usize) -> SubMarkovChain<Rational> {
    let shape = random_star_forest(rng, d);
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        let support: Vec<usize> = (0..d).filter(|&j| !shape.get(i, j).is_zero()).collect();
        if support.is_empty() {
            continue;
        }
        let den = rng.random_range(support.len() as i64 + 1..=3 * support.len() as i64 + 3);
        for j in support {
            m.set(i, j, rat(1, den));
        }
    }
    SubMarkovChain::new(m).unwrap()
}

pub fn expand(a: &Matrix<Rational>, q: &BlockSpec) -> (Matrix<Rational>, Vec<usize>) {
    let base: Vec<usize> = q
        .as_slice()
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
        .collect();
    let n = base.len();
    let mut m = Matrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            m.set(r, c, a.get(base[r], base[c]).clone());
        }
    }
    (m, base)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

fn cycles(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut c = 0;
    for s in 0..p.len() {
        if !seen[s] {
            c += 1;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = p[x];
            }
        }
    }
    c
}

/// `per_α(A[q])` by listing every permutation of the expanded index set.
pub fn naive_per_alpha(a: &Matrix<Rational>, q: &BlockSpec) -> AlphaPolynomial {
    let (m, _) = expand(a, q);
    let n = m.dim();
    let mut coeffs = vec![Rational::zero(); n + 1];
    for p in permutations(n) {
        let prod = (0..n).fold(Rational::one(), |acc, i| acc * m.get(i, p[i]));
        if !prod.is_zero() {
            coeffs[cycles(&p)] += prod;
        }
    }
    AlphaPolynomial::new(coeffs)
}

/// `Σ_{π : N(π) = n} α^{#(π)}` for every crossing matrix reached by a
/// permutation with nonzero product.
pub fn naive_grouped(
    a: &Matrix<Rational>,
    q: &BlockSpec,
) -> std::collections::BTreeMap<CrossingMatrix, AlphaPolynomial> {
    let (m, base) = expand(a, q);
    let n = m.dim();
    let d = a.dim();
    let mut counts: std::collections::BTreeMap<CrossingMatrix, Vec<u64>> = Default::default();
    for p in permutations(n) {
        if (0..n).any(|i| m.get(i, p[i]).is_zero()) {
            continue;
        }
        let mut x = CrossingMatrix::zeros(d);
        for i in 0..n {
            x.add(base[i], base[p[i]], 1);
        }
        counts.entry(x).or_insert_with(|| vec![0; n + 1])[cycles(&p)] += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, AlphaPolynomial::from_counts(&c)))
        .collect()
}

/// Ryser's formula for the classical permanent.
pub fn ryser(m: &Matrix<Rational>) -> Rational {
    let n = m.dim();
    if n == 0 {
        return Rational::one();
    }
    let mut total = Rational::zero();
    for mask in 1u32..(1 << n) {
        let mut prod = Rational::one();
        for i in 0..n {
            let s: Rational = (0..n)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| m.get(i, j).clone())
                .fold(Rational::zero(), |a, b| a + b);
            prod *= s;
        }
        let sign = if (n - mask.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
        total += prod * Rational::from_integer(BigInt::from(sign));
    }
    total
}

/// Every matrix supported on the edges of `g` with entries at most
/// `max_entry` satisfying the `T_q` conditions, by exhaustive search.
pub fn brute_tq(g: &InducedGraph, q: &BlockSpec) -> Vec<CrossingMatrix> {
    let d = g.dim();
    let cells: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| if i == j { g.has_self_loop(i) } else { g.has_edge(i, j) })
        .collect();
    let max_entry = q.as_slice().iter().copied().max().unwrap_or(0);
    let mut out = vec![];
    let mut cur = CrossingMatrix::zeros(d);
    fn rec(
        k: usize,
        cells: &[(usize, usize)],
        max_entry: u32,
        cur: &mut CrossingMatrix,
        q: &BlockSpec,
        out: &mut Vec<CrossingMatrix>,
    ) {
        if k == cells.len() {
            if cur.row_sums() == q.0 && cur.col_sums() == q.0 {
                out.push(cur.clone());
            }
            return;
        }
        let (i, j) = cells[k];
        for v in 0..=max_entry {
            cur.set(i, j, v);
            if cur.row_sums()[i] <= q.0[i] && cur.col_sums()[j] <= q.0[j] {
                rec(k + 1, cells, max_entry, cur, q, out);
            }
        }
        cur.set(i, j, 0);
    }
    rec(0, &cells, max_entry, &mut cur, q, &mut out);
    out.sort();
    out
}

/// All `q` with entries at most `max_entry` and total at most `max_total`.
pub fn block_specs(d: usize, max_entry: u32, max_total: u32) -> Vec<BlockSpec> {
    BlockSpec::boxed(&vec![max_entry; d])
        .into_iter()
        .filter(|q| q.total() as u32 <= max_total)
        .collect()
}

/// `Π_{k<n} (α + k)` at a float α.
pub fn rising(alpha: f64, n: u32) -> f64 {
    (0..n).map(|k| alpha + k as f64).product()
}

pub fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
