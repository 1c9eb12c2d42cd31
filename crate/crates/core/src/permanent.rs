//! α-permanents `per_α(M) = Σ_π α^{#(π)} Π_i M_{i,π(i)}` as exact
//! polynomials in α.
//!
//! Three routes are provided: direct enumeration of permutations, the same
//! enumeration grouped by crossing matrix `N(π)`, and the closed form for
//! matrices whose induced graph is a *-forest.

use std::collections::{BTreeMap, HashMap};

use num::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{
    base_map, block_expand, graph_of_matrix, tq_enumerate, BlockSpec, CrossingMatrix,
};
use crate::poly::AlphaPolynomial;
use crate::scalar::{factorial, pow_u32, Rational};

/// Largest order enumerated by default (9! ≈ 3.6e5 permutations).
pub const DEFAULT_BRUTE_CAP: usize = 9;

/// Tracks cycles of a partial injection built row by row.
///
/// Every element not yet mapped is the end of a path and every element not
/// yet hit is the start of one; `head[end]` and `tail[start]` link the two
/// ends of each path. Mapping `i -> j` closes a cycle exactly when `j` is
/// the start of the path ending at `i`.
struct CycleTracker {
    head: Vec<usize>,
    tail: Vec<usize>,
    cycles: usize,
}

enum Step {
    Closed,
    Joined { start: usize, end: usize, old_tail: usize, old_head: usize },
}

impl CycleTracker {
    fn new(m: usize) -> Self {
        Self {
            head: (0..m).collect(),
            tail: (0..m).collect(),
            cycles: 0,
        }
    }

    fn map(&mut self, i: usize, j: usize) -> Step {
        let start = self.head[i];
        if start == j {
            self.cycles += 1;
            return Step::Closed;
        }
        let end = self.tail[j];
        let step = Step::Joined {
            start,
            end,
            old_tail: self.tail[start],
            old_head: self.head[end],
        };
        self.tail[start] = end;
        self.head[end] = start;
        step
    }

    fn unmap(&mut self, step: Step) {
        match step {
            Step::Closed => self.cycles -= 1,
            Step::Joined { start, end, old_tail, old_head } => {
                self.tail[start] = old_tail;
                self.head[end] = old_head;
            }
        }
    }
}

/// Callbacks for a depth-first walk over permutations with nonzero support.
trait Walker {
    fn enter(&mut self, row: usize, col: usize);
    fn leave(&mut self, row: usize, col: usize);
    fn leaf(&mut self, cycles: usize);
}

fn walk<W: Walker>(
    support: &[bool],
    m: usize,
    row: usize,
    used: &mut [bool],
    tracker: &mut CycleTracker,
    w: &mut W,
) {
    if row == m {
        w.leaf(tracker.cycles);
        return;
    }
    for col in 0..m {
        if used[col] || !support[row * m + col] {
            continue;
        }
        used[col] = true;
        let step = tracker.map(row, col);
        w.enter(row, col);
        walk(support, m, row + 1, used, tracker, w);
        w.leave(row, col);
        tracker.unmap(step);
        used[col] = false;
    }
}

/// Splits the walk on the image of row 0 and runs the branches in
/// parallel. Each branch gets its own walker; results are merged by the
/// caller, so the outcome does not depend on scheduling.
fn walk_parallel<W, F>(support: &[bool], m: usize, make: F) -> Vec<W>
where
    W: Walker + Send,
    F: Fn() -> W + Sync,
{
    if m == 0 {
        let mut w = make();
        w.leaf(0);
        return vec![w];
    }
    (0..m)
        .into_par_iter()
        .filter(|&col| support[col])
        .map(|col| {
            let mut w = make();
            let mut used = vec![false; m];
            let mut tracker = CycleTracker::new(m);
            used[col] = true;
            let step = tracker.map(0, col);
            w.enter(0, col);
            walk(support, m, 1, &mut used, &mut tracker, &mut w);
            w.leave(0, col);
            tracker.unmap(step);
            w
        })
        .collect()
}

struct ProductWalker<'a> {
    m: &'a Matrix<Rational>,
    prefix: Vec<Rational>,
    by_cycles: Vec<Rational>,
}

impl Walker for ProductWalker<'_> {
    fn enter(&mut self, row: usize, col: usize) {
        let next = &self.prefix[row] * self.m.get(row, col);
        self.prefix[row + 1] = next;
    }

    fn leave(&mut self, _row: usize, _col: usize) {}

    fn leaf(&mut self, cycles: usize) {
        let last = self.prefix.len() - 1;
        self.by_cycles[cycles] += &self.prefix[last];
    }
}

fn check_cap(order: usize, cap: usize) -> Result<()> {
    if order > cap {
        return Err(Error::SizeCap { order, cap });
    }
    Ok(())
}

/// `per_α(M)` by enumerating every permutation with a nonzero product.
pub fn per_alpha_brute(m: &Matrix<Rational>, cap: usize) -> Result<AlphaPolynomial> {
    let order = m.dim();
    check_cap(order, cap)?;
    let support: Vec<bool> = m.entries().iter().map(|x| !x.is_zero()).collect();
    let walkers = walk_parallel(&support, order, || ProductWalker {
        m,
        prefix: {
            let mut p = vec![Rational::zero(); order + 1];
            p[0] = Rational::one();
            p
        },
        by_cycles: vec![Rational::zero(); order + 1],
    });
    let mut coeffs = vec![Rational::zero(); order + 1];
    for w in walkers {
        for (c, v) in coeffs.iter_mut().zip(w.by_cycles) {
            *c += v;
        }
    }
    Ok(AlphaPolynomial::new(coeffs))
}

/// `per_α(A[q])`; the empty block (`|q| = 0`) gives the constant 1.
pub fn per_alpha_block(a: &Matrix<Rational>, q: &BlockSpec, cap: usize) -> Result<AlphaPolynomial> {
    if q.dim() != a.dim() {
        return Err(Error::Dimension(format!(
            "block spec has {} entries for a {}x{} matrix",
            q.dim(),
            a.dim(),
            a.dim()
        )));
    }
    if q.total() == 0 {
        return Ok(AlphaPolynomial::one());
    }
    check_cap(q.total(), cap)?;
    let (block, _) = block_expand(a, q)?;
    per_alpha_brute(&block, cap)
}

/// `per_α(A[q])` through the closed form when `𝔾(A)` is a *-forest,
/// otherwise by enumeration.
pub fn per_alpha_auto(a: &Matrix<Rational>, q: &BlockSpec, cap: usize) -> Result<AlphaPolynomial> {
    if graph_of_matrix(a).classification().is_star_forest() {
        per_alpha_starforest(a, q)
    } else {
        per_alpha_block(a, q, cap)
    }
}

/// Crossing matrix of a permutation of the block index set:
/// `N_ij = #{m : base(m) = i, base(π(m)) = j}`.
pub fn crossing_of_permutation(pi: &[usize], base: &[usize], d: usize) -> Result<CrossingMatrix> {
    if pi.len() != base.len() {
        return Err(Error::Dimension(format!(
            "permutation has length {}, block index set has {}",
            pi.len(),
            base.len()
        )));
    }
    let mut seen = vec![false; pi.len()];
    for &p in pi {
        if p >= pi.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Domain("not a permutation of the block index set".into()));
        }
    }
    if let Some(&b) = base.iter().find(|&&b| b >= d) {
        return Err(Error::Dimension(format!("base vertex {b} out of range")));
    }
    let mut n = CrossingMatrix::zeros(d);
    for (m, &p) in pi.iter().enumerate() {
        n.add(base[m], base[p], 1);
    }
    Ok(n)
}

/// `per_α(A[q])` grouped by crossing matrix: `terms[n] = R(n) =
/// Σ_{π : N(π) = n} α^{#(π)}`, over permutations with nonzero product.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialExpansion {
    pub q: BlockSpec,
    pub terms: BTreeMap<CrossingMatrix, AlphaPolynomial>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    crossing: CrossingMatrix,
    poly: AlphaPolynomial,
}

impl Serialize for MonomialExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(n, p)| TermJson {
                crossing: n.clone(),
                poly: p.clone(),
            })
            .collect();
        list.serialize(s)
    }
}

impl MonomialExpansion {
    /// `Σ_n R(n) Π A_ij^{n_ij}`.
    pub fn reconstruct(&self, a: &Matrix<Rational>) -> AlphaPolynomial {
        self.terms
            .iter()
            .map(|(n, r)| r.scale(&monomial(a, n)))
            .sum()
    }
}

struct CrossingWalker<'a> {
    base: &'a [usize],
    n: CrossingMatrix,
    counts: HashMap<CrossingMatrix, Vec<u64>>,
    order: usize,
}

impl Walker for CrossingWalker<'_> {
    fn enter(&mut self, row: usize, col: usize) {
        self.n.add(self.base[row], self.base[col], 1);
    }

    fn leave(&mut self, row: usize, col: usize) {
        let (i, j) = (self.base[row], self.base[col]);
        self.n.set(i, j, self.n.get(i, j) - 1);
    }

    fn leaf(&mut self, cycles: usize) {
        match self.counts.get_mut(&self.n) {
            Some(c) => c[cycles] += 1,
            None => {
                let mut c = vec![0; self.order + 1];
                c[cycles] = 1;
                self.counts.insert(self.n.clone(), c);
            }
        }
    }
}

pub fn expansion_by_crossing(
    a: &Matrix<Rational>,
    q: &BlockSpec,
    cap: usize,
) -> Result<MonomialExpansion> {
    let d = a.dim();
    if q.dim() != d {
        return Err(Error::Dimension(format!(
            "block spec has {} entries for a {d}x{d} matrix",
            q.dim()
        )));
    }
    let order = q.total();
    check_cap(order, cap)?;
    let base = base_map(q);
    let support: Vec<bool> = base
        .iter()
        .flat_map(|&i| base.iter().map(move |&j| (i, j)))
        .map(|(i, j)| !a.get(i, j).is_zero())
        .collect();
    let walkers = walk_parallel(&support, order, || CrossingWalker {
        base: &base,
        n: CrossingMatrix::zeros(d),
        counts: HashMap::new(),
        order,
    });
    let mut merged: BTreeMap<CrossingMatrix, Vec<u64>> = BTreeMap::new();
    for w in walkers {
        for (n, c) in w.counts {
            let slot = merged.entry(n).or_insert_with(|| vec![0; order + 1]);
            slot.iter_mut().zip(c).for_each(|(s, x)| *s += x);
        }
    }
    let terms = merged
        .into_iter()
        .map(|(n, c)| (n, AlphaPolynomial::from_counts(&c)))
        .filter(|(_, p)| !p.is_zero())
        .collect();
    Ok(MonomialExpansion { q: q.clone(), terms })
}

/// `Π_{i,j} A_ij^{n_ij}` with `0^0 = 1`.
pub fn monomial(a: &Matrix<Rational>, n: &CrossingMatrix) -> Rational {
    let d = a.dim();
    let mut acc = Rational::one();
    for i in 0..d {
        for j in 0..d {
            let k = n.get(i, j);
            if k > 0 {
                acc *= pow_u32(a.get(i, j), k);
            }
        }
    }
    acc
}

/// `Σ_{π : N(π) = n} α^{#(π)}` for `n ∈ T_q` of a *-forest:
///
/// ```text
///   Π_i (α)_{q_i} q_i!  /  ( Π_i n_ii! · Π_{i<j, n_ij>0} (α)_{n_ij} n_ij! )
/// ```
///
/// The polynomial division is carried out exactly; a remainder means `n`
/// is not a crossing matrix of a *-forest with row sums `q`.
pub fn closed_form_coefficient(q: &BlockSpec, n: &CrossingMatrix) -> Result<AlphaPolynomial> {
    let d = q.dim();
    if n.dim() != d {
        return Err(Error::Dimension(format!(
            "crossing matrix is {0}x{0}, block spec has {1} entries",
            n.dim(),
            d
        )));
    }
    let mut poly = q
        .as_slice()
        .iter()
        .fold(AlphaPolynomial::one(), |acc, &qi| {
            acc * AlphaPolynomial::rising_factorial(qi)
        });
    let numer = q
        .as_slice()
        .iter()
        .fold(num::BigInt::one(), |acc, &qi| acc * factorial(qi));
    let mut denom = num::BigInt::one();
    for i in 0..d {
        denom *= factorial(n.get(i, i));
        for j in i + 1..d {
            let k = n.get(i, j);
            if k == 0 {
                continue;
            }
            poly = poly.div_exact(&AlphaPolynomial::rising_factorial(k))?;
            denom *= factorial(k);
        }
    }
    Ok(poly.scale(&Rational::new(numer, denom)))
}

/// `per_α(A[q])` for `𝔾(A)` a *-forest, as the sum over `T_q` of the closed
/// form coefficient times the monomial. No permutation is enumerated.
pub fn per_alpha_starforest(a: &Matrix<Rational>, q: &BlockSpec) -> Result<AlphaPolynomial> {
    let g = graph_of_matrix(a);
    if !g.classification().is_star_forest() {
        return Err(Error::UnsupportedStructure(
            "closed form requires a matrix associated to a *-forest".into(),
        ));
    }
    let mut total = AlphaPolynomial::zero();
    for n in tq_enumerate(&g, q)? {
        let c = closed_form_coefficient(q, &n)?;
        total = &total + &c.scale(&monomial(a, &n));
    }
    Ok(total)
}
