//! Induced graphs of matrices, *-forest classification, block expansion
//! `A[q]` and the crossing-support sets `T_q`.
//!
//! Vertices are 0-indexed here; the JSON and text formats are 1-indexed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Repetition counts `q`; `A[q]` repeats index `i` exactly `q[i]` times.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockSpec(pub Vec<u32>);

impl BlockSpec {
    pub fn new(q: Vec<u32>) -> Self {
        Self(q)
    }

    pub fn ones(d: usize) -> Self {
        Self(vec![1; d])
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|q|`, the order of `A[q]`.
    pub fn total(&self) -> usize {
        self.0.iter().map(|&x| x as usize).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Every `q` with `0 <= q_i <= caps_i`, in row-major order.
    pub fn boxed(caps: &[u32]) -> Vec<BlockSpec> {
        let mut out = vec![];
        let mut cur = vec![0u32; caps.len()];
        loop {
            out.push(BlockSpec(cur.clone()));
            let mut k = caps.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if cur[k] < caps[k] {
                    cur[k] += 1;
                    cur[k + 1..].iter_mut().for_each(|x| *x = 0);
                    break;
                }
            }
        }
    }

    /// Every `q` in `d` coordinates with `|q| <= max_total`.
    pub fn up_to_total(d: usize, max_total: u32) -> Vec<BlockSpec> {
        Self::boxed(&vec![max_total; d])
            .into_iter()
            .filter(|q| q.total() <= max_total as usize)
            .collect()
    }
}

impl fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Nonnegative integer `d x d` matrix `n = (n_ij)`.
///
/// Ordered lexicographically on its row-major entries, which is the
/// canonical key order of expansions and reports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrossingMatrix {
    d: usize,
    n: Vec<u32>,
}

impl CrossingMatrix {
    pub fn zeros(d: usize) -> Self {
        Self { d, n: vec![0; d * d] }
    }

    pub fn from_flat(d: usize, n: Vec<u32>) -> Result<Self> {
        if n.len() != d * d {
            return Err(Error::Dimension(format!(
                "crossing matrix needs {} entries, got {}",
                d * d,
                n.len()
            )));
        }
        Ok(Self { d, n })
    }

    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("crossing matrix must be square".into()));
        }
        Ok(Self {
            d,
            n: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.n[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.n[i * self.d + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: u32) {
        self.n[i * self.d + j] += v;
    }

    pub fn flat(&self) -> &[u32] {
        &self.n
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.n.chunks(self.d.max(1)).map(<[u32]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<u32> {
        (0..self.d)
            .map(|i| (0..self.d).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u32> {
        (0..self.d)
            .map(|j| (0..self.d).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Row sums equal column sums entrywise.
    pub fn is_sourceless(&self) -> bool {
        self.row_sums() == self.col_sums()
    }

    /// The three membership conditions of `T_q(g)`.
    pub fn is_in_tq(&self, g: &InducedGraph, q: &BlockSpec) -> bool {
        if self.d != g.dim() || q.dim() != self.d {
            return false;
        }
        for i in 0..self.d {
            for j in 0..self.d {
                if self.get(i, j) != 0 && !g.has_edge(i, j) {
                    return false;
                }
            }
        }
        self.is_sourceless() && self.row_sums() == q.0
    }

    pub fn total(&self) -> u64 {
        self.n.iter().map(|&x| x as u64).sum()
    }
}

impl Serialize for CrossingMatrix {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CrossingMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u32>>::deserialize(de)?;
        CrossingMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for CrossingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "[{}]", rows.join(";"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Acyclic and without self-loops.
    Forest,
    /// No cycles other than self-loops.
    StarForest,
    General,
}

impl Classification {
    pub fn is_star_forest(self) -> bool {
        matches!(self, Self::Forest | Self::StarForest)
    }
}

/// The undirected graph `𝔾(A)`: `{i,j}` is an edge iff `A_ij != 0` or
/// `A_ji != 0`, with self-pairs allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedGraph {
    d: usize,
    self_loops: Vec<bool>,
    /// Non-loop edges `(i, j)` with `i < j`, sorted.
    edges: Vec<(usize, usize)>,
    adjacent: Vec<bool>,
    classification: Classification,
}

impl InducedGraph {
    pub fn from_edges(d: usize, self_loops: Vec<bool>, edges: &[(usize, usize)]) -> Result<Self> {
        if self_loops.len() != d {
            return Err(Error::Dimension("self-loop flags must have length d".into()));
        }
        let mut adjacent = vec![false; d * d];
        for (i, &l) in self_loops.iter().enumerate() {
            adjacent[i * d + i] = l;
        }
        let mut canon = vec![];
        for &(i, j) in edges {
            if i >= d || j >= d {
                return Err(Error::Dimension(format!("edge ({i},{j}) out of range")));
            }
            if i == j {
                adjacent[i * d + i] = true;
                continue;
            }
            adjacent[i * d + j] = true;
            adjacent[j * d + i] = true;
            canon.push((i.min(j), i.max(j)));
        }
        canon.sort_unstable();
        canon.dedup();
        let self_loops: Vec<bool> = (0..d).map(|i| adjacent[i * d + i]).collect();
        let classification = classify(d, &self_loops, &canon);
        Ok(Self {
            d,
            self_loops,
            edges: canon,
            adjacent,
            classification,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacent[i * self.d + j]
    }

    pub fn has_self_loop(&self, i: usize) -> bool {
        self.self_loops[i]
    }

    /// Non-loop edges as `(i, j)` with `i < j`, in canonical order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn self_loop_vertices(&self) -> Vec<usize> {
        (0..self.d).filter(|&i| self.self_loops[i]).collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.d)
            .filter(|&u| u != v && self.adjacent[v * self.d + u])
            .collect()
    }

    /// Connected components (ignoring self-loops), each sorted, ordered by
    /// their minimal vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.d);
        for &(i, j) in &self.edges {
            uf.union(i, j);
        }
        let mut groups: Vec<Vec<usize>> = vec![];
        let mut slot = vec![usize::MAX; self.d];
        for v in 0..self.d {
            let r = uf.find(v);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(vec![]);
            }
            groups[slot[r]].push(v);
        }
        groups
    }
}

fn classify(d: usize, self_loops: &[bool], edges: &[(usize, usize)]) -> Classification {
    let mut uf = UnionFind::new(d);
    for &(i, j) in edges {
        if !uf.union(i, j) {
            return Classification::General;
        }
    }
    if self_loops.iter().any(|&l| l) {
        Classification::StarForest
    } else {
        Classification::Forest
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

pub fn graph_of_matrix<S: Scalar>(a: &Matrix<S>) -> InducedGraph {
    let d = a.dim();
    let mut self_loops = vec![false; d];
    let mut edges = vec![];
    for i in 0..d {
        self_loops[i] = !a.get(i, i).is_zero();
        for j in i + 1..d {
            if !a.get(i, j).is_zero() || !a.get(j, i).is_zero() {
                edges.push((i, j));
            }
        }
    }
    InducedGraph::from_edges(d, self_loops, &edges).expect("indices are in range")
}

/// `A[q]` together with the map from block index to base vertex.
pub fn block_expand<S: Scalar>(a: &Matrix<S>, q: &BlockSpec) -> Result<(Matrix<S>, Vec<usize>)> {
    if q.dim() != a.dim() {
        return Err(Error::Dimension(format!(
            "block spec has {} entries for a {}x{} matrix",
            q.dim(),
            a.dim(),
            a.dim()
        )));
    }
    let base = base_map(q);
    if base.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let m = base.len();
    let mut data = Vec::with_capacity(m * m);
    for &i in &base {
        for &j in &base {
            data.push(a.get(i, j).clone());
        }
    }
    Ok((Matrix::new(m, data)?, base))
}

/// Block index -> base vertex for `V[q]`, copies of each vertex contiguous.
pub fn base_map(q: &BlockSpec) -> Vec<usize> {
    q.0.iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
        .collect()
}

/// All elements of `T_q(g)` for a *-forest `g`, sorted by the self-loop
/// values (vertex order) and then by the non-loop edge values (canonical
/// edge order).
///
/// Vertices are stripped leaf by leaf; a leaf `y` with unique remaining
/// neighbour `x` pushes `q_y - n_yy` crossings onto the edge `xy`, where
/// `n_yy` ranges freely over `0..=q_y` if `y` carries a self-loop and is 0
/// otherwise.
pub fn tq_enumerate(g: &InducedGraph, q: &BlockSpec) -> Result<Vec<CrossingMatrix>> {
    if !g.classification().is_star_forest() {
        return Err(Error::UnsupportedStructure(
            "T_q enumeration requires a *-forest (graph has a cycle)".into(),
        ));
    }
    let d = g.dim();
    if q.dim() != d {
        return Err(Error::Dimension(format!(
            "block spec has {} entries for {} vertices",
            q.dim(),
            d
        )));
    }

    // Elimination order: repeatedly remove the smallest vertex of remaining
    // degree <= 1, remembering its last neighbour.
    let mut degree: Vec<usize> = (0..d).map(|v| g.neighbors(v).len()).collect();
    let mut removed = vec![false; d];
    let mut steps: Vec<(usize, Option<usize>)> = Vec::with_capacity(d);
    for _ in 0..d {
        let v = (0..d)
            .find(|&v| !removed[v] && degree[v] <= 1)
            .expect("a forest always has a vertex of degree <= 1");
        removed[v] = true;
        let parent = g.neighbors(v).into_iter().find(|&u| !removed[u]);
        if let Some(u) = parent {
            degree[u] -= 1;
        }
        steps.push((v, parent));
    }

    let mut residual: Vec<i64> = q.0.iter().map(|&x| x as i64).collect();
    let mut n = CrossingMatrix::zeros(d);
    let mut out = vec![];
    strip(g, &steps, 0, &mut residual, &mut n, &mut out);

    let key = |m: &CrossingMatrix| -> Vec<u32> {
        let mut k: Vec<u32> = g.self_loop_vertices().iter().map(|&v| m.get(v, v)).collect();
        k.extend(g.edges().iter().map(|&(i, j)| m.get(i, j)));
        k
    };
    out.sort_by_cached_key(key);
    Ok(out)
}

fn strip(
    g: &InducedGraph,
    steps: &[(usize, Option<usize>)],
    k: usize,
    residual: &mut [i64],
    n: &mut CrossingMatrix,
    out: &mut Vec<CrossingMatrix>,
) {
    let Some(&(v, parent)) = steps.get(k) else {
        out.push(n.clone());
        return;
    };
    let r = residual[v];
    if r < 0 {
        return;
    }
    match parent {
        Some(u) => {
            let loop_range = if g.has_self_loop(v) { 0..=r } else { 0..=0 };
            for s in loop_range {
                let flow = r - s;
                if residual[u] < flow {
                    continue;
                }
                n.set(v, v, s as u32);
                n.set(v, u, flow as u32);
                n.set(u, v, flow as u32);
                residual[u] -= flow;
                strip(g, steps, k + 1, residual, n, out);
                residual[u] += flow;
            }
            n.set(v, v, 0);
            n.set(v, u, 0);
            n.set(u, v, 0);
        }
        None => {
            if g.has_self_loop(v) {
                n.set(v, v, r as u32);
                strip(g, steps, k + 1, residual, n, out);
                n.set(v, v, 0);
            } else if r == 0 {
                strip(g, steps, k + 1, residual, n, out);
            }
        }
    }
}
