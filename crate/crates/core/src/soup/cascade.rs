//! Exact sampling of `(θ, N)` on *-forests by a negative multinomial
//! cascade from a root.
//!
//! On a tree killed only at the root `x0`, `(N_{x0 y})_{y child}` is
//! `NM(α, (P_{x0 y})_y)`, and given `N_{x, parent(x)} = m` the crossings from
//! `x` to its children are `NM(m + α, (P_xy)_{y child})`; crossings are
//! symmetric along tree edges. General *-forests reduce to this case per
//! connected component by star expansion followed by an h-transform.

use std::collections::VecDeque;

use rand::Rng;

use crate::chain::SubMarkovChain;
use crate::error::{Error, Result};
use crate::model::{graph_of_matrix, Classification, CrossingMatrix};
use crate::scalar::Scalar;
use crate::soup::nb::nm_sample;
use crate::soup::OccupationFields;

/// Killing below this is treated as zero when checking "killed only at the root".
const KILLING_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TreeCascade {
    d: usize,
    root: usize,
    /// Breadth-first order from the root.
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    child_probs: Vec<Vec<f64>>,
}

impl TreeCascade {
    pub fn new<S: Scalar>(chain: &SubMarkovChain<S>, root: usize) -> Result<Self> {
        let d = chain.dim();
        if root >= d {
            return Err(Error::Dimension(format!("root {} out of range", root + 1)));
        }
        let g = graph_of_matrix(chain.matrix());
        if g.classification() != Classification::Forest {
            return Err(Error::UnsupportedStructure(
                "tree cascade needs a graph without cycles or self-loops".into(),
            ));
        }
        if g.components().len() != 1 {
            return Err(Error::UnsupportedStructure("tree cascade needs a connected graph".into()));
        }
        for (x, k) in chain.killing().iter().enumerate() {
            if x != root && k.to_f64() > KILLING_TOLERANCE {
                return Err(Error::UnsupportedStructure(format!(
                    "chain is killed at vertex {} besides the root",
                    x + 1
                )));
            }
        }
        let mut parent = vec![None; d];
        let mut children = vec![vec![]; d];
        let mut order = vec![root];
        let mut seen = vec![false; d];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for y in g.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    children[x].push(y);
                    order.push(y);
                    queue.push_back(y);
                }
            }
        }
        let child_probs = (0..d)
            .map(|x| children[x].iter().map(|&y| chain.p(x, y).to_f64()).collect())
            .collect();
        Ok(Self {
            d,
            root,
            order,
            parent,
            children,
            child_probs,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn sample<R: Rng + ?Sized>(&self, alpha: f64, rng: &mut R) -> Result<CrossingMatrix> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        let mut n = CrossingMatrix::zeros(self.d);
        for &x in &self.order {
            if self.children[x].is_empty() {
                continue;
            }
            let shape = match self.parent[x] {
                None => alpha,
                Some(px) => n.get(x, px) as f64 + alpha,
            };
            let draws = nm_sample(shape, &self.child_probs[x], rng)?;
            for (&y, k) in self.children[x].iter().zip(draws) {
                let k = u32::try_from(k)
                    .map_err(|_| Error::Sampling("crossing count overflow".into()))?;
                n.set(x, y, k);
                n.set(y, x, k);
            }
        }
        Ok(n)
    }
}

/// One cascade draw on a tree killed only at `root`.
pub fn cascade_sample_tree<S: Scalar, R: Rng + ?Sized>(
    chain: &SubMarkovChain<S>,
    alpha: f64,
    root: usize,
    rng: &mut R,
) -> Result<OccupationFields> {
    let n = TreeCascade::new(chain, root)?.sample(alpha, rng)?;
    Ok(OccupationFields::from_crossings(n))
}

#[derive(Clone, Debug)]
struct ComponentPlan {
    /// Original vertex of each local vertex.
    vertices: Vec<usize>,
    /// Local vertex -> local copy vertex in the star expansion.
    copy_of: Vec<Option<usize>>,
    tree: TreeCascade,
}

/// Cascade sampler for any *-forest chain.
///
/// Each connected component is sampled independently: the component
/// containing `root` is rooted there, every other one at its smallest
/// vertex.
#[derive(Clone, Debug)]
pub struct GeneralCascade {
    d: usize,
    components: Vec<ComponentPlan>,
}

impl GeneralCascade {
    pub fn new<S: Scalar>(chain: &SubMarkovChain<S>, root: usize) -> Result<Self> {
        let d = chain.dim();
        if root >= d {
            return Err(Error::Dimension(format!("root {} out of range", root + 1)));
        }
        let g = graph_of_matrix(chain.matrix());
        if !g.classification().is_star_forest() {
            return Err(Error::UnsupportedStructure(
                "cascade sampling needs a *-forest chain".into(),
            ));
        }
        let mut components = vec![];
        for comp in g.components() {
            let local_root = comp.iter().position(|&v| v == root).unwrap_or(0);
            let sub = chain.restrict(&comp)?;
            let star = sub.star_expand(false)?;
            let (ph, _) = star.chain.h_transform(local_root)?;
            let tree = TreeCascade::new(&ph, local_root)?;
            components.push(ComponentPlan {
                vertices: comp,
                copy_of: star.copy_of.clone(),
                tree,
            });
        }
        Ok(Self { d, components })
    }

    pub fn sample<R: Rng + ?Sized>(&self, alpha: f64, rng: &mut R) -> Result<OccupationFields> {
        let mut n = CrossingMatrix::zeros(self.d);
        for c in &self.components {
            let star = c.tree.sample(alpha, rng)?;
            for (a, &x) in c.vertices.iter().enumerate() {
                for (b, &y) in c.vertices.iter().enumerate() {
                    if a != b {
                        n.set(x, y, star.get(a, b));
                    }
                }
                if let Some(s) = c.copy_of[a] {
                    n.set(x, x, star.get(a, s));
                }
            }
        }
        Ok(OccupationFields::from_crossings(n))
    }
}

/// One cascade draw on a *-forest chain.
pub fn cascade_sample_general<S: Scalar, R: Rng + ?Sized>(
    chain: &SubMarkovChain<S>,
    alpha: f64,
    root: usize,
    rng: &mut R,
) -> Result<OccupationFields> {
    GeneralCascade::new(chain, root)?.sample(alpha, rng)
}
