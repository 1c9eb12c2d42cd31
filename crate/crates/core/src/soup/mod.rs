//! Poisson loop soups `L_α`, their occupation fields, and the exact
//! negative multinomial cascade on *-forests.

mod batch;
mod cascade;
mod compare;
mod law;
mod nb;
mod sampler;
mod verify;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::SubMarkovChain;
use crate::error::Result;
use crate::loops::UnrootedLoop;
use crate::model::CrossingMatrix;
use crate::scalar::Scalar;

pub use batch::{collect_samples, tally, BatchPlan, CHUNK_SIZE};
pub use cascade::{cascade_sample_general, cascade_sample_tree, GeneralCascade, TreeCascade};
pub use compare::{empirical_compare, MIN_SAMPLES, CompareConfig, LawReport, LawRow, Outcome};
pub use law::{edge_law_general, edge_laws_for_q, n_law_starforest, theta_law, LawValue};
pub use nb::{nb_sample, nm_sample};
pub use sampler::{LoopSampler, MAX_LOOP_LENGTH};
pub use verify::{
    cascade_field_counts, crossing_counts, crossing_outcomes, soup_field_counts, theta_counts,
    theta_outcomes,
};

/// Independent ChaCha8 stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw of the loop soup: a multiset of unrooted loops.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopSoupSample {
    pub loops: Vec<UnrootedLoop>,
    pub alpha: f64,
    pub seed: u64,
    /// Position of this draw within its seeded run.
    pub index: u64,
}

impl LoopSoupSample {
    /// Distinct loops with their repetition counts `r_i`.
    pub fn configuration(&self) -> BTreeMap<UnrootedLoop, u32> {
        let mut m = BTreeMap::new();
        for l in &self.loops {
            *m.entry(l.clone()).or_insert(0) += 1;
        }
        m
    }
}

/// Occupation time fields: visits `θ_x` and crossings `N_xy`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationFields {
    pub theta: Vec<u32>,
    pub crossings: CrossingMatrix,
}

impl OccupationFields {
    pub fn zeros(d: usize) -> Self {
        Self {
            theta: vec![0; d],
            crossings: CrossingMatrix::zeros(d),
        }
    }

    pub fn from_crossings(crossings: CrossingMatrix) -> Self {
        Self {
            theta: crossings.row_sums(),
            crossings,
        }
    }

    pub fn add_loop(&mut self, lp: &UnrootedLoop) {
        let v = lp.vertices();
        let n = v.len();
        for i in 0..n {
            self.theta[v[i]] += 1;
            self.crossings.add(v[i], v[(i + 1) % n], 1);
        }
    }

    /// `θ_x = Σ_y N_xy = Σ_y N_yx` for every `x`.
    pub fn is_consistent(&self) -> bool {
        self.crossings.row_sums() == self.theta && self.crossings.col_sums() == self.theta
    }
}

pub fn occupation_fields(sample: &LoopSoupSample, d: usize) -> OccupationFields {
    let mut f = OccupationFields::zeros(d);
    for l in &sample.loops {
        f.add_loop(l);
    }
    f
}

/// A single soup draw with the stream reserved for `(seed, 0)`.
pub fn sample_soup<S: Scalar>(
    chain: &SubMarkovChain<S>,
    alpha: f64,
    seed: u64,
) -> Result<LoopSoupSample> {
    let mut sampler = LoopSampler::new(chain);
    let mut rng = substream(seed, 0);
    let loops = sampler.sample_soup(alpha, &mut rng)?;
    Ok(LoopSoupSample {
        loops,
        alpha,
        seed,
        index: 0,
    })
}
