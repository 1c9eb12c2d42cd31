//! Glue between samplers and exact laws: tallies of occupation fields and
//! the matching outcome tables.

use std::collections::BTreeMap;

use super::batch::{tally, BatchPlan};
use super::cascade::GeneralCascade;
use super::compare::Outcome;
use super::law::{edge_laws_for_q, n_law_starforest, theta_law};
use super::sampler::LoopSampler;
use super::OccupationFields;
use crate::chain::SubMarkovChain;
use crate::error::Result;
use crate::model::{graph_of_matrix, tq_enumerate, BlockSpec, CrossingMatrix};
use crate::scalar::{Rational, Scalar};

/// Occupation fields of `plan.samples` independent soups.
pub fn soup_field_counts<S: Scalar>(
    chain: &SubMarkovChain<S>,
    alpha: f64,
    plan: &BatchPlan,
) -> Result<BTreeMap<OccupationFields, u64>> {
    let d = chain.dim();
    tally(
        plan,
        || Ok(LoopSampler::new(chain)),
        |sampler, rng| {
            let mut f = OccupationFields::zeros(d);
            for l in sampler.sample_soup(alpha, rng)? {
                f.add_loop(&l);
            }
            Ok(f)
        },
    )
}

/// Occupation fields of `plan.samples` cascade draws.
pub fn cascade_field_counts<S: Scalar>(
    chain: &SubMarkovChain<S>,
    alpha: f64,
    root: usize,
    plan: &BatchPlan,
) -> Result<BTreeMap<OccupationFields, u64>> {
    let cascade = GeneralCascade::new(chain, root)?;
    tally(plan, || Ok(()), |_, rng| cascade.sample(alpha, rng))
}

pub fn theta_counts(fields: &BTreeMap<OccupationFields, u64>) -> BTreeMap<Vec<u32>, u64> {
    let mut m = BTreeMap::new();
    for (f, &c) in fields {
        *m.entry(f.theta.clone()).or_insert(0) += c;
    }
    m
}

pub fn crossing_counts(fields: &BTreeMap<OccupationFields, u64>) -> BTreeMap<CrossingMatrix, u64> {
    let mut m = BTreeMap::new();
    for (f, &c) in fields {
        *m.entry(f.crossings.clone()).or_insert(0) += c;
    }
    m
}

pub fn theta_outcomes(
    chain: &SubMarkovChain<Rational>,
    qs: &[BlockSpec],
    alpha: f64,
    cap: usize,
) -> Result<Vec<Outcome<Vec<u32>>>> {
    qs.iter()
        .map(|q| {
            Ok(Outcome {
                key: q.0.clone(),
                label: q.to_string(),
                probability: theta_law(chain, q, cap)?.probability(alpha),
            })
        })
        .collect()
}

/// Crossing-law outcomes for every `n` with row sums in `qs`. Uses the
/// closed form on *-forests and the grouped enumeration otherwise.
pub fn crossing_outcomes(
    chain: &SubMarkovChain<Rational>,
    qs: &[BlockSpec],
    alpha: f64,
    cap: usize,
) -> Result<Vec<Outcome<CrossingMatrix>>> {
    let g = graph_of_matrix(chain.matrix());
    let mut out = vec![];
    for q in qs {
        if g.classification().is_star_forest() {
            for n in tq_enumerate(&g, q)? {
                let p = n_law_starforest(chain, &n)?.probability(alpha);
                out.push(Outcome {
                    label: n.to_string(),
                    key: n,
                    probability: p,
                });
            }
        } else {
            for (n, law) in edge_laws_for_q(chain, q, cap)? {
                out.push(Outcome {
                    label: n.to_string(),
                    key: n,
                    probability: law.probability(alpha),
                });
            }
        }
    }
    Ok(out)
}
