//! Chunked, seeded sampling on a rayon pool. Chunk `c` always draws from
//! substream `c`, so results do not depend on the number of workers.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::substream;
use crate::error::{Error, Result};

pub const CHUNK_SIZE: u64 = 4096;

#[derive(Clone, Copy, Debug)]
pub struct BatchPlan {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 lets rayon choose.
    pub workers: usize,
}

impl BatchPlan {
    pub fn new(samples: u64, seed: u64, workers: usize) -> Self {
        BatchPlan { samples, seed, workers }
    }

    fn chunks(&self) -> Vec<(u64, u64)> {
        let mut v = Vec::new();
        let mut start = 0;
        while start < self.samples {
            let len = CHUNK_SIZE.min(self.samples - start);
            v.push((start / CHUNK_SIZE, len));
            start += len;
        }
        v
    }

    fn run<T: Send, F>(&self, f: F) -> Result<Vec<T>>
    where
        F: Fn(u64, u64) -> Result<T> + Sync + Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        let chunks = self.chunks();
        pool.install(|| chunks.par_iter().map(|&(c, len)| f(c, len)).collect())
    }
}

/// Counts of `draw` over all samples. `make_state` builds per-chunk
/// scratch state (samplers with caches and the like).
pub fn tally<K, St, M, D>(plan: &BatchPlan, make_state: M, draw: D) -> Result<BTreeMap<K, u64>>
where
    K: Ord + Send,
    M: Fn() -> Result<St> + Sync + Send,
    D: Fn(&mut St, &mut ChaCha8Rng) -> Result<K> + Sync + Send,
{
    let parts = plan.run(|c, len| {
        let mut state = make_state()?;
        let mut rng = substream(plan.seed, c);
        let mut m = BTreeMap::new();
        for _ in 0..len {
            *m.entry(draw(&mut state, &mut rng)?).or_insert(0u64) += 1;
        }
        Ok(m)
    })?;
    let mut out = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *out.entry(k).or_insert(0) += v;
        }
    }
    Ok(out)
}

/// All draws in sample order.
pub fn collect_samples<T, St, M, D>(plan: &BatchPlan, make_state: M, draw: D) -> Result<Vec<T>>
where
    T: Send,
    M: Fn() -> Result<St> + Sync + Send,
    D: Fn(&mut St, &mut ChaCha8Rng) -> Result<T> + Sync + Send,
{
    let parts = plan.run(|c, len| {
        let mut state = make_state()?;
        let mut rng = substream(plan.seed, c);
        (0..len).map(|_| draw(&mut state, &mut rng)).collect::<Result<Vec<T>>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}
