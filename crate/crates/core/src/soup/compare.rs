//! Empirical frequencies against exact probabilities: per-outcome z
//! scores plus a chi-square goodness of fit with a pooled tail bin.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: u64 = 1000;

#[derive(Clone, Debug)]
pub struct Outcome<K> {
    pub key: K,
    pub label: String,
    pub probability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawRow {
    pub label: String,
    pub probability: f64,
    pub observed: u64,
    pub frequency: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub samples: u64,
    pub rows: Vec<LawRow>,
    /// Exact mass outside the listed rows.
    pub tail_mass: f64,
    pub tail_count: u64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub max_abs_z: f64,
    /// Outcomes observed although their exact probability is zero.
    pub impossible: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CompareConfig {
    /// Outcomes below this probability go to the tail bin.
    pub min_probability: f64,
    pub z_max: f64,
    pub min_p_value: f64,
    pub min_expected: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            min_probability: 1e-3,
            z_max: 4.0,
            min_p_value: 1e-3,
            min_expected: 5.0,
        }
    }
}

pub fn empirical_compare<K: Ord>(
    counts: &BTreeMap<K, u64>,
    samples: u64,
    outcomes: &[Outcome<K>],
    cfg: &CompareConfig,
) -> Result<LawReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let total: u64 = counts.values().sum();
    if total != samples {
        return Err(Error::Internal(format!(
            "tally holds {total} draws, expected {samples}"
        )));
    }
    let n = samples as f64;
    let mut rows = Vec::new();
    let mut impossible = Vec::new();
    let mut listed_mass = 0.0;
    let mut listed_count = 0u64;
    let mut max_abs_z = 0.0f64;
    let mut chi_square = 0.0;
    let mut bins = 0usize;

    for o in outcomes {
        let observed = counts.get(&o.key).copied().unwrap_or(0);
        if o.probability <= 0.0 {
            if observed > 0 {
                impossible.push(o.label.clone());
            }
            continue;
        }
        if o.probability < cfg.min_probability {
            continue;
        }
        let p = o.probability;
        let expected = n * p;
        let sd = (n * p * (1.0 - p)).sqrt();
        let z = if sd > 0.0 {
            (observed as f64 - expected) / sd
        } else if observed as f64 == expected {
            0.0
        } else {
            f64::INFINITY
        };
        max_abs_z = max_abs_z.max(z.abs());
        listed_mass += p;
        listed_count += observed;
        if expected >= cfg.min_expected {
            chi_square += (observed as f64 - expected).powi(2) / expected;
            bins += 1;
        } else {
            // Too small for its own bin: pooled with the tail below.
            listed_mass -= p;
            listed_count -= observed;
        }
        rows.push(LawRow {
            label: o.label.clone(),
            probability: p,
            observed,
            frequency: observed as f64 / n,
            z,
        });
    }

    let tail_mass = (1.0 - listed_mass).max(0.0);
    let tail_count = samples - listed_count;
    let tail_expected = n * tail_mass;
    if tail_expected >= cfg.min_expected {
        chi_square += (tail_count as f64 - tail_expected).powi(2) / tail_expected;
        bins += 1;
    } else if tail_count as f64 > cfg.min_expected.max(tail_expected * 10.0) {
        // Mass is missing from the listed law.
        chi_square = f64::INFINITY;
    }

    let degrees_of_freedom = bins.saturating_sub(1);
    let p_value = if !chi_square.is_finite() {
        0.0
    } else if degrees_of_freedom == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(degrees_of_freedom as f64)
            .map_err(|e| Error::Internal(e.to_string()))?;
        dist.sf(chi_square)
    };
    let passed = impossible.is_empty() && max_abs_z <= cfg.z_max && p_value >= cfg.min_p_value;
    Ok(LawReport {
        samples,
        rows,
        tail_mass,
        tail_count,
        chi_square,
        degrees_of_freedom,
        p_value,
        max_abs_z,
        impossible,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geometric_outcomes() -> Vec<Outcome<u32>> {
        (0..40)
            .map(|k| Outcome {
                key: k,
                label: k.to_string(),
                probability: 0.5f64.powi(k as i32 + 1),
            })
            .collect()
    }

    fn draw(n: u64, bias: f64, seed: u64) -> BTreeMap<u32, u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = BTreeMap::new();
        for _ in 0..n {
            let mut k = 0;
            while rng.random::<f64>() < 0.5 + bias {
                k += 1;
            }
            *m.entry(k).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn accepts_correct_law() {
        let r = empirical_compare(&draw(100_000, 0.0, 1), 100_000, &geometric_outcomes(), &CompareConfig::default())
            .unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.degrees_of_freedom >= 5);
    }

    #[test]
    fn rejects_wrong_law() {
        let r = empirical_compare(&draw(100_000, 0.02, 1), 100_000, &geometric_outcomes(), &CompareConfig::default())
            .unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn impossible_outcome_fails() {
        let mut out = geometric_outcomes();
        out[3].probability = 0.0;
        let r = empirical_compare(&draw(10_000, 0.0, 2), 10_000, &out, &CompareConfig::default()).unwrap();
        assert_eq!(r.impossible, vec!["3".to_string()]);
        assert!(!r.passed);
    }

    #[test]
    fn too_few_samples() {
        assert!(empirical_compare(&draw(10, 0.0, 3), 10, &geometric_outcomes(), &CompareConfig::default()).is_err());
    }
}
