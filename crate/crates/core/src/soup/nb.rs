//! Negative binomial and negative multinomial draws.
//!
//! `NM(r, p)` has mass `Γ(|n| + r) (1 - |p|)^r / Γ(r) · Π p_i^{n_i} / n_i!`
//! and `NB(r, p) = NM(r, (p))`. Both are drawn through the Gamma-Poisson
//! mixture, which is exact for every real `r > 0`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};

use crate::error::{Error, Result};

pub fn nb_sample<R: Rng + ?Sized>(r: f64, p: f64, rng: &mut R) -> Result<u64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("NB shape must be positive, got {r}")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("NB probability must lie in [0, 1), got {p}")));
    }
    if p == 0.0 {
        return Ok(0);
    }
    let gamma = Gamma::new(r, p / (1.0 - p))
        .map_err(|e| Error::Domain(format!("gamma({r}, {p}): {e}")))?;
    let lambda = gamma.sample(rng);
    if lambda <= 0.0 {
        return Ok(0);
    }
    let k = Poisson::new(lambda)
        .map_err(|e| Error::Sampling(format!("poisson({lambda}): {e}")))?
        .sample(rng);
    Ok(k as u64)
}

/// NB total with success mass `|p|`, then a multinomial split over
/// `p / |p|`.
pub fn nm_sample<R: Rng + ?Sized>(r: f64, p: &[f64], rng: &mut R) -> Result<Vec<u64>> {
    if let Some(&bad) = p.iter().find(|&&x| !(0.0..1.0).contains(&x)) {
        return Err(Error::Domain(format!("NM probabilities must lie in [0, 1), got {bad}")));
    }
    let mass: f64 = p.iter().sum();
    if mass >= 1.0 {
        return Err(Error::Domain(format!("NM probabilities sum to {mass} >= 1")));
    }
    let mut out = vec![0u64; p.len()];
    let total = nb_sample(r, mass, rng)?;
    if total == 0 {
        return Ok(out);
    }
    let last = p.iter().rposition(|&x| x > 0.0).expect("total > 0 needs positive mass");
    let mut remaining = total;
    let mut rest_mass = mass;
    for (i, &pi) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if pi == 0.0 {
            continue;
        }
        if i == last {
            out[i] = remaining;
            break;
        }
        let share = (pi / rest_mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, share)
            .map_err(|e| Error::Sampling(format!("binomial({remaining}, {share}): {e}")))?
            .sample(rng);
        out[i] = k;
        remaining -= k;
        rest_mass -= pi;
    }
    Ok(out)
}
