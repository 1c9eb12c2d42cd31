//! Closed-form occupation laws. Every law here has the shape
//! `det(I - P)^α · W(α)` with `W` a polynomial in α with rational
//! coefficients, so it is kept in that form and evaluated on demand.

use num::{BigInt, One};
use serde::Serialize;

use crate::chain::SubMarkovChain;
use crate::error::{Error, Result};
use crate::model::{graph_of_matrix, BlockSpec, CrossingMatrix};
use crate::permanent::{expansion_by_crossing, monomial, per_alpha_auto};
use crate::poly::AlphaPolynomial;
use crate::scalar::{factorial, rational_to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawValue {
    /// `det(I - P)`.
    #[serde(serialize_with = "ser_rational")]
    pub det: Rational,
    /// `W(α)`.
    pub weight: AlphaPolynomial,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl LawValue {
    pub fn probability(&self, alpha: f64) -> f64 {
        rational_to_f64(&self.det).powf(alpha) * self.weight.eval_f64(alpha)
    }

    /// `W(α)` at a rational α; the probability divided by `det(I - P)^α`.
    pub fn weight_at(&self, alpha: &Rational) -> Rational {
        self.weight.eval(alpha)
    }
}

fn q_factorial(q: &BlockSpec) -> BigInt {
    q.as_slice()
        .iter()
        .fold(BigInt::one(), |acc, &x| acc * factorial(x))
}

/// `P(θ = q) = det(I - P)^α per_α(P[q]) / Π q_x!`.
pub fn theta_law(chain: &SubMarkovChain<Rational>, q: &BlockSpec, cap: usize) -> Result<LawValue> {
    if q.dim() != chain.dim() {
        return Err(Error::Dimension(format!(
            "q has {} entries for {} vertices",
            q.dim(),
            chain.dim()
        )));
    }
    let per = per_alpha_auto(chain.matrix(), q, cap)?;
    Ok(LawValue {
        det: chain.det_i_minus_p(),
        weight: per.scale(&Rational::new(BigInt::one(), q_factorial(q))),
    })
}

/// `P(N = n)` on a *-forest chain, with `q` the row sums of `n`:
///
/// ```text
///   det(I-P)^α Π_x (α)_{q_x} / ( Π_{xy∈E} n_xy! Π_{xy∈E, x≠y} (α)_{n_xy} ) Π P_xy^{n_xy}
/// ```
pub fn n_law_starforest(chain: &SubMarkovChain<Rational>, n: &CrossingMatrix) -> Result<LawValue> {
    let g = graph_of_matrix(chain.matrix());
    if !g.classification().is_star_forest() {
        return Err(Error::UnsupportedStructure(
            "crossing law closed form needs a *-forest chain".into(),
        ));
    }
    if n.dim() != chain.dim() {
        return Err(Error::Dimension("crossing matrix size differs from the chain".into()));
    }
    let q = BlockSpec::new(n.row_sums());
    if !n.is_in_tq(&g, &q) {
        return Err(Error::Domain(format!("{n} is not in T_q for q = {q}")));
    }
    let mut poly = q.as_slice().iter().fold(AlphaPolynomial::one(), |acc, &k| {
        acc * AlphaPolynomial::rising_factorial(k)
    });
    let mut denom = BigInt::one();
    for &(x, y) in g.edges() {
        let k = n.get(x, y);
        poly = poly.div_exact(&AlphaPolynomial::rising_factorial(k))?;
        denom *= factorial(k);
    }
    for x in g.self_loop_vertices() {
        denom *= factorial(n.get(x, x));
    }
    let scale = monomial(chain.matrix(), n) / Rational::from_integer(denom);
    Ok(LawValue {
        det: chain.det_i_minus_p(),
        weight: poly.scale(&scale),
    })
}

/// `P(N = n) = det(I - P)^α R(n) Π P_xy^{n_xy} / Π q_x!` for any chain,
/// with `R(n)` read off the grouped enumeration of `per_α(P[q])`.
pub fn edge_law_general(
    chain: &SubMarkovChain<Rational>,
    n: &CrossingMatrix,
    cap: usize,
) -> Result<LawValue> {
    if n.dim() != chain.dim() {
        return Err(Error::Dimension("crossing matrix size differs from the chain".into()));
    }
    if !n.is_sourceless() {
        return Err(Error::Domain(format!("{n} is not sourceless")));
    }
    let q = BlockSpec::new(n.row_sums());
    let laws = edge_laws_for_q(chain, &q, cap)?;
    Ok(laws
        .into_iter()
        .find(|(m, _)| m == n)
        .map(|(_, l)| l)
        .unwrap_or_else(|| LawValue {
            det: chain.det_i_minus_p(),
            weight: AlphaPolynomial::zero(),
        }))
}

/// Crossing law of every `n` with row sums `q` and positive probability.
pub fn edge_laws_for_q(
    chain: &SubMarkovChain<Rational>,
    q: &BlockSpec,
    cap: usize,
) -> Result<Vec<(CrossingMatrix, LawValue)>> {
    let det = chain.det_i_minus_p();
    let inv_q = Rational::new(BigInt::one(), q_factorial(q));
    let expansion = expansion_by_crossing(chain.matrix(), q, cap)?;
    Ok(expansion
        .terms
        .into_iter()
        .map(|(n, r)| {
            let w = r.scale(&(monomial(chain.matrix(), &n) * &inv_q));
            (
                n,
                LawValue {
                    det: det.clone(),
                    weight: w,
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::model::tq_enumerate;
    use crate::permanent::DEFAULT_BRUTE_CAP;
    use crate::scalar::rat;

    fn rchain(rows: &[&[(i64, i64)]]) -> SubMarkovChain<Rational> {
        SubMarkovChain::new(
            Matrix::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect())
                    .collect(),
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn p2() -> SubMarkovChain<Rational> {
        rchain(&[&[(0, 1), (1, 2)], &[(1, 2), (0, 1)]])
    }

    /// (3/4)^α (α)_k (1/4)^k / k!
    fn p2_theta(alpha: f64, k: u32) -> f64 {
        let mut v = 0.75f64.powf(alpha);
        for i in 0..k {
            v *= (alpha + i as f64) * 0.25 / (i as f64 + 1.0);
        }
        v
    }

    #[test]
    fn theta_law_two_vertex_chain() {
        for alpha in [0.5, 1.0, 2.3] {
            for k in 0..5 {
                let l = theta_law(&p2(), &BlockSpec::new(vec![k, k]), DEFAULT_BRUTE_CAP).unwrap();
                assert!((l.probability(alpha) - p2_theta(alpha, k)).abs() < 1e-14);
            }
            let off = theta_law(&p2(), &BlockSpec::new(vec![2, 1]), 9).unwrap();
            assert_eq!(off.probability(alpha), 0.0);
        }
        let zero = theta_law(&p2(), &BlockSpec::zeros(2), 9).unwrap();
        assert_eq!(zero.weight, AlphaPolynomial::one());
        assert_eq!(zero.det, rat(3, 4));
    }

    #[test]
    fn theta_law_vanishes_off_tq() {
        let path = rchain(&[
            &[(0, 1), (1, 2), (0, 1)],
            &[(1, 4), (0, 1), (1, 4)],
            &[(0, 1), (1, 2), (0, 1)],
        ]);
        let l = theta_law(&path, &BlockSpec::ones(3), 9).unwrap();
        assert!(l.weight.is_zero());
    }

    #[test]
    fn n_law_matches_theta_on_forest() {
        let n = CrossingMatrix::from_rows(vec![vec![0, 3], vec![3, 0]]).unwrap();
        let nl = n_law_starforest(&p2(), &n).unwrap();
        let tl = theta_law(&p2(), &BlockSpec::new(vec![3, 3]), 9).unwrap();
        assert_eq!(nl, tl);
        let zero = n_law_starforest(&p2(), &CrossingMatrix::zeros(2)).unwrap();
        assert_eq!(zero.probability(1.7), 0.75f64.powf(1.7));
    }

    #[test]
    fn n_law_rejects_bad_input() {
        let n = CrossingMatrix::from_rows(vec![vec![1, 0], vec![0, 0]]).unwrap();
        assert!(matches!(n_law_starforest(&p2(), &n), Err(Error::Domain(_))));
        let tri = rchain(&[
            &[(0, 1), (1, 4), (1, 4)],
            &[(1, 4), (0, 1), (1, 4)],
            &[(1, 4), (1, 4), (0, 1)],
        ]);
        let n = CrossingMatrix::zeros(3);
        assert!(n_law_starforest(&tri, &n).is_err());
        let src = CrossingMatrix::from_rows(vec![vec![0, 2], vec![1, 0]]).unwrap();
        assert!(matches!(edge_law_general(&p2(), &src, 9), Err(Error::Domain(_))));
    }

    #[test]
    fn edge_law_agrees_on_star_forest() {
        let c = rchain(&[
            &[(1, 4), (1, 4), (0, 1)],
            &[(1, 4), (0, 1), (1, 4)],
            &[(0, 1), (1, 3), (1, 6)],
        ]);
        let g = graph_of_matrix(c.matrix());
        for q in BlockSpec::up_to_total(3, 5) {
            let general = edge_laws_for_q(&c, &q, 9).unwrap();
            let tq = tq_enumerate(&g, &q).unwrap();
            assert_eq!(general.len(), tq.len());
            let mut sum = AlphaPolynomial::zero();
            for (n, l) in &general {
                assert_eq!(n_law_starforest(&c, n).unwrap(), *l);
                sum = &sum + &l.weight;
            }
            assert_eq!(sum, theta_law(&c, &q, 9).unwrap().weight);
        }
    }

    #[test]
    fn triangle_edge_laws_sum_to_theta() {
        let tri = rchain(&[
            &[(0, 1), (1, 4), (1, 5)],
            &[(1, 3), (0, 1), (1, 4)],
            &[(1, 6), (1, 4), (0, 1)],
        ]);
        for q in [vec![1, 1, 1], vec![2, 1, 1], vec![2, 2, 2]] {
            let q = BlockSpec::new(q);
            let sum: AlphaPolynomial = edge_laws_for_q(&tri, &q, 9)
                .unwrap()
                .into_iter()
                .map(|(_, l)| l.weight)
                .sum();
            assert_eq!(sum, theta_law(&tri, &q, 9).unwrap().weight);
        }
        let zero = edge_law_general(&tri, &CrossingMatrix::zeros(3), 9).unwrap();
        assert_eq!(zero.weight, AlphaPolynomial::one());
    }
}
