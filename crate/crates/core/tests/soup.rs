mod common;

use std::collections::BTreeMap;

use common::{factorial_f64, rising};
use permsoup::chain::SubMarkovChain;
use permsoup::loops::UnrootedLoop;
use permsoup::soup::{
    cascade_field_counts, collect_samples, crossing_counts, empirical_compare, nb_sample,
    nm_sample, sample_soup, soup_field_counts, substream, tally, theta_counts, BatchPlan,
    CompareConfig, LoopSampler, Outcome,
};
use permsoup::{BlockSpec, CrossingMatrix, Matrix};

fn p2() -> SubMarkovChain<f64> {
    SubMarkovChain::new(Matrix::from_rows(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap()).unwrap()
}

/// θ on the two-state chain: θ_1 = θ_2 = k with probability
/// (3/4)^α (α)_k (1/4)^k / k!, a negative binomial.
fn p2_theta(alpha: f64, k: u32) -> f64 {
    0.75f64.powf(alpha) * rising(alpha, k) * 0.25f64.powi(k as i32) / factorial_f64(k)
}

#[test]
fn two_state_theta_law() {
    for (alpha, seed) in [(0.5, 1u64), (2.0, 2)] {
        let plan = BatchPlan::new(200_000, seed, 2);
        let counts = theta_counts(&soup_field_counts(&p2(), alpha, &plan).unwrap());
        for k in counts.keys() {
            assert_eq!(k[0], k[1], "θ off the diagonal: {k:?}");
        }
        let outcomes: Vec<_> = (0..30)
            .map(|k| Outcome {
                key: vec![k, k],
                label: format!("{k}"),
                probability: p2_theta(alpha, k),
            })
            .collect();
        let r = empirical_compare(&counts, plan.samples, &outcomes, &CompareConfig::default()).unwrap();
        assert!(r.passed, "α={alpha}: {r:?}");
    }
}

#[test]
fn two_state_configuration_law() {
    let alpha = 1.5;
    let plan = BatchPlan::new(200_000, 17, 1);
    let soups = collect_samples(&plan, || Ok(LoopSampler::new(&p2())), |s, r| s.sample_soup(alpha, r)).unwrap();
    let single = UnrootedLoop::from_rooted(&[0, 1]);
    let n = soups.len() as f64;
    let empty = soups.iter().filter(|s| s.is_empty()).count() as f64;
    let one = soups.iter().filter(|s| s.len() == 1 && s[0] == single).count() as f64;
    for (obs, p) in [(empty, 0.75f64.powf(alpha)), (one, 0.75f64.powf(alpha) * alpha / 4.0)] {
        let se = (p * (1.0 - p) / n).sqrt();
        assert!((obs / n - p).abs() < 4.0 * se, "{} vs {p}", obs / n);
    }
}

#[test]
fn loops_only_use_positive_transitions() {
    let c = SubMarkovChain::new(
        Matrix::from_rows(vec![vec![0.2, 0.3, 0.0], vec![0.1, 0.0, 0.4], vec![0.0, 0.6, 0.0]]).unwrap(),
    )
    .unwrap();
    let mut s = LoopSampler::new(&c);
    let mut rng = substream(4, 0);
    for _ in 0..2000 {
        let l = s.sample_loop(&mut rng).unwrap();
        for (x, y) in l.steps() {
            assert!(*c.p(x, y) > 0.0, "step {x}->{y} in {l:?}");
        }
    }
}

#[test]
fn sample_soup_is_seeded() {
    let a = sample_soup(&p2(), 3.0, 8).unwrap();
    let b = sample_soup(&p2(), 3.0, 8).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed, 8);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let c = SubMarkovChain::new(
        Matrix::from_rows(vec![vec![0.25, 0.25, 0.0], vec![0.25, 0.0, 0.25], vec![0.0, 0.25, 0.0]]).unwrap(),
    )
    .unwrap();
    let base = soup_field_counts(&c, 1.0, &BatchPlan::new(30_000, 5, 1)).unwrap();
    for w in [2, 3, 8] {
        assert_eq!(soup_field_counts(&c, 1.0, &BatchPlan::new(30_000, 5, w)).unwrap(), base);
        assert_eq!(
            cascade_field_counts(&c, 1.0, 1, &BatchPlan::new(30_000, 5, w)).unwrap(),
            cascade_field_counts(&c, 1.0, 1, &BatchPlan::new(30_000, 5, 1)).unwrap()
        );
    }
}

#[test]
fn cascade_on_two_state_chain() {
    // N_12 = N_21 = θ_1 with the same negative binomial law as the soup.
    let alpha = 0.7;
    let plan = BatchPlan::new(200_000, 23, 1);
    let counts = crossing_counts(&cascade_field_counts(&p2(), alpha, 0, &plan).unwrap());
    let outcomes: Vec<_> = (0..30)
        .map(|k| Outcome {
            key: CrossingMatrix::from_rows(vec![vec![0, k], vec![k, 0]]).unwrap(),
            label: format!("{k}"),
            probability: p2_theta(alpha, k),
        })
        .collect();
    let r = empirical_compare(&counts, plan.samples, &outcomes, &CompareConfig::default()).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn negative_binomial_moments() {
    for (r, p) in [(0.5, 0.3), (2.5, 0.6), (7.0, 0.1)] {
        let plan = BatchPlan::new(100_000, 3, 1);
        let counts = tally(&plan, || Ok(()), |_, rng| nb_sample(r, p, rng)).unwrap();
        let n = plan.samples as f64;
        let mean = counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum::<f64>() / n;
        let var = counts.iter().map(|(&k, &c)| (k as f64 - mean).powi(2) * c as f64).sum::<f64>() / n;
        // NB(r, p) counts successes of probability p before r failures.
        let m = r * p / (1.0 - p);
        let v = m / (1.0 - p);
        assert!((mean - m).abs() < 5.0 * (v / n).sqrt(), "mean {mean} vs {m}");
        assert!((var - v).abs() / v < 0.05, "var {var} vs {v}");
    }
}

#[test]
fn negative_multinomial_covariance() {
    let r = 1.3;
    let p = [0.2, 0.3];
    let plan = BatchPlan::new(100_000, 9, 1);
    let draws = collect_samples(&plan, || Ok(()), |_, rng| nm_sample(r, &p, rng)).unwrap();
    let n = draws.len() as f64;
    let p0 = 1.0 - p.iter().sum::<f64>();
    let mean: Vec<f64> = (0..2).map(|i| draws.iter().map(|d| d[i] as f64).sum::<f64>() / n).collect();
    let cov = draws.iter().map(|d| (d[0] as f64 - mean[0]) * (d[1] as f64 - mean[1])).sum::<f64>() / n;
    for i in 0..2 {
        let m = r * p[i] / p0;
        assert!((mean[i] - m).abs() / m < 0.02, "{} vs {m}", mean[i]);
    }
    let c = r * p[0] * p[1] / (p0 * p0);
    assert!((cov - c).abs() / c < 0.08, "{cov} vs {c}");
}

#[test]
fn theta_marginals_sum_below_one() {
    let c = SubMarkovChain::new(
        Matrix::from_rows(vec![
            vec![permsoup::scalar::rat(0, 1), permsoup::scalar::rat(1, 2), permsoup::scalar::rat(0, 1)],
            vec![permsoup::scalar::rat(1, 4), permsoup::scalar::rat(0, 1), permsoup::scalar::rat(1, 4)],
            vec![permsoup::scalar::rat(0, 1), permsoup::scalar::rat(1, 2), permsoup::scalar::rat(0, 1)],
        ])
        .unwrap(),
    )
    .unwrap();
    let mut last = 0.0;
    for cap in 0..=8 {
        let total: f64 = BlockSpec::up_to_total(3, cap)
            .iter()
            .map(|q| permsoup::soup::theta_law(&c, q, 9).unwrap().probability(1.3))
            .sum();
        assert!(total >= last - 1e-15 && total <= 1.0 + 1e-12);
        last = total;
    }
    assert!(last > 0.9);
}

#[test]
fn occupation_fields_add_up() {
    let c = SubMarkovChain::new(
        Matrix::from_rows(vec![vec![0.2, 0.3, 0.1], vec![0.1, 0.1, 0.4], vec![0.3, 0.3, 0.0]]).unwrap(),
    )
    .unwrap();
    let f = soup_field_counts(&c, 2.0, &BatchPlan::new(5000, 1, 1)).unwrap();
    let mut lens = BTreeMap::new();
    for (k, v) in &f {
        assert!(k.is_consistent());
        *lens.entry(k.theta.iter().sum::<u32>()).or_insert(0) += v;
    }
    assert!(lens.len() > 3);
}
