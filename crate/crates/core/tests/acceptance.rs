//! Acceptance suite. Runs every criterion at full scale and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use num::One;
use permsoup::chain::SubMarkovChain;
use permsoup::loops::UnrootedLoop;
use permsoup::model::{graph_of_matrix, tq_enumerate, InducedGraph};
use permsoup::permanent::{
    closed_form_coefficient, expansion_by_crossing, per_alpha_block, per_alpha_starforest,
};
use permsoup::scalar::rat;
use permsoup::series::{macmahon_check, AlphaValue};
use permsoup::soup::{
    cascade_field_counts, collect_samples, crossing_counts, crossing_outcomes, empirical_compare,
    n_law_starforest, soup_field_counts, theta_counts, theta_law, theta_outcomes, BatchPlan,
    CompareConfig, LawReport, LoopSampler,
};
use permsoup::{AlphaPolynomial, BlockSpec, Classification, Matrix, Rational, SquareMatrix};
use rand::Rng;

const SAMPLES: u64 = 1_000_000;
const WORKERS: usize = 4;
const ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
const MAX_TOTAL: u32 = 8;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

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

fn two_state() -> SubMarkovChain<Rational> {
    rchain(&[&[(0, 1), (1, 2)], &[(1, 2), (0, 1)]])
}

fn path_with_killing() -> SubMarkovChain<Rational> {
    rchain(&[
        &[(0, 1), (1, 2), (0, 1)],
        &[(1, 4), (0, 1), (1, 4)],
        &[(0, 1), (1, 2), (0, 1)],
    ])
}

fn self_looped() -> SubMarkovChain<Rational> {
    rchain(&[
        &[(1, 4), (1, 4), (0, 1)],
        &[(1, 4), (0, 1), (1, 4)],
        &[(0, 1), (1, 4), (0, 1)],
    ])
}

/// The shared corpus of criteria 1 and 2: *-forest matrices with d ≤ 5,
/// q entries ≤ 3 and |q| ≤ 9.
fn forest_corpus() -> Vec<(Matrix<Rational>, BlockSpec)> {
    let mut r = rng(2024);
    (0..400)
        .map(|_| {
            let d = r.random_range(1..=5);
            let a = random_star_forest(&mut r, d);
            let g = graph_of_matrix(&a);
            // Mostly q with a nonempty T_q, so the permanents are not all zero.
            let q = loop {
                let q = BlockSpec::new((0..d).map(|_| r.random_range(0..=3)).collect());
                if q.total() <= 9 && (!tq_enumerate(&g, &q).unwrap().is_empty() || r.random_bool(0.1)) {
                    break q;
                }
            };
            (a, q)
        })
        .collect()
}

fn ones_on_graph(g: &InducedGraph) -> Matrix<Rational> {
    let d = g.dim();
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            if (i == j && g.has_self_loop(i)) || (i != j && g.has_edge(i, j)) {
                m.set(i, j, Rational::one());
            }
        }
    }
    m
}

fn criterion_1(corpus: &[(Matrix<Rational>, BlockSpec)]) -> Verdict {
    let mut bad = 0;
    let mut nonzero = 0;
    for (a, q) in corpus {
        let brute = per_alpha_block(a, q, 9).unwrap();
        if !brute.is_zero() {
            nonzero += 1;
        }
        if per_alpha_starforest(a, q).unwrap() != brute {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("{} matrices ({nonzero} nonzero permanents), {bad} mismatches", corpus.len()),
    )
}

fn criterion_2(corpus: &[(Matrix<Rational>, BlockSpec)]) -> Verdict {
    let mut checked = 0;
    let mut bad = 0;
    for (a, q) in corpus {
        let g = graph_of_matrix(a);
        let grouped = if q.total() == 0 {
            Default::default()
        } else {
            expansion_by_crossing(&ones_on_graph(&g), q, 9).unwrap().terms
        };
        for n in tq_enumerate(&g, q).unwrap() {
            checked += 1;
            let expected = if q.total() == 0 {
                AlphaPolynomial::one()
            } else {
                grouped.get(&n).cloned().unwrap_or_else(AlphaPolynomial::zero)
            };
            if closed_form_coefficient(q, &n).unwrap() != expected {
                bad += 1;
            }
        }
    }
    verdict(bad == 0 && checked > 0, format!("{checked} crossing matrices, {bad} mismatches"))
}

fn criterion_3() -> Verdict {
    let mut r = rng(77);
    let mut mats: Vec<Matrix<Rational>> = (1..=3)
        .flat_map(|d| (0..2).map(move |_| d))
        .map(|d| random_matrix(&mut r, d))
        .collect();
    mats.push(
        Matrix::from_rows(vec![
            vec![rat(0, 1), rat(1, 4), rat(1, 5)],
            vec![rat(1, 3), rat(0, 1), rat(1, 4)],
            vec![rat(1, 6), rat(1, 4), rat(0, 1)],
        ])
        .unwrap(),
    );
    let mut exact_bad = 0;
    let mut float_bad = 0;
    let mut worst = 0.0f64;
    let mut rows = 0;
    for a in &mats {
        let caps = vec![3; a.dim()];
        for (num, den) in [(1, 2), (1, 1), (2, 1), (3, 1)] {
            let rep = macmahon_check(
                &SquareMatrix::Rational(a.clone()),
                &AlphaValue::Exact(rat(num, den)),
                &caps,
                9,
            )
            .unwrap();
            rows += rep.rows.len();
            exact_bad += rep.rows.iter().filter(|x| x.residual != "0").count();

            let alpha = num as f64 / den as f64;
            let rep = macmahon_check(&SquareMatrix::Float(a.to_f64()), &AlphaValue::Float(alpha), &caps, 9)
                .unwrap();
            for x in &rep.rows {
                let v: f64 = x.residual.parse().unwrap();
                worst = worst.max(v);
                if !(v <= 1e-9) {
                    float_bad += 1;
                }
            }
        }
    }
    verdict(
        exact_bad == 0 && float_bad == 0,
        format!(
            "{} matrices x 4 alphas, {rows} exact coefficients ({exact_bad} nonzero residuals), \
             float max relative residual {worst:.2e}",
            mats.len()
        ),
    )
}

fn summary(r: &LawReport) -> String {
    format!("max|z| {:.2}, p {:.3}, df {}", r.max_abs_z, r.p_value, r.degrees_of_freedom)
}

fn criterion_4() -> Verdict {
    let cfg = CompareConfig::default();
    let mut ok = true;
    let mut parts = vec![];
    for (name, chain, seed) in [("two-state", two_state(), 41u64), ("path", path_with_killing(), 42)] {
        let qs = BlockSpec::up_to_total(chain.dim(), MAX_TOTAL);
        let fchain = chain.to_f64();
        for (k, &alpha) in ALPHAS.iter().enumerate() {
            let plan = BatchPlan::new(SAMPLES, seed * 10 + k as u64, WORKERS);
            let counts = theta_counts(&soup_field_counts(&fchain, alpha, &plan).unwrap());
            let outcomes = theta_outcomes(&chain, &qs, alpha, 9).unwrap();
            let rep = empirical_compare(&counts, SAMPLES, &outcomes, &cfg).unwrap();
            ok &= rep.passed;
            parts.push(format!("{name} α={alpha}: {}{}", summary(&rep), if rep.passed { "" } else { " FAIL" }));
        }
    }
    verdict(ok, parts.join("; "))
}

fn criterion_5() -> Verdict {
    let cfg = CompareConfig::default();
    let mut ok = true;
    let mut parts = vec![];
    let chains = [
        ("self-looped", self_looped(), 1usize, 51u64),
        ("path", path_with_killing(), 0, 52),
        ("two-state", two_state(), 1, 53),
    ];
    let mut exact_checked = 0;
    for (name, chain, root, seed) in chains {
        let g = graph_of_matrix(chain.matrix());
        let qs = BlockSpec::up_to_total(chain.dim(), MAX_TOTAL);
        for q in &qs {
            let sum: AlphaPolynomial = tq_enumerate(&g, q)
                .unwrap()
                .iter()
                .map(|n| n_law_starforest(&chain, n).unwrap().weight)
                .sum();
            let theta = theta_law(&chain, q, 9).unwrap().weight;
            exact_checked += 1;
            if sum != theta {
                ok = false;
                parts.push(format!("{name}: n-law sum differs from θ law at q={q}"));
            }
        }
        let fchain = chain.to_f64();
        for (k, &alpha) in ALPHAS.iter().enumerate() {
            let outcomes = crossing_outcomes(&chain, &qs, alpha, 9).unwrap();
            let s = seed * 10 + k as u64;
            let cascade = crossing_counts(
                &cascade_field_counts(&fchain, alpha, root, &BatchPlan::new(SAMPLES, s, WORKERS)).unwrap(),
            );
            let soup = crossing_counts(
                &soup_field_counts(&fchain, alpha, &BatchPlan::new(SAMPLES, s + 1000, WORKERS)).unwrap(),
            );
            for (what, counts) in [("cascade", cascade), ("soup", soup)] {
                let rep = empirical_compare(&counts, SAMPLES, &outcomes, &cfg).unwrap();
                ok &= rep.passed;
                if !rep.passed {
                    parts.push(format!("{name} {what} α={alpha}: {} FAIL", summary(&rep)));
                }
            }
        }
        parts.push(format!("{name} ok"));
    }
    parts.push(format!("{exact_checked} exact marginal identities"));
    verdict(ok, parts.join("; "))
}

fn all_orderings(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in all_orderings(d - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, d - 1);
            out.push(v);
        }
    }
    out
}

fn criterion_6() -> Verdict {
    let mut r = rng(606);
    let mut chains = vec![];
    for i in 0..160 {
        let d = 1 + i % 5;
        if i % 3 == 0 {
            chains.push(random_star_forest_chain(&mut r, d));
        } else {
            let density = r.random_range(0.4..0.95);
            chains.push(random_chain(&mut r, d, density));
        }
    }
    let mut with_h = 0;
    let mut h_checks = 0;
    let mut bad = 0;
    let mut orderings = 0;
    for c in &chains {
        let det = c.det_i_minus_p();
        let mut any = false;
        for x0 in 0..c.dim() {
            if let Ok((h, _)) = c.h_transform(x0) {
                any = true;
                h_checks += 1;
                if h.det_i_minus_p() != det {
                    bad += 1;
                }
            }
        }
        with_h += any as usize;
        for full in [false, true] {
            if c.star_expand(full).unwrap().chain.det_i_minus_p() != det {
                bad += 1;
            }
        }
        if c.dim() <= 4 {
            for o in all_orderings(c.dim()) {
                orderings += 1;
                if !c.det_identity_check(&o).unwrap().holds {
                    bad += 1;
                }
            }
        }
    }
    verdict(
        bad == 0 && with_h >= 100,
        format!(
            "{} chains ({with_h} with an h-transform, {h_checks} roots), {orderings} orderings, {bad} failures",
            chains.len()
        ),
    )
}

fn criterion_7() -> Verdict {
    let chain = two_state().to_f64();
    let single = UnrootedLoop::from_rooted(&[0, 1]);
    let mut ok = true;
    let mut parts = vec![];
    for (k, &alpha) in ALPHAS.iter().enumerate() {
        let plan = BatchPlan::new(SAMPLES, 700 + k as u64, WORKERS);
        let soups =
            collect_samples(&plan, || Ok(LoopSampler::new(&chain)), |s, rng| s.sample_soup(alpha, rng)).unwrap();
        let n = soups.len() as f64;
        let empty = soups.iter().filter(|s| s.is_empty()).count() as f64 / n;
        let one = soups.iter().filter(|s| s.len() == 1 && s[0] == single).count() as f64 / n;
        let p_empty = 0.75f64.powf(alpha);
        let p_one = p_empty * alpha / 4.0;
        let z = |f: f64, p: f64| (f - p) / (p * (1.0 - p) / n).sqrt();
        let (z0, z1) = (z(empty, p_empty), z(one, p_one));
        ok &= z0.abs() <= 4.0 && z1.abs() <= 4.0;
        parts.push(format!("α={alpha}: empty z={z0:.2}, single loop z={z1:.2}"));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_8() -> Verdict {
    let mut forests = 0;
    let mut cases = 0;
    let mut nonzero = 0;
    let mut bad = 0;
    for d in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &e)| e)
                .collect();
            let g = InducedGraph::from_edges(d, vec![false; d], &edges).unwrap();
            if g.classification() != Classification::Forest {
                continue;
            }
            forests += 1;
            let a = ones_on_graph(&g);
            for q in BlockSpec::boxed(&vec![3; d]) {
                cases += 1;
                let tq = tq_enumerate(&g, &q).unwrap();
                let p = per_alpha_block(&a, &q, 15).unwrap();
                if !p.is_zero() {
                    nonzero += 1;
                }
                if tq.len() > 1 || (!p.is_zero() && tq.len() != 1) {
                    bad += 1;
                }
            }
        }
    }
    verdict(
        bad == 0,
        format!("{forests} forests, {cases} (forest, q) pairs, {nonzero} nonzero permanents, {bad} violations"),
    )
}

fn main() -> ExitCode {
    let corpus = forest_corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("closed form equals brute force on *-forests", Box::new(|| criterion_1(&corpus))),
        ("crossing coefficient identity", Box::new(|| criterion_2(&corpus))),
        ("MacMahon series identity", Box::new(criterion_3)),
        ("occupation field law by Monte Carlo", Box::new(criterion_4)),
        ("cascade and soup crossing laws", Box::new(criterion_5)),
        ("structural determinant identities", Box::new(criterion_6)),
        ("soup configuration law", Box::new(criterion_7)),
        ("forest uniqueness of T_q", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        let status = if v.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {status} {name} [{:.1}s] {}",
            i + 1,
            t.elapsed().as_secs_f64(),
            v.detail
        );
        failed += (!v.passed) as usize;
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
