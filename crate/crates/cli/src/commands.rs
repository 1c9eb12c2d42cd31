use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;

use permsoup::chain::{spectral_radius, SubMarkovChain};
use permsoup::model::{graph_of_matrix, tq_enumerate};
use permsoup::permanent::{closed_form_coefficient, expansion_by_crossing, monomial};
use permsoup::series::{macmahon_check, AlphaValue};
use permsoup::soup::{
    cascade_field_counts, collect_samples, crossing_counts, crossing_outcomes, edge_laws_for_q,
    empirical_compare, n_law_starforest, soup_field_counts, theta_counts, theta_law,
    theta_outcomes, BatchPlan, CompareConfig, LawReport, LoopSampler, Outcome,
};
use permsoup::{AlphaPolynomial, BlockSpec, CrossingMatrix, Rational, Scalar, SquareMatrix};
use serde_json::{json, Value};

use crate::io::{
    block_spec, emit, load_matrix, matrix_json, render, report, resolve_seed, usage, zero_based,
    Alpha, CliError, CliResult, Input, JsonScalar,
};
use crate::{
    CascadeArgs, ChainArgs, Common, Law, PermArgs, SampleArgs, SeriesArgs, Thresholds, TqArgs,
    VerifyArgs,
};

fn config<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("argument structs serialize")
}

fn finish(io: &Common, v: &Value) -> CliResult<()> {
    emit(&render(v, io.format), io.out.as_deref())
}

fn poly_json(p: &AlphaPolynomial) -> Value {
    let coeffs = serde_json::to_value(p).expect("polynomials serialize")["coeffs"].take();
    json!({ "text": p.to_string(), "coeffs": coeffs })
}

fn rational_chain(input: &Input) -> CliResult<SubMarkovChain<Rational>> {
    let mut chain = SubMarkovChain::new(input.matrix.to_rational()?)?;
    if let Some(l) = &input.labels {
        chain = chain.with_labels(l.clone())?;
    }
    Ok(chain)
}

pub fn perm(a: &PermArgs) -> CliResult<bool> {
    let input = load_matrix(&a.io.matrix)?;
    let m = input.matrix.to_rational()?;
    let q = block_spec(&a.q, m.dim())?;
    let alpha = a.alpha.as_deref().map(Alpha::parse).transpose()?;
    let g = graph_of_matrix(&m);
    let classification = g.classification();
    let closed = classification.is_star_forest() && !a.force_brute;

    let terms: Vec<(CrossingMatrix, AlphaPolynomial)> = if closed {
        tq_enumerate(&g, &q)?
            .into_iter()
            .map(|n| {
                let c = closed_form_coefficient(&q, &n)?;
                Ok((n, c))
            })
            .collect::<permsoup::Result<_>>()?
    } else if q.total() == 0 {
        vec![(CrossingMatrix::zeros(m.dim()), AlphaPolynomial::one())]
    } else {
        expansion_by_crossing(&m, &q, a.cap)?.terms.into_iter().collect()
    };
    let poly: AlphaPolynomial = terms.iter().map(|(n, c)| c.scale(&monomial(&m, n))).sum();

    let mut body = json!({
        "classification": classification,
        "method": if closed { "closed-form" } else { "brute-force" },
        "q": q,
        "permanent": poly_json(&poly),
        "terms": terms.iter().map(|(n, c)| json!({
            "crossing": n,
            "coefficient": poly_json(c),
            "monomial": monomial(&m, n).json(),
        })).collect::<Vec<_>>(),
    });
    if let Some(al) = &alpha {
        let value = match al {
            Alpha::Exact(r) => poly.eval(r).json(),
            Alpha::Float(v) => json!(poly.eval_f64(*v)),
        };
        body["alpha"] = al.to_json();
        body["value"] = value;
    }
    finish(&a.io, &report("perm", config(a), body))?;
    Ok(true)
}

pub fn tq(a: &TqArgs) -> CliResult<bool> {
    let input = load_matrix(&a.io.matrix)?;
    let m = input.matrix.to_rational()?;
    let q = block_spec(&a.q, m.dim())?;
    let g = graph_of_matrix(&m);
    let mut rows = vec![];
    for n in tq_enumerate(&g, &q)? {
        rows.push(json!({
            "crossing": n,
            "coefficient": poly_json(&closed_form_coefficient(&q, &n)?),
            "monomial": monomial(&m, &n).json(),
        }));
    }
    let body = json!({
        "classification": g.classification(),
        "q": q,
        "count": rows.len(),
        "elements": rows,
    });
    finish(&a.io, &report("tq", config(a), body))?;
    Ok(true)
}

pub fn series_check(a: &SeriesArgs) -> CliResult<bool> {
    let input = load_matrix(&a.io.matrix)?;
    let d = input.matrix.dim();
    let alpha = match (Alpha::parse(&a.alpha)?, &input.matrix) {
        (Alpha::Exact(_), SquareMatrix::Float(_)) => {
            return usage("an exact alpha needs a rational matrix; pass a decimal alpha for float mode");
        }
        (Alpha::Exact(r), _) => AlphaValue::Exact(r),
        (Alpha::Float(v), _) => AlphaValue::Float(v),
    };
    let caps = match &a.cap {
        None => vec![2; d],
        Some(c) if c.len() == d => c.clone(),
        Some(c) => return usage(format!("cap has {} entries, matrix has {d} rows", c.len())),
    };
    let rep = macmahon_check(&input.matrix, &alpha, &caps, a.brute_cap)?;
    let passed = rep.passed;
    let mut cfg = config(a);
    cfg["cap"] = json!(caps);
    finish(&a.io, &report("series-check", cfg, serde_json::to_value(&rep).map_err(permsoup::Error::from)?))?;
    Ok(passed)
}

fn chain_body<S: Scalar + JsonScalar>(chain: &SubMarkovChain<S>, ordering: &[usize]) -> CliResult<Value> {
    let g = graph_of_matrix(chain.matrix());
    let green = chain.green_function()?;
    let det = chain.det_identity_check(ordering)?;
    let star = chain.star_expand(false)?;
    Ok(json!({
        "d": chain.dim(),
        "classification": g.classification(),
        "labels": (0..chain.dim()).map(|x| chain.label(x)).collect::<Vec<_>>(),
        "killing": chain.killing().iter().map(JsonScalar::json).collect::<Vec<_>>(),
        "spectral_radius": spectral_radius(&chain.matrix().to_f64()),
        "det": chain.det_i_minus_p().json(),
        "total_mass": chain.total_mass(),
        "green": matrix_json(&green),
        "green_diagonal": (0..chain.dim()).map(|x| green.get(x, x).json()).collect::<Vec<_>>(),
        "det_identity": {
            "ordering": det.ordering.iter().map(|x| x + 1).collect::<Vec<_>>(),
            "factors": det.diagonal_factors.iter().map(JsonScalar::json).collect::<Vec<_>>(),
            "product": det.product.json(),
            "det": det.det.json(),
            "holds": det.holds,
        },
        "star_expansion_dim": star.chain.dim(),
    }))
}

pub fn chain_info(a: &ChainArgs) -> CliResult<bool> {
    let input = load_matrix(&a.io.matrix)?;
    let d = input.matrix.dim();
    let ordering = match &a.ordering {
        None => (0..d).collect(),
        Some(o) => zero_based(o, d)?,
    };
    let body = match &input.matrix {
        SquareMatrix::Rational(_) => chain_body(&rational_chain(&input)?, &ordering)?,
        SquareMatrix::Float(m) => {
            let mut chain = SubMarkovChain::new(m.clone())?;
            if let Some(l) = &input.labels {
                chain = chain.with_labels(l.clone())?;
            }
            chain_body(&chain, &ordering)?
        }
    };
    let holds = body["det_identity"]["holds"].as_bool().unwrap_or(false);
    finish(&a.io, &report("chain-info", config(a), body))?;
    Ok(holds)
}

fn float_chain(input: &Input) -> CliResult<SubMarkovChain<f64>> {
    let mut chain = SubMarkovChain::new(input.matrix.to_f64())?;
    if let Some(l) = &input.labels {
        chain = chain.with_labels(l.clone())?;
    }
    Ok(chain)
}

pub fn soup_sample(a: &SampleArgs) -> CliResult<bool> {
    let input = load_matrix(&a.io.matrix)?;
    let alpha = Alpha::positive(&a.sampling.alpha)?;
    let seed = resolve_seed(a.sampling.seed);
    let chain = float_chain(&input)?;
    let plan = BatchPlan::new(a.sampling.samples, seed, a.sampling.workers);
    let soups = collect_samples(&plan, || Ok(LoopSampler::new(&chain)), |s, rng| s.sample_soup(alpha, rng))?;

    let mut cfg = config(a);
    cfg["sampling"]["seed"] = json!(seed);
    let labels = chain.labels();
    let mut lines = String::new();
    for (i, loops) in soups.iter().enumerate() {
        let rec = json!({
            "seed": seed,
            "index": i,
            "loops": loops.iter().map(|l| l.to_text(labels)).collect::<Vec<_>>(),
        });
        writeln!(lines, "{rec}").expect("writing to a String");
    }
    let total_loops: usize = soups.iter().map(Vec::len).sum();
    let summary = report(
        "soup-sample",
        cfg,
        json!({
            "samples": soups.len(),
            "total_mass": chain.total_mass(),
            "mean_loops": total_loops as f64 / soups.len().max(1) as f64,
        }),
    );
    match &a.io.out {
        Some(path) => {
            fs::write(path, lines)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            emit(&render(&summary, a.io.format), None)?;
        }
        None => {
            emit(&serde_json::to_string(&summary).expect("serializes"), None)?;
            print!("{lines}");
        }
    }
    Ok(true)
}

fn listed_qs(t: &Thresholds, d: usize) -> CliResult<Vec<BlockSpec>> {
    match &t.qcap {
        Some(c) if c.len() == d => Ok(BlockSpec::boxed(c)),
        Some(c) => usage(format!("qcap has {} entries, matrix has {d} rows", c.len())),
        None => Ok(BlockSpec::up_to_total(d, t.max_total)),
    }
}

fn compare_config(t: &Thresholds) -> CompareConfig {
    CompareConfig {
        min_probability: t.min_probability,
        z_max: t.z_max,
        min_p_value: t.min_p_value,
        ..CompareConfig::default()
    }
}

fn write_csv<K: Ord>(
    path: &std::path::Path,
    outcomes: &[Outcome<K>],
    counts: &BTreeMap<K, u64>,
    samples: u64,
) -> CliResult<()> {
    let mut s = String::from("outcome,theory,empirical\n");
    for o in outcomes {
        let c = counts.get(&o.key).copied().unwrap_or(0);
        writeln!(s, "\"{}\",{:e},{:e}", o.label, o.probability, c as f64 / samples as f64)
            .expect("writing to a String");
    }
    fs::write(path, s).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn report_json(r: &LawReport) -> Value {
    serde_json::to_value(r).expect("reports serialize")
}

pub fn soup_verify(a: &VerifyArgs) -> CliResult<bool> {
    let input = load_matrix(&a.io.matrix)?;
    let alpha = Alpha::positive(&a.sampling.alpha)?;
    let seed = resolve_seed(a.sampling.seed);
    let exact = rational_chain(&input)?;
    let chain = float_chain(&input)?;
    let t = &a.thresholds;
    let qs = listed_qs(t, chain.dim())?;
    let plan = BatchPlan::new(a.sampling.samples, seed, a.sampling.workers);
    let fields = soup_field_counts(&chain, alpha, &plan)?;
    let cfg_cmp = compare_config(t);

    let rep = match a.law {
        Law::Theta => {
            let outcomes = theta_outcomes(&exact, &qs, alpha, t.brute_cap)?;
            let counts = theta_counts(&fields);
            if let Some(p) = &t.csv {
                write_csv(p, &outcomes, &counts, plan.samples)?;
            }
            empirical_compare(&counts, plan.samples, &outcomes, &cfg_cmp)?
        }
        Law::Crossing => {
            let outcomes = crossing_outcomes(&exact, &qs, alpha, t.brute_cap)?;
            let counts = crossing_counts(&fields);
            if let Some(p) = &t.csv {
                write_csv(p, &outcomes, &counts, plan.samples)?;
            }
            empirical_compare(&counts, plan.samples, &outcomes, &cfg_cmp)?
        }
    };
    let passed = rep.passed;
    let mut cfg = config(a);
    cfg["sampling"]["seed"] = json!(seed);
    let body = json!({
        "total_mass": chain.total_mass(),
        "report": report_json(&rep),
        "passed": passed,
    });
    finish(&a.io, &report("soup-verify", cfg, body))?;
    Ok(passed)
}

/// Exact check that the crossing law summed over each `T_q` is the θ law.
fn exact_marginals(chain: &SubMarkovChain<Rational>, qs: &[BlockSpec], cap: usize) -> CliResult<bool> {
    let g = graph_of_matrix(chain.matrix());
    for q in qs {
        let theta = theta_law(chain, q, cap)?;
        let sum: AlphaPolynomial = if g.classification().is_star_forest() {
            tq_enumerate(&g, q)?
                .iter()
                .map(|n| n_law_starforest(chain, n).map(|l| l.weight))
                .collect::<permsoup::Result<Vec<_>>>()?
                .into_iter()
                .sum()
        } else {
            edge_laws_for_q(chain, q, cap)?.into_iter().map(|(_, l)| l.weight).sum()
        };
        if sum != theta.weight {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn cascade_verify(a: &CascadeArgs) -> CliResult<bool> {
    let input = load_matrix(&a.io.matrix)?;
    let alpha = Alpha::positive(&a.sampling.alpha)?;
    let seed = resolve_seed(a.sampling.seed);
    let exact = rational_chain(&input)?;
    let chain = float_chain(&input)?;
    let root = zero_based(&[a.root], chain.dim())?[0];
    let t = &a.thresholds;
    let qs = listed_qs(t, chain.dim())?;
    let outcomes = crossing_outcomes(&exact, &qs, alpha, t.brute_cap)?;
    let cfg_cmp = compare_config(t);

    // Cascade and soup draw from disjoint seeds derived from the base seed.
    let cascade_plan = BatchPlan::new(a.sampling.samples, seed, a.sampling.workers);
    let soup_plan = BatchPlan::new(a.sampling.samples, seed ^ 0x9e37_79b9_7f4a_7c15, a.sampling.workers);
    let cascade = crossing_counts(&cascade_field_counts(&chain, alpha, root, &cascade_plan)?);
    let soup = crossing_counts(&soup_field_counts(&chain, alpha, &soup_plan)?);
    if let Some(p) = &t.csv {
        write_csv(p, &outcomes, &cascade, cascade_plan.samples)?;
    }
    let cascade_rep = empirical_compare(&cascade, cascade_plan.samples, &outcomes, &cfg_cmp)?;
    let soup_rep = empirical_compare(&soup, soup_plan.samples, &outcomes, &cfg_cmp)?;
    let marginals = exact_marginals(&exact, &qs, t.brute_cap)?;
    let passed = cascade_rep.passed && soup_rep.passed && marginals;

    let mut cfg = config(a);
    cfg["sampling"]["seed"] = json!(seed);
    let body = json!({
        "cascade": report_json(&cascade_rep),
        "soup": report_json(&soup_rep),
        "exact_marginals": marginals,
        "passed": passed,
    });
    finish(&a.io, &report("cascade-verify", cfg, body))?;
    Ok(passed)
}
