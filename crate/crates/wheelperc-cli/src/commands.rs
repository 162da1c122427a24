//! Handlers for every subcommand, each producing a [`CommandResult`].

use std::time::Instant;

use clap::ValueEnum;
use serde_json::{json, Value};
use wheelperc::ct::{asm_via_ct, phi_eval1};
use wheelperc::dynamics::{asm_count, stationary_weights};
use wheelperc::linalg::Rational;
use wheelperc::matchings::{enumerate, NoncrossingMatching, WeakSequence};
use wheelperc::prob::{
    anti_cluster_prob, halfplane_anticluster, halfplane_from, interpolate_q, prob_pairs_brute,
    prob_submatching_brute, prob_submatching_ct, EventProbability, RationalEventFunction,
    BRUTE_CAP,
};
use wheelperc::qkz::{c_matrix, f_polynomial};
use wheelperc::sim::estimate_event;

use crate::cache;
use crate::error::CliError;
use crate::input::{parse_event, parse_matching, parse_samples, parse_sequence, validate_pairs, EventSpec};
use crate::output::{decimal, dyadic_str, matching_json, matching_str, rational_str, CommandResult, TableView};
use crate::verify::{run_suite, Suite};

const MU_CAP: usize = 8;
const CMATRIX_CAP: usize = 7;
const FPOLY_CAP: usize = 6;
const CT_ASM_CAP: usize = 10;
const SIM_EXACT_CAP: usize = 8;

/// Route selector for `prob`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Ct,
    Brute,
    Both,
}

/// Table selector for `tables`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Submatching,
    Anticluster,
}

fn resource(msg: String) -> CliError {
    CliError::Resource(msg)
}

fn openers_json(p: &NoncrossingMatching) -> Value {
    Value::Array(p.to_openers().positions().iter().map(|&x| x.into()).collect())
}

/// `mu`: the exact stationary distribution at order `n`.
pub fn cmd_mu(n: usize) -> Result<CommandResult, CliError> {
    if n < 1 || n > MU_CAP {
        return Err(resource(format!("mu supports 1 <= n <= {MU_CAP}, got {n}")));
    }
    let order = enumerate(n);
    let (asm, alpha) = match cache::load_mu(n, order.len()) {
        Some(hit) => hit,
        None => {
            let alpha = stationary_weights(n);
            let asm = asm_count(n);
            cache::store_mu(n, &asm, &alpha);
            (asm, alpha)
        }
    };
    let mut weights = Vec::with_capacity(order.len());
    let mut rows = Vec::with_capacity(order.len());
    for (p, a) in order.iter().zip(alpha.iter()) {
        let prob = Rational::new(a.clone(), asm.clone());
        weights.push(json!({
            "matching": matching_json(p),
            "openers": openers_json(p),
            "alpha": a.to_string(),
            "probability": rational_str(&prob),
        }));
        rows.push(vec![
            matching_str(p),
            p.to_openers().positions().iter().map(usize::to_string).collect::<Vec<_>>().join(","),
            a.to_string(),
            rational_str(&prob),
        ]);
    }
    let json = json!({
        "command": "mu",
        "n": n,
        "asm": asm.to_string(),
        "weights": weights,
    });
    Ok(CommandResult::new(json).with_table(TableView {
        header: vec!["matching".into(), "openers".into(), "alpha".into(), "probability".into()],
        rows,
    }))
}

/// `cmatrix`: the change-of-basis matrix (or its inverse) at order `n`.
pub fn cmd_cmatrix(n: usize, tilde: bool) -> Result<CommandResult, CliError> {
    if n < 1 || n > CMATRIX_CAP {
        return Err(resource(format!("cmatrix supports 1 <= n <= {CMATRIX_CAP}, got {n}")));
    }
    let order = enumerate(n);
    let c = match cache::load_cmatrix(n, order.len()) {
        Some(hit) => hit,
        None => {
            let c = c_matrix(&order);
            cache::store_cmatrix(n, &c);
            c
        }
    };
    let m = if tilde { c.invert_unitriangular()? } else { c };
    let entries: Vec<Value> = (0..m.rows())
        .map(|i| {
            Value::Array((0..m.cols()).map(|j| Value::String(m.get(i, j).to_string())).collect())
        })
        .collect();
    let json = json!({
        "command": "cmatrix",
        "n": n,
        "tilde": tilde,
        "order": order.iter().map(matching_json).collect::<Vec<_>>(),
        "entries": entries,
    });
    let mut header = vec!["matching".to_string()];
    header.extend(order.iter().map(matching_str));
    let rows = (0..m.rows())
        .map(|i| {
            let mut row = vec![matching_str(&order[i])];
            row.extend((0..m.cols()).map(|j| m.get(i, j).to_string()));
            row
        })
        .collect();
    Ok(CommandResult::new(json).with_table(TableView { header, rows }))
}

fn monomial_str(exponents: &[u32]) -> String {
    let factors: Vec<String> = exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(j, &e)| if e == 1 { format!("w{}", j + 1) } else { format!("w{}^{}", j + 1, e) })
        .collect();
    if factors.is_empty() {
        "1".to_string()
    } else {
        factors.join(" ")
    }
}

/// `fpoly`: the window numerator polynomial of a matching.
pub fn cmd_fpoly(matching: &str) -> Result<CommandResult, CliError> {
    let pi0 = parse_matching(matching)?;
    let k = pi0.order();
    if k > FPOLY_CAP {
        return Err(resource(format!("fpoly supports order <= {FPOLY_CAP}, got {k}")));
    }
    let f = f_polynomial(&pi0);
    let terms: Vec<Value> = f
        .terms()
        .iter()
        .map(|(e, c)| json!({ "exponents": e, "coefficient": c.to_string() }))
        .collect();
    let rows = f
        .terms()
        .iter()
        .map(|(e, c)| vec![monomial_str(e), c.to_string()])
        .collect();
    let json = json!({
        "command": "fpoly",
        "matching": matching_json(&pi0),
        "k": k,
        "terms": terms,
    });
    Ok(CommandResult::new(json).with_table(TableView {
        header: vec!["monomial".into(), "coefficient".into()],
        rows,
    }))
}

fn prob_json(matching: &NoncrossingMatching, n: usize, p: &EventProbability) -> Value {
    json!({
        "command": "prob",
        "matching": matching_json(matching),
        "k": matching.order(),
        "n": n,
        "route": p.provenance.as_str(),
        "value": rational_str(&p.value),
        "decimal": decimal(&p.value),
    })
}

/// `prob`: exact window-event probability at a finite order.
pub fn cmd_prob(matching: &str, n: usize, route: Route) -> Result<CommandResult, CliError> {
    let pi0 = parse_matching(matching)?;
    match route {
        Route::Ct => {
            let p = prob_submatching_ct(&pi0, n)?;
            Ok(CommandResult::new(prob_json(&pi0, n, &p)))
        }
        Route::Brute => {
            let p = prob_submatching_brute(&pi0, n, 1)?;
            Ok(CommandResult::new(prob_json(&pi0, n, &p)))
        }
        Route::Both => {
            let ct = prob_submatching_ct(&pi0, n)?;
            let brute = prob_submatching_brute(&pi0, n, 1)?;
            let agree = ct.value == brute.value;
            let json = json!({
                "command": "prob",
                "matching": matching_json(&pi0),
                "k": pi0.order(),
                "n": n,
                "route": "both",
                "ct": rational_str(&ct.value),
                "brute": rational_str(&brute.value),
                "agree": agree,
                "value": rational_str(&ct.value),
                "decimal": decimal(&ct.value),
            });
            Ok(CommandResult::new(json).with_exit(if agree { 0 } else { 1 }))
        }
    }
}

fn fit_with_progress(
    pi0: &NoncrossingMatching,
    witness_flag: bool,
) -> Result<(RationalEventFunction, bool), CliError> {
    let k = pi0.order();
    let witness = witness_flag || k <= 2;
    let last = k * (k + 3) / 2 + 1;
    eprint!("interpolating order {k} through n = {}..={last}", k + 1);
    if witness {
        eprint!(", witness n = {}", last + 1);
    }
    eprintln!();
    let t0 = Instant::now();
    let fit = interpolate_q(pi0, witness)?;
    eprintln!("fit done in {:.1}s", t0.elapsed().as_secs_f64());
    Ok((fit, witness))
}

fn witness_json(fit: &RationalEventFunction) -> Value {
    match fit.witness {
        Some((node, passed)) => json!({ "n": node, "passed": passed }),
        None => Value::Null,
    }
}

fn witness_failed(fit: &RationalEventFunction) -> bool {
    matches!(fit.witness, Some((_, false)))
}

/// `interpolate`: fit the event probability as a rational function of
/// the order.
pub fn cmd_interpolate(matching: &str, witness: bool) -> Result<CommandResult, CliError> {
    let pi0 = parse_matching(matching)?;
    let (fit, _) = fit_with_progress(&pi0, witness)?;
    let hp = halfplane_from(&fit);
    let json = json!({
        "command": "interpolate",
        "matching": matching_json(&pi0),
        "k": fit.k,
        "nodes": fit.nodes,
        "coefficients": fit.coefficients.iter().map(rational_str).collect::<Vec<_>>(),
        "denominator": fit.denominator,
        "dyadic": fit.dyadic,
        "witness": witness_json(&fit),
        "halfplane": rational_str(&hp.value),
    });
    let rows = fit
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| vec![i.to_string(), rational_str(c)])
        .collect();
    let exit = if witness_failed(&fit) { 1 } else { 0 };
    Ok(CommandResult::new(json)
        .with_table(TableView { header: vec!["m_power".into(), "coefficient".into()], rows })
        .with_exit(exit))
}

/// `halfplane`: the limiting window-event probability.
pub fn cmd_halfplane(matching: &str, witness: bool) -> Result<CommandResult, CliError> {
    let pi0 = parse_matching(matching)?;
    let (fit, _) = fit_with_progress(&pi0, witness)?;
    let hp = halfplane_from(&fit);
    let json = json!({
        "command": "halfplane",
        "matching": matching_json(&pi0),
        "k": fit.k,
        "value": rational_str(&hp.value),
        "dyadic": dyadic_str(&hp.value),
        "decimal": decimal(&hp.value),
        "witness": witness_json(&fit),
    });
    let exit = if witness_failed(&fit) { 1 } else { 0 };
    Ok(CommandResult::new(json).with_exit(exit))
}

/// `anticluster`: probability that none of the first `k` points match
/// one another, at order `n` or in the half-plane limit.
pub fn cmd_anticluster(k: usize, n: Option<usize>) -> Result<CommandResult, CliError> {
    let json = match n {
        Some(n) => {
            let p = anti_cluster_prob(k, n)?;
            json!({
                "command": "anticluster",
                "k": k,
                "n": n,
                "value": rational_str(&p.value),
                "decimal": decimal(&p.value),
                "provenance": p.provenance.as_str(),
            })
        }
        None => {
            let p = halfplane_anticluster(k)?;
            json!({
                "command": "anticluster",
                "k": k,
                "n": Value::Null,
                "value": rational_str(&p.value),
                "dyadic": dyadic_str(&p.value),
                "decimal": decimal(&p.value),
                "provenance": p.provenance.as_str(),
            })
        }
    };
    Ok(CommandResult::new(json))
}

/// `ct asm`: the loop-count constant term against the product formula.
pub fn cmd_ct_asm(n: usize) -> Result<CommandResult, CliError> {
    if n < 1 || n > CT_ASM_CAP {
        return Err(resource(format!("ct asm supports 1 <= n <= {CT_ASM_CAP}, got {n}")));
    }
    let via_ct = asm_via_ct(n)?;
    let product = asm_count(n);
    let agree = via_ct == product;
    let json = json!({
        "command": "ct",
        "op": "asm",
        "n": n,
        "constant_term": via_ct.to_string(),
        "product_formula": product.to_string(),
        "agree": agree,
    });
    Ok(CommandResult::new(json).with_exit(if agree { 0 } else { 1 }))
}

/// `ct phi`: the 1-evaluation of the wheel component of a weak opener
/// sequence.
pub fn cmd_ct_phi(a: &str) -> Result<CommandResult, CliError> {
    let seq = parse_sequence(a)?;
    if seq.len() > CT_ASM_CAP {
        return Err(resource(format!("ct phi supports length <= {CT_ASM_CAP}, got {}", seq.len())));
    }
    let ws = WeakSequence::new(seq.clone())
        .map_err(|e| CliError::BadSequence(a.to_string(), e.to_string()))?;
    let value = phi_eval1(&ws)?;
    let json = json!({
        "command": "ct",
        "op": "phi",
        "a": seq,
        "value": value.to_string(),
    });
    Ok(CommandResult::new(json))
}

/// `simulate`: Monte Carlo estimate of an event probability with an
/// exact reference value when it is cheap to compute.
pub fn cmd_simulate(
    n: usize,
    event: &str,
    samples: &str,
    seed: u64,
) -> Result<CommandResult, CliError> {
    if n < 1 {
        return Err(resource("simulate requires n >= 1".to_string()));
    }
    let samples = parse_samples(samples)?;
    let spec = parse_event(event)?;
    let (predicate, exact): (Box<dyn Fn(&NoncrossingMatching) -> bool + Sync>, Option<Rational>) =
        match &spec {
            EventSpec::Submatching(pi0) => {
                let k = pi0.order();
                if k > n {
                    return Err(CliError::BadEvent(
                        event.to_string(),
                        format!("window order {k} exceeds system order {n}"),
                    ));
                }
                let exact = if n > k && n <= SIM_EXACT_CAP {
                    Some(prob_submatching_ct(pi0, n)?.value)
                } else if n <= BRUTE_CAP {
                    Some(prob_submatching_brute(pi0, n, 1)?.value)
                } else {
                    eprintln!("exact value omitted at n={n}; use `wheelperc prob` for the exact route");
                    None
                };
                let pi0 = pi0.clone();
                (Box::new(move |p| p.is_submatching(&pi0, 1).expect("validated window")), exact)
            }
            EventSpec::Anticluster(k) => {
                let k = *k;
                if k > n {
                    return Err(CliError::BadEvent(
                        event.to_string(),
                        format!("anticluster order {k} exceeds system order {n}"),
                    ));
                }
                let exact = Some(anti_cluster_prob(k, n)?.value);
                (Box::new(move |p| (1..=k).all(|i| p.partner(i) > k)), exact)
            }
            EventSpec::Pairs(pairs) => {
                validate_pairs(pairs, n)?;
                let exact = if n <= BRUTE_CAP {
                    Some(prob_pairs_brute(pairs, n)?.value)
                } else {
                    eprintln!("exact value omitted at n={n} (brute cap {BRUTE_CAP})");
                    None
                };
                let pairs = pairs.clone();
                (Box::new(move |p| pairs.iter().all(|&(a, b)| p.partner(a) == b)), exact)
            }
        };
    let t0 = Instant::now();
    let stats = estimate_event(n, predicate, samples, seed)?;
    eprintln!(
        "sampled {} matchings at n={n} in {:.1}s",
        stats.samples,
        t0.elapsed().as_secs_f64()
    );
    let (lo, hi) = stats.ci99();
    let exact_decimal = exact.as_ref().map(decimal);
    let exact_in_ci = exact_decimal.map(|x| lo <= x && x <= hi);
    let json = json!({
        "command": "simulate",
        "n": n,
        "event": event,
        "samples": stats.samples,
        "seed": stats.seed,
        "hits": stats.hits,
        "estimate": stats.estimate(),
        "ci99": [lo, hi],
        "exact": exact.as_ref().map(rational_str),
        "exact_decimal": exact_decimal,
        "exact_in_ci": exact_in_ci,
    });
    Ok(CommandResult::new(json))
}

/// `verify`: run a named check suite and report per-check results.
pub fn cmd_verify(suite: Suite, max_n: usize) -> Result<CommandResult, CliError> {
    if max_n < 1 {
        return Err(resource("verify requires --max-n >= 1".to_string()));
    }
    let checks = run_suite(suite, max_n)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let json = json!({
        "command": "verify",
        "suite": format!("{suite:?}").to_lowercase(),
        "max_n": max_n,
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "passed": c.passed,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
        "passed": checks.len() - failed,
        "failed": failed,
    });
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                if c.passed { "PASS".to_string() } else { "FAIL".to_string() },
                c.name.clone(),
                c.detail.clone(),
            ]
        })
        .collect();
    Ok(CommandResult::new(json)
        .with_table(TableView { header: vec!["status".into(), "check".into(), "detail".into()], rows })
        .with_exit(if failed > 0 { 1 } else { 0 }))
}

/// `tables`: reproduce the half-plane value tables.
pub fn cmd_tables(table: TableKind, k: Option<usize>) -> Result<CommandResult, CliError> {
    match table {
        TableKind::Submatching => {
            let k_cap = k.unwrap_or(3);
            if k_cap < 1 || k_cap > 3 {
                return Err(resource(format!("tables submatching supports 1 <= k <= 3, got {k_cap}")));
            }
            let mut rows_json = Vec::new();
            let mut rows = Vec::new();
            let mut any_witness_failed = false;
            for kk in 1..=k_cap {
                for pi0 in enumerate(kk) {
                    eprintln!("table row: order {kk}, matching {}", matching_str(&pi0));
                    let fit = interpolate_q(&pi0, kk <= 2)?;
                    any_witness_failed |= witness_failed(&fit);
                    let hp = halfplane_from(&fit);
                    let dyadic = dyadic_str(&hp.value);
                    rows_json.push(json!({
                        "k": kk,
                        "matching": matching_json(&pi0),
                        "value": rational_str(&hp.value),
                        "dyadic": dyadic,
                        "decimal": decimal(&hp.value),
                        "witness": witness_json(&fit),
                    }));
                    rows.push(vec![
                        kk.to_string(),
                        matching_str(&pi0),
                        rational_str(&hp.value),
                        dyadic_str(&hp.value).unwrap_or_else(|| "-".to_string()),
                        format!("{:.8}", decimal(&hp.value)),
                    ]);
                }
            }
            let json = json!({
                "command": "tables",
                "table": "submatching",
                "rows": rows_json,
            });
            Ok(CommandResult::new(json)
                .with_table(TableView {
                    header: vec![
                        "k".into(),
                        "matching".into(),
                        "halfplane".into(),
                        "dyadic".into(),
                        "decimal".into(),
                    ],
                    rows,
                })
                .with_exit(if any_witness_failed { 1 } else { 0 }))
        }
        TableKind::Anticluster => {
            let k_cap = k.unwrap_or(8);
            if k_cap < 2 || k_cap > 16 {
                return Err(resource(format!("tables anticluster supports 2 <= k <= 16, got {k_cap}")));
            }
            let mut rows_json = Vec::new();
            let mut rows = Vec::new();
            for kk in 2..=k_cap {
                let p = halfplane_anticluster(kk)?;
                rows_json.push(json!({
                    "k": kk,
                    "event": format!("anticluster:{kk}"),
                    "value": rational_str(&p.value),
                    "dyadic": dyadic_str(&p.value),
                    "decimal": decimal(&p.value),
                }));
                rows.push(vec![
                    kk.to_string(),
                    format!("anticluster:{kk}"),
                    rational_str(&p.value),
                    dyadic_str(&p.value).unwrap_or_else(|| "-".to_string()),
                    format!("{:.8}", decimal(&p.value)),
                ]);
            }
            let json = json!({
                "command": "tables",
                "table": "anticluster",
                "rows": rows_json,
            });
            Ok(CommandResult::new(json).with_table(TableView {
                header: vec![
                    "k".into(),
                    "event".into(),
                    "halfplane".into(),
                    "dyadic".into(),
                    "decimal".into(),
                ],
                rows,
            }))
        }
    }
}
