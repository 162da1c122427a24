//! The `verify` subcommand: named check suites over the exact layers,
//! each reporting pass/fail with a detail message.

use std::collections::HashMap;

use clap::ValueEnum;
use num_traits::Zero;
use wheelperc::dynamics::{hamiltonian, stationary, transfer_at, transfer_matrix};
use wheelperc::linalg::{ratio, CatMatrix, Rational};
use wheelperc::matchings::{enumerate, NoncrossingMatching};
use wheelperc::prob::{
    anti_cluster_brute, anti_cluster_prob, inclusion_exclusion_checks, prob_submatching_brute,
    prob_submatching_ct,
};
use wheelperc::qkz::{
    c_matrix, c_tilde_matrix, verify_ev1_expansion, verify_p_nesting, verify_product_expansion,
    verify_submatching_expansion,
};

use crate::error::CliError;

/// Check-suite selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Dynamics,
    Expansion,
    Probability,
    All,
}

/// One named check with its outcome.
#[derive(Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: true, detail: detail.into() }
    }

    fn from_result(name: impl Into<String>, r: Result<(), String>) -> Self {
        match r {
            Ok(()) => Self { name: name.into(), passed: true, detail: "ok".to_string() },
            Err(d) => Self { name: name.into(), passed: false, detail: d },
        }
    }
}

fn check_bool(name: impl Into<String>, ok: bool, detail_if_bad: impl Into<String>) -> Check {
    if ok {
        Check::pass(name, "ok")
    } else {
        Check { name: name.into(), passed: false, detail: detail_if_bad.into() }
    }
}

fn rotation_invariance(max_n: usize) -> Check {
    for n in 1..=max_n.min(7) {
        let order = enumerate(n);
        let mu = stationary(n);
        let index: HashMap<&NoncrossingMatching, usize> =
            order.iter().enumerate().map(|(i, p)| (p, i)).collect();
        for (i, p) in order.iter().enumerate() {
            if mu[index[&p.rotate()]] != mu[i] {
                return check_bool(
                    "stationary-rotation-invariance",
                    false,
                    format!("weight changes under rotation at n={n}"),
                );
            }
        }
    }
    Check::pass("stationary-rotation-invariance", format!("n <= {}", max_n.min(7)))
}

fn hamiltonian_annihilates(max_n: usize) -> Check {
    for n in 1..=max_n.min(6) {
        let order = enumerate(n);
        let mu = stationary(n);
        let h = hamiltonian(&order).map(|v| Rational::from_integer(v.clone()));
        let image = h.transpose().apply_right(&mu);
        if image.iter().any(|x| !x.is_zero()) {
            return check_bool(
                "hamiltonian-annihilates-stationary",
                false,
                format!("H mu != 0 at n={n}"),
            );
        }
    }
    Check::pass("hamiltonian-annihilates-stationary", format!("n <= {}", max_n.min(6)))
}

fn transfer_stationarity(max_n: usize) -> Result<Check, CliError> {
    let p = ratio(1, 2);
    for n in 1..=max_n.min(6) {
        let (_, t) = transfer_matrix(n)?;
        let tp = transfer_at(&t, &p);
        let mu = stationary(n);
        let image = tp.transpose().apply_right(&mu);
        if image.iter().zip(mu.iter()).any(|(a, b)| a != b) {
            return Ok(check_bool(
                "transfer-stationarity",
                false,
                format!("mu T != mu at n={n}, p=1/2"),
            ));
        }
    }
    Ok(Check::pass("transfer-stationarity", format!("p=1/2, n <= {}", max_n.min(6))))
}

fn c_inverse_roundtrip(max_n: usize) -> Result<Check, CliError> {
    for n in 1..=max_n.min(5) {
        let order = enumerate(n);
        let c = c_matrix(&order);
        let ct = c_tilde_matrix(&order)?;
        let prod = c.mat_mul(&ct);
        let id = CatMatrix::identity(order.len());
        if prod != id {
            return Ok(check_bool(
                "c-matrix-inverse-roundtrip",
                false,
                format!("C C~ != I at n={n}"),
            ));
        }
    }
    Ok(Check::pass("c-matrix-inverse-roundtrip", format!("n <= {}", max_n.min(5))))
}

fn ct_brute_agreement(max_n: usize) -> Result<Check, CliError> {
    for k in 1..=2usize {
        for pi0 in enumerate(k) {
            for n in (k + 1)..=max_n.min(6) {
                let ct = prob_submatching_ct(&pi0, n)?;
                let brute = prob_submatching_brute(&pi0, n, 1)?;
                if ct.value != brute.value {
                    return Ok(check_bool(
                        "ct-brute-agreement",
                        false,
                        format!("routes disagree at k={k}, n={n}"),
                    ));
                }
            }
        }
    }
    Ok(Check::pass("ct-brute-agreement", format!("k <= 2, n <= {}", max_n.min(6))))
}

fn anticluster_agreement(max_n: usize) -> Result<Check, CliError> {
    for k in 2..=3usize {
        for n in k..=max_n.min(6) {
            let closed = anti_cluster_prob(k, n)?;
            let brute = anti_cluster_brute(k, n)?;
            if closed.value != brute.value {
                return Ok(check_bool(
                    "anticluster-closed-form",
                    false,
                    format!("closed form disagrees with brute at k={k}, n={n}"),
                ));
            }
        }
    }
    Ok(Check::pass("anticluster-closed-form", format!("k <= 3, n <= {}", max_n.min(6))))
}

fn inclusion_exclusion(max_n: usize) -> Result<Check, CliError> {
    for n in 3..=max_n.min(6) {
        let report = inclusion_exclusion_checks(n)?;
        if !report.all_ok() {
            return Ok(check_bool(
                "inclusion-exclusion",
                false,
                format!("identities fail at n={n}: {:?}", report.mismatches),
            ));
        }
    }
    Ok(Check::pass("inclusion-exclusion", format!("3 <= n <= {}", max_n.min(6))))
}

/// Runs the selected suite up to the given order cap.
pub fn run_suite(suite: Suite, max_n: usize) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Dynamics | Suite::All) {
        checks.push(rotation_invariance(max_n));
        checks.push(hamiltonian_annihilates(max_n));
        checks.push(transfer_stationarity(max_n)?);
    }
    if matches!(suite, Suite::Expansion | Suite::All) {
        for n in 2..=max_n.min(6) {
            checks.push(Check::from_result(
                format!("product-expansion-n{n}"),
                verify_product_expansion(n),
            ));
            checks.push(Check::from_result(
                format!("ev1-expansion-n{n}"),
                verify_ev1_expansion(n),
            ));
        }
        for k in 1..=2usize {
            for pi0 in enumerate(k) {
                let openers: Vec<String> =
                    pi0.to_openers().positions().iter().map(usize::to_string).collect();
                let tag = openers.join("-");
                for n in (k + 1)..=max_n.min(5) {
                    checks.push(Check::from_result(
                        format!("submatching-expansion-a{tag}-n{n}"),
                        verify_submatching_expansion(&pi0, n),
                    ));
                }
            }
        }
        for p in 1..=2usize {
            for n in 2..=max_n.min(5) {
                checks.push(Check::from_result(
                    format!("p-nesting-p{p}-n{n}"),
                    verify_p_nesting(n, p),
                ));
            }
        }
        checks.push(c_inverse_roundtrip(max_n)?);
    }
    if matches!(suite, Suite::Probability | Suite::All) {
        checks.push(ct_brute_agreement(max_n)?);
        checks.push(anticluster_agreement(max_n)?);
        checks.push(inclusion_exclusion(max_n)?);
    }
    Ok(checks)
}
