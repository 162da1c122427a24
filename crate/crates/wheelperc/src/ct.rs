//! Sparse multivariate constant-term extraction.
//!
//! The probability formulas in this crate all reduce to reading one
//! coefficient out of a large structured product
//! `F * prod_{i<j} (z_j - z_i)(1 + z_j + z_i z_j) * prod_j (1 + z_j)`.
//!
//! Provides:
//! - [`SparseMultiPoly`]: hash-based sparse polynomials with big-integer
//!   coefficients and packed exponent keys.
//! - [`omega_ct`]: the staged coefficient extractor; variables are
//!   eliminated from the highest index down, with truncation at the
//!   target exponents.
//! - [`asm_via_ct`]: the alternating-sign-matrix count as a constant
//!   term, an end-to-end check of the machinery.
//! - [`phi_eval1`]: the integral-basis sums evaluated at the symmetric
//!   point, indexed by weak sequences.
//! - [`submatching_constant_term`]: the coefficient underlying window
//!   event probabilities.
//! - [`conjecture_probe`]: rational-function fits for single-monomial
//!   numerators, with held-out node reporting.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{eval_poly, lagrange_interpolate, Rational};
use crate::matchings::{OpenerSequence, WeakSequence};

/// Errors raised by the constant-term layer.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CtError {
    #[error("problem uses {0} variables; packed keys support at most 16")]
    TooManyVariables(usize),
    #[error("need at least {needed} evaluation points for degree {degree}, got {got}")]
    InsufficientPoints {
        needed: usize,
        got: usize,
        degree: usize,
    },
    #[error("evaluation points must exceed the window order {0}")]
    PointTooSmall(usize),
}

const MAX_VARS: usize = 16;
const EXP_BITS: u32 = 8;
const EXP_MASK: u128 = 0xff;
const PAR_THRESHOLD: usize = 1 << 14;

/// A sparse polynomial in up to 16 variables with `BigInt` coefficients.
/// Exponents are packed eight bits per variable, so each must stay below
/// 256; the staged extractor truncates far below that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMultiPoly {
    nvars: usize,
    terms: HashMap<u128, BigInt>,
}

fn pack(exps: &[u32]) -> u128 {
    let mut key = 0u128;
    for (i, &e) in exps.iter().enumerate() {
        debug_assert!(e < 256);
        key |= (e as u128) << (EXP_BITS * i as u32);
    }
    key
}

fn field(key: u128, var: usize) -> u32 {
    ((key >> (EXP_BITS * var as u32)) & EXP_MASK) as u32
}

impl SparseMultiPoly {
    /// The zero polynomial in `nvars` variables.
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS);
        Self {
            nvars,
            terms: HashMap::new(),
        }
    }

    /// A constant polynomial.
    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(0, c);
        }
        p
    }

    /// Adds `coeff * z^exps` to the polynomial.
    pub fn add_term(&mut self, exps: &[u32], coeff: BigInt) {
        assert_eq!(exps.len(), self.nvars);
        assert!(exps.iter().all(|&e| e < 256), "exponent exceeds packing");
        if coeff.is_zero() {
            return;
        }
        let key = pack(exps);
        let entry = self.terms.entry(key).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Number of variables.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of stored terms.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True when no terms remain.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of `z^exps`.
    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        assert_eq!(exps.len(), self.nvars);
        self.terms.get(&pack(exps)).cloned().unwrap_or_default()
    }

    /// Evaluates at the all-ones point: the sum of the coefficients.
    pub fn sum_of_coefficients(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Product with truncation: any monomial whose exponent in variable
    /// `i` exceeds `caps[i]` is discarded. Sound for coefficient
    /// extraction at the caps as long as every remaining factor has
    /// nonnegative exponents.
    pub fn mul_truncated(&self, rhs: &Self, caps: &[u32]) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        assert_eq!(caps.len(), self.nvars);
        let nvars = self.nvars;
        let combine = |lhs_terms: &[(u128, BigInt)]| {
            let mut out: HashMap<u128, BigInt> = HashMap::with_capacity(lhs_terms.len());
            for (kl, cl) in lhs_terms {
                'rhs: for (kr, cr) in rhs.terms.iter() {
                    let mut key = 0u128;
                    for v in 0..nvars {
                        let e = field(*kl, v) + field(*kr, v);
                        if e > caps[v] {
                            continue 'rhs;
                        }
                        key |= (e as u128) << (EXP_BITS * v as u32);
                    }
                    let entry = out.entry(key).or_insert_with(BigInt::zero);
                    *entry += cl * cr;
                }
            }
            out.retain(|_, c| !c.is_zero());
            out
        };
        let terms = if self.terms.len() >= PAR_THRESHOLD {
            let lhs: Vec<(u128, BigInt)> =
                self.terms.iter().map(|(k, c)| (*k, c.clone())).collect();
            let chunk = lhs.len().div_ceil(rayon::current_num_threads().max(1) * 4);
            lhs.par_chunks(chunk.max(1))
                .map(combine)
                .reduce(HashMap::new, |mut a, b| {
                    if a.len() < b.len() {
                        return Self::merge(b, a);
                    }
                    for (k, c) in b {
                        let entry = a.entry(k).or_insert_with(BigInt::zero);
                        *entry += c;
                        if entry.is_zero() {
                            a.remove(&k);
                        }
                    }
                    a
                })
        } else {
            let lhs: Vec<(u128, BigInt)> =
                self.terms.iter().map(|(k, c)| (*k, c.clone())).collect();
            combine(&lhs)
        };
        Self {
            nvars: self.nvars,
            terms,
        }
    }

    fn merge(mut a: HashMap<u128, BigInt>, b: HashMap<u128, BigInt>) -> HashMap<u128, BigInt> {
        for (k, c) in b {
            let entry = a.entry(k).or_insert_with(BigInt::zero);
            *entry += c;
            if entry.is_zero() {
                a.remove(&k);
            }
        }
        a
    }

    /// The coefficient of `z_var^exp` as a polynomial in the remaining
    /// variables (0-based `var`).
    pub fn extract_var(&self, var: usize, exp: u32) -> Self {
        let shift = EXP_BITS * var as u32;
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| field(**k, var) == exp)
            .map(|(k, c)| (k & !(EXP_MASK << shift), c.clone()))
            .collect();
        Self {
            nvars: self.nvars,
            terms,
        }
    }
}

/// The factor `(z_j - z_i)(1 + z_j + z_i z_j)` expanded, with 1-based
/// variable indices `i < j`.
fn pair_factor(nvars: usize, i: usize, j: usize) -> SparseMultiPoly {
    let mut f = SparseMultiPoly::zero(nvars);
    let term = |zi: u32, zj: u32, c: i64| {
        let mut e = vec![0u32; nvars];
        e[i - 1] = zi;
        e[j - 1] = zj;
        (e, BigInt::from(c))
    };
    for (e, c) in [
        term(0, 1, 1),
        term(0, 2, 1),
        term(1, 2, 1),
        term(1, 0, -1),
        term(1, 1, -1),
        term(2, 1, -1),
    ] {
        f.add_term(&e, c);
    }
    f
}

fn one_plus_var(nvars: usize, j: usize) -> SparseMultiPoly {
    let mut f = SparseMultiPoly::constant(nvars, BigInt::one());
    let mut e = vec![0u32; nvars];
    e[j - 1] = 1;
    f.add_term(&e, BigInt::one());
    f
}

/// Extracts `[z_1^{t_1} ... z_n^{t_n}]` from
/// `f * prod_{1<=i<j<=n} (z_j - z_i)(1 + z_j + z_i z_j)
///    * prod_{j>=ones_from} (1 + z_j)`,
/// eliminating variables from `z_n` down to `z_1`. After the factors
/// containing `z_j` are multiplied in, the target coefficient of `z_j`
/// is taken immediately, so intermediate polynomials only involve lower
/// variables.
pub fn omega_ct(
    n: usize,
    targets: &[u32],
    ones_from: Option<usize>,
    f: Option<&SparseMultiPoly>,
) -> Result<BigInt, CtError> {
    assert_eq!(targets.len(), n);
    if n > MAX_VARS {
        return Err(CtError::TooManyVariables(n));
    }
    let caps = targets;
    let mut p = match f {
        Some(f) => {
            assert_eq!(f.nvars(), n);
            f.clone()
        }
        None => SparseMultiPoly::constant(n, BigInt::one()),
    };
    for j in (2..=n).rev() {
        for i in 1..j {
            p = p.mul_truncated(&pair_factor(n, i, j), caps);
        }
        if ones_from.is_some_and(|from| j >= from) {
            p = p.mul_truncated(&one_plus_var(n, j), caps);
        }
        p = p.extract_var(j - 1, targets[j - 1]);
    }
    if ones_from.is_some_and(|from| from <= 1) {
        p = p.mul_truncated(&one_plus_var(n, 1), caps);
    }
    let mut target1 = vec![0u32; n];
    target1[0] = targets[0];
    Ok(p.coefficient(&target1))
}

/// The alternating-sign-matrix count as a constant term:
/// `[z_1^0 z_2^2 ... z_n^{2n-2}]` of the pair product times
/// `prod_{j>=2} (1 + z_j)`.
pub fn asm_via_ct(n: usize) -> Result<BigInt, CtError> {
    let targets: Vec<u32> = (1..=n).map(|j| 2 * (j as u32) - 2).collect();
    omega_ct(n, &targets, Some(2), None)
}

/// The integral-basis sum for a weak sequence, evaluated at the
/// symmetric point: `[z_1^{a_1 - 1} ... z_n^{a_n - 1}]` of the pair
/// product alone.
pub fn phi_eval1(a: &WeakSequence) -> Result<BigInt, CtError> {
    let n = a.order();
    let targets: Vec<u32> = a.entries().iter().map(|&x| x as u32 - 1).collect();
    omega_ct(n, &targets, None, None)
}

/// The numerator of a window event probability of window order `k` in a
/// system of order `n`: the target coefficient with the extra factors
/// `(1 + z_j)` for `j >= k + 2` and a caller-supplied polynomial in
/// `z_2, ..., z_{k+1}`.
pub fn submatching_constant_term(
    f: &SparseMultiPoly,
    n: usize,
    k: usize,
) -> Result<BigInt, CtError> {
    assert!(n > k, "window of order {k} needs system order above it");
    let targets: Vec<u32> = (1..=n).map(|j| 2 * (j as u32) - 2).collect();
    omega_ct(n, &targets, Some(k + 2), Some(f))
}

/// The single-monomial numerator `prod_j z_{j+1}^{2j - a_j}` used by the
/// rational-fit probe.
pub fn monomial_numerator(a: &OpenerSequence, nvars: usize) -> SparseMultiPoly {
    let mut e = vec![0u32; nvars];
    for (j, &aj) in a.positions().iter().enumerate() {
        e[j + 1] = 2 * (j as u32 + 1) - aj as u32;
    }
    let mut f = SparseMultiPoly::zero(nvars);
    f.add_term(&e, BigInt::one());
    f
}

/// Report produced by [`conjecture_probe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    /// Coefficients of the fitted polynomial in `m = n^2`, constant
    /// first.
    pub coefficients: Vec<Rational>,
    /// Orders used to fit.
    pub fit_points: Vec<usize>,
    /// Held-out orders with their agreement flags.
    pub holdout: Vec<(usize, bool)>,
    /// True when every held-out point matched the fit.
    pub consistent: bool,
}

/// Scales a window-event value to polynomial form: the product
/// `prod_{j=1}^{k} (4n^2 - (2j-1)^2)^{k+1-j}` of odd-square factors.
pub fn denominator_product(n: usize, k: usize) -> BigInt {
    let n2 = BigInt::from(4 * n as i64 * n as i64);
    let mut acc = BigInt::one();
    for j in 1..=k {
        let odd = (2 * j as i64 - 1).pow(2);
        let base = &n2 - BigInt::from(odd);
        for _ in 0..(k + 1 - j) {
            acc *= &base;
        }
    }
    acc
}

/// Fits the scaled probe values for a single opener-sequence monomial to
/// an even polynomial in `n` of degree at most `k(k+1)` (equivalently
/// degree `k(k+1)/2` in `m = n^2`), then evaluates the fit on the
/// remaining points.
///
/// For an opener sequence `a` of order `k` and each order `n`, the probe
/// value is the window constant term with numerator
/// `prod z_{j+1}^{2j-a_j}`, divided by the alternating-sign-matrix count
/// and multiplied by [`denominator_product`].
pub fn conjecture_probe(a: &OpenerSequence, n_values: &[usize]) -> Result<ProbeReport, CtError> {
    let k = a.order();
    let degree = k * (k + 1) / 2;
    let needed = degree + 1;
    if n_values.len() < needed {
        return Err(CtError::InsufficientPoints {
            needed,
            got: n_values.len(),
            degree,
        });
    }
    if n_values.iter().any(|&n| n <= k) {
        return Err(CtError::PointTooSmall(k));
    }
    let values: Vec<(usize, Rational)> = n_values
        .iter()
        .map(|&n| {
            let numer = if k == 0 {
                asm_via_ct(n)?
            } else {
                submatching_constant_term(&monomial_numerator(a, n), n, k)?
            };
            let asm = crate::dynamics::asm_count(n);
            let scaled = Rational::new(numer * denominator_product(n, k), asm);
            Ok((n, scaled))
        })
        .collect::<Result<_, CtError>>()?;
    let fit_pts: Vec<(Rational, Rational)> = values[..needed]
        .iter()
        .map(|(n, v)| (Rational::from_integer(BigInt::from((n * n) as i64)), v.clone()))
        .collect();
    let coefficients =
        lagrange_interpolate(&fit_pts).expect("distinct orders give distinct squares");
    let holdout: Vec<(usize, bool)> = values[needed..]
        .iter()
        .map(|(n, v)| {
            let m = Rational::from_integer(BigInt::from((n * n) as i64));
            (*n, eval_poly(&coefficients, &m) == *v)
        })
        .collect();
    let consistent = holdout.iter().all(|(_, ok)| *ok);
    Ok(ProbeReport {
        coefficients,
        fit_points: values[..needed].iter().map(|(n, _)| *n).collect(),
        holdout,
        consistent,
    })
}
