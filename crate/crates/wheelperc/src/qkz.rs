//! The wheel-polynomial machinery: change-of-basis matrices between the
//! matching basis and the integral basis, window-event numerator
//! polynomials, and the fully symbolic basis construction.
//!
//! Provides:
//! - [`chi`]: the mod-3 character underlying all entries.
//! - [`c_entry`] / [`c_entry_recursive`]: the closed-form coefficient of a
//!   weak sequence against a matching, and an independent recursive
//!   evaluation used for cross-validation.
//! - [`c_matrix`] / [`c_tilde_matrix`]: the change-of-basis matrix over an
//!   enumeration order and its exact inverse (upper unitriangular in
//!   canonical order).
//! - [`f_polynomial`]: the integer numerator polynomial of a window event.
//! - [`psi_vector`] / [`phi_vector`]: the two weight vectors at the
//!   symmetric point, linked by the change of basis.
//! - [`build_psi_symbolic`]: the degree-`n(n-1)` polynomials in `2n`
//!   variables over `Q(q)` satisfying the delta normalization at the
//!   matching evaluation points.
//! - Expansion checks: [`verify_phi_psi_consistency`],
//!   [`verify_submatching_expansion`], [`verify_nesting_invariance`].

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::ct::{phi_eval1, SparseMultiPoly};
use crate::dynamics::stationary_weights;
use crate::linalg::{CatMatrix, Eisenstein, LinalgError, Rational};
use crate::matchings::{enumerate, NoncrossingMatching, OpenerSequence, WeakSequence};

/// The 3-periodic character: 0, 1, -1 for arguments 0, 1, 2 mod 3.
pub fn chi(p: i64) -> i64 {
    [0, 1, -1][p.rem_euclid(3) as usize]
}

/// The closed-form coefficient of the weak sequence `a` against the
/// matching `sigma`: a product over the arcs `(j, k)` of `sigma` of
/// `chi(#{m : j <= a_m < k} - (k - j - 1)/2)`. Always 0 or ±1.
pub fn c_entry(a: &[usize], sigma: &NoncrossingMatching) -> i64 {
    let mut val = 1i64;
    for (j, k) in sigma.arcs() {
        let cnt = a.iter().filter(|&&x| j <= x && x < k).count() as i64;
        val *= chi(cnt - (k as i64 - j as i64 - 1) / 2);
        if val == 0 {
            return 0;
        }
    }
    val
}

/// Recursive evaluation of the same coefficient by peeling little arcs:
/// delete the first little arc `(j, j+1)` of `sigma`, turn the `p` copies
/// of `j` in `a` into `p - 1` copies of `j - 1` (shifting later entries
/// down by two), and multiply by `chi(p)`. Returns 0 when `a` sorted
/// violates `a_i >= i` or never covers the arc.
pub fn c_entry_recursive(a: &[usize], sigma: &NoncrossingMatching) -> i64 {
    let n = sigma.order();
    if n == 0 {
        return 1;
    }
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &x)| x < i + 1) {
        return 0;
    }
    let j = (1..2 * n)
        .find(|&j| sigma.has_little_arc(j))
        .expect("every nonempty matching has an inner little arc");
    let p = sorted.iter().filter(|&&x| x == j).count();
    if p == 0 {
        return 0;
    }
    let mut ahat: Vec<usize> = sorted.iter().filter(|&&x| x < j).copied().collect();
    ahat.extend(std::iter::repeat(j - 1).take(p - 1));
    ahat.extend(sorted.iter().filter(|&&x| x > j).map(|&x| x - 2));
    ahat.sort_unstable();
    let inner = sigma.delete_little_arc(j).expect("position j is a little arc");
    chi(p as i64) * c_entry_recursive(&ahat, &inner)
}

/// The change-of-basis matrix over the given enumeration order: row `pi`
/// holds the coefficients of the opener sequence of `pi` against every
/// matching `sigma`.
pub fn c_matrix(order: &[NoncrossingMatching]) -> CatMatrix<BigInt> {
    let openers: Vec<Vec<usize>> = order
        .iter()
        .map(|p| p.to_openers().positions().to_vec())
        .collect();
    CatMatrix::from_fn(order.len(), order.len(), |r, c| {
        BigInt::from(c_entry(&openers[r], &order[c]))
    })
}

/// The exact inverse of [`c_matrix`]; requires an enumeration order that
/// makes the matrix upper unitriangular (the canonical order does).
pub fn c_tilde_matrix(order: &[NoncrossingMatching]) -> Result<CatMatrix<BigInt>, LinalgError> {
    c_matrix(order).invert_unitriangular()
}

/// The numerator polynomial of a window event, stored as coefficients on
/// monomials `prod_j w_j^{e_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FPolynomial {
    k: usize,
    terms: Vec<(Vec<u32>, BigInt)>,
}

impl FPolynomial {
    /// The window order `k`.
    pub fn order(&self) -> usize {
        self.k
    }

    /// The nonzero terms as `(w-exponents, coefficient)` pairs, in
    /// canonical column order.
    pub fn terms(&self) -> &[(Vec<u32>, BigInt)] {
        &self.terms
    }

    /// Re-expresses the polynomial on the variables `z_2, ..., z_{k+1}`
    /// of an `n`-variable system (`w_j` becomes `z_{j+1}`).
    pub fn to_z_poly(&self, n: usize) -> SparseMultiPoly {
        assert!(n > self.k, "system must contain the window");
        let mut f = SparseMultiPoly::zero(n);
        for (wexps, coeff) in &self.terms {
            let mut e = vec![0u32; n];
            for (j, &x) in wexps.iter().enumerate() {
                e[j + 1] = x;
            }
            f.add_term(&e, coeff.clone());
        }
        f
    }
}

/// The exponent vector of the monomial attached to an opener sequence:
/// `e_j = 2j - a_j`.
pub fn monomial_exponents(a: &OpenerSequence) -> Vec<u32> {
    a.positions()
        .iter()
        .enumerate()
        .map(|(j, &aj)| 2 * (j as u32 + 1) - aj as u32)
        .collect()
}

/// The numerator polynomial of the window event for `pi0`: the inverse
/// change-of-basis row of `pi0` spread over the attached monomials.
pub fn f_polynomial(pi0: &NoncrossingMatching) -> FPolynomial {
    let k = pi0.order();
    let order = enumerate(k);
    let ct = c_tilde_matrix(&order).expect("canonical order is unitriangular");
    let row = order
        .iter()
        .position(|p| p == pi0)
        .expect("window matching appears in its enumeration");
    let mut terms = Vec::new();
    for (col, sigma) in order.iter().enumerate() {
        let coeff = ct.get(row, col);
        if coeff.is_zero() {
            continue;
        }
        terms.push((monomial_exponents(&sigma.to_openers()), coeff.clone()));
    }
    FPolynomial { k, terms }
}

/// The stationary weight vector at the symmetric point in canonical
/// order; integer entries summing to the alternating-sign-matrix count.
pub fn psi_vector(n: usize) -> Vec<BigInt> {
    stationary_weights(n)
}

/// The integral-basis weight vector: the change of basis applied to
/// [`psi_vector`].
pub fn phi_vector(n: usize) -> Vec<BigInt> {
    let order = enumerate(n);
    c_matrix(&order).apply_right(&psi_vector(n))
}

/// Checks that the two weight vectors are linked both ways by the change
/// of basis and that the integral-basis vector matches its direct
/// constant-term evaluation.
pub fn verify_phi_psi_consistency(n: usize) -> Result<(), String> {
    let order = enumerate(n);
    let psi = psi_vector(n);
    let phi = phi_vector(n);
    let ct = c_tilde_matrix(&order).map_err(|e| e.to_string())?;
    let back = ct.apply_right(&phi);
    if back != psi {
        return Err(format!("inverse change of basis fails at order {n}"));
    }
    for (p, expect) in order.iter().zip(phi.iter()) {
        let a = WeakSequence::new(p.to_openers().positions().to_vec())
            .map_err(|e| e.to_string())?;
        let direct = phi_eval1(&a).map_err(|e| e.to_string())?;
        if direct != *expect {
            return Err(format!(
                "basis sum mismatch at order {n}, openers {:?}: {direct} vs {expect}",
                p.to_openers().positions()
            ));
        }
    }
    Ok(())
}

/// All admissible tail vectors `(b_{k+2}, ..., b_n)` with
/// `b_j in {2j - 2, 2j - 1}`.
pub fn b_tail_vectors(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for j in (k + 2)..=n {
        out = out
            .into_iter()
            .flat_map(|v| {
                [2 * j - 2, 2 * j - 1].into_iter().map(move |b| {
                    let mut w = v.clone();
                    w.push(b);
                    w
                })
            })
            .collect();
    }
    out
}

/// The matchings of order `n` whose window at offset 2 equals `pi0`,
/// optionally restricted by the parity tail `b`: for `j >= k + 2`, the
/// word step at position `2j - 1` is up exactly when `b_j = 2j - 1`.
pub fn event_window_matchings(
    pi0: &NoncrossingMatching,
    n: usize,
    b: Option<&[usize]>,
) -> Vec<NoncrossingMatching> {
    let k = pi0.order();
    assert!(n > k, "offset-2 window must fit");
    enumerate(n)
        .into_iter()
        .filter(|p| p.is_submatching(pi0, 2).unwrap())
        .filter(|p| match b {
            None => true,
            Some(tail) => tail.iter().enumerate().all(|(idx, &bj)| {
                let j = k + 2 + idx;
                let up = p.to_dyck().steps()[2 * j - 2] == 1;
                up == (bj == 2 * j - 1)
            }),
        })
        .collect()
}

/// Checks the window-event expansion at the symmetric point, both per
/// parity tail and summed over tails: the weights of the event matchings
/// equal the inverse-basis row of `pi0` paired with shifted basis sums.
pub fn verify_submatching_expansion(pi0: &NoncrossingMatching, n: usize) -> Result<(), String> {
    let k = pi0.order();
    if n <= k {
        return Err(format!("system order {n} does not contain window order {k}"));
    }
    let order = enumerate(n);
    let psi = psi_vector(n);
    let weight: HashMap<&NoncrossingMatching, &BigInt> =
        order.iter().zip(psi.iter()).collect();
    let korder = enumerate(k);
    let ct = c_tilde_matrix(&korder).map_err(|e| e.to_string())?;
    let row = korder.iter().position(|p| p == pi0).unwrap();
    let mut grand_lhs = BigInt::zero();
    let mut grand_rhs = BigInt::zero();
    for b in b_tail_vectors(n, k) {
        let lhs: BigInt = event_window_matchings(pi0, n, Some(&b))
            .iter()
            .map(|p| weight[p])
            .sum();
        let mut rhs = BigInt::zero();
        for (col, sigma) in korder.iter().enumerate() {
            let coeff = ct.get(row, col);
            if coeff.is_zero() {
                continue;
            }
            let mut seq = vec![1usize];
            seq.extend(sigma.to_openers().positions().iter().map(|&x| x + 1));
            seq.extend(b.iter().copied());
            let a = WeakSequence::new(seq).map_err(|e| e.to_string())?;
            rhs += coeff * phi_eval1(&a).map_err(|e| e.to_string())?;
        }
        if lhs != rhs {
            return Err(format!(
                "expansion fails for window {:?} at order {n}, tail {b:?}: {lhs} vs {rhs}",
                pi0.arcs()
            ));
        }
        grand_lhs += lhs;
        grand_rhs += rhs;
    }
    let full: BigInt = event_window_matchings(pi0, n, None)
        .iter()
        .map(|p| weight[p])
        .sum();
    if full != grand_lhs || grand_lhs != grand_rhs {
        return Err(format!(
            "tail-summed expansion fails for window {:?} at order {n}",
            pi0.arcs()
        ));
    }
    Ok(())
}

/// The parity basis of order `n`: sequences with `a_1 = 1` and
/// `a_j in {2j - 2, 2j - 1}` for `j >= 2`.
pub fn parity_basis(n: usize) -> Vec<WeakSequence> {
    let mut out = vec![vec![1usize]];
    for j in 2..=n {
        out = out
            .into_iter()
            .flat_map(|v| {
                [2 * j - 2, 2 * j - 1].into_iter().map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|v| WeakSequence::new(v).expect("parity sequences are weak"))
        .collect()
}

/// The parity class of a parity-basis element: the matchings whose word
/// step at position `2j - 1` is up exactly when `a_j = 2j - 1`.
pub fn parity_class(a: &WeakSequence) -> Vec<NoncrossingMatching> {
    let n = a.order();
    enumerate(n)
        .into_iter()
        .filter(|p| {
            let word = p.to_dyck();
            (2..=n)
                .all(|j| (word.steps()[2 * j - 2] == 1) == (a.entries()[j - 1] == 2 * j - 1))
        })
        .collect()
}

/// Checks that each parity-basis sum at the symmetric point equals the
/// total weight of its parity class, for every basis element of order
/// `n`.
pub fn verify_product_expansion(n: usize) -> Result<(), String> {
    let order = enumerate(n);
    let psi = psi_vector(n);
    let weight: HashMap<&NoncrossingMatching, &BigInt> =
        order.iter().zip(psi.iter()).collect();
    let mut mismatches = Vec::new();
    for a in parity_basis(n) {
        let lhs = phi_eval1(&a).map_err(|e| e.to_string())?;
        let rhs: BigInt = parity_class(&a).iter().map(|p| weight[p]).sum();
        if lhs != rhs {
            mismatches.push(format!("a={:?}: {lhs} vs {rhs}", a.entries()));
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(format!("parity expansion fails at order {n}: {}", mismatches.join("; ")))
    }
}

/// Checks that each opener-row basis sum equals the change-of-basis row
/// paired with the weight vector: the symmetric-point evaluation
/// identity, for every matching of order `n`.
pub fn verify_ev1_expansion(n: usize) -> Result<(), String> {
    let order = enumerate(n);
    let psi = psi_vector(n);
    let c = c_matrix(&order);
    let mut mismatches = Vec::new();
    for (r, p) in order.iter().enumerate() {
        let a = WeakSequence::new(p.to_openers().positions().to_vec())
            .map_err(|e| e.to_string())?;
        let lhs = phi_eval1(&a).map_err(|e| e.to_string())?;
        let rhs: BigInt = (0..order.len()).map(|s| c.get(r, s) * &psi[s]).sum();
        if lhs != rhs {
            mismatches.push(format!("pi={:?}: {lhs} vs {rhs}", p.arcs()));
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(format!("evaluation expansion fails at order {n}: {}", mismatches.join("; ")))
    }
}

/// Checks the nesting relation on the change-of-basis matrix: the row of
/// a `p`-nested opener sequence vanishes off the `p`-nested images and
/// restricts to the original matrix on them.
pub fn verify_p_nesting(n: usize, p: usize) -> Result<(), String> {
    let small = enumerate(n);
    let big = enumerate(n + p);
    for sigma in &small {
        let nested_a = crate::matchings::nest_openers(&sigma.to_openers(), p);
        let a_sigma = sigma.to_openers();
        let images: HashMap<NoncrossingMatching, &NoncrossingMatching> =
            small.iter().map(|pi| (pi.nest(p), pi)).collect();
        for mu in &big {
            let got = c_entry(nested_a.positions(), mu);
            let want = match images.get(mu) {
                Some(pi) => c_entry(a_sigma.positions(), pi),
                None => 0,
            };
            if got != want {
                return Err(format!(
                    "nesting relation fails at n={n}, p={p}, sigma={:?}, mu={:?}: {got} vs {want}",
                    sigma.arcs(),
                    mu.arcs()
                ));
            }
        }
    }
    Ok(())
}

/// Checks that wrapping both indices in one outer arc leaves the inverse
/// change-of-basis entries unchanged: entries of order `n - 1` reappear
/// at the nested images inside order `n`.
pub fn verify_nesting_invariance(n: usize) -> Result<(), String> {
    assert!(n >= 2);
    let small = enumerate(n - 1);
    let big = enumerate(n);
    let ct_small = c_tilde_matrix(&small).map_err(|e| e.to_string())?;
    let ct_big = c_tilde_matrix(&big).map_err(|e| e.to_string())?;
    let index: HashMap<&NoncrossingMatching, usize> =
        big.iter().enumerate().map(|(i, p)| (p, i)).collect();
    for (r, pr) in small.iter().enumerate() {
        let nr = pr.nest(1);
        for (c, pc) in small.iter().enumerate() {
            let nc = pc.nest(1);
            let lifted = ct_big.get(index[&nr], index[&nc]);
            if lifted != ct_small.get(r, c) {
                return Err(format!(
                    "nesting changes entry ({:?}, {:?}) at order {n}",
                    pr.arcs(),
                    pc.arcs()
                ));
            }
        }
    }
    Ok(())
}

/// A polynomial over `Q(q)` in the `2n` boundary variables, keyed by
/// packed exponents (eight bits per variable, at most 16 variables).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WheelPolynomial {
    nvars: usize,
    terms: HashMap<u128, Eisenstein>,
}

fn wp_field(key: u128, var: usize) -> u32 {
    ((key >> (8 * var as u32)) & 0xff) as u32
}

impl WheelPolynomial {
    fn zero(nvars: usize) -> Self {
        assert!(nvars <= 16);
        Self {
            nvars,
            terms: HashMap::new(),
        }
    }

    fn constant(nvars: usize, c: Eisenstein) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(0, c);
        }
        p
    }

    /// Number of variables.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of stored terms.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True when every term has total degree `d`.
    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms
            .keys()
            .all(|&k| (0..self.nvars).map(|v| wp_field(k, v)).sum::<u32>() == d)
    }

    fn add_assign_term(&mut self, key: u128, c: &Eisenstein) {
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(key)
            .or_insert_with(Eisenstein::zero);
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in rhs.terms.iter() {
            out.add_assign_term(*k, c);
        }
        out
    }

    fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    /// Multiplies by the binomial `ca * x_va + cb * x_vb` (0-based vars).
    fn mul_binomial(&self, ca: &Eisenstein, va: usize, cb: &Eisenstein, vb: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (k, c) in self.terms.iter() {
            for (cc, vv) in [(ca, va), (cb, vb)] {
                debug_assert!(wp_field(*k, vv) < 255);
                let key = k + (1u128 << (8 * vv as u32));
                out.add_assign_term(key, &(c * cc));
            }
        }
        out
    }

    /// Swaps two variables.
    fn swap_vars(&self, a: usize, b: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| {
                let ea = wp_field(*k, a) as u128;
                let eb = wp_field(*k, b) as u128;
                let cleared = k & !(0xffu128 << (8 * a as u32)) & !(0xffu128 << (8 * b as u32));
                (
                    cleared | (eb << (8 * a as u32)) | (ea << (8 * b as u32)),
                    c.clone(),
                )
            })
            .collect();
        Self {
            nvars: self.nvars,
            terms,
        }
    }

    /// Exact division by `(x_b - x_a)`; panics when not divisible.
    fn div_linear(&self, a: usize, b: usize) -> Self {
        let mut rem = self.terms.clone();
        let mut quot = Self::zero(self.nvars);
        let max_level = rem.keys().map(|&k| wp_field(k, b)).max().unwrap_or(0);
        for level in (1..=max_level).rev() {
            let keys: Vec<u128> = rem
                .keys()
                .filter(|&&k| wp_field(k, b) == level)
                .copied()
                .collect();
            for k in keys {
                let Some(c) = rem.remove(&k) else { continue };
                if c.is_zero() {
                    continue;
                }
                let q = k - (1u128 << (8 * b as u32));
                quot.add_assign_term(q, &c);
                let ta = q + (1u128 << (8 * a as u32));
                let entry = rem.entry(ta).or_insert_with(Eisenstein::zero);
                *entry = &*entry + &c;
                if entry.is_zero() {
                    rem.remove(&ta);
                }
            }
        }
        assert!(
            rem.values().all(|c| c.is_zero()),
            "polynomial not divisible by the variable difference"
        );
        quot
    }

    /// Evaluates at a point.
    pub fn evaluate(&self, z: &[Eisenstein]) -> Eisenstein {
        assert_eq!(z.len(), self.nvars);
        let max_exp: Vec<u32> = (0..self.nvars)
            .map(|v| self.terms.keys().map(|&k| wp_field(k, v)).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<Eisenstein>> = z
            .iter()
            .zip(max_exp.iter())
            .map(|(zi, &me)| {
                let mut row = Vec::with_capacity(me as usize + 1);
                row.push(Eisenstein::one());
                for e in 1..=me {
                    let next = &row[e as usize - 1] * zi;
                    row.push(next);
                }
                row
            })
            .collect();
        let mut total = Eisenstein::zero();
        for (k, c) in self.terms.iter() {
            let mut v = c.clone();
            for (var, pows) in powers.iter().enumerate() {
                let e = wp_field(*k, var);
                if e > 0 {
                    v = &v * &pows[e as usize];
                }
            }
            total = &total + &v;
        }
        total
    }
}

/// The evaluation point attached to a matching: `z_i = q^{-s_i}` for the
/// word steps `s_i` of the matching.
pub fn sigma_point(sigma: &NoncrossingMatching) -> Vec<Eisenstein> {
    let q = Eisenstein::q();
    sigma
        .to_dyck()
        .steps()
        .iter()
        .map(|&s| q.pow(-i64::from(s)))
        .collect()
}

/// Builds the full symbolic basis: for each matching of order `n`, the
/// homogeneous degree-`n(n-1)` polynomial in the `2n` boundary variables
/// over `Q(q)`, normalized so that evaluating the polynomial of `pi` at
/// the point of `sigma` gives the Kronecker delta.
///
/// The base polynomial sits at the fully nested matching; every other
/// polynomial is produced by a divided-difference step at its first
/// valley, minus the already-built polynomials of the other preimages of
/// the rewiring operator at that position.
pub fn build_psi_symbolic(n: usize) -> Vec<(NoncrossingMatching, WheelPolynomial)> {
    assert!(n >= 1 && 2 * n <= 16, "packed keys support 16 variables");
    let nn = 2 * n;
    let order = enumerate(n);
    let q = Eisenstein::q();
    let neg_qinv = -&q.pow(-1);

    let base = {
        let denom = BigInt::from(-3).pow((n * (n - 1) / 2) as u32);
        let scal = Eisenstein::from_rational(Rational::new(BigInt::one(), denom));
        let mut p = WheelPolynomial::constant(nn, scal);
        for i in 0..n {
            for j in (i + 1)..n {
                p = p.mul_binomial(&q, i, &neg_qinv, j);
            }
        }
        for i in n..nn {
            for j in (i + 1)..nn {
                p = p.mul_binomial(&q, i, &neg_qinv, j);
            }
        }
        p
    };

    let mut by_size: Vec<&NoncrossingMatching> = order.iter().collect();
    by_size.sort_by_key(|p| p.young().size());
    let mut built: HashMap<&NoncrossingMatching, WheelPolynomial> = HashMap::new();
    built.insert(by_size[0], base);
    let mut pending: Vec<&NoncrossingMatching> = by_size[1..].to_vec();
    while !pending.is_empty() {
        let mut progressed = false;
        let mut still = Vec::new();
        'outer: for pi in pending {
            let word = pi.to_dyck();
            let j = (1..nn)
                .find(|&j| word.steps()[j - 1] == -1 && word.steps()[j] == 1)
                .expect("non-nested matchings have a valley");
            let mut steps = word.steps().to_vec();
            steps[j - 1] = 1;
            steps[j] = -1;
            let sigma = NoncrossingMatching::from_dyck(
                &crate::matchings::DyckWord::new(steps).unwrap(),
            )
            .unwrap();
            let Some(psi_sigma) = built.get(&sigma) else {
                still.push(pi);
                continue;
            };
            let diff = psi_sigma.swap_vars(j - 1, j).add(&psi_sigma.neg());
            let mut next = diff
                .div_linear(j - 1, j)
                .mul_binomial(&q, j - 1, &neg_qinv, j);
            for nu in order.iter() {
                if nu == pi || *nu == sigma || nu.apply_e(j) != sigma {
                    continue;
                }
                match built.get(nu) {
                    Some(psi_nu) => next = next.add(&psi_nu.neg()),
                    None => {
                        still.push(pi);
                        continue 'outer;
                    }
                }
            }
            built.insert(pi, next);
            progressed = true;
        }
        assert!(progressed, "divided-difference order must make progress");
        pending = still;
    }
    order
        .iter()
        .map(|p| (p.clone(), built.remove(p).unwrap()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::asm_count;
    use crate::matchings::catalan;

    fn m(arcs: &[(usize, usize)]) -> NoncrossingMatching {
        NoncrossingMatching::from_arcs(arcs).unwrap()
    }

    #[test]
    fn test_chi_values() {
        assert_eq!(chi(0), 0);
        assert_eq!(chi(1), 1);
        assert_eq!(chi(2), -1);
        assert_eq!(chi(3), 0);
        assert_eq!(chi(-1), -1);
        assert_eq!(chi(-2), 1);
    }

    #[test]
    fn test_c_matrix_canonical_goldens() {
        let order2 = enumerate(2);
        assert_eq!(c_matrix(&order2), CatMatrix::identity(2));

        let order3 = enumerate(3);
        let c3 = c_matrix(&order3);
        let mut expect3 = CatMatrix::<BigInt>::identity(5);
        expect3.set(1, 4, BigInt::one());
        assert_eq!(c3, expect3);
        let ct3 = c_tilde_matrix(&order3).unwrap();
        let mut expect3i = CatMatrix::<BigInt>::identity(5);
        expect3i.set(1, 4, -BigInt::one());
        assert_eq!(ct3, expect3i);

        let order4 = enumerate(4);
        let c4 = c_matrix(&order4);
        let mut expect4 = CatMatrix::<BigInt>::identity(14);
        for (r, c) in [(1, 4), (1, 12), (2, 10), (3, 11), (3, 13), (4, 12), (6, 9), (9, 13)] {
            expect4.set(r, c, BigInt::one());
        }
        expect4.set(4, 13, -BigInt::one());
        assert_eq!(c4, expect4);
        let ct4 = c_tilde_matrix(&order4).unwrap();
        let mut expect4i = CatMatrix::<BigInt>::identity(14);
        for (r, c) in [(1, 4), (1, 13), (2, 10), (3, 11), (3, 13), (4, 12), (6, 9), (9, 13)] {
            expect4i.set(r, c, -BigInt::one());
        }
        expect4i.set(4, 13, BigInt::one());
        expect4i.set(6, 13, BigInt::one());
        assert_eq!(ct4, expect4i);
    }

    #[test]
    fn test_c_matrix_inverse_roundtrip() {
        for n in 1..=5 {
            let order = enumerate(n);
            let c = c_matrix(&order);
            let ct = c_tilde_matrix(&order).unwrap();
            assert_eq!(c.mat_mul(&ct), CatMatrix::identity(order.len()), "n={n}");
        }
    }

    #[test]
    fn test_c_entry_recursive_agrees() {
        for n in 1..=4 {
            let order = enumerate(n);
            for a in WeakSequence::all(n) {
                for sigma in &order {
                    assert_eq!(
                        c_entry(a.entries(), sigma),
                        c_entry_recursive(a.entries(), sigma),
                        "a={:?} sigma={:?}",
                        a.entries(),
                        sigma.arcs()
                    );
                }
            }
        }
    }

    #[test]
    fn test_f_polynomial_goldens() {
        let arc = m(&[(1, 2)]);
        assert_eq!(f_polynomial(&arc).terms(), &[(vec![1], BigInt::one())]);

        let nested2 = m(&[(1, 4), (2, 3)]);
        assert_eq!(
            f_polynomial(&nested2).terms(),
            &[(vec![1, 2], BigInt::one())]
        );
        let little2 = m(&[(1, 2), (3, 4)]);
        assert_eq!(
            f_polynomial(&little2).terms(),
            &[(vec![1, 1], BigInt::one())]
        );

        // All five order-3 numerators, canonical order.
        let expected: Vec<Vec<(Vec<u32>, i64)>> = vec![
            vec![(vec![1, 1, 1], 1)],
            vec![(vec![1, 1, 2], 1), (vec![1, 2, 3], -1)],
            vec![(vec![1, 2, 1], 1)],
            vec![(vec![1, 2, 2], 1)],
            vec![(vec![1, 2, 3], 1)],
        ];
        for (pi0, want) in enumerate(3).iter().zip(expected.iter()) {
            let f = f_polynomial(pi0);
            let want_terms: Vec<(Vec<u32>, BigInt)> = want
                .iter()
                .map(|(e, c)| (e.clone(), BigInt::from(*c)))
                .collect();
            assert_eq!(f.terms(), &want_terms[..], "pi0={:?}", pi0.arcs());
        }
    }

    #[test]
    fn test_phi_vector_golden() {
        assert_eq!(
            phi_vector(3),
            vec![2i64, 2, 1, 2, 1]
                .into_iter()
                .map(BigInt::from)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn test_phi_psi_consistency() {
        for n in 1..=4 {
            verify_phi_psi_consistency(n).unwrap();
        }
    }

    #[test]
    fn test_submatching_expansion() {
        let arc = m(&[(1, 2)]);
        for n in 2..=4 {
            verify_submatching_expansion(&arc, n).unwrap();
        }
        for pi0 in enumerate(2) {
            for n in 3..=4 {
                verify_submatching_expansion(&pi0, n).unwrap();
            }
        }
    }

    #[test]
    fn test_nesting_invariance() {
        for n in 2..=4 {
            verify_nesting_invariance(n).unwrap();
        }
    }

    #[test]
    fn test_product_expansion() {
        for n in 1..=5 {
            verify_product_expansion(n).unwrap();
        }
        // The two order-2 classes are single matchings with unit weight.
        let basis = parity_basis(2);
        assert_eq!(basis.len(), 2);
        assert_eq!(parity_class(&basis[0]), vec![m(&[(1, 4), (2, 3)])]);
        assert_eq!(parity_class(&basis[1]), vec![m(&[(1, 2), (3, 4)])]);
    }

    #[test]
    fn test_ev1_expansion() {
        for n in 1..=5 {
            verify_ev1_expansion(n).unwrap();
        }
    }

    #[test]
    fn test_p_nesting() {
        for n in 1..=4 {
            for p in 1..=2 {
                verify_p_nesting(n, p).unwrap();
            }
        }
    }

    #[test]
    fn test_b_tail_vectors() {
        assert_eq!(b_tail_vectors(3, 2), vec![Vec::<usize>::new()]);
        let tails = b_tail_vectors(4, 2);
        assert_eq!(tails, vec![vec![6], vec![7]]);
        assert_eq!(b_tail_vectors(5, 1).len(), 8);
    }

    #[test]
    fn test_event_window_matchings() {
        let arc = m(&[(1, 2)]);
        // Order 2, offset-2 window: position 2 matched to 3.
        let evs = event_window_matchings(&arc, 2, None);
        assert_eq!(evs, vec![m(&[(1, 4), (2, 3)])]);
        // Partition check: tails split the event.
        for pi0 in enumerate(2) {
            let all = event_window_matchings(&pi0, 4, None);
            let mut split = 0usize;
            for b in b_tail_vectors(4, 2) {
                split += event_window_matchings(&pi0, 4, Some(&b)).len();
            }
            assert_eq!(all.len(), split);
        }
    }

    #[test]
    fn test_psi_symbolic_delta_and_weights() {
        for n in 1..=3 {
            let basis = build_psi_symbolic(n);
            assert_eq!(basis.len() as u64, catalan(n));
            let deg = (n * (n - 1)) as u32;
            for (_, poly) in &basis {
                assert!(poly.is_homogeneous_of(deg), "n={n}");
            }
            for (pi, poly) in &basis {
                for (sigma, _) in &basis {
                    let val = poly.evaluate(&sigma_point(sigma));
                    let expect = if pi == sigma {
                        Eisenstein::one()
                    } else {
                        Eisenstein::zero()
                    };
                    assert_eq!(val, expect, "n={n} pi={:?} sigma={:?}", pi.arcs(), sigma.arcs());
                }
            }
            // The all-ones evaluation returns the stationary weights.
            let ones = vec![Eisenstein::one(); 2 * n];
            let weights = psi_vector(n);
            for ((pi, poly), w) in basis.iter().zip(weights.iter()) {
                let v = poly.evaluate(&ones);
                assert!(v.is_rational());
                assert_eq!(
                    v.re,
                    Rational::from_integer(w.clone()),
                    "weight mismatch at {:?}",
                    pi.arcs()
                );
            }
            let total: BigInt = weights.iter().sum();
            assert_eq!(total, asm_count(n));
        }
    }

    #[test]
    fn test_psi_symbolic_wheel_condition() {
        // Substituting (t, q^2 t, q^4 t) into any increasing triple of
        // variables kills every basis polynomial.
        let q = Eisenstein::q();
        let q2 = q.pow(2);
        let q4 = q.pow(4);
        for n in 2..=3 {
            let basis = build_psi_symbolic(n);
            let nn = 2 * n;
            let mut state = 0xdeadbeefcafef00du64;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state
            };
            for _ in 0..4 {
                let i = (next() % (nn as u64 - 2)) as usize;
                let j = i + 1 + (next() % ((nn - i - 1) as u64 - 1)) as usize;
                let k = j + 1 + (next() % ((nn - j - 1) as u64)) as usize;
                let t = Eisenstein::from_int((next() % 11) as i64 + 2);
                let mut z: Vec<Eisenstein> = (0..nn)
                    .map(|_| Eisenstein::from_int((next() % 13) as i64 + 1))
                    .collect();
                z[i] = t.clone();
                z[j] = &q2 * &t;
                z[k] = &q4 * &t;
                for (pi, poly) in &basis {
                    let v = poly.evaluate(&z);
                    assert!(
                        v.is_zero(),
                        "wheel value nonzero at n={n}, vars ({i},{j},{k}), pi={:?}",
                        pi.arcs()
                    );
                }
            }
        }
    }
}
