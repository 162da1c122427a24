//! The cylinder dynamics: rewiring Markov chain, stationary distribution,
//! and the row transfer matrix.
//!
//! Provides:
//! - [`asm_count`]: the alternating-sign-matrix counting sequence that
//!   normalizes the stationary distribution.
//! - [`s_matrix`] and [`hamiltonian`]: the rewiring-count matrix
//!   `S[pi, sigma] = #{k : e_k(pi) = sigma}` and `H = 2n I - S`.
//! - [`stationary`] / [`stationary_weights`]: the unique row vector killed
//!   by `H`, normalized to total mass one (respectively scaled to
//!   integers by `asm_count`), certified by exact residual checks.
//! - [`PlaquetteRow`] and [`transfer_matrix`]: one random row of diagonal
//!   tiles and the induced one-parameter family of stochastic matrices,
//!   whose entries are integer polynomials in the tile probability.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{left_nullspace_1d, left_nullspace_1d_mod, CatMatrix, Rational};
use crate::matchings::{enumerate, NoncrossingMatching};

/// Errors raised by the dynamics layer.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("transfer matrix enumerates 2^(2n) rows; n = {0} exceeds the cap {1}")]
    OrderTooLarge(usize, usize),
}

const MOD_P: u64 = 2305843009213693951; // 2^61 - 1, prime

/// Counts `n x n` alternating-sign matrices: `prod_{j<n} (3j+1)!/(n+j)!`.
pub fn asm_count(n: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..n {
        num *= factorial(3 * j + 1);
        den *= factorial(n + j);
    }
    num / den
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// The rewiring-count matrix over the given enumeration order:
/// `S[pi, sigma]` counts the operator indices `k` in `1..=2n` with
/// `e_k(pi) = sigma`.
pub fn s_matrix(order: &[NoncrossingMatching]) -> CatMatrix<BigInt> {
    let n = order[0].order();
    let index: HashMap<&NoncrossingMatching, usize> =
        order.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut m = CatMatrix::from_fn(order.len(), order.len(), |_, _| BigInt::zero());
    for (i, p) in order.iter().enumerate() {
        for k in 1..=2 * n {
            let j = index[&p.apply_e(k)];
            let v = m.get(i, j) + 1;
            m.set(i, j, v);
        }
    }
    m
}

/// The generator `H = 2n I - S` of the rewiring chain.
pub fn hamiltonian(order: &[NoncrossingMatching]) -> CatMatrix<BigInt> {
    let n = order[0].order();
    let s = s_matrix(order);
    CatMatrix::from_fn(s.rows(), s.cols(), |r, c| {
        if r == c {
            BigInt::from(2 * n) - s.get(r, c)
        } else {
            -s.get(r, c).clone()
        }
    })
}

/// The stationary distribution of the rewiring chain in canonical order,
/// as exact rationals summing to one.
///
/// The fast path solves the kernel modulo a large prime, lifts, and
/// certifies the result by an exact residual check plus the rank bound;
/// on any certification failure it falls back to exact rational
/// elimination. Results are memoized per order.
pub fn stationary(n: usize) -> Arc<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Rational>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return Arc::clone(v);
    }
    let order = enumerate(n);
    let h = hamiltonian(&order);
    let asm = asm_count(n);
    let mu = match certified_kernel(&h, &asm) {
        Some(alpha) => alpha
            .into_iter()
            .map(|a| Rational::new(a, asm.clone()))
            .collect(),
        None => left_nullspace_1d(&h.map(|x| Rational::from_integer(x.clone())))
            .expect("rewiring generator has a one-dimensional kernel"),
    };
    let arc = Arc::new(mu);
    cache.lock().unwrap().insert(n, Arc::clone(&arc));
    arc
}

/// The integer weight vector `asm_count(n) * stationary(n)` in canonical
/// order; the entry for the fully nested matching is one.
pub fn stationary_weights(n: usize) -> Vec<BigInt> {
    let asm = asm_count(n);
    stationary(n)
        .iter()
        .map(|mu| {
            let scaled = mu * Rational::from_integer(asm.clone());
            assert!(scaled.is_integer(), "weights scale to integers");
            scaled.to_integer()
        })
        .collect()
}

/// Modular kernel with exact certification. Returns the integer weight
/// vector when every check passes.
fn certified_kernel(h: &CatMatrix<BigInt>, asm: &BigInt) -> Option<Vec<BigInt>> {
    // The fully nested matching sits last in canonical order and carries
    // weight one, so normalizing there makes the small-residue lift exact.
    let unit_index = h.rows() - 1;
    let v = left_nullspace_1d_mod(h, MOD_P, unit_index)?;
    let alpha: Vec<BigInt> = v.into_iter().map(BigInt::from).collect();
    let residual = h.transpose().apply_right(&alpha);
    if residual.iter().any(|x| !x.is_zero()) {
        return None;
    }
    if alpha.iter().any(|x| !x.is_positive()) {
        return None;
    }
    let total: BigInt = alpha.iter().sum();
    if &total != asm {
        return None;
    }
    Some(alpha)
}

/// One row of `2n` diagonal tiles on the cylinder. Bit `k` (0-based)
/// chooses the connection type of tile `k + 1`: type 0 joins (left, top)
/// and (bottom, right); type 1 joins (left, bottom) and (top, right).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaquetteRow {
    n: usize,
    bits: u32,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    L,
    R,
    T,
    B,
}

impl PlaquetteRow {
    /// Builds a row for a cylinder of circumference `2n`.
    pub fn new(n: usize, bits: u32) -> Self {
        assert!(2 * n <= 32, "bit mask limits the circumference");
        Self { n, bits }
    }

    /// Number of type-1 tiles.
    pub fn ones(&self) -> u32 {
        (self.bits & ((1u32 << (2 * self.n)) - 1)).count_ones()
    }

    fn tile_exit(&self, t: usize, entry: Side) -> Side {
        let one = (self.bits >> (t - 1)) & 1 == 1;
        match (one, entry) {
            (false, Side::L) => Side::T,
            (false, Side::T) => Side::L,
            (false, Side::B) => Side::R,
            (false, Side::R) => Side::B,
            (true, Side::L) => Side::B,
            (true, Side::B) => Side::L,
            (true, Side::T) => Side::R,
            (true, Side::R) => Side::T,
        }
    }

    /// Pairs the `2n` bottom and `2n` top points of the row. Point ids:
    /// top point `t` is `t - 1`, bottom point `t` is `2n + t - 1`.
    pub fn pairing(&self) -> Vec<usize> {
        let m = 2 * self.n;
        let id = |side: Side, t: usize| match side {
            Side::T => t - 1,
            Side::B => m + t - 1,
            _ => unreachable!(),
        };
        let mut pair = vec![usize::MAX; 2 * m];
        for t0 in 1..=m {
            for side0 in [Side::B, Side::T] {
                if pair[id(side0, t0)] != usize::MAX {
                    continue;
                }
                let (mut t, mut side) = (t0, side0);
                let dest = loop {
                    match self.tile_exit(t, side) {
                        Side::T => break id(Side::T, t),
                        Side::B => break id(Side::B, t),
                        Side::R => {
                            t = t % m + 1;
                            side = Side::L;
                        }
                        Side::L => {
                            t = (t + m - 2) % m + 1;
                            side = Side::R;
                        }
                    }
                };
                pair[id(side0, t0)] = dest;
                pair[dest] = id(side0, t0);
            }
        }
        pair
    }

    /// Stacks the row on top of a boundary matching and returns the induced
    /// matching of the top points. Closed loops carry weight one and are
    /// discarded.
    pub fn apply(&self, pi: &NoncrossingMatching) -> NoncrossingMatching {
        assert_eq!(pi.order(), self.n);
        let m = 2 * self.n;
        let pair = self.pairing();
        let mut out = vec![0usize; m];
        for t0 in 1..=m {
            // Descend from top point t0, bouncing between the row pairing
            // and the boundary matching until resurfacing at a top point.
            let mut point = pair[t0 - 1];
            let mut steps = 0usize;
            while point >= m {
                let bottom = point - m + 1;
                point = pair[m + pi.partner(bottom) - 1];
                steps += 1;
                assert!(steps <= 2 * m, "strand traversal must terminate");
            }
            out[t0 - 1] = point + 1;
        }
        NoncrossingMatching::from_pairing(&out).expect("row composition stays noncrossing")
    }
}

/// The transfer matrix over the canonical enumeration: entry `(pi, sigma)`
/// is the polynomial in the type-1 tile probability `p` giving the chance
/// that a uniform row maps `pi` to `sigma`. Coefficients are constant
/// first. Capped at `n <= 6` (the row space has `2^(2n)` elements).
pub fn transfer_matrix(
    n: usize,
) -> Result<(Vec<NoncrossingMatching>, CatMatrix<Vec<BigInt>>), DynamicsError> {
    const MAX_N: usize = 6;
    if n == 0 || n > MAX_N {
        return Err(DynamicsError::OrderTooLarge(n, MAX_N));
    }
    let order = enumerate(n);
    let index: HashMap<&NoncrossingMatching, usize> =
        order.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let m = 2 * n;
    // basis[w] = p^w (1 - p)^(m - w), constant-first coefficients.
    let basis: Vec<Vec<BigInt>> = (0..=m)
        .map(|w| {
            let mut c = vec![BigInt::zero(); m + 1];
            let k = m - w;
            for (j, item) in c.iter_mut().skip(w).enumerate() {
                *item = binomial(k, j) * if j % 2 == 0 { 1 } else { -1 };
            }
            c
        })
        .collect();
    let zero_poly = vec![BigInt::zero(); m + 1];
    let mut t = CatMatrix::from_fn(order.len(), order.len(), |_, _| zero_poly.clone());
    for bits in 0u32..(1u32 << m) {
        let row = PlaquetteRow::new(n, bits);
        let w = bits.count_ones() as usize;
        for (i, p) in order.iter().enumerate() {
            let j = index[&row.apply(p)];
            let mut entry = t.get(i, j).clone();
            for (c, b) in entry.iter_mut().zip(basis[w].iter()) {
                *c += b;
            }
            t.set(i, j, entry);
        }
    }
    Ok((order, t))
}

pub(crate) fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Evaluates a transfer matrix at a rational tile probability.
pub fn transfer_at(t: &CatMatrix<Vec<BigInt>>, p: &Rational) -> CatMatrix<Rational> {
    t.map(|coeffs| {
        coeffs.iter().rev().fold(Rational::zero(), |acc, c| {
            acc * p + Rational::from_integer(c.clone())
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;
    use crate::matchings::catalan;

    #[test]
    fn test_asm_count() {
        let expected = [1i64, 1, 2, 7, 42, 429, 7436, 218348];
        for (n, &v) in expected.iter().enumerate() {
            assert_eq!(asm_count(n), BigInt::from(v), "n={n}");
        }
    }

    #[test]
    fn test_s_matrix_row_sums() {
        for n in 1..=5 {
            let order = enumerate(n);
            let s = s_matrix(&order);
            for r in 0..s.rows() {
                let sum: BigInt = s.row(r).iter().sum();
                assert_eq!(sum, BigInt::from(2 * n));
            }
            let h = hamiltonian(&order);
            for r in 0..h.rows() {
                let sum: BigInt = h.row(r).iter().sum();
                assert!(sum.is_zero());
            }
        }
    }

    #[test]
    fn test_stationary_small_orders() {
        assert_eq!(*stationary(1), vec![ratio(1, 1)]);
        assert_eq!(*stationary(2), vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(
            stationary_weights(3),
            vec![2, 1, 1, 2, 1].into_iter().map(BigInt::from).collect::<Vec<_>>()
        );
        assert_eq!(
            stationary_weights(4),
            vec![7, 3, 3, 3, 1, 3, 1, 3, 7, 3, 1, 3, 3, 1]
                .into_iter()
                .map(BigInt::from)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn test_stationary_order_five() {
        let alpha = stationary_weights(5);
        let expected: Vec<BigInt> = vec![
            42, 17, 17, 14, 4, 17, 6, 14, 17, 6, 4, 6, 4, 1, 17, 6, 6, 4, 1, 14, 4, 17, 42,
            17, 6, 17, 14, 4, 4, 1, 6, 17, 6, 4, 14, 17, 6, 1, 4, 6, 4, 1,
        ]
        .into_iter()
        .map(BigInt::from)
        .collect();
        assert_eq!(alpha, expected);
        assert_eq!(alpha.iter().sum::<BigInt>(), asm_count(5));
    }

    #[test]
    fn test_stationary_kernel_property() {
        for n in 1..=5 {
            let order = enumerate(n);
            let h = hamiltonian(&order).map(|x| Rational::from_integer(x.clone()));
            let mu = stationary(n);
            let residual = h.transpose().apply_right(&mu);
            assert!(residual.iter().all(|x| x.is_zero()), "n={n}");
            let total: Rational = mu.iter().fold(Rational::zero(), |a, x| a + x);
            assert_eq!(total, ratio(1, 1));
            assert!(mu.iter().all(|x| x.is_positive()));
            assert_eq!(mu.len() as u64, catalan(n));
        }
    }

    #[test]
    fn test_plaquette_row_anchors() {
        for n in 2..=3 {
            let ms = enumerate(n);
            let all_zero = PlaquetteRow::new(n, 0);
            let all_one = PlaquetteRow::new(n, (1u32 << (2 * n)) - 1);
            for p in &ms {
                assert_eq!(all_zero.apply(p), p.rotate());
                assert_eq!(all_one.apply(p), p.rotate_inv());
            }
            // A single type-1 tile at position t acts as the rewiring
            // operator e_{t-1} (cyclically) followed by the rotation.
            for k in 1..=2 * n {
                let tile = k % (2 * n) + 1;
                let row = PlaquetteRow::new(n, 1u32 << (tile - 1));
                for p in &ms {
                    assert_eq!(row.apply(p), p.apply_e(k).rotate(), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn test_transfer_matrix_structure() {
        for n in 2..=3 {
            let (order, t) = transfer_matrix(n).unwrap();
            let m = 2 * n;
            // Row sums are the constant polynomial one.
            for r in 0..t.rows() {
                let mut sum = vec![BigInt::zero(); m + 1];
                for c in 0..t.cols() {
                    for (s, x) in sum.iter_mut().zip(t.get(r, c).iter()) {
                        *s += x;
                    }
                }
                assert!(sum[0].is_one() && sum[1..].iter().all(|x| x.is_zero()));
            }
            // Constant term is the rotation permutation.
            let index: HashMap<&NoncrossingMatching, usize> =
                order.iter().enumerate().map(|(i, p)| (p, i)).collect();
            for (i, p) in order.iter().enumerate() {
                let j = index[&p.rotate()];
                for c in 0..t.cols() {
                    let expect = if c == j { BigInt::one() } else { BigInt::zero() };
                    assert_eq!(t.get(i, c)[0], expect);
                }
            }
            // Derivative at zero equals (S - 2n I) R.
            let s = s_matrix(&order);
            let r_mat = CatMatrix::from_fn(order.len(), order.len(), |a, b| {
                if index[&order[a].rotate()] == b {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            });
            let s_shift = CatMatrix::from_fn(order.len(), order.len(), |a, b| {
                if a == b {
                    s.get(a, b) - BigInt::from(m)
                } else {
                    s.get(a, b).clone()
                }
            });
            let expect = s_shift.mat_mul(&r_mat);
            for a in 0..order.len() {
                for b in 0..order.len() {
                    assert_eq!(t.get(a, b)[1], *expect.get(a, b), "n={n} ({a},{b})");
                }
            }
            // The stationary vector is fixed by every coefficient layer.
            let mu = stationary(n);
            for w in 0..=m {
                let layer = t.map(|coeffs| Rational::from_integer(coeffs[w].clone()));
                let image = layer.apply_left(&mu);
                for (im, expect) in image.iter().zip(mu.iter()) {
                    if w == 0 {
                        assert_eq!(im, expect);
                    } else {
                        assert!(im.is_zero());
                    }
                }
            }
            // Evaluation at one half is doubly stochastic there.
            let at_half = transfer_at(&t, &ratio(1, 2));
            for a in 0..order.len() {
                let total: Rational = (0..order.len())
                    .map(|b| at_half.get(a, b).clone())
                    .fold(Rational::zero(), |acc, x| acc + x);
                assert_eq!(total, ratio(1, 1));
            }
        }
        assert!(transfer_matrix(7).is_err());
    }
}
