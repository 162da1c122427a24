//! Exact linear algebra over rationals and Eisenstein rationals.
//!
//! Provides:
//! - [`Rational`]: arbitrary-precision rational numbers.
//! - [`Eisenstein`]: the field `Q(q)` for a primitive cube root of unity
//!   `q`, represented as `re + im * q` with rational parts.
//! - [`CatMatrix`]: a dense matrix indexed by enumeration order.
//! - [`CatMatrix::invert_unitriangular`]: exact inversion of
//!   upper-unitriangular integer matrices.
//! - [`left_nullspace_1d`] and [`left_nullspace_1d_mod`]: one-dimensional
//!   left kernels, exact and modular.
//! - [`lagrange_interpolate`]: exact polynomial interpolation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

/// Arbitrary-precision rational scalar used across the crate.
pub type Rational = BigRational;

/// Errors raised by the exact solvers.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is not upper unitriangular at ({0}, {1})")]
    NotUnitriangular(usize, usize),
    #[error("left kernel has dimension {0}, expected 1")]
    NullityNotOne(usize),
    #[error("duplicate interpolation node {0}")]
    DuplicateNode(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// An element `re + im * q` of `Q(q)`, where `q` is a primitive cube root
/// of unity, so `q^2 = -1 - q` and `q^3 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eisenstein {
    pub re: Rational,
    pub im: Rational,
}

impl Eisenstein {
    /// Zero.
    pub fn zero() -> Self {
        Self {
            re: Rational::zero(),
            im: Rational::zero(),
        }
    }

    /// One.
    pub fn one() -> Self {
        Self {
            re: Rational::one(),
            im: Rational::zero(),
        }
    }

    /// The generator `q` itself.
    pub fn q() -> Self {
        Self {
            re: Rational::zero(),
            im: Rational::one(),
        }
    }

    /// Embeds a rational.
    pub fn from_rational(r: Rational) -> Self {
        Self {
            re: r,
            im: Rational::zero(),
        }
    }

    /// Embeds an integer.
    pub fn from_int(k: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(k)))
    }

    /// True when the `q` component vanishes.
    pub fn is_rational(&self) -> bool {
        self.im.is_zero()
    }

    /// True when both components vanish.
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Complex conjugation, which maps `q` to `q^2 = -1 - q`.
    pub fn conj(&self) -> Self {
        Self {
            re: &self.re - &self.im,
            im: -self.im.clone(),
        }
    }

    /// The rational norm `re^2 - re * im + im^2`.
    pub fn norm(&self) -> Rational {
        &self.re * &self.re - &self.re * &self.im + &self.im * &self.im
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inverse(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero");
        let c = self.conj();
        Self {
            re: c.re / &n,
            im: c.im / &n,
        }
    }

    /// Integer power, allowing negative exponents.
    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }
}

impl Add for &Eisenstein {
    type Output = Eisenstein;
    fn add(self, rhs: &Eisenstein) -> Eisenstein {
        Eisenstein {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &Eisenstein {
    type Output = Eisenstein;
    fn sub(self, rhs: &Eisenstein) -> Eisenstein {
        Eisenstein {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &Eisenstein {
    type Output = Eisenstein;
    fn mul(self, rhs: &Eisenstein) -> Eisenstein {
        // (a + bq)(c + dq) = ac + (ad + bc) q + bd q^2 with q^2 = -1 - q.
        let ac = &self.re * &rhs.re;
        let bd = &self.im * &rhs.im;
        let ad_bc = &self.re * &rhs.im + &self.im * &rhs.re;
        Eisenstein {
            re: ac - &bd,
            im: ad_bc - bd,
        }
    }
}

impl Neg for &Eisenstein {
    type Output = Eisenstein;
    fn neg(self) -> Eisenstein {
        Eisenstein {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

/// A dense matrix whose rows and columns are indexed by an enumeration of
/// matchings (or any other finite list).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> CatMatrix<T> {
    /// Builds from a generator called as `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Immutable entry access.
    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    /// Overwrites an entry.
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    /// A full row as a slice.
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Applies a function entrywise.
    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> CatMatrix<U> {
        CatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    /// The transpose.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }
}

impl<T> CatMatrix<T>
where
    T: Clone + Zero + One + PartialEq,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    /// The identity matrix.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    /// Matrix product `self * other`.
    pub fn mat_mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        Self::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                if !self.get(r, k).is_zero() && !other.get(k, c).is_zero() {
                    acc = acc + self.get(r, k) * other.get(k, c);
                }
            }
            acc
        })
    }

    /// Row-vector product `v * self`.
    pub fn apply_left(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows, "vector length must match row count");
        (0..self.cols)
            .map(|c| {
                let mut acc = T::zero();
                for (r, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc = acc + x * self.get(r, c);
                    }
                }
                acc
            })
            .collect()
    }

    /// Column-vector product `self * v`.
    pub fn apply_right(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "vector length must match column count");
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for (c, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc = acc + self.get(r, c) * x;
                    }
                }
                acc
            })
            .collect()
    }
}

impl CatMatrix<BigInt> {
    /// Exact inverse of an upper-unitriangular integer matrix, computed by
    /// back-substitution. Rejects matrices that are not upper unitriangular.
    pub fn invert_unitriangular(&self) -> Result<CatMatrix<BigInt>, LinalgError> {
        let n = self.rows;
        if n != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} is not square",
                self.rows, self.cols
            )));
        }
        for r in 0..n {
            if !self.get(r, r).is_one() {
                return Err(LinalgError::NotUnitriangular(r, r));
            }
            for c in 0..r {
                if !self.get(r, c).is_zero() {
                    return Err(LinalgError::NotUnitriangular(r, c));
                }
            }
        }
        let mut inv = CatMatrix::<BigInt>::identity(n);
        for c in 0..n {
            for r in (0..c).rev() {
                let mut acc = BigInt::zero();
                for k in (r + 1)..=c {
                    let u = self.get(r, k);
                    if !u.is_zero() {
                        acc += u * inv.get(k, c);
                    }
                }
                inv.set(r, c, -acc);
            }
        }
        Ok(inv)
    }
}

/// Exact one-dimensional left kernel: returns `v` with `v * m = 0`,
/// normalized so its entries sum to one. Errors unless the kernel is
/// exactly one-dimensional.
pub fn left_nullspace_1d(m: &CatMatrix<Rational>) -> Result<Vec<Rational>, LinalgError> {
    // Row-reduce the transpose; kernel of m^T (column vectors) = left
    // kernel of m.
    let mut a = m.transpose();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivot_col_of_row = vec![usize::MAX; rows];
    let mut pivot_row_of_col = vec![usize::MAX; cols];
    let mut rank = 0usize;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a.get(r, c).is_zero()) else {
            continue;
        };
        for cc in 0..cols {
            let tmp = a.get(rank, cc).clone();
            a.set(rank, cc, a.get(p, cc).clone());
            a.set(p, cc, tmp);
        }
        let inv = Rational::one() / a.get(rank, c).clone();
        for cc in 0..cols {
            let v = a.get(rank, cc) * &inv;
            a.set(rank, cc, v);
        }
        for r in 0..rows {
            if r != rank && !a.get(r, c).is_zero() {
                let f = a.get(r, c).clone();
                for cc in 0..cols {
                    let v = a.get(r, cc) - &(a.get(rank, cc) * &f);
                    a.set(r, cc, v);
                }
            }
        }
        pivot_col_of_row[rank] = c;
        pivot_row_of_col[c] = rank;
        rank += 1;
    }
    let free: Vec<usize> = (0..cols)
        .filter(|&c| pivot_row_of_col[c] == usize::MAX)
        .collect();
    if free.len() != 1 {
        return Err(LinalgError::NullityNotOne(free.len()));
    }
    let f = free[0];
    let mut v = vec![Rational::zero(); cols];
    v[f] = Rational::one();
    for r in 0..rank {
        let pc = pivot_col_of_row[r];
        v[pc] = -a.get(r, f).clone();
    }
    let total: Rational = v.iter().fold(Rational::zero(), |acc, x| acc + x);
    if total.is_zero() {
        return Err(LinalgError::DimensionMismatch(
            "kernel vector has zero sum, cannot normalize".into(),
        ));
    }
    Ok(v.into_iter().map(|x| x / &total).collect())
}

/// Modular left kernel: returns `v` over `GF(p)` with `v * m = 0 (mod p)`
/// normalized so `v[unit_index] = 1`, or `None` when the kernel mod `p`
/// is not one-dimensional or vanishes at `unit_index`.
///
/// Callers must certify the lifted result independently; a kernel mod `p`
/// only bounds the rational rank from below.
pub fn left_nullspace_1d_mod(
    m: &CatMatrix<BigInt>,
    p: u64,
    unit_index: usize,
) -> Option<Vec<u64>> {
    let rows = m.rows();
    let cols = m.cols();
    let pb = BigInt::from(p);
    // Transposed copy reduced mod p: a[c][r] = m[r][c] mod p.
    let mut a: Vec<Vec<u64>> = (0..cols)
        .map(|c| {
            (0..rows)
                .map(|r| {
                    let mut v = m.get(r, c) % &pb;
                    if v.is_negative() {
                        v += &pb;
                    }
                    u64::try_from(v).expect("residue fits in u64")
                })
                .collect()
        })
        .collect();
    let mulmod = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let invmod = |x: u64| powmod(x, p - 2);
    let nrows = cols;
    let ncols = rows;
    let mut pivot_col_of_row = vec![usize::MAX; nrows];
    let mut pivot_row_of_col = vec![usize::MAX; ncols];
    let mut rank = 0usize;
    for c in 0..ncols {
        let Some(pr) = (rank..nrows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, pr);
        let inv = invmod(a[rank][c]);
        for x in a[rank].iter_mut() {
            *x = mulmod(*x, inv);
        }
        for r in 0..nrows {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c];
                for cc in 0..ncols {
                    let sub = mulmod(f, a[rank][cc]);
                    a[r][cc] = (a[r][cc] + p - sub) % p;
                }
            }
        }
        pivot_col_of_row[rank] = c;
        pivot_row_of_col[c] = rank;
        rank += 1;
    }
    let free: Vec<usize> = (0..ncols)
        .filter(|&c| pivot_row_of_col[c] == usize::MAX)
        .collect();
    if free.len() != 1 {
        return None;
    }
    let f = free[0];
    let mut v = vec![0u64; ncols];
    v[f] = 1;
    for r in 0..rank {
        let pc = pivot_col_of_row[r];
        v[pc] = (p - a[r][f] % p) % p;
    }
    if v[unit_index] == 0 {
        return None;
    }
    let scale = invmod(v[unit_index]);
    Some(v.into_iter().map(|x| mulmod(x, scale)).collect())
}

/// Exact Lagrange interpolation: the coefficients (constant term first) of
/// the unique polynomial of degree `< points.len()` through the given
/// nodes. Rejects duplicate abscissas.
pub fn lagrange_interpolate(
    points: &[(Rational, Rational)],
) -> Result<Vec<Rational>, LinalgError> {
    let k = points.len();
    for i in 0..k {
        for j in (i + 1)..k {
            if points[i].0 == points[j].0 {
                return Err(LinalgError::DuplicateNode(points[i].0.to_string()));
            }
        }
    }
    // Master polynomial prod (x - x_j), coefficients constant-first.
    let mut master = vec![Rational::one()];
    for (x, _) in points {
        let mut next = vec![Rational::zero(); master.len() + 1];
        for (d, c) in master.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= c * x;
        }
        master = next;
    }
    let mut out = vec![Rational::zero(); k];
    for (xi, yi) in points {
        // Synthetic division: master / (x - xi).
        let mut quot = vec![Rational::zero(); k];
        let mut carry = Rational::zero();
        for d in (0..k).rev() {
            let c = &master[d + 1] + &carry;
            quot[d] = c.clone();
            carry = c * xi;
        }
        let denom: Rational = quot
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (d, c)| acc + c * xi.pow(d as i32));
        let scale = yi / denom;
        for (o, q) in out.iter_mut().zip(quot.iter()) {
            *o += q * &scale;
        }
    }
    Ok(out)
}

/// Evaluates a polynomial given by constant-first rational coefficients.
pub fn eval_poly(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Convenience constructor for a rational from an integer pair.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn test_eisenstein_cube_root() {
        let q = Eisenstein::q();
        let q2 = &q * &q;
        let q3 = &q2 * &q;
        assert_eq!(q3, Eisenstein::one());
        let sum = &(&Eisenstein::one() + &q) + &q2;
        assert!(sum.is_zero());
        assert_eq!(q.conj(), q2);
        assert_eq!(&q * &q.inverse(), Eisenstein::one());
        assert_eq!(q.pow(-1), q2);
        assert_eq!(q.pow(7), q);
    }

    #[test]
    fn test_eisenstein_character_quotient() {
        // (q^p - q^-p) / (q - q^-1) is 0, 1, -1 for p = 0, 1, 2 mod 3.
        let q = Eisenstein::q();
        let denom = &q - &q.inverse();
        for p in -7i64..=7 {
            let num = &q.pow(p) - &q.pow(-p);
            let quot = &num * &denom.inverse();
            let expected = match p.rem_euclid(3) {
                0 => Eisenstein::zero(),
                1 => Eisenstein::one(),
                _ => -&Eisenstein::one(),
            };
            assert_eq!(quot, expected, "p={p}");
        }
    }

    #[test]
    fn test_invert_unitriangular() {
        let u = CatMatrix::from_fn(3, 3, |r, c| match (r, c) {
            (0, 1) => big(2),
            (0, 2) => big(-3),
            (1, 2) => big(5),
            _ if r == c => big(1),
            _ => big(0),
        });
        let inv = u.invert_unitriangular().unwrap();
        assert_eq!(u.mat_mul(&inv), CatMatrix::identity(3));
        assert_eq!(inv.mat_mul(&u), CatMatrix::identity(3));
        assert_eq!(*inv.get(0, 1), big(-2));
        assert_eq!(*inv.get(0, 2), big(13));

        let bad = CatMatrix::from_fn(2, 2, |r, c| if r == c { big(2) } else { big(0) });
        assert!(matches!(
            bad.invert_unitriangular(),
            Err(LinalgError::NotUnitriangular(0, 0))
        ));
    }

    #[test]
    fn test_left_nullspace_exact() {
        // v = (1, 1) kills this matrix from the left.
        let m = CatMatrix::from_fn(2, 3, |r, c| {
            let vals = [[1i64, -2, 3], [-1, 2, -3]];
            Rational::from_integer(big(vals[r][c]))
        });
        let v = left_nullspace_1d(&m).unwrap();
        assert_eq!(v, vec![ratio(1, 2), ratio(1, 2)]);

        let full_rank = CatMatrix::from_fn(2, 2, |r, c| {
            Rational::from_integer(big(if r == c { 1 } else { 0 }))
        });
        assert_eq!(
            left_nullspace_1d(&full_rank),
            Err(LinalgError::NullityNotOne(0))
        );
    }

    #[test]
    fn test_left_nullspace_modular_matches_exact() {
        let p = 2305843009213693951u64; // 2^61 - 1
        let m = CatMatrix::from_fn(3, 3, |r, c| {
            let vals = [[2i64, -1, 0], [-1, 2, -1], [-1, -1, 1]];
            big(vals[r][c])
        });
        // Left kernel: v * m = 0 with v = (1, 1, 1): col sums are 0.
        let v = left_nullspace_1d_mod(&m, p, 0).unwrap();
        assert_eq!(v, vec![1, 1, 1]);
        let exact = left_nullspace_1d(&m.map(|x| Rational::from_integer(x.clone()))).unwrap();
        assert_eq!(exact, vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)]);
    }

    #[test]
    fn test_lagrange_interpolate() {
        // x^2 + x/2 - 3 through three nodes.
        let f = |x: i64| ratio(x * x, 1) + ratio(x, 2) - ratio(3, 1);
        let pts: Vec<(Rational, Rational)> =
            [2i64, 5, 9].iter().map(|&x| (ratio(x, 1), f(x))).collect();
        let coeffs = lagrange_interpolate(&pts).unwrap();
        assert_eq!(coeffs, vec![ratio(-3, 1), ratio(1, 2), ratio(1, 1)]);
        assert_eq!(eval_poly(&coeffs, &ratio(7, 1)), f(7));

        let dup = vec![(ratio(1, 1), ratio(0, 1)), (ratio(1, 1), ratio(2, 1))];
        assert!(matches!(
            lagrange_interpolate(&dup),
            Err(LinalgError::DuplicateNode(_))
        ));
    }

    #[test]
    fn test_matrix_products() {
        let m = CatMatrix::from_fn(2, 2, |r, c| big((r * 2 + c + 1) as i64));
        let v = vec![big(1), big(-1)];
        assert_eq!(m.apply_left(&v), vec![big(-2), big(-2)]);
        assert_eq!(m.apply_right(&v), vec![big(-1), big(-1)]);
        let id = CatMatrix::<BigInt>::identity(2);
        assert_eq!(m.mat_mul(&id), m);
    }
}
