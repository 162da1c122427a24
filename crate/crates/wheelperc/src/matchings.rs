//! Noncrossing matchings of `{1, ..., 2n}` and the operators acting on them.
//!
//! Provides:
//! - [`NoncrossingMatching`]: the canonical carrier, a fixed-point-free
//!   noncrossing involution, with conversions to and from [`DyckWord`] and
//!   [`OpenerSequence`].
//! - [`enumerate`]: all matchings of a given order in the canonical order
//!   (decreasing lexicographic order of Young diagrams).
//! - Elementary operators: [`NoncrossingMatching::apply_e`] (the local
//!   rewiring generators), [`NoncrossingMatching::rotate`],
//!   [`NoncrossingMatching::delete_little_arc`],
//!   [`NoncrossingMatching::nest`].
//! - The Young-diagram order: [`NoncrossingMatching::young`],
//!   [`NoncrossingMatching::precedes`], [`NoncrossingMatching::covers_at`].
//! - Window tests: [`NoncrossingMatching::is_submatching`].
//!
//! All public indices are 1-based; the internal representation is 0-based.

use std::fmt;

use thiserror::Error;

/// Errors raised by matching constructors and window operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("pairing length {0} is odd")]
    OddLength(usize),
    #[error("pairing is not an involution at position {0}")]
    NotInvolution(usize),
    #[error("position {0} is matched to itself")]
    FixedPoint(usize),
    #[error("arcs ({0},{2}) and ({1},{3}) cross")]
    Crossing(usize, usize, usize, usize),
    #[error("invalid arc list: {0}")]
    BadArcs(String),
    #[error("opener sequence must be strictly increasing with a_j <= 2j-1, got {0:?}")]
    BadOpeners(Vec<usize>),
    #[error("invalid Dyck word: {0}")]
    BadDyck(String),
    #[error("positions {0},{1} do not form a little arc")]
    NotLittleArc(usize, usize),
    #[error("window [{0}, {1}] out of range for order {2}")]
    WindowOutOfRange(usize, usize, usize),
}

/// A balanced sequence of `+1`/`-1` steps with nonnegative prefix sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyckWord {
    steps: Vec<i8>,
}

impl DyckWord {
    /// Validates and wraps a step sequence.
    pub fn new(steps: Vec<i8>) -> Result<Self, MatchingError> {
        if steps.len() % 2 != 0 {
            return Err(MatchingError::BadDyck(format!(
                "odd length {}",
                steps.len()
            )));
        }
        let mut height = 0i64;
        for (i, &s) in steps.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(MatchingError::BadDyck(format!("step {i} is {s}")));
            }
            height += i64::from(s);
            if height < 0 {
                return Err(MatchingError::BadDyck(format!(
                    "negative prefix sum at position {}",
                    i + 1
                )));
            }
        }
        if height != 0 {
            return Err(MatchingError::BadDyck("nonzero total sum".into()));
        }
        Ok(Self { steps })
    }

    /// The step sequence.
    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// Half the length of the word.
    pub fn order(&self) -> usize {
        self.steps.len() / 2
    }
}

/// The strictly increasing positions of the up-steps of a Dyck word,
/// satisfying `a_j <= 2j - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpenerSequence {
    a: Vec<usize>,
}

impl OpenerSequence {
    /// Validates and wraps an opener sequence.
    pub fn new(a: Vec<usize>) -> Result<Self, MatchingError> {
        let ok = a.iter().enumerate().all(|(i, &x)| {
            x >= 1 && x <= 2 * (i + 1) - 1 && (i == 0 || a[i - 1] < x)
        });
        if ok {
            Ok(Self { a })
        } else {
            Err(MatchingError::BadOpeners(a))
        }
    }

    /// The positions, 1-based.
    pub fn positions(&self) -> &[usize] {
        &self.a
    }

    /// Number of arcs.
    pub fn order(&self) -> usize {
        self.a.len()
    }
}

/// A weakly increasing sequence with `a_j <= 2j - 1` (the index set of the
/// integral basis; opener sequences are the strict special case).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeakSequence {
    a: Vec<usize>,
}

impl WeakSequence {
    /// Validates and wraps a weak sequence.
    pub fn new(a: Vec<usize>) -> Result<Self, MatchingError> {
        let ok = a
            .iter()
            .enumerate()
            .all(|(i, &x)| x >= 1 && x <= 2 * (i + 1) - 1 && (i == 0 || a[i - 1] <= x));
        if ok {
            Ok(Self { a })
        } else {
            Err(MatchingError::BadOpeners(a))
        }
    }

    /// The entries, 1-based.
    pub fn entries(&self) -> &[usize] {
        &self.a
    }

    /// Length of the sequence.
    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// All weak sequences of the given order, in lexicographic order.
    pub fn all(n: usize) -> Vec<WeakSequence> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn rec(n: usize, cur: &mut Vec<usize>, out: &mut Vec<WeakSequence>) {
            if cur.len() == n {
                out.push(WeakSequence { a: cur.clone() });
                return;
            }
            let j = cur.len() + 1;
            let lo = cur.last().copied().unwrap_or(1);
            for x in lo..=(2 * j - 1) {
                cur.push(x);
                rec(n, cur, out);
                cur.pop();
            }
        }
        rec(n, &mut cur, &mut out);
        out
    }
}

/// A Young diagram contained in the staircase `(n-1, n-2, ..., 1)`,
/// stored as weakly decreasing parts with trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct YoungDiagram {
    parts: Vec<usize>,
}

impl YoungDiagram {
    /// Wraps weakly decreasing parts, trimming trailing zeros.
    pub fn new(mut parts: Vec<usize>) -> Self {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Self { parts }
    }

    /// The parts, largest first, no trailing zeros.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Total number of boxes.
    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Containment: every row of `self` fits inside the same row of `other`.
    pub fn contained_in(&self, other: &YoungDiagram) -> bool {
        self.parts
            .iter()
            .enumerate()
            .all(|(i, &p)| other.parts.get(i).copied().unwrap_or(0) >= p)
    }

    /// Comparison key for the canonical order: decreasing lexicographic on
    /// parts (bigger diagrams first).
    fn lex_key(&self, n: usize) -> Vec<usize> {
        let mut key = self.parts.clone();
        key.resize(n.saturating_sub(1), 0);
        key
    }
}

/// A fixed-point-free noncrossing involution of `{1, ..., 2n}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NoncrossingMatching {
    n: usize,
    /// 0-based partner table.
    pairing: Vec<u32>,
}

impl fmt::Debug for NoncrossingMatching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NoncrossingMatching{:?}", self.arcs())
    }
}

impl NoncrossingMatching {
    /// Builds from a 1-based partner table, validating the involution and
    /// noncrossing invariants.
    pub fn from_pairing(pairing_1based: &[usize]) -> Result<Self, MatchingError> {
        let len = pairing_1based.len();
        if len % 2 != 0 {
            return Err(MatchingError::OddLength(len));
        }
        let mut pairing = vec![0u32; len];
        for (i, &p) in pairing_1based.iter().enumerate() {
            if p == 0 || p > len {
                return Err(MatchingError::NotInvolution(i + 1));
            }
            pairing[i] = (p - 1) as u32;
        }
        let m = Self {
            n: len / 2,
            pairing,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds from a list of 1-based arcs.
    pub fn from_arcs(arcs: &[(usize, usize)]) -> Result<Self, MatchingError> {
        let len = arcs.len() * 2;
        let mut pairing = vec![usize::MAX; len];
        for &(a, b) in arcs {
            if a == 0 || b == 0 || a > len || b > len || a == b {
                return Err(MatchingError::BadArcs(format!("arc ({a},{b})")));
            }
            if pairing[a - 1] != usize::MAX || pairing[b - 1] != usize::MAX {
                return Err(MatchingError::BadArcs(format!(
                    "position reused by arc ({a},{b})"
                )));
            }
            pairing[a - 1] = b;
            pairing[b - 1] = a;
        }
        Self::from_pairing(&pairing)
    }

    fn validate(&self) -> Result<(), MatchingError> {
        let len = 2 * self.n;
        for i in 0..len {
            let p = self.pairing[i] as usize;
            if p == i {
                return Err(MatchingError::FixedPoint(i + 1));
            }
            if self.pairing[p] as usize != i {
                return Err(MatchingError::NotInvolution(i + 1));
            }
        }
        // Noncrossing: scan with a stack of open positions.
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..len {
            let p = self.pairing[i] as usize;
            if p > i {
                stack.push(i);
            } else {
                match stack.pop() {
                    Some(top) if top == p => {}
                    _ => {
                        return Err(MatchingError::Crossing(p + 1, i + 1, 0, 0));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of arcs.
    pub fn order(&self) -> usize {
        self.n
    }

    /// The 1-based partner of a 1-based position.
    pub fn partner(&self, i: usize) -> usize {
        self.pairing[i - 1] as usize + 1
    }

    /// The arcs as sorted 1-based pairs `(opener, closer)`.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        (0..2 * self.n)
            .filter(|&i| (self.pairing[i] as usize) > i)
            .map(|i| (i + 1, self.pairing[i] as usize + 1))
            .collect()
    }

    /// True when positions `j` and `j + 1` are matched to each other.
    pub fn has_little_arc(&self, j: usize) -> bool {
        j >= 1 && j < 2 * self.n && self.pairing[j - 1] as usize == j
    }

    /// The Dyck word: step `k` is `+1` exactly when the partner of `k` lies
    /// to the right of `k`.
    pub fn to_dyck(&self) -> DyckWord {
        let steps = (0..2 * self.n)
            .map(|i| if (self.pairing[i] as usize) > i { 1 } else { -1 })
            .collect();
        DyckWord { steps }
    }

    /// The positions of the up-steps of the Dyck word.
    pub fn to_openers(&self) -> OpenerSequence {
        let a = (0..2 * self.n)
            .filter(|&i| (self.pairing[i] as usize) > i)
            .map(|i| i + 1)
            .collect();
        OpenerSequence { a }
    }

    /// Rebuilds the matching whose up-steps sit at the given positions.
    pub fn from_openers(openers: &OpenerSequence) -> Self {
        let n = openers.order();
        let mut steps = vec![-1i8; 2 * n];
        for &p in openers.positions() {
            steps[p - 1] = 1;
        }
        Self::from_dyck(&DyckWord { steps }).expect("opener sequence yields a Dyck word")
    }

    /// Rebuilds the matching from a Dyck word by matching each down-step
    /// with the nearest unmatched up-step to its left.
    pub fn from_dyck(word: &DyckWord) -> Result<Self, MatchingError> {
        let len = word.steps.len();
        let mut pairing = vec![0u32; len];
        let mut stack: Vec<usize> = Vec::new();
        for (i, &s) in word.steps.iter().enumerate() {
            if s == 1 {
                stack.push(i);
            } else {
                let j = stack
                    .pop()
                    .ok_or_else(|| MatchingError::BadDyck("unmatched down-step".into()))?;
                pairing[i] = j as u32;
                pairing[j] = i as u32;
            }
        }
        if !stack.is_empty() {
            return Err(MatchingError::BadDyck("unmatched up-step".into()));
        }
        Ok(Self {
            n: len / 2,
            pairing,
        })
    }

    /// The matching of nested arcs `(j, 2n + 1 - j)`; its Young diagram is
    /// empty and it carries the minimal stationary weight.
    pub fn minimal(n: usize) -> Self {
        let pairing = (0..2 * n).map(|i| (2 * n - 1 - i) as u32).collect();
        Self { n, pairing }
    }

    /// The matching of little arcs `(2j - 1, 2j)`; its Young diagram is the
    /// full staircase and it carries the maximal stationary weight.
    pub fn maximal(n: usize) -> Self {
        let pairing = (0..2 * n)
            .map(|i| if i % 2 == 0 { i as u32 + 1 } else { i as u32 - 1 })
            .collect();
        Self { n, pairing }
    }

    /// The local rewiring operator: matches `k` with `k + 1` (wrapping to 1
    /// when `k = 2n`) and re-pairs their former partners.
    pub fn apply_e(&self, k: usize) -> Self {
        let len = 2 * self.n;
        assert!((1..=len).contains(&k), "operator index {k} out of range");
        let a = k - 1;
        let b = k % len;
        let pa = self.pairing[a] as usize;
        if pa == b {
            return self.clone();
        }
        let pb = self.pairing[b] as usize;
        let mut pairing = self.pairing.clone();
        pairing[a] = b as u32;
        pairing[b] = a as u32;
        pairing[pa] = pb as u32;
        pairing[pb] = pa as u32;
        let out = Self {
            n: self.n,
            pairing,
        };
        debug_assert!(out.validate().is_ok());
        out
    }

    /// Shifts every arc `(a, b)` to `(a + 1, b + 1)` modulo `2n`.
    pub fn rotate(&self) -> Self {
        let len = 2 * self.n;
        let mut pairing = vec![0u32; len];
        for i in 0..len {
            pairing[(i + 1) % len] = ((self.pairing[i] as usize + 1) % len) as u32;
        }
        Self {
            n: self.n,
            pairing,
        }
    }

    /// Inverse of [`Self::rotate`].
    pub fn rotate_inv(&self) -> Self {
        let len = 2 * self.n;
        let mut pairing = vec![0u32; len];
        for i in 0..len {
            pairing[(i + len - 1) % len] = ((self.pairing[i] as usize + len - 1) % len) as u32;
        }
        Self {
            n: self.n,
            pairing,
        }
    }

    /// Deletes the little arc at `(j, j + 1)` and relabels the remaining
    /// positions `1..=2n-2` preserving order.
    pub fn delete_little_arc(&self, j: usize) -> Result<Self, MatchingError> {
        if !self.has_little_arc(j) {
            return Err(MatchingError::NotLittleArc(j, j + 1));
        }
        let len = 2 * self.n;
        let old_of_new: Vec<usize> = (0..len).filter(|&i| i != j - 1 && i != j).collect();
        let mut new_of_old = vec![usize::MAX; len];
        for (ni, &oi) in old_of_new.iter().enumerate() {
            new_of_old[oi] = ni;
        }
        let pairing = old_of_new
            .iter()
            .map(|&oi| new_of_old[self.pairing[oi] as usize] as u32)
            .collect();
        Ok(Self {
            n: self.n - 1,
            pairing,
        })
    }

    /// Wraps the matching in `p` concentric outer arcs: opener positions
    /// become `(1, ..., p, p + a_1, ..., p + a_n)`.
    pub fn nest(&self, p: usize) -> Self {
        let a = nest_openers(&self.to_openers(), p);
        Self::from_openers(&a)
    }

    /// True when `self` restricted to the window
    /// `[offset, offset + 2k - 1]` equals `inner` shifted by `offset - 1`.
    pub fn is_submatching(
        &self,
        inner: &NoncrossingMatching,
        offset: usize,
    ) -> Result<bool, MatchingError> {
        let k = inner.order();
        let hi = offset + 2 * k - 1;
        if offset == 0 || hi > 2 * self.n {
            return Err(MatchingError::WindowOutOfRange(offset, hi, self.n));
        }
        Ok((1..=2 * k).all(|j| self.partner(offset - 1 + j) == offset - 1 + inner.partner(j)))
    }

    /// The Young diagram: part `i` counts the up-steps after the `i`-th
    /// down-step of the Dyck word.
    pub fn young(&self) -> YoungDiagram {
        let word = self.to_dyck();
        let mut parts = Vec::new();
        let mut ups_remaining = self.n;
        for &s in word.steps() {
            if s == 1 {
                ups_remaining -= 1;
            } else {
                parts.push(ups_remaining);
            }
        }
        YoungDiagram::new(parts)
    }

    /// Young-diagram containment: true when `self`'s diagram fits inside
    /// `other`'s.
    pub fn precedes(&self, other: &NoncrossingMatching) -> bool {
        self.young().contained_in(&other.young())
    }

    /// When `other`'s diagram is `self`'s diagram plus a single box, returns
    /// the 1-based position `j` such that `self` has a little arc at
    /// `(j, j + 1)` where `other` has a valley.
    pub fn covers_at(&self, other: &NoncrossingMatching) -> Option<usize> {
        if self.n != other.n {
            return None;
        }
        let a = self.to_dyck();
        let b = other.to_dyck();
        let diff: Vec<usize> = (0..2 * self.n)
            .filter(|&i| a.steps()[i] != b.steps()[i])
            .collect();
        match diff.as_slice() {
            [i, j]
                if *j == i + 1
                    && a.steps()[*i] == 1
                    && a.steps()[*j] == -1
                    && b.steps()[*i] == -1 =>
            {
                Some(i + 1)
            }
            _ => None,
        }
    }
}

/// The opener-sequence form of nesting: `(1, ..., p, p + a_1, ..., p + a_n)`.
pub fn nest_openers(a: &OpenerSequence, p: usize) -> OpenerSequence {
    let mut out: Vec<usize> = (1..=p).collect();
    out.extend(a.positions().iter().map(|&x| x + p));
    OpenerSequence::new(out).expect("nesting preserves opener invariants")
}

/// All noncrossing matchings of order `n` in the canonical order:
/// decreasing lexicographic order of their Young diagrams.
pub fn enumerate(n: usize) -> Vec<NoncrossingMatching> {
    let mut words: Vec<Vec<i8>> = Vec::new();
    let mut cur = Vec::with_capacity(2 * n);
    fn rec(remaining_up: usize, height: usize, cur: &mut Vec<i8>, out: &mut Vec<Vec<i8>>) {
        if remaining_up == 0 && height == 0 {
            out.push(cur.clone());
            return;
        }
        if remaining_up > 0 {
            cur.push(1);
            rec(remaining_up - 1, height + 1, cur, out);
            cur.pop();
        }
        if height > 0 {
            cur.push(-1);
            rec(remaining_up, height - 1, cur, out);
            cur.pop();
        }
    }
    rec(n, 0, &mut cur, &mut words);
    let mut ms: Vec<NoncrossingMatching> = words
        .into_iter()
        .map(|steps| NoncrossingMatching::from_dyck(&DyckWord { steps }).unwrap())
        .collect();
    ms.sort_by(|x, y| y.young().lex_key(n).cmp(&x.young().lex_key(n)));
    ms
}

/// The `n`-th Catalan number as a `u64` (valid for `n <= 30`).
pub fn catalan(n: usize) -> u64 {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(arcs: &[(usize, usize)]) -> NoncrossingMatching {
        NoncrossingMatching::from_arcs(arcs).unwrap()
    }

    #[test]
    fn test_enumerate_counts() {
        let expected = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796];
        for (n, &cnt) in expected.iter().enumerate().take(11) {
            assert_eq!(enumerate(n).len() as u64, cnt, "n={n}");
            assert_eq!(catalan(n), cnt);
        }
    }

    #[test]
    fn test_enumerate_canonical_order_small() {
        let order3: Vec<Vec<(usize, usize)>> =
            enumerate(3).iter().map(|p| p.arcs()).collect();
        assert_eq!(
            order3,
            vec![
                vec![(1, 2), (3, 4), (5, 6)],
                vec![(1, 2), (3, 6), (4, 5)],
                vec![(1, 4), (2, 3), (5, 6)],
                vec![(1, 6), (2, 3), (4, 5)],
                vec![(1, 6), (2, 5), (3, 4)],
            ]
        );
        // Maximal matching first, minimal last, for every order.
        for n in 1..=6 {
            let ms = enumerate(n);
            assert_eq!(ms[0], NoncrossingMatching::maximal(n));
            assert_eq!(ms[ms.len() - 1], NoncrossingMatching::minimal(n));
        }
    }

    #[test]
    fn test_enumerate_no_duplicates() {
        for n in 0..=7 {
            let ms = enumerate(n);
            let set: std::collections::HashSet<_> = ms.iter().cloned().collect();
            assert_eq!(set.len(), ms.len());
        }
    }

    #[test]
    fn test_openers_examples() {
        assert_eq!(m(&[(1, 2), (3, 4)]).to_openers().positions(), &[1, 3]);
        assert_eq!(m(&[(1, 4), (2, 3)]).to_openers().positions(), &[1, 2]);
        let a = OpenerSequence::new(vec![1, 2, 3]).unwrap();
        assert_eq!(
            NoncrossingMatching::from_openers(&a),
            m(&[(1, 6), (2, 5), (3, 4)])
        );
    }

    #[test]
    fn test_openers_validation() {
        assert!(OpenerSequence::new(vec![1, 4]).is_err()); // a_2 > 3
        assert!(OpenerSequence::new(vec![2, 3]).is_err()); // a_1 > 1
        assert!(OpenerSequence::new(vec![1, 1]).is_err()); // not strict
        assert!(WeakSequence::new(vec![1, 1]).is_ok());
        assert!(WeakSequence::new(vec![1, 4]).is_err());
        assert!(WeakSequence::new(vec![2, 1]).is_err());
    }

    #[test]
    fn test_weak_sequence_counts() {
        // 1, 1*3, 1*3*5, ... restricted by weak monotonicity: the counts are
        // the odd double factorial of choices filtered to weakly increasing.
        assert_eq!(WeakSequence::all(1).len(), 1);
        assert_eq!(WeakSequence::all(2).len(), 3);
        assert_eq!(WeakSequence::all(3).len(), 12);
    }

    #[test]
    fn test_apply_e_examples() {
        let little = m(&[(1, 2), (3, 4)]);
        let nested = m(&[(1, 4), (2, 3)]);
        assert_eq!(little.apply_e(1), little);
        assert_eq!(little.apply_e(2), nested);
        assert_eq!(little.apply_e(4), nested); // wraparound joins 4 and 1
    }

    #[test]
    fn test_rotate_examples() {
        let little = m(&[(1, 2), (3, 4)]);
        let nested = m(&[(1, 4), (2, 3)]);
        assert_eq!(little.rotate(), nested);
        assert_eq!(little.rotate().rotate(), little);
        assert_eq!(
            NoncrossingMatching::maximal(3).rotate(),
            m(&[(2, 3), (4, 5), (6, 1)])
        );
        for n in 1..=5 {
            for p in enumerate(n) {
                let mut r = p.clone();
                for _ in 0..2 * n {
                    r = r.rotate();
                }
                assert_eq!(r, p);
                assert_eq!(p.rotate().rotate_inv(), p);
            }
        }
    }

    #[test]
    fn test_delete_little_arc_examples() {
        assert_eq!(
            m(&[(1, 2), (3, 4)]).delete_little_arc(1).unwrap(),
            m(&[(1, 2)])
        );
        assert_eq!(
            m(&[(1, 4), (2, 3)]).delete_little_arc(2).unwrap(),
            m(&[(1, 2)])
        );
        assert_eq!(
            NoncrossingMatching::minimal(3).delete_little_arc(3).unwrap(),
            NoncrossingMatching::minimal(2)
        );
        assert!(m(&[(1, 2), (3, 4)]).delete_little_arc(2).is_err());
    }

    #[test]
    fn test_nest_examples() {
        assert_eq!(m(&[(1, 2)]).nest(1), m(&[(1, 4), (2, 3)]));
        let a = OpenerSequence::new(vec![1, 3]).unwrap();
        assert_eq!(nest_openers(&a, 2).positions(), &[1, 2, 3, 5]);
        for p in enumerate(3) {
            assert_eq!(p.nest(0), p);
        }
    }

    #[test]
    fn test_is_submatching_examples() {
        let arc = m(&[(1, 2)]);
        let little = m(&[(1, 2), (3, 4)]);
        let nested = m(&[(1, 4), (2, 3)]);
        assert!(little.is_submatching(&arc, 1).unwrap());
        assert!(nested.is_submatching(&arc, 2).unwrap());
        assert!(!little.is_submatching(&nested, 1).unwrap());
        assert!(little.is_submatching(&little, 1).unwrap());
        assert!(arc.is_submatching(&little, 1).is_err());
    }

    #[test]
    fn test_young_examples() {
        for n in 1..=6 {
            assert_eq!(NoncrossingMatching::minimal(n).young().parts(), &[] as &[usize]);
            let staircase: Vec<usize> = (1..n).rev().collect();
            assert_eq!(NoncrossingMatching::maximal(n).young().parts(), &staircase[..]);
            for p in enumerate(n.min(5)) {
                assert!(NoncrossingMatching::minimal(n.min(5)).precedes(&p));
            }
        }
        assert_eq!(m(&[(1, 2), (3, 6), (4, 5)]).young().parts(), &[2]);
        assert_eq!(m(&[(1, 4), (2, 3), (5, 6)]).young().parts(), &[1, 1]);
    }

    #[test]
    fn test_covers_at() {
        // Flipping a little arc (peak) of pi to a valley adds one box.
        for n in 2..=5 {
            for pi in enumerate(n) {
                for j in 1..2 * n {
                    if !pi.has_little_arc(j) {
                        continue;
                    }
                    let w = pi.to_dyck();
                    let mut steps = w.steps().to_vec();
                    steps[j - 1] = -1;
                    steps[j] = 1;
                    if let Ok(word) = DyckWord::new(steps) {
                        let sigma = NoncrossingMatching::from_dyck(&word).unwrap();
                        assert_eq!(pi.covers_at(&sigma), Some(j));
                        assert_eq!(sigma.covers_at(&pi), None);
                        assert_eq!(
                            pi.young().size() + 1,
                            sigma.young().size(),
                            "cover adds one box"
                        );
                        assert!(pi.precedes(&sigma));
                    }
                }
            }
        }
        // Concrete anchor: the two order-2 matchings.
        let little = m(&[(1, 2), (3, 4)]);
        let nested = m(&[(1, 4), (2, 3)]);
        assert_eq!(nested.covers_at(&little), Some(2));
        assert_eq!(little.covers_at(&nested), None);
    }

    #[test]
    fn test_crossing_rejected() {
        assert!(matches!(
            NoncrossingMatching::from_arcs(&[(1, 3), (2, 4)]),
            Err(MatchingError::Crossing(..))
        ));
        assert!(NoncrossingMatching::from_pairing(&[1, 2]).is_err());
        assert!(NoncrossingMatching::from_pairing(&[2, 1, 3, 4]).is_err());
    }

    proptest! {
        #[test]
        fn prop_roundtrip_openers(n in 1usize..=8, seed in 0u64..1000) {
            let ms = enumerate(n);
            let p = &ms[(seed as usize) % ms.len()];
            prop_assert_eq!(&NoncrossingMatching::from_openers(&p.to_openers()), p);
            let via_dyck = NoncrossingMatching::from_dyck(&p.to_dyck()).unwrap();
            prop_assert_eq!(&via_dyck, p);
        }

        #[test]
        fn prop_e_idempotent(n in 1usize..=6, seed in 0u64..1000, k in 1usize..=12) {
            let ms = enumerate(n);
            let p = &ms[(seed as usize) % ms.len()];
            let k = (k - 1) % (2 * n) + 1;
            let once = p.apply_e(k);
            prop_assert_eq!(once.apply_e(k), once);
        }

        #[test]
        fn prop_rotate_conjugates_e(n in 1usize..=5, seed in 0u64..1000, k in 1usize..=10) {
            let ms = enumerate(n);
            let p = &ms[(seed as usize) % ms.len()];
            let k = (k - 1) % (2 * n) + 1;
            prop_assert_eq!(p.rotate().apply_e(k % (2 * n) + 1), p.apply_e(k).rotate());
        }
    }

    #[test]
    fn test_rotate_conjugation_exhaustive() {
        // Shifting labels conjugates the rewiring operators forward by one.
        for n in 1..=5 {
            for p in enumerate(n) {
                for k in 1..=2 * n {
                    assert_eq!(p.rotate().apply_e(k % (2 * n) + 1), p.apply_e(k).rotate());
                }
            }
        }
    }
}
