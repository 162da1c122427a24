//! Monte Carlo sampling of the cylinder connectivity pattern.
//!
//! Provides:
//! - [`sample_matching`]: exact-in-distribution sampling by composing
//!   i.i.d. uniform rewiring diagrams outward from the boundary until
//!   every endpoint is matched.
//! - [`sample_matching_rows`]: alternative backend composing full
//!   plaquette rows with fair tile bits; also exact in distribution.
//! - [`estimate_event`]: sharded estimation of an event probability with
//!   an exact-binomial confidence interval.
//! - [`sample_histogram`]: per-matching counts over the canonical
//!   enumeration, for goodness-of-fit checks.
//! - [`chi_square_pvalue`]: the upper tail of the histogram statistic
//!   against exact expected probabilities.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::dynamics::PlaquetteRow;
use crate::linalg::Rational;
use crate::matchings::{enumerate, NoncrossingMatching};

/// Default bound on diagram applications per sample, per unit of order.
pub const DEFAULT_STEP_FACTOR: usize = 1_000_000;

/// Number of independent RNG streams an estimate is sharded over; fixed
/// so results depend only on the seed, not the thread count.
const SHARDS: u64 = 64;

/// Errors from the sampling layer.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(
        "sampler exceeded {steps} steps at order {n} with {recorded} of {n} pairs matched; \
         this indicates a frontier bookkeeping bug"
    )]
    StepCapExceeded { n: usize, steps: usize, recorded: usize },
}

/// One frontier strand end: either an original boundary endpoint or an
/// internal strand whose other end sits at the given frontier position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Boundary(u32),
    Peer(u32),
}

/// Tracks which strands occupy the `2n` frontier positions and which
/// boundary endpoints have been matched so far.
#[derive(Debug, Clone)]
pub struct FrontierState {
    labels: Vec<Label>,
    pairing: Vec<usize>,
    recorded: usize,
}

impl FrontierState {
    fn new(n: usize) -> Self {
        Self {
            labels: (0..2 * n as u32).map(Label::Boundary).collect(),
            pairing: vec![0; 2 * n],
            recorded: 0,
        }
    }

    fn order(&self) -> usize {
        self.labels.len() / 2
    }

    /// True once every boundary endpoint is matched.
    pub fn complete(&self) -> bool {
        self.recorded == self.order()
    }

    /// Joins the strands at frontier positions `a` and `b` (a cap),
    /// recording a match when both are boundary endpoints.
    fn cap_join(&mut self, a: usize, b: usize) {
        match (self.labels[a], self.labels[b]) {
            (Label::Boundary(i), Label::Boundary(j)) => {
                self.pairing[i as usize] = j as usize + 1;
                self.pairing[j as usize] = i as usize + 1;
                self.recorded += 1;
            }
            (Label::Boundary(i), Label::Peer(m)) => {
                self.labels[m as usize] = Label::Boundary(i);
            }
            (Label::Peer(m), Label::Boundary(j)) => {
                self.labels[m as usize] = Label::Boundary(j);
            }
            (Label::Peer(m1), Label::Peer(m2)) => {
                // A strand whose two ends meet closes into a loop.
                if m1 as usize != b {
                    self.labels[m1 as usize] = Label::Peer(m2);
                    self.labels[m2 as usize] = Label::Peer(m1);
                }
            }
        }
    }

    /// A cap followed by a fresh internal pair at the same positions,
    /// as produced by one rewiring diagram.
    fn cap_and_cup(&mut self, a: usize, b: usize) {
        self.cap_join(a, b);
        self.labels[a] = Label::Peer(b as u32);
        self.labels[b] = Label::Peer(a as u32);
    }

    fn into_matching(self) -> NoncrossingMatching {
        NoncrossingMatching::from_pairing(&self.pairing)
            .expect("frontier composition produces a noncrossing matching")
    }
}

/// Draws one matching distributed exactly as the stationary law, with an
/// explicit step cap.
pub fn sample_matching_capped(
    n: usize,
    rng: &mut impl Rng,
    cap: usize,
) -> Result<NoncrossingMatching, SimError> {
    assert!(n >= 1);
    let mut state = FrontierState::new(n);
    let mut steps = 0usize;
    while !state.complete() {
        if steps >= cap {
            return Err(SimError::StepCapExceeded {
                n,
                steps,
                recorded: state.recorded,
            });
        }
        let k = rng.gen_range(0..2 * n);
        state.cap_and_cup(k, (k + 1) % (2 * n));
        steps += 1;
    }
    Ok(state.into_matching())
}

/// Draws one matching distributed exactly as the stationary law by
/// composing uniform rewiring diagrams outward from the boundary.
pub fn sample_matching(n: usize, rng: &mut impl Rng) -> Result<NoncrossingMatching, SimError> {
    sample_matching_capped(n, rng, DEFAULT_STEP_FACTOR.saturating_mul(n))
}

/// Draws one matching by composing full plaquette rows with fair tile
/// bits; exact in distribution, provided as an independent backend.
pub fn sample_matching_rows(
    n: usize,
    rng: &mut impl Rng,
) -> Result<NoncrossingMatching, SimError> {
    assert!(n >= 1 && 2 * n <= 32);
    let m = 2 * n;
    let mut state = FrontierState::new(n);
    let mut rows = 0usize;
    let cap = DEFAULT_STEP_FACTOR.saturating_mul(n);
    while !state.complete() {
        if rows >= cap {
            return Err(SimError::StepCapExceeded {
                n,
                steps: rows,
                recorded: state.recorded,
            });
        }
        let bits = rng.gen::<u32>() & (((1u64 << m) - 1) as u32);
        let row = PlaquetteRow::new(n, bits);
        let pair = row.pairing();
        // The row's bottom points (ids m..2m) face the current frontier;
        // its top points (ids 0..m) become the next frontier.
        let mut old_to_new = vec![usize::MAX; m];
        for b in 0..m {
            let dest = pair[m + b];
            if dest >= m {
                // Bottom-bottom connection: a cap joining two frontier
                // strands. Process each such pair once.
                let other = dest - m;
                if b < other {
                    state.cap_join(b, other);
                }
            } else {
                old_to_new[b] = dest;
            }
        }
        let mut new_labels = vec![Label::Peer(u32::MAX); m];
        for t in 0..m {
            let src = pair[t];
            if src < m {
                // Top-top connection: a cup creating an internal pair.
                new_labels[t] = Label::Peer(src as u32);
            } else {
                let b = src - m;
                new_labels[t] = match state.labels[b] {
                    Label::Boundary(i) => Label::Boundary(i),
                    Label::Peer(p) => Label::Peer(old_to_new[p as usize] as u32),
                };
            }
        }
        state.labels = new_labels;
        rows += 1;
    }
    Ok(state.into_matching())
}

/// Result of a sharded event estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub samples: u64,
    pub hits: u64,
    pub seed: u64,
}

impl SampleStats {
    /// Point estimate of the event probability.
    pub fn estimate(&self) -> f64 {
        self.hits as f64 / self.samples as f64
    }

    /// Exact-binomial (Clopper-Pearson) 99% confidence interval.
    pub fn ci99(&self) -> (f64, f64) {
        clopper_pearson(self.hits, self.samples, 0.99)
    }
}

/// Exact-binomial two-sided confidence interval at the given level.
pub fn clopper_pearson(hits: u64, samples: u64, level: f64) -> (f64, f64) {
    assert!(samples > 0 && hits <= samples);
    let alpha = 1.0 - level;
    let (h, s) = (hits as f64, samples as f64);
    let lower = if hits == 0 {
        0.0
    } else {
        Beta::new(h, s - h + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let upper = if hits == samples {
        1.0
    } else {
        Beta::new(h + 1.0, s - h).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (lower, upper)
}

fn shard_sizes(samples: u64) -> Vec<(u64, u64)> {
    let shards = SHARDS.min(samples.max(1));
    (0..shards)
        .map(|w| {
            let base = samples / shards;
            let extra = u64::from(w < samples % shards);
            (w, base + extra)
        })
        .collect()
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Estimates the probability of an event by sampling `samples` matchings
/// across fixed per-seed RNG streams; the result depends only on the
/// seed, not on the worker count.
pub fn estimate_event<F>(
    n: usize,
    predicate: F,
    samples: u64,
    seed: u64,
) -> Result<SampleStats, SimError>
where
    F: Fn(&NoncrossingMatching) -> bool + Sync,
{
    assert!(samples >= 1);
    let hits = shard_sizes(samples)
        .into_par_iter()
        .map(|(stream, count)| {
            let mut rng = stream_rng(seed, stream);
            let mut local = 0u64;
            for _ in 0..count {
                if predicate(&sample_matching(n, &mut rng)?) {
                    local += 1;
                }
            }
            Ok(local)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(SampleStats {
        n,
        samples,
        hits,
        seed,
    })
}

/// Per-matching sample counts over the canonical enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramStats {
    pub n: usize,
    pub samples: u64,
    pub counts: Vec<u64>,
    pub seed: u64,
}

/// Samples a full per-matching histogram in canonical order. With
/// `extra_step`, one additional uniform rewiring is applied to each
/// sample before recording (a stationarity smoke test: the histogram
/// law is unchanged).
pub fn sample_histogram(
    n: usize,
    samples: u64,
    seed: u64,
    extra_step: bool,
) -> Result<HistogramStats, SimError> {
    assert!(samples >= 1);
    let order = enumerate(n);
    let index: HashMap<&NoncrossingMatching, usize> =
        order.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let counts = shard_sizes(samples)
        .into_par_iter()
        .map(|(stream, count)| {
            let mut rng = stream_rng(seed, stream);
            let mut local = vec![0u64; order.len()];
            for _ in 0..count {
                let mut p = sample_matching(n, &mut rng)?;
                if extra_step {
                    p = p.apply_e(rng.gen_range(1..=2 * n));
                }
                local[index[&p]] += 1;
            }
            Ok(local)
        })
        .try_reduce(
            || vec![0u64; order.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok(HistogramStats {
        n,
        samples,
        counts,
        seed,
    })
}

/// The goodness-of-fit statistic of observed counts against exact
/// expected probabilities, and its upper-tail p-value.
pub fn chi_square_pvalue(counts: &[u64], expected: &[Rational]) -> (f64, f64) {
    assert_eq!(counts.len(), expected.len());
    assert!(counts.len() >= 2);
    let total: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(expected.iter())
        .map(|(&obs, p)| {
            let e = p.to_f64().expect("probability fits in a double") * total as f64;
            let d = obs as f64 - e;
            d * d / e
        })
        .sum();
    let dof = (counts.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
    (stat, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::stationary;
    use crate::linalg::ratio;

    #[test]
    fn test_order_one_always_single_arc() {
        let mut rng = stream_rng(7, 0);
        for _ in 0..50 {
            let p = sample_matching(1, &mut rng).unwrap();
            assert_eq!(p.partner(1), 2);
        }
    }

    #[test]
    fn test_seed_determinism() {
        let a = estimate_event(3, |p| p.partner(1) == 2, 2000, 42).unwrap();
        let b = estimate_event(3, |p| p.partner(1) == 2, 2000, 42).unwrap();
        assert_eq!(a, b);
        let c = estimate_event(3, |p| p.partner(1) == 2, 2000, 43).unwrap();
        assert_ne!(a.hits, c.hits);
    }

    #[test]
    fn test_order_two_estimate() {
        let n = 100_000u64;
        let stats = estimate_event(2, |p| p.partner(1) == 2, n, 42).unwrap();
        let tol = 3.0 * (0.25 / n as f64).sqrt();
        assert!((stats.estimate() - 0.5).abs() < tol, "estimate {}", stats.estimate());
        let (lo, hi) = stats.ci99();
        assert!(lo < 0.5 && 0.5 < hi);
    }

    #[test]
    fn test_histogram_chi_square() {
        let hist = sample_histogram(3, 100_000, 42, false).unwrap();
        assert_eq!(hist.counts.iter().sum::<u64>(), 100_000);
        let mu = stationary(3);
        let (_, p) = chi_square_pvalue(&hist.counts, &mu);
        assert!(p > 0.001, "p-value {p}");
    }

    #[test]
    fn test_stationarity_smoke() {
        for n in 2..=4 {
            let hist = sample_histogram(n, 40_000, 17, true).unwrap();
            let mu = stationary(n);
            let (_, p) = chi_square_pvalue(&hist.counts, &mu);
            assert!(p > 0.001, "n={n}, p-value {p}");
        }
    }

    #[test]
    fn test_row_backend_agrees() {
        let mut rng = stream_rng(99, 0);
        let order = enumerate(3);
        let index: HashMap<&NoncrossingMatching, usize> =
            order.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut counts = vec![0u64; order.len()];
        let samples = 40_000;
        for _ in 0..samples {
            counts[index[&sample_matching_rows(3, &mut rng).unwrap()]] += 1;
        }
        assert_eq!(counts.iter().sum::<u64>(), samples);
        let mu = stationary(3);
        let (_, p) = chi_square_pvalue(&counts, &mu);
        assert!(p > 0.001, "p-value {p}");
    }

    #[test]
    fn test_arc_event_interval() {
        let stats = estimate_event(5, |p| p.partner(2) == 3, 100_000, 42).unwrap();
        let (lo, hi) = stats.ci99();
        let exact = ratio(13, 33).to_f64().unwrap();
        assert!(lo < exact && exact < hi, "interval ({lo}, {hi})");
    }

    #[test]
    fn test_step_cap() {
        let mut rng = stream_rng(1, 0);
        let err = sample_matching_capped(2, &mut rng, 0).unwrap_err();
        assert!(matches!(err, SimError::StepCapExceeded { recorded: 0, .. }));
    }

    #[test]
    fn test_clopper_pearson_edges() {
        let (lo, hi) = clopper_pearson(0, 100, 0.99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
        let (lo, hi) = clopper_pearson(100, 100, 0.99);
        assert!(lo > 0.9 && lo < 1.0);
        assert_eq!(hi, 1.0);
    }
}
