//! Parsing of command-line matchings, events, and sample counts.

use wheelperc::matchings::{NoncrossingMatching, OpenerSequence};

use crate::error::CliError;

/// Parses a matching given either as a JSON arc list (`[[1,4],[2,3]]`)
/// or as a comma-separated opener sequence (`1,2`); both normalize to
/// the same matching.
pub fn parse_matching(s: &str) -> Result<NoncrossingMatching, CliError> {
    let t = s.trim();
    if t.starts_with('[') {
        let arcs = parse_arc_list(t)?;
        NoncrossingMatching::from_arcs(&arcs)
            .map_err(|e| CliError::BadMatching(s.to_string(), e.to_string()))
    } else {
        let a = parse_usize_csv(t).map_err(|m| CliError::BadMatching(s.to_string(), m))?;
        let openers = OpenerSequence::new(a)
            .map_err(|e| CliError::BadMatching(s.to_string(), e.to_string()))?;
        Ok(NoncrossingMatching::from_openers(&openers))
    }
}

/// Parses a JSON list of endpoint pairs; pairs need not be noncrossing.
pub fn parse_arc_list(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    let pairs: Vec<[usize; 2]> = serde_json::from_str(s.trim())
        .map_err(|e| CliError::BadMatching(s.to_string(), e.to_string()))?;
    Ok(pairs.into_iter().map(|[a, b]| (a, b)).collect())
}

fn parse_usize_csv(t: &str) -> Result<Vec<usize>, String> {
    t.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect()
}

/// Parses a comma-separated nonnegative integer sequence.
pub fn parse_sequence(s: &str) -> Result<Vec<usize>, CliError> {
    parse_usize_csv(s.trim()).map_err(|m| CliError::BadSequence(s.to_string(), m))
}

/// Parses a sample count given as an integer ("100000"), a decimal, or
/// scientific notation ("1e6").
pub fn parse_samples(s: &str) -> Result<u64, CliError> {
    let t = s.trim();
    if let Ok(v) = t.parse::<u64>() {
        if v >= 1 {
            return Ok(v);
        }
    }
    if let Ok(f) = t.parse::<f64>() {
        if f.is_finite() && f >= 1.0 && f <= 9.0e15 && f.fract() == 0.0 {
            return Ok(f as u64);
        }
    }
    Err(CliError::BadSamples(s.to_string()))
}

/// A simulation event: a window submatching, an anti-cluster condition,
/// or an explicit list of endpoint pairs.
#[derive(Debug, Clone)]
pub enum EventSpec {
    Submatching(NoncrossingMatching),
    Anticluster(usize),
    Pairs(Vec<(usize, usize)>),
}

/// Parses `--event` strings: `submatching:[[1,2]]` (or `submatching:1`
/// with opener syntax), `anticluster:3`, `pairs:[[1,4],[2,3]]`.
pub fn parse_event(s: &str) -> Result<EventSpec, CliError> {
    let t = s.trim();
    let (kind, rest) = t
        .split_once(':')
        .ok_or_else(|| CliError::BadEvent(s.to_string(), "expected `kind:spec`".to_string()))?;
    match kind.trim() {
        "submatching" => Ok(EventSpec::Submatching(parse_matching(rest)?)),
        "anticluster" => {
            let k: usize = rest
                .trim()
                .parse()
                .map_err(|_| CliError::BadEvent(s.to_string(), "expected an order".to_string()))?;
            if k == 0 {
                return Err(CliError::BadEvent(s.to_string(), "order must be >= 1".to_string()));
            }
            Ok(EventSpec::Anticluster(k))
        }
        "pairs" => {
            let pairs = parse_arc_list(rest)
                .map_err(|e| CliError::BadEvent(s.to_string(), e.to_string()))?;
            if pairs.is_empty() {
                return Err(CliError::BadEvent(s.to_string(), "empty pair list".to_string()));
            }
            Ok(EventSpec::Pairs(pairs))
        }
        other => Err(CliError::BadEvent(
            s.to_string(),
            format!("unknown event kind `{other}` (expected submatching, anticluster, pairs)"),
        )),
    }
}

/// Validates pair endpoints against the system order: in range, distinct.
pub fn validate_pairs(pairs: &[(usize, usize)], n: usize) -> Result<(), CliError> {
    let mut seen = vec![false; 2 * n + 1];
    for &(a, b) in pairs {
        if a == b {
            return Err(CliError::BadEvent(
                format!("{pairs:?}"),
                format!("degenerate pair ({a},{b})"),
            ));
        }
        for x in [a, b] {
            if x < 1 || x > 2 * n {
                return Err(CliError::BadEvent(
                    format!("{pairs:?}"),
                    format!("endpoint {x} outside 1..={}", 2 * n),
                ));
            }
            if seen[x] {
                return Err(CliError::BadEvent(
                    format!("{pairs:?}"),
                    format!("endpoint {x} repeated"),
                ));
            }
            seen[x] = true;
        }
    }
    Ok(())
}
