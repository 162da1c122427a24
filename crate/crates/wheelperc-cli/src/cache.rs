//! Optional on-disk memoization of stationary vectors and change-of-basis
//! matrices, controlled by `WHEELPERC_CACHE_DIR`.
//!
//! Artifacts are versioned JSON; a version or shape mismatch is treated
//! as a miss. IO failures degrade to recomputation with a diagnostic on
//! stderr, never a command failure.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use wheelperc::linalg::CatMatrix;

const CACHE_VERSION: u32 = 1;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "WHEELPERC_CACHE_DIR";

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

#[derive(Serialize, Deserialize)]
struct MuArtifact {
    version: u32,
    kind: String,
    n: usize,
    asm: String,
    alpha: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct CMatrixArtifact {
    version: u32,
    kind: String,
    n: usize,
    entries: Vec<Vec<String>>,
}

fn read_artifact<T: for<'de> Deserialize<'de>>(name: &str) -> Option<T> {
    let path = cache_dir()?.join(name);
    let data = fs::read_to_string(&path).ok()?;
    serde_json::from_str(&data).ok()
}

fn write_artifact<T: Serialize>(name: &str, value: &T) {
    let Some(dir) = cache_dir() else { return };
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("cache: cannot create {}: {e}", dir.display());
        return;
    }
    let path = dir.join(name);
    match serde_json::to_string(value) {
        Ok(data) => {
            if let Err(e) = fs::write(&path, data) {
                eprintln!("cache: cannot write {}: {e}", path.display());
            }
        }
        Err(e) => eprintln!("cache: cannot serialize {name}: {e}"),
    }
}

fn parse_bigint(s: &str) -> Option<BigInt> {
    BigInt::from_str(s).ok()
}

/// Loads cached stationary data `(asm, alpha)` for order `n`.
pub fn load_mu(n: usize, expected_len: usize) -> Option<(BigInt, Vec<BigInt>)> {
    let art: MuArtifact = read_artifact(&format!("mu_v{CACHE_VERSION}_n{n}.json"))?;
    if art.version != CACHE_VERSION || art.kind != "mu" || art.n != n {
        return None;
    }
    if art.alpha.len() != expected_len {
        return None;
    }
    let asm = parse_bigint(&art.asm)?;
    let alpha = art.alpha.iter().map(|s| parse_bigint(s)).collect::<Option<Vec<_>>>()?;
    if alpha.iter().sum::<BigInt>() != asm {
        return None;
    }
    eprintln!("cache: loaded mu n={n}");
    Some((asm, alpha))
}

/// Stores stationary data for order `n`.
pub fn store_mu(n: usize, asm: &BigInt, alpha: &[BigInt]) {
    let art = MuArtifact {
        version: CACHE_VERSION,
        kind: "mu".to_string(),
        n,
        asm: asm.to_string(),
        alpha: alpha.iter().map(BigInt::to_string).collect(),
    };
    write_artifact(&format!("mu_v{CACHE_VERSION}_n{n}.json"), &art);
}

/// Loads the cached change-of-basis matrix for order `n`.
pub fn load_cmatrix(n: usize, dim: usize) -> Option<CatMatrix<BigInt>> {
    let art: CMatrixArtifact = read_artifact(&format!("cmatrix_v{CACHE_VERSION}_n{n}.json"))?;
    if art.version != CACHE_VERSION || art.kind != "cmatrix" || art.n != n {
        return None;
    }
    if art.entries.len() != dim || art.entries.iter().any(|r| r.len() != dim) {
        return None;
    }
    let mut rows = Vec::with_capacity(dim);
    for row in &art.entries {
        let parsed: Option<Vec<BigInt>> = row.iter().map(|s| parse_bigint(s)).collect();
        rows.push(parsed?);
    }
    eprintln!("cache: loaded cmatrix n={n}");
    Some(CatMatrix::from_fn(dim, dim, |i, j| rows[i][j].clone()))
}

/// Stores the change-of-basis matrix for order `n`.
pub fn store_cmatrix(n: usize, m: &CatMatrix<BigInt>) {
    let art = CMatrixArtifact {
        version: CACHE_VERSION,
        kind: "cmatrix".to_string(),
        n,
        entries: (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect())
            .collect(),
    };
    write_artifact(&format!("cmatrix_v{CACHE_VERSION}_n{n}.json"), &art);
}
