//! Exact computation of connectivity-pattern distributions of cylindrical
//! loop percolation, with Monte Carlo cross-checks.
//!
//! The crate is organized in seven layers:
//! - [`matchings`]: noncrossing matchings, their encodings (involution, Dyck
//!   word, opener sequence), the Young-diagram partial order, and the
//!   elementary operators acting on them.
//! - [`linalg`]: exact scalars ([`linalg::Rational`],
//!   [`linalg::Eisenstein`]) and the shared kernels: 1-d nullspace,
//!   unitriangular integer inversion, Lagrange interpolation.
//! - [`dynamics`]: the Markov/transfer layer: `S`, the Hamiltonian,
//!   plaquette-row operators, the transfer matrix, and the exact stationary
//!   distribution over noncrossing matchings.
//! - [`ct`]: sparse multivariate big-integer polynomials and the
//!   coefficient-extraction engine behind every constant-term evaluation.
//! - [`qkz`]: the change-of-basis layer: the character `chi`, the `C` matrix
//!   in closed form and by recurrence, its inverse, submatching polynomials,
//!   executable expansion identities, and a small-order symbolic basis
//!   builder used as an auditor.
//! - [`prob`]: event probabilities: submatching events by two independent
//!   routes, anti-cluster and nested-arc closed forms, rational
//!   interpolation in `n`, and half-plane limits.
//! - [`sim`]: an exact-in-distribution Monte Carlo sampler with estimator
//!   statistics.

pub mod ct;
pub mod dynamics;
pub mod linalg;
pub mod matchings;
pub mod prob;
pub mod qkz;
pub mod sim;

pub use matchings::NoncrossingMatching;
