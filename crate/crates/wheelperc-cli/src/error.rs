//! CLI error type: input problems, resource caps, and library errors.

use thiserror::Error;
use wheelperc::ct::CtError;
use wheelperc::dynamics::DynamicsError;
use wheelperc::linalg::LinalgError;
use wheelperc::matchings::MatchingError;
use wheelperc::prob::ProbError;
use wheelperc::sim::SimError;

/// Errors that terminate a command with a usage exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid matching `{0}`: {1}")]
    BadMatching(String, String),
    #[error("invalid event `{0}`: {1}")]
    BadEvent(String, String),
    #[error("invalid sample count `{0}`: expected a positive integer, decimal or scientific")]
    BadSamples(String),
    #[error("invalid sequence `{0}`: {1}")]
    BadSequence(String, String),
    #[error("{0}")]
    Resource(String),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Ct(#[from] CtError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
