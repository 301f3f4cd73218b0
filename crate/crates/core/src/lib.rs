//! Potential functions of colored Jones polynomials for braid closures,
//! their saddle points, and the cone-manifold volumes they produce.
//!
//! The pipeline is
//! [`diagram`] (braid word to planar diagram) ->
//! [`potential`] (dilogarithm potential and gradients) ->
//! [`saddle`] (gluing equations, continuation in colors) ->
//! [`volume`] (optimistic limit, tetrahedra, closed-form oracles).
//! [`jones`] evaluates the colored Jones polynomial exactly at roots of
//! unity and [`asymptotics`] sweeps it in N.

pub mod asymptotics;
pub mod diagram;
pub mod jones;
pub mod numfmt;
pub mod potential;
pub mod saddle;
pub mod specfun;
pub mod volume;

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("empty braid word")]
    EmptyWord,
    #[error("disconnected closure: {0}")]
    Disconnected(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular configuration at crossing {crossing}: {what}")]
    Singular { crossing: usize, what: String },
    #[error("rank-deficient jacobian (condition {0:e})")]
    RankDeficient(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("continuation stuck at s = {s}")]
    ContinuationStuck {
        s: f64,
        path: Box<saddle::ContinuationPath>,
    },
    #[error("color parity mismatch between components {0} and {1}")]
    Parity(usize, usize),
    #[error("state space of {size} entries exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence(_) | Error::ContinuationStuck { .. } | Error::RankDeficient(_) => 3,
            Error::CapExceeded { .. } => 4,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Invalid(_) => "invalid",
            Error::EmptyWord => "empty_word",
            Error::Disconnected(_) => "disconnected",
            Error::Domain(_) => "domain",
            Error::Singular { .. } => "singular",
            Error::RankDeficient(_) => "rank_deficient",
            Error::NoConvergence(_) => "no_convergence",
            Error::ContinuationStuck { .. } => "continuation_stuck",
            Error::Parity(..) => "parity",
            Error::CapExceeded { .. } => "cap_exceeded",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Neumaier-compensated complex sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CSum {
    sum: C64,
    comp: C64,
}

impl CSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: C64) {
        self.sum.re = two_sum(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = two_sum(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

fn two_sum(s: f64, x: f64, comp: &mut f64) -> f64 {
    let t = s + x;
    if s.abs() >= x.abs() {
        *comp += (s - t) + x;
    } else {
        *comp += (x - t) + s;
    }
    t
}
