//! SDP relaxation, rank reduction and deterministic rounding for nonconvex
//! quadratic programs over intersections of ellipsoids,
//!
//! ```text
//! min  xᵀAx + 2bᵀx   s.t.  ‖Fᵏx + gᵏ‖² ≤ 1,  k = 1..m,
//! ```
//!
//! with a certified approximation ratio `(1−γ)²/(√r̃+γ)²`, where
//! `γ = maxₖ ‖gᵏ‖` and `r̃ = min{⌈(√(8m+17)−3)/2⌉, n+1}`.
//!
//! The stages are usable on their own ([`sdpsolve`], [`facered`],
//! [`onedecomp`], [`rounding`]) or chained by [`pipeline::run_pipeline`].
//! [`asqp`] applies the pipeline to quadratic programs over doubly
//! stochastic matrices, [`bounds`] evaluates the competing closed-form
//! ratios, and [`oracle`] provides independent reference values.

use thiserror::Error;

pub mod asqp;
pub mod bounds;
pub mod facered;
pub mod json;
pub mod linalg;
pub mod model;
pub mod onedecomp;
pub mod oracle;
pub mod pipeline;
pub mod rounding;
pub mod sdpsolve;

use sdpsolve::SolveStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error("SDP solver stopped with status {} (gap {gap:e})", status.as_str())]
    Solver { status: SolveStatus, gap: f64 },
    #[error(transparent)]
    Reduce(#[from] facered::ReduceError),
    #[error(transparent)]
    Round(#[from] rounding::RoundError),
    #[error(transparent)]
    Bound(#[from] bounds::BoundError),
    #[error(transparent)]
    Asqp(#[from] asqp::AsqpError),
}

/// Coarse failure classes, e.g. for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or out-of-assumption input.
    Input,
    /// The numerical solve or reduction did not finish.
    Solver,
    /// A computed certificate failed its own checks.
    Invariant,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use rounding::RoundError as R;
        match self {
            Error::Model(_) | Error::Bound(_) | Error::Asqp(_) => ErrorKind::Input,
            Error::Solver { .. } | Error::Reduce(_) => ErrorKind::Solver,
            Error::Round(R::PositiveValue { .. } | R::DegenerateCorner(_)) => ErrorKind::Solver,
            Error::Round(_) => ErrorKind::Invariant,
        }
    }
}
