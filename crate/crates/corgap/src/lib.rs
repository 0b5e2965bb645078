//! Correlation gap of weighted matroid rank functions.
//!
//! The correlation gap of a set function `f` is the worst-case ratio between
//! its multilinear extension `F` (expectation under independent sampling) and
//! its concave extension `f̂` (expectation under the best correlated
//! distribution with the same marginals).  For matroid rank functions this
//! ratio is bounded below by a closed-form expression in the matroid's rank
//! and girth, strictly better than the classical `1 − 1/e` whenever the girth
//! exceeds two.
//!
//! The crate provides:
//!
//! * [`matroid`] — matroid constructions (uniform, partition, graphic,
//!   explicit-basis, direct sums, a girth/rank union family), rank and girth
//!   queries, greedy optimisation, and independent-set polytope membership;
//! * [`extensions`] — exact and Monte-Carlo multilinear extensions, concave
//!   extensions of weighted rank functions, and related machinery;
//! * [`gap`] — an empirical correlation-gap searcher over the matroid
//!   polytope plus the non-attainment fixtures;
//! * [`bounds`] — the rank/girth lower bound, its building-block sums, and
//!   the matching upper-bound constructions;
//! * [`clock`] — the Poisson-clock analysis: activation times, the
//!   exponential kernel and its derivatives, the activation series, and
//!   pipage rounding;
//! * [`identities`] — exact alternating binomial identities in big-integer
//!   arithmetic;
//! * [`coverage`] — constrained maximisation of sums of concave extensions
//!   with a rounding guarantee certified by per-term gap bounds;
//! * [`verify`] — named re-runnable check suites used by the CLI.

pub mod bounds;
pub mod clock;
pub mod coverage;
pub mod extensions;
pub mod gap;
pub mod identities;
pub mod matroid;
pub mod verify;

mod error;

pub use error::{Error, Result};
pub use extensions::{ConcaveSeq, Point, SetFunction};
pub use matroid::{Matroid, Subset, WeightedRank};

#[cfg(doctest)]
mod book;
