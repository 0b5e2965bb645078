//! Compiles every code block of the guide in `book/` as a doc-test, so the
//! book cannot drift from the library.  Each chapter becomes one hidden
//! module whose documentation is the chapter source.
#![allow(rustdoc::broken_intra_doc_links)]

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/matroids.md")]
mod matroids {}

#[doc = include_str!("../../../book/src/extensions.md")]
mod extensions {}

#[doc = include_str!("../../../book/src/correlation-gap.md")]
mod correlation_gap {}

#[doc = include_str!("../../../book/src/rank-girth-bound.md")]
mod rank_girth_bound {}

#[doc = include_str!("../../../book/src/poisson-clock.md")]
mod poisson_clock {}

#[doc = include_str!("../../../book/src/identities.md")]
mod identities {}

#[doc = include_str!("../../../book/src/coverage.md")]
mod coverage {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
