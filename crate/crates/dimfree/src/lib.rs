//! Dimension-free tail and expectation bounds for sums of random matrices.
//!
//! The bounds here control P{mu(sum_k X_k) >= t} for matrix functionals mu
//! that are non-negative, positively homogeneous and subadditive (spectral
//! norm, Ky Fan singular sums, eigenvalue sums, any matrix norm) without a
//! matrix-dimension prefactor. The price is a sensitivity to the summand
//! count K, tamed by partitioning the index set and by rescaling the
//! summands.
//!
//! Module map:
//!
//! - [`matfun`]: the built-in functionals and spectral primitives.
//! - [`bounds`]: the scalar calculus (rate function, tangency constants,
//!   dominating functions, phi aggregates, numeric Laplace infimum).
//! - [`partitions`]: index partitions and the block-count conditions.
//! - [`tailbounds`]: every closed-form bound, plus the dimension-dependent
//!   baselines and tail-curve containers.
//! - [`empirical`]: reproducible generators, Monte-Carlo estimators and the
//!   empirical envelope construction.
//! - [`rip`]: restricted-isometry certification for sums of random matrices.
//! - [`sampling`]: randomized matrix approximation, expander-walk sampling
//!   and quantum-hypergraph cover sampling.
//! - [`runner`]: the seeded experiment runner behind the `dimfree-tails`
//!   CLI.
//!
//! Custom functionals: every bound consumes scalar mu values, so a caller
//! with a bespoke functional evaluates it and feeds the resulting envelopes
//! to [`bounds::phi_summary`] and the [`tailbounds`] entry points directly;
//! meeting the three functional conditions is then the caller's
//! responsibility.
//!
//! Monte-Carlo loops run on rayon when the default `parallel` feature is
//! enabled and fall back to sequential execution without it; results are
//! identical either way because every trial draws from a counter-based
//! stream.

pub mod bounds;
pub mod empirical;
pub mod error;
pub mod matfun;
pub mod parallel;
pub mod partitions;
pub mod rip;
pub mod rng;
pub mod runner;
pub mod sampling;
pub mod tailbounds;

pub use error::{Error, Result};
pub use matfun::{Matrix, MatrixFunctional};
