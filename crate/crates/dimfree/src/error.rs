//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the bound calculus, the spectral primitives and the
/// Monte-Carlo harnesses.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix (or pair of matrices) has a shape incompatible with the
    /// requested operation.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A Ky Fan / eigenvalue-sum order `j` exceeds the admissible range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A matrix required to be Hermitian exceeds the symmetry tolerance.
    #[error("matrix is not Hermitian: max |A - A^T| = {deviation:.3e} exceeds tol {tol:.3e}")]
    NonHermitian { deviation: f64, tol: f64 },

    /// The numerical backend failed to converge.
    #[error("decomposition failure: {0}")]
    DecompositionFailure(String),

    /// An argument that must be non-negative was negative.
    #[error("negative argument: {name} = {value}")]
    NegativeArgument { name: &'static str, value: f64 },

    /// An argument that must be strictly positive was not.
    #[error("non-positive argument: {name} = {value}")]
    NonPositiveArgument { name: &'static str, value: f64 },

    /// An input that must be strictly positive was not (bound evaluation).
    #[error("non-positive input: {name} = {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    /// A scalar fell outside the domain of the selected dominating function.
    #[error("domain violation: theta = {theta} outside ({lo}, {hi})")]
    DomainViolation { theta: f64, lo: f64, hi: f64 },

    /// A partition does not cover the expected index set.
    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),

    /// The Laplace-infimum optimizer exhausted its iteration budget.
    #[error("optimizer did not converge after {0} iterations")]
    OptimizerDidNotConverge(usize),

    /// The observation list handed to an estimator was empty.
    #[error("empty observations")]
    EmptyObservations,

    /// Empty sample set handed to the empirical tail estimator.
    #[error("empty samples")]
    EmptySamples,

    /// Synthesis weights are not descending, not positive, or do not sum to 1.
    #[error("weight error: {0}")]
    WeightError(String),

    /// The requested column subset is invalid for the given matrix.
    #[error("bad subset: {0}")]
    BadSubset(String),

    /// Subset enumeration would exceed the desk-scale budget.
    #[error("too many subsets: C({n},{s}) > {limit}")]
    TooManySubsets { n: usize, s: usize, limit: u64 },

    /// The approximation target has mu(B) = 0, so the error ratio is undefined.
    #[error("mu(B) = 0: approximation error ratio undefined")]
    ZeroMuB,

    /// The graph is disconnected (spectral gap <= 0 within tolerance).
    #[error("graph disconnected: spectral gap = {0:.3e}")]
    Disconnected(f64),

    /// The supplied weights do not certify a fractional cover.
    #[error("not a fractional cover: lambda_min(sum w(e) M_e) = {0:.6} < 1")]
    NotAFractionalCover(f64),

    /// An experiment configuration is malformed or out of range.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical failure inside an experiment.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An I/O failure while reading configs or writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
