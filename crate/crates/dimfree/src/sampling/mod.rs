//! Sampling applications of the dimension-free bounds: randomized matrix
//! approximation, expander-walk sampling and quantum-hypergraph cover
//! sampling.

mod approx_sampling;
mod expander;
mod hypergraph;

pub use approx_sampling::{run_approximation, tropp_sample_count, ApproxOutcome, ApproxScenario};
pub use expander::{
    expander_tail, matrix_valued_observable, max_walk_length, walk_sample_deviation, ExpanderGraph,
    WALK_LENGTH_CAP,
};
pub use hypergraph::{
    exhaustive_cover_number, hypergraph_cover_sample, CoverSampleOutcome, QuantumHypergraph,
};
