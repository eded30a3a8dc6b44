//! Quantum-hypergraph cover sampling.
//!
//! A quantum hypergraph is a set of Hermitian edge matrices 0 <= M_e <= I on
//! a d-dimensional space. Given fractional-cover weights w(e) with
//! sum w(e) M_e >= I (the weights are input; solving for them is out of
//! scope), sampling K edges i.i.d. from p(e) = w(e) / covf finds a cover
//! with probability at least 1 - exp(phi/4) exp(-K^2 / (16 phi covf^2)),
//! where phi = 3 ceil(K/2).

use rand::Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::matfun::{lambda_min, symmetrize_checked, Matrix};
use crate::parallel::par_map_indexed;
use crate::rng::rng_for;

/// Hermitian edge matrices with fractional-cover weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumHypergraph {
    dim: usize,
    edges: Vec<Matrix>,
    weights: Vec<f64>,
}

/// JSON schema for hypergraph input files: dense row-major edge matrices and
/// their weights.
#[derive(Deserialize)]
struct HypergraphFile {
    dim: usize,
    edges: Vec<Vec<Vec<f64>>>,
    weights: Vec<f64>,
}

impl QuantumHypergraph {
    /// PSD tolerance, scaled with the dimension.
    fn tol(dim: usize) -> f64 {
        1e-9 * dim as f64
    }

    /// Validate edge matrices (Hermitian, eigenvalues within [-tol, 1+tol])
    /// and non-negative weights.
    pub fn new(dim: usize, edges: Vec<Matrix>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || edges.is_empty() {
            return Err(Error::ShapeMismatch(
                "hypergraph needs a positive dimension and at least one edge".into(),
            ));
        }
        if edges.len() != weights.len() {
            return Err(Error::ShapeMismatch("one weight per edge required".into()));
        }
        let tol = Self::tol(dim);
        for e in &edges {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "edge matrix must be {dim}x{dim}, got {}x{}",
                    e.nrows(),
                    e.ncols()
                )));
            }
            let sym = symmetrize_checked(e)?;
            let eig = crate::matfun::eigenvalues_desc(&sym)?;
            if eig[0] > 1.0 + tol || *eig.last().expect("non-empty") < -tol {
                return Err(Error::ShapeMismatch(format!(
                    "edge eigenvalues [{:.6}, {:.6}] outside [0, 1]",
                    eig.last().expect("non-empty"),
                    eig[0]
                )));
            }
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::NegativeArgument {
                name: "weight",
                value: *weights.iter().find(|&&w| w < 0.0).expect("negative weight"),
            });
        }
        Ok(Self {
            dim,
            edges,
            weights,
        })
    }

    /// Load from the JSON file schema.
    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let parsed: HypergraphFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("hypergraph json: {e}")))?;
        let edges = parsed
            .edges
            .iter()
            .map(|rows| {
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                if rows.len() != parsed.dim || flat.len() != parsed.dim * parsed.dim {
                    return Err(Error::ShapeMismatch(format!(
                        "edge matrix must be dense {0}x{0}",
                        parsed.dim
                    )));
                }
                Ok(Matrix::from_row_slice(parsed.dim, parsed.dim, &flat))
            })
            .collect::<Result<Vec<Matrix>>>()?;
        Self::new(parsed.dim, edges, parsed.weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[Matrix] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Check the certificate sum_e w(e) M_e >= I and return the total weight
    /// covf = sum_e w(e).
    pub fn verify_fractional_cover(&self) -> Result<f64> {
        let mut weighted = Matrix::zeros(self.dim, self.dim);
        for (e, &w) in self.edges.iter().zip(&self.weights) {
            weighted += e * w;
        }
        let min_eig = lambda_min(&weighted)?;
        if min_eig < 1.0 - Self::tol(self.dim) {
            return Err(Error::NotAFractionalCover(min_eig));
        }
        Ok(self.weights.iter().sum())
    }

    /// Whether an edge multiset covers: lambda_min(sum M_e) >= 1 - tol.
    pub fn is_cover(&self, edge_indices: &[usize]) -> Result<bool> {
        let mut sum = Matrix::zeros(self.dim, self.dim);
        for &i in edge_indices {
            sum += &self.edges[i];
        }
        Ok(lambda_min(&sum)? >= 1.0 - Self::tol(self.dim))
    }
}

/// Outcome of the cover-sampling experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverSampleOutcome {
    /// Fraction of trials whose K sampled edges form a cover.
    pub cover_found_rate: f64,
    /// max(0, 1 - exp(phi/4) exp(-K^2 / (16 phi covf^2))) with
    /// phi = 3 ceil(K/2).
    pub bound_rate: f64,
    /// Total certificate weight sum_e w(e).
    pub covf: f64,
    /// Verbatim truth value of covf <= K / (6 ceil(K/2)). Unsatisfiable for
    /// any valid certificate (covf >= 1 is forced), reported as stated.
    pub condition_holds: bool,
}

/// Sample K edges i.i.d. from p(e) = w(e)/covf per trial and count covers.
pub fn hypergraph_cover_sample(
    h: &QuantumHypergraph,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<CoverSampleOutcome> {
    if k == 0 || trials == 0 {
        return Err(Error::Config("k and trials must be positive".into()));
    }
    let covf = h.verify_fractional_cover()?;
    let mut cumulative = Vec::with_capacity(h.weights().len());
    let mut acc = 0.0;
    for &w in h.weights() {
        acc += w / covf;
        cumulative.push(acc);
    }
    let found = par_map_indexed(trials, |trial| -> Result<bool> {
        let mut rng = rng_for(seed, trial as u64, 0);
        let sample: Vec<usize> = (0..k)
            .map(|_| {
                let coin: f64 = rng.random();
                cumulative
                    .iter()
                    .position(|&c| coin < c)
                    .unwrap_or(cumulative.len() - 1)
            })
            .collect();
        h.is_cover(&sample)
    });
    let mut count = 0usize;
    for f in found {
        if f? {
            count += 1;
        }
    }
    let phi = 3.0 * k.div_ceil(2) as f64;
    let failure = (phi / 4.0 - (k * k) as f64 / (16.0 * phi * covf * covf)).exp();
    let half_blocks = k.div_ceil(2) as f64;
    Ok(CoverSampleOutcome {
        cover_found_rate: count as f64 / trials as f64,
        bound_rate: (1.0 - failure).max(0.0),
        covf,
        condition_holds: covf <= k as f64 / (6.0 * half_blocks),
    })
}

/// Exhaustive cover-number oracle for tiny instances: size of the smallest
/// edge subset whose sum dominates the identity, `None` when no subset of
/// size <= `max_size` covers. Desk scale only (dim <= 4, at most 12 edges).
pub fn exhaustive_cover_number(h: &QuantumHypergraph, max_size: usize) -> Result<Option<usize>> {
    if h.dim() > 4 || h.edges().len() > 12 {
        return Err(Error::TooManySubsets {
            n: h.edges().len(),
            s: max_size,
            limit: 1 << 12,
        });
    }
    let e = h.edges().len();
    for size in 1..=max_size.min(e) {
        for subset in crate::rip::enumerate_subsets(e, size) {
            if h.is_cover(&subset)? {
                return Ok(Some(size));
            }
        }
    }
    Ok(None)
}
