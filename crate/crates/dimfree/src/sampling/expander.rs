//! Expander graphs, stationary random walks and the walk-sampling bounds.
//!
//! A connected d-regular graph with spectral gap 1 - lambda_2 > 0 lets a
//! length-K stationary walk stand in for K independent samples: the sample
//! deviation obeys martingale-type tail bounds whose envelope is
//! log(n / t) / gap per step.

use rand::Rng;

use crate::bounds::{alpha1, gamma};
use crate::error::{Error, Result};
use crate::matfun::{eigenvalues_desc, Matrix};
use crate::parallel::par_map_indexed;
use crate::partitions::IndexPartition;
use crate::rng::rng_for;

/// Cap on the recommended walk length when the envelope degenerates.
pub const WALK_LENGTH_CAP: usize = 1_000_000;

/// Tolerance below which a spectral gap counts as zero (disconnected).
const GAP_TOL: f64 = 1e-10;

/// A d-regular multigraph with its normalized adjacency spectrum cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpanderGraph {
    n: usize,
    d: usize,
    /// Neighbor multiset per vertex, exactly d entries each.
    adj: Vec<Vec<usize>>,
    /// Eigenvalues of the normalized adjacency, descending.
    spectrum: Vec<f64>,
}

impl ExpanderGraph {
    /// Build from an undirected edge list (0-based vertex pairs, multi-edges
    /// and self-loops allowed). All vertices must end up with equal degree.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::ShapeMismatch(
                "graph needs at least one vertex".into(),
            ));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::BadSubset(format!(
                    "edge ({u}, {v}) out of range 0..{n}"
                )));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let d = adj[0].len();
        if d == 0 || adj.iter().any(|nb| nb.len() != d) {
            return Err(Error::ShapeMismatch(
                "graph must be d-regular with d >= 1".into(),
            ));
        }
        let mut a = Matrix::zeros(n, n);
        for (u, neighbors) in adj.iter().enumerate() {
            for &v in neighbors {
                a[(u, v)] += 1.0 / d as f64;
            }
        }
        let spectrum = eigenvalues_desc(&a)?;
        Ok(Self {
            n,
            d,
            adj,
            spectrum,
        })
    }

    /// Parse an edge-list text file: one `u v` pair per line, 1-based
    /// indices, `#` comments and blank lines skipped.
    pub fn from_edge_list_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut edges = Vec::new();
        let mut max_vertex = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.and_then(|t| t.parse::<usize>().ok())
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "edge list line {}: expected two 1-based vertex ids",
                            lineno + 1
                        ))
                    })
            };
            let u = parse(it.next())?;
            let v = parse(it.next())?;
            max_vertex = max_vertex.max(u).max(v);
            edges.push((u - 1, v - 1));
        }
        Self::from_edges(max_vertex, &edges)
    }

    /// Complete graph on n vertices (d = n - 1).
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Cycle on n vertices (d = 2).
    pub fn cycle(n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    /// Random d-regular simple graph via the configuration model: pair stubs
    /// uniformly, reject self-loops, multi-edges and disconnected outcomes,
    /// at most 1000 attempts.
    pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Self> {
        if !(n * d).is_multiple_of(2) || d == 0 || d >= n {
            return Err(Error::Config(format!(
                "no simple d-regular graph with n = {n}, d = {d}"
            )));
        }
        'attempt: for attempt in 0..1000u64 {
            let mut rng = rng_for(seed, attempt, 0);
            let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
            // Fisher-Yates
            for i in (1..stubs.len()).rev() {
                let j = rng.random_range(0..=i);
                stubs.swap(i, j);
            }
            let mut seen = std::collections::HashSet::new();
            let mut edges = Vec::with_capacity(n * d / 2);
            for pair in stubs.chunks_exact(2) {
                let (u, v) = (pair[0], pair[1]);
                if u == v || !seen.insert((u.min(v), u.max(v))) {
                    continue 'attempt;
                }
                edges.push((u, v));
            }
            let graph = Self::from_edges(n, &edges)?;
            if graph.is_connected() {
                return Ok(graph);
            }
        }
        Err(Error::Numerical(
            "configuration model failed to produce a connected simple graph in 1000 attempts"
                .into(),
        ))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Eigenvalues of the normalized adjacency, descending; the first is 1.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.n];
        let mut stack = vec![0usize];
        visited[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Spectral gap 1 - lambda_2 of the normalized adjacency. Errors with
    /// `Disconnected` when the gap vanishes.
    pub fn spectral_gap(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::ShapeMismatch(
                "gap needs at least two vertices".into(),
            ));
        }
        let gap = 1.0 - self.spectrum[1];
        if gap <= GAP_TOL {
            return Err(Error::Disconnected(gap));
        }
        Ok(gap)
    }

    /// Stationary random walk: the start vertex is uniform, each step picks
    /// one of the d incident edge endpoints uniformly. Deterministic given
    /// the seed.
    pub fn stationary_walk(&self, k: usize, seed: u64) -> Vec<usize> {
        assert!(k >= 1, "walk length must be at least 1");
        let mut rng = rng_for(seed, 0, 0);
        let mut walk = Vec::with_capacity(k);
        let mut current = rng.random_range(0..self.n);
        walk.push(current);
        for _ in 1..k {
            current = self.adj[current][rng.random_range(0..self.d)];
            walk.push(current);
        }
        walk
    }
}

/// Tail bound for the deviation of a length-K stationary walk sample mean,
/// with per-step envelope log(n / t) / epsilon_gap.
///
/// Bennett form: exp((1 + alpha1(tau)) phi') exp(-phi' Gamma(K t / (2 tau phi'))).
/// Azuma form:   exp(phi' / 4) exp(-K^2 t^2 / (16 phi')).
/// phi' aggregates the envelope over the given partition; pass the pairing
/// partition for the Azuma form as stated.
pub fn expander_tail(
    t: f64,
    n: usize,
    epsilon_gap: f64,
    k: usize,
    partition: &IndexPartition,
    variant: crate::tailbounds::MdsVariant,
) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonPositiveInput {
            name: "t",
            value: t,
        });
    }
    if t >= n as f64 {
        return Err(Error::DomainViolation {
            theta: t,
            lo: 0.0,
            hi: n as f64,
        });
    }
    if epsilon_gap <= 0.0 {
        return Err(Error::NonPositiveArgument {
            name: "epsilon_gap",
            value: epsilon_gap,
        });
    }
    if partition.index_count() != k {
        return Err(Error::PartitionMismatch(format!(
            "partition covers {} indices, walk has K = {k}",
            partition.index_count()
        )));
    }
    let envelope = (n as f64 / t).ln() / epsilon_gap;
    let phi: f64 = partition
        .blocks()
        .iter()
        .map(|b| (envelope + 1.0).powi(b.len() as i32) - 1.0)
        .sum();
    let kf = k as f64;
    Ok(match variant {
        crate::tailbounds::MdsVariant::Bennett => {
            let tau = partition.tau() as f64;
            if phi == 0.0 {
                0.0
            } else {
                ((1.0 + alpha1(partition.tau())) * phi - phi * gamma(kf * t / (2.0 * tau * phi))?)
                    .exp()
            }
        }
        crate::tailbounds::MdsVariant::Azuma => (phi / 4.0 - kf * kf * t * t / (16.0 * phi)).exp(),
    })
}

/// Largest walk length for which the Azuma prefactor stays below the 2d
/// baseline factor: floor(8 log(2d) / (q^2 + 2q)) with q = log(n/t)/gap,
/// capped at [`WALK_LENGTH_CAP`]; zero when infeasible.
pub fn max_walk_length(n: usize, t: f64, epsilon_gap: f64, d: usize) -> Result<usize> {
    if t <= 0.0 {
        return Err(Error::NonPositiveInput {
            name: "t",
            value: t,
        });
    }
    if t >= n as f64 {
        return Err(Error::DomainViolation {
            theta: t,
            lo: 0.0,
            hi: n as f64,
        });
    }
    if epsilon_gap <= 0.0 {
        return Err(Error::NonPositiveArgument {
            name: "epsilon_gap",
            value: epsilon_gap,
        });
    }
    let q = (n as f64 / t).ln() / epsilon_gap;
    let denom = q * q + 2.0 * q;
    if denom <= 0.0 {
        return Ok(WALK_LENGTH_CAP);
    }
    let rhs = 8.0 * (2.0 * d as f64).ln() / denom;
    Ok((rhs.floor() as usize).min(WALK_LENGTH_CAP))
}

/// A deterministic matrix-valued observable on the vertex set: one symmetric
/// fdim x fdim matrix per vertex, centered so the vertex mean is zero and
/// scaled so every Frobenius norm is at most 1.
pub fn matrix_valued_observable(n: usize, fdim: usize, seed: u64) -> Vec<Matrix> {
    let mut mats: Vec<Matrix> = (0..n)
        .map(|v| {
            let mut rng = rng_for(seed, 1, v as u64);
            let raw = Matrix::from_fn(fdim, fdim, |_, _| {
                rng.sample::<f64, _>(rand_distr::StandardNormal)
            });
            (&raw + raw.transpose()) * 0.5
        })
        .collect();
    let mut mean = Matrix::zeros(fdim, fdim);
    for m in &mats {
        mean += m;
    }
    mean /= n as f64;
    let mut max_frob = 0.0f64;
    for m in &mut mats {
        *m -= &mean;
        max_frob = max_frob.max(m.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    if max_frob > 0.0 {
        for m in &mut mats {
            *m /= max_frob;
        }
    }
    mats
}

/// Spectral-norm deviations of the walk sample mean over independent walks;
/// one value per trial.
pub fn walk_sample_deviation(
    g: &ExpanderGraph,
    observable: &[Matrix],
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if observable.len() != g.vertex_count() {
        return Err(Error::ShapeMismatch(
            "one observable matrix per vertex required".into(),
        ));
    }
    let fdim = observable[0].nrows();
    let results = par_map_indexed(trials, |trial| -> Result<f64> {
        let walk = g.stationary_walk(k, crate::rng::derive_seed(seed, trial as u64));
        let mut sum = Matrix::zeros(fdim, fdim);
        for &v in &walk {
            sum += &observable[v];
        }
        sum /= k as f64;
        let eig = eigenvalues_desc(&sum)?;
        Ok(eig.iter().fold(0.0f64, |acc, &l| acc.max(l.abs())))
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tailbounds::MdsVariant;
    use approx::assert_relative_eq;

    #[test]
    fn complete_graph_gap() {
        let g = ExpanderGraph::complete(4).unwrap();
        // spectrum of K4 normalized adjacency: 1, -1/3, -1/3, -1/3
        assert_relative_eq!(g.spectral_gap().unwrap(), 4.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn cycle_gap() {
        let g = ExpanderGraph::cycle(4).unwrap();
        // eigenvalues cos(2 pi k / 4): 1, 0, 0, -1
        assert_relative_eq!(g.spectral_gap().unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn disconnected_graph_rejected() {
        let g = ExpanderGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(g.spectral_gap(), Err(Error::Disconnected(_))));
    }

    #[test]
    fn irregular_graph_rejected() {
        assert!(ExpanderGraph::from_edges(3, &[(0, 1)]).is_err());
    }

    #[test]
    fn walk_is_deterministic() {
        let g = ExpanderGraph::complete(6).unwrap();
        assert_eq!(g.stationary_walk(20, 5), g.stationary_walk(20, 5));
        assert_ne!(g.stationary_walk(20, 5), g.stationary_walk(20, 6));
    }

    #[test]
    fn walk_stays_on_graph() {
        let g = ExpanderGraph::cycle(7).unwrap();
        let walk = g.stationary_walk(50, 1);
        assert_eq!(walk.len(), 50);
        for w in walk.windows(2) {
            let diff = (w[0] as i64 - w[1] as i64).rem_euclid(7);
            assert!(diff == 1 || diff == 6);
        }
    }

    #[test]
    fn long_walk_on_complete_graph_is_near_uniform() {
        let g = ExpanderGraph::complete(6).unwrap();
        let steps = 30_000;
        let walk = g.stationary_walk(steps, 99);
        let mut counts = [0usize; 6];
        for v in walk {
            counts[v] += 1;
        }
        let expected = steps as f64 / 6.0;
        for (v, &count) in counts.iter().enumerate() {
            assert!(
                (count as f64 - expected).abs() < 5.0 * expected.sqrt(),
                "vertex {v} visited {count} times, expectation {expected}"
            );
        }
    }

    #[test]
    fn bound_collapses_as_t_approaches_n() {
        let p = IndexPartition::pairing(6);
        let t = 8.0 - 1e-9;
        assert!(expander_tail(t, 8, 0.9, 6, &p, MdsVariant::Azuma).unwrap() < 1e-12);
        assert!(expander_tail(t, 8, 0.9, 6, &p, MdsVariant::Bennett).unwrap() < 1e-12);
        // the walk-length recommendation saturates at the cap there
        assert_eq!(max_walk_length(8, t, 0.9, 4).unwrap(), WALK_LENGTH_CAP);
    }

    #[test]
    fn random_regular_is_connected_and_regular() {
        let g = ExpanderGraph::random_regular(50, 3, 404).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.degree(), 3);
        assert!(g.spectral_gap().unwrap() > 0.0);
    }

    #[test]
    fn random_regular_rejects_odd_total_degree() {
        assert!(ExpanderGraph::random_regular(5, 3, 0).is_err());
    }

    #[test]
    fn expander_tail_frozen_value() {
        let p = IndexPartition::pairing(10);
        let bound = expander_tail(4.0, 8, 0.9, 10, &p, MdsVariant::Azuma).unwrap();
        assert_relative_eq!(bound, 1.2217005311e-3, max_relative = 1e-9);
    }

    #[test]
    fn expander_tail_domain_error() {
        let p = IndexPartition::pairing(4);
        assert!(expander_tail(9.0, 8, 0.9, 4, &p, MdsVariant::Azuma).is_err());
    }

    #[test]
    fn expander_tail_shrinks_with_k() {
        let bound = |k: usize| {
            expander_tail(
                4.0,
                8,
                0.9,
                k,
                &IndexPartition::pairing(k),
                MdsVariant::Azuma,
            )
            .unwrap()
        };
        assert!(bound(20) < bound(10));
    }

    #[test]
    fn azuma_form_matches_scaled_plain_bound() {
        // with uniform envelopes, the walk bound at t equals the plain
        // Azuma-Hoeffding bound applied to the scaled deviation K t / 2
        for (n, t, eps, k) in [
            (8usize, 4.0, 0.9, 10usize),
            (64, 2.0, 0.4, 7),
            (16, 0.5, 1.2, 3),
        ] {
            let partition = IndexPartition::pairing(k);
            let envelope = (n as f64 / t).ln() / eps;
            let phi: f64 = partition
                .blocks()
                .iter()
                .map(|b| (envelope + 1.0).powi(b.len() as i32) - 1.0)
                .sum();
            let walk = expander_tail(t, n, eps, k, &partition, MdsVariant::Azuma).unwrap();
            let plain = crate::tailbounds::df_tail_azuma(k as f64 * t / 2.0, phi).unwrap();
            assert_relative_eq!(walk, plain, max_relative = 1e-12);
        }
    }

    #[test]
    fn edge_list_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c4.txt");
        std::fs::write(&path, "# 4-cycle\n1 2\n2 3\n3 4\n4 1\n").unwrap();
        let g = ExpanderGraph::from_edge_list_file(&path).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.degree(), 2);
        assert_relative_eq!(g.spectral_gap().unwrap(), 1.0, epsilon = 1e-10);
        std::fs::write(&path, "1 x\n").unwrap();
        assert!(ExpanderGraph::from_edge_list_file(&path).is_err());
    }

    #[test]
    fn random_regular_instances_have_positive_gap() {
        for seed in 0..5u64 {
            let g = ExpanderGraph::random_regular(50, 3, seed).unwrap();
            assert!(g.spectral_gap().unwrap() > 0.0);
        }
    }

    #[test]
    fn max_walk_length_examples() {
        assert_eq!(max_walk_length(8, 4.0, 0.9, 1024).unwrap(), 28);
        assert_eq!(max_walk_length(16, 1.0, 0.5, 4).unwrap(), 0);
        assert!(max_walk_length(8, 8.0, 0.9, 4).is_err());
    }

    #[test]
    fn observable_is_centered_and_bounded() {
        let obs = matrix_valued_observable(12, 3, 7);
        let mut sum = Matrix::zeros(3, 3);
        for m in &obs {
            assert!(m.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1.0 + 1e-12);
            sum += m;
        }
        assert!(sum.iter().all(|&x| x.abs() < 1e-10));
    }
}
