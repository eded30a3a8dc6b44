//! Partitions of the summand index set and the block-count conditions.
//!
//! Splitting the K summands into blocks replaces the whole-set aggregate phi
//! (whose power K explodes) with the partitioned phi_Omega whose power is the
//! largest block size tau. The recommended default pairs indices two by two.

use crate::bounds::alpha1;
use crate::error::{Error, Result};

/// A disjoint cover of the index set {0, .., K-1}.
///
/// Indices are 0-based internally; [`IndexPartition::from_one_based`] accepts
/// the 1-based list-of-lists syntax used in experiment configs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPartition {
    blocks: Vec<Vec<usize>>,
    index_count: usize,
    tau: usize,
}

impl IndexPartition {
    /// Validate and build a partition over `0..index_count`.
    ///
    /// Malformed input (overlap, gap, out-of-range index, empty block) is
    /// rejected, never repaired.
    pub fn new(blocks: Vec<Vec<usize>>, index_count: usize) -> Result<Self> {
        if index_count == 0 {
            return Err(Error::PartitionMismatch("index set is empty".into()));
        }
        let mut seen = vec![false; index_count];
        let mut covered = 0usize;
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::PartitionMismatch("empty block".into()));
            }
            for &idx in block {
                if idx >= index_count {
                    return Err(Error::PartitionMismatch(format!(
                        "index {idx} out of range 0..{index_count}"
                    )));
                }
                if seen[idx] {
                    return Err(Error::PartitionMismatch(format!(
                        "index {idx} appears in two blocks"
                    )));
                }
                seen[idx] = true;
                covered += 1;
            }
        }
        if covered != index_count {
            return Err(Error::PartitionMismatch(format!(
                "blocks cover {covered} of {index_count} indices"
            )));
        }
        let tau = blocks.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            blocks,
            index_count,
            tau,
        })
    }

    /// Parse the config syntax: list of lists of 1-based indices,
    /// e.g. `[[1,2],[3,4],[5]]`.
    pub fn from_one_based(blocks: &[Vec<usize>], index_count: usize) -> Result<Self> {
        let shifted = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&i| {
                        i.checked_sub(1).ok_or_else(|| {
                            Error::PartitionMismatch("indices are 1-based; got 0".into())
                        })
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        Self::new(shifted, index_count)
    }

    /// The trivial one-block partition.
    pub fn whole(k: usize) -> Self {
        Self::new(vec![(0..k).collect()], k).expect("whole-set partition is always valid")
    }

    /// One index per block.
    pub fn singletons(k: usize) -> Self {
        Self::new((0..k).map(|i| vec![i]).collect(), k)
            .expect("singleton partition is always valid")
    }

    /// The recommended pairing: consecutive indices grouped two by two,
    /// with a trailing singleton when K is odd. ceil(K/2) blocks, tau <= 2.
    pub fn pairing(k: usize) -> Self {
        let blocks = (0..k)
            .step_by(2)
            .map(|i| if i + 1 < k { vec![i, i + 1] } else { vec![i] })
            .collect();
        Self::new(blocks, k).expect("pairing partition is always valid")
    }

    /// Pairing after sorting envelope values descending, so the largest
    /// envelopes share blocks. Yields a (often) smaller phi_Omega than the
    /// consecutive pairing; the block layout depends on the envelope order.
    pub fn sorted_pairing(envelope: &[f64]) -> Self {
        let k = envelope.len();
        let mut order: Vec<usize> = (0..k).collect();
        // stable descending sort; ties keep the original index order
        order.sort_by(|&a, &b| envelope[b].total_cmp(&envelope[a]));
        let blocks = (0..k)
            .step_by(2)
            .map(|i| {
                if i + 1 < k {
                    vec![order[i], order[i + 1]]
                } else {
                    vec![order[i]]
                }
            })
            .collect();
        Self::new(blocks, k).expect("sorted pairing partition is always valid")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks I.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Size K of the covered index set.
    pub fn index_count(&self) -> usize {
        self.index_count
    }

    /// Largest block size tau.
    pub fn tau(&self) -> usize {
        self.tau
    }
}

/// Shortcut for the recommended pairing partition.
pub fn pairing_partition(k: usize) -> IndexPartition {
    IndexPartition::pairing(k)
}

/// Sufficient condition for exp((1 + alpha1(tau)) phi_Omega) <= dim(Y):
/// I <= log(dim) / ([1 + alpha1(tau)] [(mu(U) + 1)^tau - 1]).
///
/// With mu(U) = 0 the phi term vanishes and the condition holds
/// unconditionally.
pub fn check_block_count_condition(block_count: usize, tau: usize, mu_u: f64, dim: usize) -> bool {
    let denom = (1.0 + alpha1(tau)) * ((mu_u + 1.0).powi(tau as i32) - 1.0);
    if denom <= 0.0 {
        return true;
    }
    block_count as f64 <= (dim as f64).ln() / denom
}

/// Pairing-partition variant guaranteeing exp(phi_pair / 4) <= dim(Y):
/// I~ <= 4 log(dim) / (phi_pair [(mu(U~) + 1)^2 - 1]).
pub fn check_azuma_count_condition(
    block_count: usize,
    mu_u: f64,
    phi_pair: f64,
    dim: usize,
) -> bool {
    let denom = phi_pair * ((mu_u + 1.0).powi(2) - 1.0);
    if denom <= 0.0 {
        return true;
    }
    block_count as f64 <= 4.0 * (dim as f64).ln() / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_even() {
        let p = IndexPartition::pairing(4);
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(p.block_count(), 2);
        assert_eq!(p.tau(), 2);
    }

    #[test]
    fn pairing_odd() {
        let p = IndexPartition::pairing(5);
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(p.block_count(), 3);
        assert_eq!(p.tau(), 2);
    }

    #[test]
    fn pairing_single() {
        let p = IndexPartition::pairing(1);
        assert_eq!(p.blocks(), &[vec![0]]);
        assert_eq!(p.block_count(), 1);
        assert_eq!(p.tau(), 1);
    }

    #[test]
    fn pairing_shape_for_many_k() {
        for k in 1..40 {
            let p = IndexPartition::pairing(k);
            assert_eq!(p.block_count(), k.div_ceil(2));
            assert!(p.tau() <= 2);
        }
    }

    #[test]
    fn sorted_pairing_groups_largest_together() {
        let p = IndexPartition::sorted_pairing(&[1.0, 4.0, 2.0, 3.0]);
        assert_eq!(p.blocks(), &[vec![1, 3], vec![2, 0]]);
    }

    #[test]
    fn malformed_partitions_rejected() {
        // overlap
        assert!(IndexPartition::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        // gap
        assert!(IndexPartition::new(vec![vec![0], vec![2]], 3).is_err());
        // out of range
        assert!(IndexPartition::new(vec![vec![0, 3]], 2).is_err());
        // empty block
        assert!(IndexPartition::new(vec![vec![0], vec![]], 1).is_err());
    }

    #[test]
    fn one_based_parse() {
        let p = IndexPartition::from_one_based(&[vec![1, 2], vec![3, 4], vec![5]], 5).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3], vec![4]]);
        assert!(IndexPartition::from_one_based(&[vec![0, 1]], 2).is_err());
    }

    #[test]
    fn block_count_condition_examples() {
        // RHS = ln(1e6) / (0.1081976622 * 3) ~ 42.56
        assert!(check_block_count_condition(1, 2, 1.0, 1_000_000));
        assert!(!check_block_count_condition(100, 2, 1.0, 1_000_000));
        assert!(check_block_count_condition(1_000_000, 2, 0.0, 10));
    }

    #[test]
    fn azuma_count_condition_examples() {
        let dim = std::f64::consts::E.powi(10).ceil() as usize;
        // RHS = 40 / 9 ~ 4.44
        assert!(check_azuma_count_condition(1, 1.0, 3.0, dim));
        assert!(!check_azuma_count_condition(5, 1.0, 3.0, dim));
        assert!(check_azuma_count_condition(100, 1.0, 0.0, 2));
    }
}
