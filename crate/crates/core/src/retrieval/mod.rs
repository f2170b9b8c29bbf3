//! Exhaustive Hamming ranking over a code database and the retrieval
//! metrics computed from it.

mod distmat;
mod metrics;
mod report;

pub use distmat::{center_distance_matrix, group_by_assignment, nearest_center_assignment};
pub use metrics::{
    average_precision_at_n, evaluate, evaluate_with, mean_average_precision,
    precision_at_n_curve, precision_within_radius, pr_curve, QuerySet,
};
pub use report::{matrix_to_csv, EvalReport, RuntimeStats};

use crate::error::{Error, Result};
use crate::hamming::PackedCode;
use crate::labels::LabelSet;

#[derive(Debug, Clone, PartialEq)]
pub struct CodeIndex {
    k: usize,
    codes: Vec<PackedCode>,
    labels: Vec<LabelSet>,
}

impl CodeIndex {
    pub fn new(codes: Vec<PackedCode>, labels: Vec<LabelSet>) -> Result<Self> {
        if codes.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: codes.len(),
                got: labels.len(),
            });
        }
        let k = codes
            .first()
            .map(PackedCode::len)
            .ok_or_else(|| Error::InvalidDimension("empty code database".into()))?;
        if let Some(bad) = codes.iter().find(|c| c.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: bad.len(),
            });
        }
        Ok(CodeIndex { k, codes, labels })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[PackedCode] {
        &self.codes
    }

    pub fn labels(&self) -> &[LabelSet] {
        &self.labels
    }

    pub(crate) fn check_query(&self, query: &PackedCode) -> Result<()> {
        if query.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: query.len(),
            });
        }
        Ok(())
    }

    /// Distance from `query` to every database code, in database order.
    pub fn distances(&self, query: &PackedCode) -> Result<Vec<u32>> {
        self.check_query(query)?;
        Ok(self.codes.iter().map(|c| query.distance_unchecked(c)).collect())
    }

    /// Database indices by ascending distance, ties by ascending index.
    pub fn rank_by_distance(&self, query: &PackedCode) -> Result<Vec<usize>> {
        Ok(rank_distances(&self.distances(query)?, self.k))
    }
}

/// Stable counting sort: distances are bounded by `k`.
pub(crate) fn rank_distances(dist: &[u32], k: usize) -> Vec<usize> {
    let mut start = vec![0usize; k + 2];
    for &d in dist {
        start[d as usize + 1] += 1;
    }
    for i in 1..start.len() {
        start[i] += start[i - 1];
    }
    let mut order = vec![0usize; dist.len()];
    for (i, &d) in dist.iter().enumerate() {
        let slot = &mut start[d as usize];
        order[*slot] = i;
        *slot += 1;
    }
    order
}

pub fn rank_by_distance(index: &CodeIndex, query: &PackedCode) -> Result<Vec<usize>> {
    index.rank_by_distance(query)
}
