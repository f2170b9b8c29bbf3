//! mAP@N, precision curves, precision within a Hamming radius and
//! rank-based precision-recall.
//!
//! Relevance between a query and a database item means sharing at least one
//! category. Per-query results are folded in query order, so every number is
//! reproducible bit-for-bit regardless of the execution mode.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::hamming::PackedCode;
use crate::labels::LabelSet;

use super::{rank_distances, CodeIndex, EvalReport, RuntimeStats};

/// Queries evaluated together in one parallel block.
const QUERY_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    codes: Vec<PackedCode>,
    labels: Vec<LabelSet>,
}

impl QuerySet {
    pub fn new(codes: Vec<PackedCode>, labels: Vec<LabelSet>) -> Result<Self> {
        if codes.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: codes.len(),
                got: labels.len(),
            });
        }
        if codes.is_empty() {
            return Err(Error::InvalidDimension("query set is empty".into()));
        }
        Ok(QuerySet { codes, labels })
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
}

/// AP over the first `n` ranked items, normalised by the number of relevant
/// items among them (0 when there are none).
pub fn average_precision_at_n(relevance: &[bool], n: usize) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (r, _) in relevance.iter().take(n).enumerate().filter(|(_, &rel)| rel) {
        hits += 1;
        sum += hits as f64 / (r + 1) as f64;
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

struct QueryOutcome {
    ap: f64,
    within_radius: f64,
    /// Cumulative relevant count at each rank cutoff.
    hits: Vec<u32>,
}

fn evaluate_query(
    index: &CodeIndex,
    code: &PackedCode,
    labels: &LabelSet,
    map_n: usize,
    radius: u32,
) -> Result<QueryOutcome> {
    let dist = index.distances(code)?;
    let order = rank_distances(&dist, index.k());
    let relevance: Vec<bool> = order
        .iter()
        .map(|&i| labels.intersects(&index.labels()[i]))
        .collect();
    let ap = average_precision_at_n(&relevance, map_n);

    let mut in_ball = 0u32;
    let mut relevant_in_ball = 0u32;
    for (&i, &rel) in order.iter().zip(&relevance) {
        if dist[i] > radius {
            break;
        }
        in_ball += 1;
        relevant_in_ball += rel as u32;
    }
    let within_radius = if in_ball == 0 {
        0.0
    } else {
        relevant_in_ball as f64 / in_ball as f64
    };

    let hits = relevance
        .iter()
        .scan(0u32, |acc, &rel| {
            *acc += rel as u32;
            Some(*acc)
        })
        .collect();
    Ok(QueryOutcome {
        ap,
        within_radius,
        hits,
    })
}

/// Every metric in one pass over the queries.
///
/// The precision-at-N series runs to `min(map_n, database size)`; the PR
/// curve has one point per rank cutoff. A query with no relevant database
/// item contributes recall 0.
pub fn evaluate(index: &CodeIndex, queries: &QuerySet, map_n: usize, radius: u32) -> Result<EvalReport> {
    evaluate_with(index, queries, map_n, radius, Execution::default())
}

pub fn evaluate_with(
    index: &CodeIndex,
    queries: &QuerySet,
    map_n: usize,
    radius: u32,
    exec: Execution,
) -> Result<EvalReport> {
    if map_n == 0 {
        return Err(Error::Config("N for mAP@N must be at least 1".into()));
    }
    let started = Instant::now();
    let n = index.len();
    let nq = queries.len();
    let mut ap_sum = 0.0;
    let mut radius_sum = 0.0;
    let mut recall_sum = vec![0.0; n];
    let mut precision_sum = vec![0.0; n];

    for block in (0..nq).step_by(QUERY_BLOCK) {
        let end = (block + QUERY_BLOCK).min(nq);
        let outcomes = map_range(exec, end - block, |j| {
            let q = block + j;
            evaluate_query(index, &queries.codes[q], &queries.labels[q], map_n, radius)
        });
        for outcome in outcomes {
            let o = outcome?;
            ap_sum += o.ap;
            radius_sum += o.within_radius;
            let total = *o.hits.last().unwrap_or(&0);
            for (r, &h) in o.hits.iter().enumerate() {
                if total > 0 {
                    recall_sum[r] += h as f64 / total as f64;
                }
                precision_sum[r] += h as f64 / (r + 1) as f64;
            }
        }
    }

    let nqf = nq as f64;
    let precision: Vec<f64> = precision_sum.iter().map(|p| p / nqf).collect();
    let precision_at_n = precision
        .iter()
        .take(map_n)
        .enumerate()
        .map(|(r, &p)| (r + 1, p))
        .collect();
    let pr_curve = recall_sum.iter().map(|r| r / nqf).zip(precision).collect();
    Ok(EvalReport {
        map_n,
        map_at_n: ap_sum / nqf,
        precision_at_n,
        pr_curve,
        radius,
        precision_within_radius: radius_sum / nqf,
        distance_matrix: None,
        runtime: RuntimeStats {
            queries: nq,
            database: n,
            seconds: started.elapsed().as_secs_f64(),
        },
    })
}

pub fn mean_average_precision(index: &CodeIndex, queries: &QuerySet, n: usize) -> Result<f64> {
    Ok(evaluate(index, queries, n, 0)?.map_at_n)
}

pub fn precision_at_n_curve(
    index: &CodeIndex,
    queries: &QuerySet,
    max_n: usize,
) -> Result<Vec<(usize, f64)>> {
    Ok(evaluate(index, queries, max_n, 0)?.precision_at_n)
}

pub fn precision_within_radius(index: &CodeIndex, queries: &QuerySet, radius: u32) -> Result<f64> {
    Ok(evaluate(index, queries, 1, radius)?.precision_within_radius)
}

pub fn pr_curve(index: &CodeIndex, queries: &QuerySet) -> Result<Vec<(f64, f64)>> {
    Ok(evaluate(index, queries, 1, 0)?.pr_curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(c: usize) -> LabelSet {
        LabelSet::single(c, 4).unwrap()
    }

    fn code(bits: &[u8]) -> PackedCode {
        PackedCode::from_bits(bits)
    }

    #[test]
    fn ap_examples() {
        assert_eq!(average_precision_at_n(&[true, true, false], 3), 1.0);
        assert_eq!(average_precision_at_n(&[false, true], 2), 0.5);
        assert_eq!(average_precision_at_n(&[false, false, false], 3), 0.0);
        assert_eq!(average_precision_at_n(&[false, true], 1), 0.0);
    }

    fn small_index() -> CodeIndex {
        CodeIndex::new(
            vec![code(&[0, 0, 0]), code(&[0, 0, 1]), code(&[1, 1, 1])],
            vec![single(0), single(1), single(0)],
        )
        .unwrap()
    }

    #[test]
    fn map_of_single_query_is_its_ap() {
        let index = small_index();
        let q = QuerySet::new(vec![code(&[0, 0, 1])], vec![single(0)]).unwrap();
        // ranking [1, 0, 2] -> relevance [0, 1, 1]
        let expected = average_precision_at_n(&[false, true, true], 3);
        assert_eq!(mean_average_precision(&index, &q, 3).unwrap(), expected);
    }

    #[test]
    fn map_averages_queries() {
        let index = CodeIndex::new(vec![code(&[0, 0]), code(&[1, 1])], vec![single(0), single(1)]).unwrap();
        let q = QuerySet::new(vec![code(&[0, 0]), code(&[0, 0])], vec![single(0), single(1)]).unwrap();
        assert_eq!(mean_average_precision(&index, &q, 2).unwrap(), 0.75);
    }

    #[test]
    fn precision_curve_examples() {
        let index = CodeIndex::new(vec![code(&[0, 0]), code(&[1, 1])], vec![single(0), single(1)]).unwrap();
        let q = QuerySet::new(vec![code(&[0, 0])], vec![single(0)]).unwrap();
        assert_eq!(precision_at_n_curve(&index, &q, 2).unwrap(), vec![(1, 1.0), (2, 0.5)]);
        // max_n past the database size is clipped
        assert_eq!(precision_at_n_curve(&index, &q, 10).unwrap().len(), 2);
        let all = QuerySet::new(vec![code(&[1, 0])], vec![LabelSet::from_categories(&[0, 1], 4).unwrap()]).unwrap();
        assert_eq!(precision_at_n_curve(&index, &all, 2).unwrap()[1].1, 1.0);
    }

    #[test]
    fn radius_examples() {
        let index = small_index();
        let q = |c: &[u8], l| QuerySet::new(vec![code(c)], vec![single(l)]).unwrap();
        assert_eq!(precision_within_radius(&index, &q(&[1, 1, 0], 0), 1).unwrap(), 1.0);
        assert_eq!(precision_within_radius(&index, &q(&[1, 1, 0], 0), 0).unwrap(), 0.0);
        assert_eq!(precision_within_radius(&index, &q(&[0, 0, 0], 0), 1).unwrap(), 0.5);
    }

    #[test]
    fn pr_curve_perfect_ranking() {
        let index = CodeIndex::new(
            vec![code(&[0, 0]), code(&[0, 0]), code(&[1, 1]), code(&[1, 1])],
            vec![single(0), single(0), single(1), single(1)],
        )
        .unwrap();
        let q = QuerySet::new(vec![code(&[0, 0])], vec![single(0)]).unwrap();
        let pr = pr_curve(&index, &q).unwrap();
        assert_eq!(pr, vec![(0.5, 1.0), (1.0, 1.0), (1.0, 2.0 / 3.0), (1.0, 0.5)]);
    }

    #[test]
    fn errors() {
        let index = small_index();
        assert!(QuerySet::new(vec![], vec![]).is_err());
        let q = QuerySet::new(vec![code(&[0, 0])], vec![single(0)]).unwrap();
        assert!(mean_average_precision(&index, &q, 3).is_err());
        let q = QuerySet::new(vec![code(&[0, 0, 0])], vec![single(0)]).unwrap();
        assert!(mean_average_precision(&index, &q, 0).is_err());
    }
}
