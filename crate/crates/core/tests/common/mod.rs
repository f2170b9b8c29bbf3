//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the ranking or metric code it is compared with.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A retrieval instance over plain vectors.
#[derive(Debug, Clone)]
pub struct Instance {
    pub k: usize,
    pub q: usize,
    pub db_codes: Vec<Vec<u8>>,
    pub db_labels: Vec<Vec<usize>>,
    pub query_codes: Vec<Vec<u8>>,
    pub query_labels: Vec<Vec<usize>>,
    pub map_n: usize,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=16);
    let q = rng.random_range(1..=10);
    let n = rng.random_range(1..=200);
    let nq = rng.random_range(1..=20);
    let code = |rng: &mut ChaCha8Rng| (0..k).map(|_| rng.random_range(0..2u8)).collect::<Vec<_>>();
    let labels = |rng: &mut ChaCha8Rng| {
        let count = rng.random_range(1..=q.min(3));
        let mut cats: Vec<usize> = (0..count).map(|_| rng.random_range(0..q)).collect();
        cats.sort();
        cats.dedup();
        cats
    };
    let db_codes = (0..n).map(|_| code(&mut rng)).collect();
    let db_labels = (0..n).map(|_| labels(&mut rng)).collect();
    let query_codes = (0..nq).map(|_| code(&mut rng)).collect();
    let query_labels = (0..nq).map(|_| labels(&mut rng)).collect();
    let map_n = rng.random_range(1..=n + 10);
    Instance { k, q, db_codes, db_labels, query_codes, query_labels, map_n }
}

fn hamming(a: &[u8], b: &[u8]) -> u32 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u32
}

fn shares(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.contains(x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMetrics {
    pub map: f64,
    pub precision_at: Vec<f64>,
    pub pr: Vec<(f64, f64)>,
    pub p_radius: f64,
}

pub fn oracle_metrics(inst: &Instance, radius: u32) -> OracleMetrics {
    let n = inst.db_codes.len();
    let nq = inst.query_codes.len() as f64;
    let mut ap_sum = 0.0;
    let mut p_radius_sum = 0.0;
    let mut precision_sum = vec![0.0; n];
    let mut recall_sum = vec![0.0; n];
    for (qc, ql) in inst.query_codes.iter().zip(&inst.query_labels) {
        let dist: Vec<u32> = inst.db_codes.iter().map(|c| hamming(qc, c)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[a].cmp(&dist[b]).then(a.cmp(&b)));
        let rel: Vec<bool> = order.iter().map(|&i| shares(ql, &inst.db_labels[i])).collect();

        // AP over the top N, normalised by relevant items within the top N.
        let mut hits = 0;
        let mut sum = 0.0;
        for r in 0..inst.map_n.min(n) {
            if rel[r] {
                hits += 1;
                sum += hits as f64 / (r + 1) as f64;
            }
        }
        ap_sum += if hits == 0 { 0.0 } else { sum / hits as f64 };

        let total = rel.iter().filter(|&&r| r).count();
        for r in 1..=n {
            let found = rel[..r].iter().filter(|&&x| x).count();
            precision_sum[r - 1] += found as f64 / r as f64;
            if total > 0 {
                recall_sum[r - 1] += found as f64 / total as f64;
            }
        }

        let ball: Vec<usize> = (0..n).filter(|&i| dist[i] <= radius).collect();
        if !ball.is_empty() {
            let good = ball.iter().filter(|&&i| shares(ql, &inst.db_labels[i])).count();
            p_radius_sum += good as f64 / ball.len() as f64;
        }
    }
    OracleMetrics {
        map: ap_sum / nq,
        precision_at: precision_sum.iter().take(inst.map_n).map(|p| p / nq).collect(),
        pr: recall_sum.iter().map(|r| r / nq).zip(precision_sum.iter().map(|p| p / nq)).collect(),
        p_radius: p_radius_sum / nq,
    }
}
