mod common;

use central_hash::hamming::PackedCode;
use central_hash::labels::LabelSet;
use central_hash::retrieval::{evaluate_with, CodeIndex, QuerySet};
use central_hash::Execution;
use proptest::prelude::*;

fn build(inst: &common::Instance) -> (CodeIndex, QuerySet) {
    let labels = |l: &Vec<usize>| LabelSet::from_categories(l, inst.q).unwrap();
    let index = CodeIndex::new(
        inst.db_codes.iter().map(|c| PackedCode::from_bits(c)).collect(),
        inst.db_labels.iter().map(labels).collect(),
    )
    .unwrap();
    let queries = QuerySet::new(
        inst.query_codes.iter().map(|c| PackedCode::from_bits(c)).collect(),
        inst.query_labels.iter().map(labels).collect(),
    )
    .unwrap();
    (index, queries)
}

#[test]
fn matches_oracle_in_both_modes() {
    for seed in 100..160 {
        let inst = common::random_instance(seed);
        let (index, queries) = build(&inst);
        for radius in [0, 1, 3] {
            let oracle = common::oracle_metrics(&inst, radius);
            for exec in [Execution::Sequential, Execution::Parallel] {
                let r = evaluate_with(&index, &queries, inst.map_n, radius, exec).unwrap();
                assert_eq!(r.map_at_n, oracle.map, "seed {seed}");
                assert_eq!(r.precision_within_radius, oracle.p_radius, "seed {seed}");
                let pr: Vec<(f64, f64)> = r.pr_curve.clone();
                assert_eq!(pr, oracle.pr, "seed {seed}");
            }
        }
    }
}

#[test]
fn ranking_matches_sort() {
    for seed in 0..20 {
        let inst = common::random_instance(seed);
        let (index, _) = build(&inst);
        let q = PackedCode::from_bits(&inst.query_codes[0]);
        let d = index.distances(&q).unwrap();
        let mut expect: Vec<usize> = (0..d.len()).collect();
        expect.sort_by_key(|&i| (d[i], i));
        assert_eq!(index.rank_by_distance(&q).unwrap(), expect);
    }
}

proptest! {
    #[test]
    fn metrics_bounded(seed in 0u64..10_000) {
        let inst = common::random_instance(seed);
        let (index, queries) = build(&inst);
        let r = evaluate_with(&index, &queries, inst.map_n, 2, Execution::Parallel).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.map_at_n));
        prop_assert!((0.0..=1.0).contains(&r.precision_within_radius));
        let mut last = 0.0;
        for &(recall, precision) in &r.pr_curve {
            prop_assert!(recall >= last && recall <= 1.0 + 1e-12);
            prop_assert!((0.0..=1.0).contains(&precision));
            last = recall;
        }
    }
}
