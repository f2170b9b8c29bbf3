//! Hash-center generation, validation and semantic assignment.
//!
//! Centers are binary codes that are far apart in Hamming space. When the
//! code length is a power of two they come from the rows of a Sylvester
//! Hadamard matrix (pairwise distance exactly `k/2`), otherwise from random
//! bit-balanced or Bernoulli(0.5) sampling.

use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::hamming::PackedCode;
use crate::labels::LabelSet;
use crate::rng::{stream_rng, Stream};

/// Attempts to draw a fresh random center before giving up on distinctness.
pub const MAX_DUPLICATE_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMethod {
    /// First `m` rows of `H_k`.
    Hadamard,
    /// First `m` rows of the stacked `[H_k; -H_k]`.
    Hadamard2k,
    /// Exactly `⌊k/2⌋` ones per center at random positions.
    BalancedRandom,
    /// Every bit i.i.d. Bernoulli(0.5).
    Bernoulli,
    /// Read from a file; the generating method is not recorded there.
    Loaded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenterSet {
    k: usize,
    centers: Vec<PackedCode>,
    method: CenterMethod,
}

impl CenterSet {
    pub fn new(k: usize, centers: Vec<PackedCode>, method: CenterMethod) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidDimension("center set is empty".into()));
        }
        if let Some(bad) = centers.iter().find(|c| c.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: bad.len(),
            });
        }
        Ok(CenterSet { k, centers, method })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.centers.len()
    }

    pub fn method(&self) -> CenterMethod {
        self.method
    }

    pub fn centers(&self) -> &[PackedCode] {
        &self.centers
    }

    pub fn get(&self, i: usize) -> &PackedCode {
        &self.centers[i]
    }

    pub fn validate(&self) -> Result<CenterValidity> {
        validate_centers(&self.centers)
    }
}

/// Sylvester construction: `H_1 = [1]`, `H_2n = [[H_n, H_n], [H_n, -H_n]]`.
pub fn hadamard_matrix(k: usize) -> Result<Vec<Vec<i8>>> {
    if !k.is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "Hadamard order must be a power of two, got {k}"
        )));
    }
    let mut h = vec![vec![1i8]];
    while h.len() < k {
        let n = h.len();
        let mut next = vec![vec![0i8; 2 * n]; 2 * n];
        for (i, row) in h.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                next[i][j] = v;
                next[i][j + n] = v;
                next[i + n][j] = v;
                next[i + n][j + n] = -v;
            }
        }
        h = next;
    }
    Ok(h)
}

fn check_shape(m: usize, k: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidDimension("need at least one center".into()));
    }
    if k < 2 {
        return Err(Error::InvalidDimension(format!(
            "code length must be at least 2, got {k}"
        )));
    }
    Ok(())
}

fn sign_row_to_code(row: &[i8], negate: bool) -> PackedCode {
    PackedCode::from_bools(&row.iter().map(|&v| (v > 0) != negate).collect::<Vec<_>>())
}

/// Hash centers following the Hadamard-first strategy.
///
/// Uses rows of `H_k` when `m <= k`, rows of `[H_k; -H_k]` when
/// `k < m <= 2k` (both need `k` a power of two) and bit-balanced random
/// centers otherwise.
pub fn generate_centers(m: usize, k: usize, seed: u64) -> Result<CenterSet> {
    check_shape(m, k)?;
    if k.is_power_of_two() && m <= 2 * k {
        let h = hadamard_matrix(k)?;
        let centers = (0..m)
            .map(|i| sign_row_to_code(&h[i % k], i >= k))
            .collect();
        let method = if m <= k {
            CenterMethod::Hadamard
        } else {
            CenterMethod::Hadamard2k
        };
        return CenterSet::new(k, centers, method);
    }
    generate_centers_balanced(m, k, seed)
}

/// Random centers with exactly `⌊k/2⌋` ones each.
pub fn generate_centers_balanced(m: usize, k: usize, seed: u64) -> Result<CenterSet> {
    check_shape(m, k)?;
    let mut rng = stream_rng(seed, Stream::Centers);
    let centers = draw_distinct(m, || {
        let mut c = PackedCode::zeros(k);
        for pos in index::sample(&mut rng, k, k / 2) {
            c.set(pos, true);
        }
        c
    })?;
    CenterSet::new(k, centers, CenterMethod::BalancedRandom)
}

/// Random centers with every bit drawn from Bernoulli(0.5).
pub fn generate_centers_bernoulli(m: usize, k: usize, seed: u64) -> Result<CenterSet> {
    check_shape(m, k)?;
    let mut rng = stream_rng(seed, Stream::Centers);
    let centers = draw_distinct(m, || {
        PackedCode::from_bools(&(0..k).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>())
    })?;
    CenterSet::new(k, centers, CenterMethod::Bernoulli)
}

fn draw_distinct(m: usize, mut draw: impl FnMut() -> PackedCode) -> Result<Vec<PackedCode>> {
    let mut seen = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut attempts = 0;
        loop {
            let c = draw();
            if seen.insert(c.clone()) {
                out.push(c);
                break;
            }
            attempts += 1;
            if attempts > MAX_DUPLICATE_RETRIES {
                return Err(Error::Generation(format!(
                    "center {i} duplicated an earlier center {MAX_DUPLICATE_RETRIES} times"
                )));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterValidity {
    pub mean_distance: f64,
    pub min_distance: u32,
    pub valid: bool,
}

/// Mean and minimum pairwise distance; a set is valid when the mean is at
/// least `k/2`. A single center is vacuously valid with mean = min = `k`.
pub fn validate_centers(centers: &[PackedCode]) -> Result<CenterValidity> {
    validate_centers_with(centers, Execution::default())
}

pub fn validate_centers_with(centers: &[PackedCode], exec: Execution) -> Result<CenterValidity> {
    let first = centers
        .first()
        .ok_or_else(|| Error::InvalidDimension("center set is empty".into()))?;
    let k = first.len();
    if let Some(bad) = centers.iter().find(|c| c.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: bad.len(),
        });
    }
    let m = centers.len();
    if m == 1 {
        return Ok(CenterValidity {
            mean_distance: k as f64,
            min_distance: k as u32,
            valid: true,
        });
    }
    let rows = map_range(exec, m, |i| {
        centers[i + 1..]
            .iter()
            .map(|c| centers[i].distance_unchecked(c))
            .fold((0u64, u32::MAX), |(s, lo), d| (s + d as u64, lo.min(d)))
    });
    let (total, min_distance) = rows
        .into_iter()
        .fold((0u64, u32::MAX), |(s, lo), (rs, rl)| (s + rs, lo.min(rl)));
    let pairs = (m * (m - 1) / 2) as f64;
    let mean_distance = total as f64 / pairs;
    Ok(CenterValidity {
        mean_distance,
        min_distance,
        valid: 2.0 * mean_distance >= k as f64,
    })
}

/// Per-sample target centers, deduplicated by label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticCenterMap {
    k: usize,
    targets: Vec<PackedCode>,
    sample_target: Vec<usize>,
}

impl SemanticCenterMap {
    /// Builds a map from materialized per-sample centers, sharing storage
    /// between identical rows.
    pub fn from_codes(codes: Vec<PackedCode>) -> Result<Self> {
        let k = codes
            .first()
            .map(PackedCode::len)
            .ok_or_else(|| Error::InvalidDimension("center map is empty".into()))?;
        let mut slot: HashMap<PackedCode, usize> = HashMap::new();
        let mut targets = Vec::new();
        let mut sample_target = Vec::with_capacity(codes.len());
        for c in codes {
            if c.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: c.len(),
                });
            }
            let next = targets.len();
            let idx = *slot.entry(c.clone()).or_insert_with(|| {
                targets.push(c);
                next
            });
            sample_target.push(idx);
        }
        Ok(SemanticCenterMap {
            k,
            targets,
            sample_target,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.sample_target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_target.is_empty()
    }

    pub fn center_of(&self, sample: usize) -> &PackedCode {
        &self.targets[self.sample_target[sample]]
    }

    /// Distinct target centers in order of first appearance.
    pub fn targets(&self) -> &[PackedCode] {
        &self.targets
    }

    pub fn target_index(&self, sample: usize) -> usize {
        self.sample_target[sample]
    }

    pub fn materialize(&self) -> Vec<PackedCode> {
        (0..self.len()).map(|i| self.center_of(i).clone()).collect()
    }
}

fn check_label_space(cs: &CenterSet, labels: &[LabelSet]) -> Result<()> {
    if let Some(l) = labels.iter().find(|l| l.q() > cs.m()) {
        return Err(Error::InsufficientCenters {
            needed: l.q(),
            available: cs.m(),
        });
    }
    Ok(())
}

/// Category `j` maps to center `j`. Every label set must hold one category.
pub fn assign_single_label(cs: &CenterSet, labels: &[LabelSet]) -> Result<SemanticCenterMap> {
    check_label_space(cs, labels)?;
    let mut sample_target = Vec::with_capacity(labels.len());
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut targets = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let cat = l.as_single().ok_or_else(|| {
            Error::InvalidLabel(format!("sample {i} has {} categories, expected 1", l.count()))
        })?;
        let next = targets.len();
        let idx = *slot.entry(cat).or_insert_with(|| {
            targets.push(cs.get(cat).clone());
            next
        });
        sample_target.push(idx);
    }
    Ok(SemanticCenterMap {
        k: cs.k(),
        targets,
        sample_target,
    })
}

/// Per-bit majority vote across the centers of every category in a label
/// set. Tied bits are drawn from Bernoulli(0.5) on the tie stream, once per
/// distinct label set, in order of first appearance.
pub fn assign_multi_label(
    cs: &CenterSet,
    labels: &[LabelSet],
    seed: u64,
) -> Result<SemanticCenterMap> {
    check_label_space(cs, labels)?;
    let mut rng = stream_rng(seed, Stream::Ties);
    let mut slot: HashMap<&LabelSet, usize> = HashMap::new();
    let mut targets = Vec::new();
    let mut sample_target = Vec::with_capacity(labels.len());
    for l in labels {
        let idx = match slot.get(l) {
            Some(&idx) => idx,
            None => {
                let center = match l.as_single() {
                    Some(cat) => cs.get(cat).clone(),
                    None => majority_centroid(cs, l, &mut rng),
                };
                targets.push(center);
                slot.insert(l, targets.len() - 1);
                targets.len() - 1
            }
        };
        sample_target.push(idx);
    }
    Ok(SemanticCenterMap {
        k: cs.k(),
        targets,
        sample_target,
    })
}

fn majority_centroid(cs: &CenterSet, labels: &LabelSet, rng: &mut impl Rng) -> PackedCode {
    let members: Vec<&PackedCode> = labels.categories().map(|c| cs.get(c)).collect();
    let n = members.len();
    let mut out = PackedCode::zeros(cs.k());
    for bit in 0..cs.k() {
        let ones = members.iter().filter(|c| c.bit(bit)).count();
        let value = match (2 * ones).cmp(&n) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => rng.random_bool(0.5),
        };
        out.set(bit, value);
    }
    out
}
