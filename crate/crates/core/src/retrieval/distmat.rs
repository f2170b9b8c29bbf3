//! Mean Hamming distance between groups of codes and every hash center.

use crate::centers::CenterSet;
use crate::error::{Error, Result};
use crate::hamming::PackedCode;

/// Row `i` holds the mean distance from the codes of group `i` to each
/// center `j`. Groups with no codes produce a row of NaN.
pub fn center_distance_matrix(groups: &[Vec<PackedCode>], centers: &CenterSet) -> Result<Vec<Vec<f64>>> {
    if groups.len() > centers.m() {
        return Err(Error::DimensionMismatch {
            expected: centers.m(),
            got: groups.len(),
        });
    }
    groups
        .iter()
        .map(|group| {
            if group.is_empty() {
                return Ok(vec![f64::NAN; centers.m()]);
            }
            centers
                .centers()
                .iter()
                .map(|c| {
                    let mut total = 0u64;
                    for code in group {
                        total += c.distance(code)? as u64;
                    }
                    Ok(total as f64 / group.len() as f64)
                })
                .collect()
        })
        .collect()
}

/// Buckets codes into `m` groups by their assigned center index.
pub fn group_by_assignment(
    codes: &[PackedCode],
    assignments: &[usize],
    m: usize,
) -> Result<Vec<Vec<PackedCode>>> {
    if codes.len() != assignments.len() {
        return Err(Error::DimensionMismatch {
            expected: codes.len(),
            got: assignments.len(),
        });
    }
    let mut groups = vec![Vec::new(); m];
    for (code, &a) in codes.iter().zip(assignments) {
        let slot = groups.get_mut(a).ok_or(Error::InsufficientCenters {
            needed: a + 1,
            available: m,
        })?;
        slot.push(code.clone());
    }
    Ok(groups)
}

/// Index of the closest center for each target code (lowest index on ties).
/// Targets that are centers themselves map to their own index.
pub fn nearest_center_assignment(targets: &[PackedCode], centers: &CenterSet) -> Result<Vec<usize>> {
    targets
        .iter()
        .map(|t| {
            let mut best = (u32::MAX, 0);
            for (j, c) in centers.centers().iter().enumerate() {
                let d = c.distance(t)?;
                if d < best.0 {
                    best = (d, j);
                }
            }
            Ok(best.1)
        })
        .collect()
}
