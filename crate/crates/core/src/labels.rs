//! Multi-hot label sets over `q` categories.

use crate::error::{Error, Result};
use crate::hamming::PackedCode;

/// A nonempty set of category indices, stored as a `q`-bit bitmap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelSet {
    bits: PackedCode,
}

impl LabelSet {
    pub fn from_bits(bits: PackedCode) -> Result<Self> {
        if bits.count_ones() == 0 {
            return Err(Error::InvalidLabel("label set has no category set".into()));
        }
        Ok(LabelSet { bits })
    }

    pub fn single(category: usize, q: usize) -> Result<Self> {
        Self::from_categories(&[category], q)
    }

    pub fn from_categories(categories: &[usize], q: usize) -> Result<Self> {
        let mut bits = PackedCode::zeros(q);
        for &c in categories {
            if c >= q {
                return Err(Error::InvalidLabel(format!(
                    "category {c} out of range for q={q}"
                )));
            }
            bits.set(c, true);
        }
        Self::from_bits(bits)
    }

    pub fn q(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &PackedCode {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn categories(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.q()).filter(|&i| self.bits.bit(i))
    }

    /// The single category, if this set has exactly one.
    pub fn as_single(&self) -> Option<usize> {
        if self.count() == 1 {
            self.categories().next()
        } else {
            None
        }
    }

    /// True iff the two sets share at least one category.
    #[inline]
    pub fn intersects(&self, other: &LabelSet) -> bool {
        self.bits
            .words()
            .iter()
            .zip(other.bits.words())
            .any(|(a, b)| a & b != 0)
    }
}

/// Similarity relation used for retrieval: the two items share a category.
pub fn relevant(query: &LabelSet, item: &LabelSet) -> bool {
    query.intersects(item)
}

/// Largest category count across a label list.
pub fn category_count(labels: &[LabelSet]) -> usize {
    labels.iter().map(LabelSet::q).max().unwrap_or(0)
}
