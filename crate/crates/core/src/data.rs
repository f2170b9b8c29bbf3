//! Feature datasets and the synthetic Gaussian-blob generator.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::labels::LabelSet;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    #[default]
    Train,
    Query,
    Database,
}

/// `n` feature rows of width `d` (row-major) with one label set per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    features: Vec<f64>,
    labels: Vec<LabelSet>,
    split: Split,
}

impl Dataset {
    pub fn new(d: usize, features: Vec<f64>, labels: Vec<LabelSet>, split: Split) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension("feature dimension is zero".into()));
        }
        if labels.is_empty() {
            return Err(Error::InvalidDimension("dataset has no samples".into()));
        }
        if features.len() != labels.len() * d {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * d,
                got: features.len(),
            });
        }
        Ok(Dataset {
            d,
            features,
            labels,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[LabelSet] {
        &self.labels
    }

    /// Number of categories the label sets range over.
    pub fn num_categories(&self) -> usize {
        crate::labels::category_count(&self.labels)
    }
}

/// Train, query and database splits drawn around the same class means.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSplits {
    pub train: Dataset,
    pub query: Dataset,
    pub database: Dataset,
}

struct BlobSampler<R> {
    rng: R,
    means: Vec<Vec<f64>>,
    d: usize,
    spread: f64,
}

impl<R: Rng> BlobSampler<R> {
    fn new(mut rng: R, classes: usize, d: usize, spread: f64) -> Self {
        let means = (0..classes)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        BlobSampler {
            rng,
            means,
            d,
            spread,
        }
    }

    /// Class-major rows, stored at f32 precision so they survive the
    /// feature file format unchanged.
    fn draw(&mut self, per_class: usize, split: Split) -> Result<Dataset> {
        let classes = self.means.len();
        let mut features = Vec::with_capacity(classes * per_class * self.d);
        let mut labels = Vec::with_capacity(classes * per_class);
        for (class, mean) in self.means.iter().enumerate() {
            for _ in 0..per_class {
                for &mu in mean {
                    let noise: f64 = self.rng.sample(StandardNormal);
                    features.push((mu + self.spread * noise) as f32 as f64);
                }
                labels.push(LabelSet::single(class, classes)?);
            }
        }
        Dataset::new(self.d, features, labels, split)
    }
}

fn check_blob_args(classes: usize, per_class: usize, d: usize, spread: f64) -> Result<()> {
    if classes == 0 || per_class == 0 || d == 0 {
        return Err(Error::InvalidDimension(format!(
            "classes, per-class count and dimension must be positive (got {classes}, {per_class}, {d})"
        )));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::Config(format!("spread must be finite and >= 0, got {spread}")));
    }
    Ok(())
}

/// Class means uniform on the unit sphere, samples `mean + N(0, spread^2)`
/// per coordinate, single-label over `classes` categories.
pub fn make_synthetic_blobs(
    classes: usize,
    per_class: usize,
    d: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    check_blob_args(classes, per_class, d, spread)?;
    BlobSampler::new(stream_rng(seed, Stream::Synth), classes, d, spread).draw(per_class, Split::Train)
}

/// Like [`make_synthetic_blobs`] (whose output equals `train` here), followed
/// by a query split and a database split from the same means.
pub fn make_synthetic_splits(
    classes: usize,
    per_class: usize,
    query_per_class: usize,
    d: usize,
    spread: f64,
    seed: u64,
) -> Result<SyntheticSplits> {
    check_blob_args(classes, per_class, d, spread)?;
    check_blob_args(classes, query_per_class, d, spread)?;
    let mut sampler = BlobSampler::new(stream_rng(seed, Stream::Synth), classes, d, spread);
    let train = sampler.draw(per_class, Split::Train)?;
    let query = sampler.draw(query_per_class, Split::Query)?;
    let database = sampler.draw(per_class, Split::Database)?;
    Ok(SyntheticSplits {
        train,
        query,
        database,
    })
}
