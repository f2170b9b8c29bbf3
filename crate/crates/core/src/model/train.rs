//! Mini-batch SGD with momentum over a feature dataset.

use rand::seq::SliceRandom;

use crate::centers::SemanticCenterMap;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::hamming::{binarize, PackedCode};
use crate::rng::{stream_rng, Stream};

use super::{backward_with, HashModel};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Weight of the quantization term.
    pub lambda1: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub use_lc: bool,
    pub use_lq: bool,
    /// Hidden layer widths; `None` picks [`default_hidden`] for the input size.
    pub hidden: Option<Vec<usize>>,
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda1: 1e-4,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 16,
            epochs: 100,
            seed: 0,
            use_lc: true,
            use_lq: true,
            hidden: None,
            execution: Execution::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.use_lc && !self.use_lq {
            return Err(Error::Config("at least one loss term must be enabled".into()));
        }
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return Err(Error::Config(format!("lambda1 must be >= 0, got {}", self.lambda1)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if let Some(h) = &self.hidden {
            if h.contains(&0) {
                return Err(Error::Config(format!("zero hidden width in {h:?}")));
            }
        }
        Ok(())
    }

    pub fn layer_sizes(&self, input_dim: usize, code_len: usize) -> Vec<usize> {
        let hidden = self
            .hidden
            .clone()
            .unwrap_or_else(|| default_hidden(input_dim).to_vec());
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input_dim);
        sizes.extend(hidden);
        sizes.push(code_len);
        sizes
    }
}

/// `[1024, 512]`, scaled down in proportion when the input is narrower
/// than 1024.
pub fn default_hidden(input_dim: usize) -> [usize; 2] {
    let d = input_dim.min(1024);
    [d.max(1), (512 * d).div_ceil(1024).max(1)]
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: HashModel,
    /// Sample-weighted mean objective of each epoch.
    pub epoch_losses: Vec<f64>,
}

pub fn train(
    dataset: &Dataset,
    center_map: &SemanticCenterMap,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n = dataset.len();
    if n == 0 {
        return Err(Error::InvalidDimension("training set is empty".into()));
    }
    if center_map.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: center_map.len(),
        });
    }
    let sizes = cfg.layer_sizes(dataset.dim(), center_map.k());
    let mut model = HashModel::init(&sizes, cfg.seed)?;
    let mut velocity = vec![0.0; model.params.len()];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(cfg.seed, Stream::Shuffle);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let xs: Vec<&[f64]> = idx.iter().map(|&i| dataset.row(i)).collect();
            let cs: Vec<&PackedCode> = idx.iter().map(|&i| center_map.center_of(i)).collect();
            let diverged = |message: String| Error::Diverged {
                epoch,
                batch,
                message,
            };
            let g = backward_with(&model, &xs, &cs, cfg, cfg.execution).map_err(|e| match e {
                Error::Numeric(msg) => diverged(msg),
                other => other,
            })?;
            for ((p, v), g) in model.params.iter_mut().zip(&mut velocity).zip(&g.grad) {
                *v = cfg.momentum * *v + g;
                *p -= cfg.learning_rate * *v;
            }
            if let Some(i) = model.params.iter().position(|p| !p.is_finite()) {
                return Err(diverged(format!("parameter {i} became non-finite")));
            }
            epoch_loss += g.loss * idx.len() as f64;
        }
        epoch_losses.push(epoch_loss / n as f64);
    }
    Ok(TrainOutcome {
        model,
        epoch_losses,
    })
}

/// Forward pass plus thresholding for every row of `dataset`.
pub fn encode(model: &HashModel, dataset: &Dataset) -> Result<Vec<PackedCode>> {
    encode_with(model, dataset, Execution::default())
}

pub fn encode_with(model: &HashModel, dataset: &Dataset, exec: Execution) -> Result<Vec<PackedCode>> {
    if dataset.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: dataset.dim(),
        });
    }
    map_range(exec, dataset.len(), |i| binarize(&model.forward(dataset.row(i))?))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centers::{assign_single_label, generate_centers};
    use crate::data::make_synthetic_blobs;

    fn setup() -> (Dataset, SemanticCenterMap) {
        let ds = make_synthetic_blobs(4, 20, 8, 0.1, 3).unwrap();
        let cs = generate_centers(4, 8, 3).unwrap();
        let map = assign_single_label(&cs, ds.labels()).unwrap();
        (ds, map)
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (ds, map) = setup();
        let cfg = TrainConfig {
            epochs: 0,
            seed: 9,
            ..TrainConfig::default()
        };
        let out = train(&ds, &map, &cfg).unwrap();
        let sizes = cfg.layer_sizes(8, 8);
        assert_eq!(out.model, HashModel::init(&sizes, 9).unwrap());
        assert!(out.epoch_losses.is_empty());
    }

    #[test]
    fn training_is_deterministic_and_reduces_loss() {
        let (ds, map) = setup();
        let cfg = TrainConfig {
            epochs: 30,
            ..TrainConfig::default()
        };
        let a = train(&ds, &map, &cfg).unwrap();
        let b = train(&ds, &map, &cfg).unwrap();
        assert_eq!(a.model.params(), b.model.params());
        assert_eq!(a.epoch_losses.len(), 30);
        assert!(a.epoch_losses[29] < a.epoch_losses[0]);
    }

    #[test]
    fn execution_mode_does_not_change_result() {
        let (ds, map) = setup();
        let base = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let seq = train(&ds, &map, &TrainConfig { execution: Execution::Sequential, ..base.clone() });
        let par = train(&ds, &map, &TrainConfig { execution: Execution::Parallel, ..base });
        assert_eq!(seq.unwrap().model, par.unwrap().model);
    }

    #[test]
    fn divergence_is_reported() {
        let (ds, map) = setup();
        let cfg = TrainConfig {
            learning_rate: 1e300,
            epochs: 5,
            ..TrainConfig::default()
        };
        let err = train(&ds, &map, &cfg).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig {
            use_lc: false,
            use_lq: false,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(TrainConfig { momentum: 1.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
    }

    #[test]
    fn default_widths_scale_with_input() {
        assert_eq!(default_hidden(2048), [1024, 512]);
        assert_eq!(default_hidden(1024), [1024, 512]);
        assert_eq!(default_hidden(32), [32, 16]);
        assert_eq!(default_hidden(1), [1, 1]);
    }

    #[test]
    fn encode_checks_dimension() {
        let (ds, _) = setup();
        let m = HashModel::zeros(&[3, 4, 4, 8]).unwrap();
        assert!(encode(&m, &ds).is_err());
        let m = HashModel::zeros(&[8, 4, 4, 8]).unwrap();
        let codes = encode(&m, &ds).unwrap();
        assert!(codes.iter().all(|c| c.count_ones() == 8));
    }
}
