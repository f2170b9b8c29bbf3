//! Hash function: a stack of fully connected layers with ReLU between them
//! and a logistic sigmoid on the output, mapping features to relaxed codes
//! in (0, 1)^K.

mod grad;
mod loss;
mod train;

pub use grad::{backward, backward_with, BatchGradient};
pub use loss::{
    central_loss, central_loss_batch, quantization_loss, quantization_loss_batch, total_loss,
    BCE_EPSILON,
};
pub use train::{default_hidden, encode, encode_with, train, TrainConfig, TrainOutcome};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Parameters are stored flat: for each layer, its `out x in` weight matrix
/// (row-major) followed by its `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct HashModel {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

pub(crate) fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Intermediate values kept for the backward pass.
pub(crate) struct Trace {
    /// `acts[0]` is the input, `acts[l + 1]` the output of layer `l`.
    pub acts: Vec<Vec<f64>>,
    /// Pre-activation of every layer.
    pub pre: Vec<Vec<f64>>,
}

impl HashModel {
    fn check_sizes(sizes: &[usize]) -> Result<()> {
        if sizes.len() < 2 {
            return Err(Error::InvalidDimension(format!(
                "need at least input and output sizes, got {sizes:?}"
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidDimension(format!("zero-width layer in {sizes:?}")));
        }
        Ok(())
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        Self::check_sizes(sizes)?;
        Ok(HashModel {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        Self::check_sizes(sizes)?;
        if params.len() != param_count(sizes) {
            return Err(Error::DimensionMismatch {
                expected: param_count(sizes),
                got: params.len(),
            });
        }
        Ok(HashModel {
            sizes: sizes.to_vec(),
            params,
        })
    }

    /// Uniform init in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for weights and
    /// biases, drawn from the init stream of `seed`.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut model = Self::zeros(sizes)?;
        let mut rng = stream_rng(seed, Stream::Init);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let n = w[1] * w[0] + w[1];
            for p in &mut model.params[offset..offset + n] {
                *p = rng.random_range(-bound..=bound);
            }
            offset += n;
        }
        Ok(model)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn code_len(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub(crate) fn layer_offset(&self, layer: usize) -> usize {
        param_count(&self.sizes[..=layer])
    }

    /// Weights (`out x in`, row-major) and biases of `layer`.
    pub fn layer(&self, layer: usize) -> (&[f64], &[f64]) {
        let (i, o) = (self.sizes[layer], self.sizes[layer + 1]);
        let start = self.layer_offset(layer);
        let (w, rest) = self.params[start..].split_at(o * i);
        (w, &rest[..o])
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite feature value {v}")));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).acts.pop().unwrap())
    }

    pub(crate) fn trace(&self, x: &[f64]) -> Trace {
        let layers = self.num_layers();
        let mut acts = Vec::with_capacity(layers + 1);
        let mut pre = Vec::with_capacity(layers);
        acts.push(x.to_vec());
        for l in 0..layers {
            let (w, b) = self.layer(l);
            let input = &acts[l];
            let z: Vec<f64> = b
                .iter()
                .zip(w.chunks_exact(input.len()))
                .map(|(bias, row)| bias + dot(row, input))
                .collect();
            let a = if l + 1 == layers {
                z.iter().map(|&v| sigmoid(v)).collect()
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            pre.push(z);
            acts.push(a);
        }
        Trace { acts, pre }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
