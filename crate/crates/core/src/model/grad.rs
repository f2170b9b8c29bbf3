//! Analytic gradients of the training objective.

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::hamming::PackedCode;

use super::loss::{central_loss, quantization_loss};
use super::{HashModel, TrainConfig};

/// Samples accumulated sequentially inside one parallel work item. Fixing
/// this keeps the summation order independent of the thread count.
const CHUNK: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradient {
    /// Batch-mean objective at the current parameters.
    pub loss: f64,
    /// Gradient in the model's flat parameter layout.
    pub grad: Vec<f64>,
}

pub fn backward(
    model: &HashModel,
    xs: &[&[f64]],
    centers: &[&PackedCode],
    cfg: &TrainConfig,
) -> Result<BatchGradient> {
    backward_with(model, xs, centers, cfg, cfg.execution)
}

pub fn backward_with(
    model: &HashModel,
    xs: &[&[f64]],
    centers: &[&PackedCode],
    cfg: &TrainConfig,
    exec: Execution,
) -> Result<BatchGradient> {
    if xs.len() != centers.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: centers.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::InvalidDimension("empty batch".into()));
    }
    let k = model.code_len();
    for (x, c) in xs.iter().zip(centers) {
        model.check_input(x)?;
        if c.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: c.len(),
            });
        }
    }

    let n = xs.len();
    let chunks = map_range(exec, n.div_ceil(CHUNK), |ci| {
        let mut grad = vec![0.0; model.params.len()];
        let mut loss = 0.0;
        for s in ci * CHUNK..((ci + 1) * CHUNK).min(n) {
            loss += accumulate_sample(model, xs[s], centers[s], cfg, &mut grad)?;
        }
        Ok::<_, Error>((loss, grad))
    });

    let mut loss = 0.0;
    let mut grad = vec![0.0; model.params.len()];
    for chunk in chunks {
        let (l, g) = chunk?;
        loss += l;
        for (acc, v) in grad.iter_mut().zip(&g) {
            *acc += v;
        }
    }
    let scale = 1.0 / n as f64;
    loss *= scale;
    for g in &mut grad {
        *g *= scale;
    }
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("non-finite loss {loss}")));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("non-finite gradient at parameter {i}")));
    }
    Ok(BatchGradient { loss, grad })
}

/// Adds one sample's (unscaled) gradient into `grad`; returns its loss.
fn accumulate_sample(
    model: &HashModel,
    x: &[f64],
    center: &PackedCode,
    cfg: &TrainConfig,
    grad: &mut [f64],
) -> Result<f64> {
    let trace = model.trace(x);
    let h = trace.acts.last().unwrap();
    let k = h.len() as f64;

    let mut loss = 0.0;
    if cfg.use_lc {
        loss += central_loss(h, center)?;
    }
    if cfg.use_lq {
        loss += cfg.lambda1 * quantization_loss(h)?;
    }

    // Gradient w.r.t. output logits. For sigmoid + BCE this is (h - c)/K.
    let mut delta: Vec<f64> = h
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut d = 0.0;
            if cfg.use_lc {
                d += (v - center.bit(i) as u8 as f64) / k;
            }
            if cfg.use_lq {
                let u = 2.0 * v - 1.0;
                // d|u|/du taken as 0 at u = 0.
                let sign = if u > 0.0 {
                    1.0
                } else if u < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                d += cfg.lambda1 * (u.abs() - 1.0).tanh() * sign * 2.0 * v * (1.0 - v);
            }
            d
        })
        .collect();

    for l in (0..model.num_layers()).rev() {
        let (w, _) = model.layer(l);
        let input = &trace.acts[l];
        let fan_in = input.len();
        let start = model.layer_offset(l);
        let (gw, gb) = grad[start..start + w.len() + delta.len()].split_at_mut(w.len());
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            gb[o] += d;
            for (g, &a) in gw[o * fan_in..(o + 1) * fan_in].iter_mut().zip(input) {
                *g += d * a;
            }
        }
        if l == 0 {
            break;
        }
        let below = &trace.pre[l - 1];
        let mut next = vec![0.0; fan_in];
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (acc, &wv) in next.iter_mut().zip(&w[o * fan_in..(o + 1) * fan_in]) {
                *acc += d * wv;
            }
        }
        for (acc, &z) in next.iter_mut().zip(below) {
            if z <= 0.0 {
                *acc = 0.0;
            }
        }
        delta = next;
    }
    Ok(loss)
}
