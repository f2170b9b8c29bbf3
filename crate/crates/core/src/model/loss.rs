//! Central-similarity and quantization losses.

use crate::error::{Error, Result};
use crate::hamming::PackedCode;

use super::TrainConfig;

/// Relaxed codes are clamped to `[eps, 1 - eps]` before taking logs.
pub const BCE_EPSILON: f64 = 1e-7;

/// `log(cosh(x))` without overflow for large `|x|`.
#[inline]
pub(crate) fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn check_relaxed(h: &[f64]) -> Result<()> {
    match h.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Numeric(format!("non-finite relaxed code entry {v}"))),
        None => Ok(()),
    }
}

/// Binary cross-entropy between a relaxed code and its center, averaged
/// over bits: `-(1/K) Σ c log h + (1 - c) log(1 - h)`.
pub fn central_loss(h: &[f64], center: &PackedCode) -> Result<f64> {
    if h.len() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            got: h.len(),
        });
    }
    check_relaxed(h)?;
    let sum: f64 = h
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let v = v.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
            if center.bit(i) {
                -v.ln()
            } else {
                -(1.0 - v).ln()
            }
        })
        .sum();
    Ok(sum / h.len() as f64)
}

/// Smoothed bimodal-Laplace penalty `Σ log cosh(|2h - 1| - 1)`; zero exactly
/// when every entry is 0 or 1.
pub fn quantization_loss(h: &[f64]) -> Result<f64> {
    check_relaxed(h)?;
    Ok(h.iter().map(|&v| log_cosh((2.0 * v - 1.0).abs() - 1.0)).sum())
}

fn check_batch(hs: &[Vec<f64>], centers: &[&PackedCode]) -> Result<()> {
    if hs.len() != centers.len() {
        return Err(Error::DimensionMismatch {
            expected: hs.len(),
            got: centers.len(),
        });
    }
    if hs.is_empty() {
        return Err(Error::InvalidDimension("empty batch".into()));
    }
    Ok(())
}

pub fn central_loss_batch(hs: &[Vec<f64>], centers: &[&PackedCode]) -> Result<f64> {
    check_batch(hs, centers)?;
    let mut sum = 0.0;
    for (h, c) in hs.iter().zip(centers) {
        sum += central_loss(h, c)?;
    }
    Ok(sum / hs.len() as f64)
}

pub fn quantization_loss_batch(hs: &[Vec<f64>]) -> Result<f64> {
    if hs.is_empty() {
        return Err(Error::InvalidDimension("empty batch".into()));
    }
    let mut sum = 0.0;
    for h in hs {
        sum += quantization_loss(h)?;
    }
    Ok(sum / hs.len() as f64)
}

/// `[use_lc] L_C + lambda1 [use_lq] L_Q`, each term a batch mean.
pub fn total_loss(hs: &[Vec<f64>], centers: &[&PackedCode], cfg: &TrainConfig) -> Result<f64> {
    check_batch(hs, centers)?;
    let mut total = 0.0;
    if cfg.use_lc {
        total += central_loss_batch(hs, centers)?;
    }
    if cfg.use_lq {
        total += cfg.lambda1 * quantization_loss_batch(hs)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(bits: &[u8]) -> PackedCode {
        PackedCode::from_bits(bits)
    }

    #[test]
    fn central_loss_examples() {
        let c = code(&[1, 0, 1, 1]);
        let h: Vec<f64> = c.unpack().iter().map(|&b| b as f64).collect();
        assert!(central_loss(&h, &c).unwrap() <= 1e-6);
        let l = central_loss(&[0.5], &code(&[1])).unwrap();
        assert!((l - 0.6931471805599453).abs() < 1e-12);
        let l = central_loss(&[0.5, 0.5], &code(&[1, 0])).unwrap();
        assert!((l - 0.6931471805599453).abs() < 1e-12);
        assert!(central_loss(&[0.5], &code(&[1, 0])).is_err());
    }

    #[test]
    fn central_loss_finite_near_saturation() {
        let l = central_loss(&[0.0, 1.0, 1e-300], &code(&[1, 0, 1])).unwrap();
        assert!(l.is_finite());
        assert!((l - (-BCE_EPSILON.ln())).abs() < 1e-9);
    }

    #[test]
    fn quantization_loss_examples() {
        assert_eq!(quantization_loss(&[0.0, 1.0, 1.0, 0.0]).unwrap(), 0.0);
        let direct = 1f64.cosh().ln();
        assert!((quantization_loss(&[0.5]).unwrap() - direct).abs() < 1e-12);
        assert!((quantization_loss(&[0.5]).unwrap() - 0.4337808304830271).abs() < 1e-12);
        assert!((quantization_loss(&[0.25]).unwrap() - 0.12011450695827745).abs() < 1e-12);
        assert!(matches!(quantization_loss(&[f64::NAN]), Err(Error::Numeric(_))));
    }

    #[test]
    fn log_cosh_is_stable() {
        assert!((log_cosh(1000.0) - (1000.0 - std::f64::consts::LN_2)).abs() < 1e-9);
        assert!((log_cosh(0.3) - 0.3f64.cosh().ln()).abs() < 1e-15);
    }

    #[test]
    fn total_loss_toggles() {
        let c = code(&[1, 0]);
        let hs = vec![vec![0.7, 0.4]];
        let cs = vec![&c];
        let lc = central_loss_batch(&hs, &cs).unwrap();
        let lq = quantization_loss_batch(&hs).unwrap();
        let mut cfg = TrainConfig {
            lambda1: 0.0,
            ..TrainConfig::default()
        };
        assert_eq!(total_loss(&hs, &cs, &cfg).unwrap(), lc);
        cfg.lambda1 = 0.5;
        cfg.use_lc = false;
        assert_eq!(total_loss(&hs, &cs, &cfg).unwrap(), 0.5 * lq);
        cfg.use_lc = true;
        let exact = vec![vec![1.0, 0.0]];
        assert!(total_loss(&exact, &cs, &cfg).unwrap() <= 1e-6);
    }
}
