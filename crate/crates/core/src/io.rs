//! Binary file formats. All integers and floats are little-endian; bit rows
//! are `⌈bits/8⌉` bytes with bit 0 in the least significant bit of byte 0.
//!
//! | magic  | contents                                                   |
//! |--------|------------------------------------------------------------|
//! | `CSQH` | hash centers: u32 version, u64 m, u32 k, m bit rows         |
//! | `CSQC` | binary codes: u32 version, u64 n, u32 k, n bit rows         |
//! | `CSQF` | features: u32 version, u64 n, u32 d, n*d f32 row-major      |
//! | `CSQL` | labels: u32 version, u64 n, u32 q, n bit rows               |
//! | `CSQM` | model: u32 version, u32 count, count u32 sizes, f64 params  |

use std::path::Path;

use crate::centers::{CenterMethod, CenterSet};
use crate::data::{Dataset, Split};
use crate::error::{Error, Result};
use crate::hamming::{bytes_for, PackedCode};
use crate::labels::LabelSet;
use crate::model::HashModel;

pub const CENTERS_MAGIC: [u8; 4] = *b"CSQH";
pub const CODES_MAGIC: [u8; 4] = *b"CSQC";
pub const FEATURES_MAGIC: [u8; 4] = *b"CSQF";
pub const LABELS_MAGIC: [u8; 4] = *b"CSQL";
pub const MODEL_MAGIC: [u8; 4] = *b"CSQM";
pub const FORMAT_VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn offset(&self) -> u64 {
        self.pos as u64
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let remaining = self.buf.len() - self.pos;
        if n > remaining {
            return Err(Error::format(
                self.offset(),
                format!("truncated: need {n} bytes, {remaining} left"),
            ));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn header(&mut self, magic: [u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != magic {
            return Err(Error::format(
                0,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(&magic)
                ),
            ));
        }
        let at = self.offset();
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::format(at, format!("unsupported version {version}")));
        }
        Ok(())
    }

    /// Reads a u64 count that must be positive and addressable.
    fn count(&mut self, what: &str) -> Result<usize> {
        let at = self.offset();
        let n = self.u64()?;
        if n == 0 {
            return Err(Error::format(at, format!("{what} count is zero")));
        }
        usize::try_from(n).map_err(|_| Error::format(at, format!("{what} count {n} too large")))
    }

    fn width(&mut self, what: &str) -> Result<usize> {
        let at = self.offset();
        let w = self.u32()?;
        if w == 0 {
            return Err(Error::format(at, format!("{what} is zero")));
        }
        Ok(w as usize)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(
                self.offset(),
                format!("{} trailing bytes", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }

    /// `n` bit rows of width `bits`, length-checked up front.
    fn bit_rows(&mut self, n: usize, bits: usize) -> Result<Vec<PackedCode>> {
        let row = bytes_for(bits);
        let needed = n.checked_mul(row).unwrap_or(usize::MAX);
        if needed > self.buf.len() - self.pos {
            return Err(Error::format(
                self.offset(),
                format!("truncated: {n} rows of {row} bytes do not fit"),
            ));
        }
        (0..n)
            .map(|_| {
                let at = self.offset();
                PackedCode::from_bytes(bits, self.take(row)?)
                    .map_err(|e| Error::format(at, e.to_string()))
            })
            .collect()
    }
}

fn header_bytes(magic: [u8; 4], n: u64, width: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(20);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&width.to_le_bytes());
    out
}

fn encode_bit_rows(magic: [u8; 4], k: usize, rows: &[PackedCode]) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::InvalidDimension("nothing to write".into()));
    }
    let mut out = header_bytes(magic, rows.len() as u64, k as u32);
    for r in rows {
        if r.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: r.len(),
            });
        }
        out.extend_from_slice(&r.to_bytes());
    }
    Ok(out)
}

fn decode_bit_rows(magic: [u8; 4], bytes: &[u8]) -> Result<(usize, Vec<PackedCode>)> {
    let mut r = Reader::new(bytes);
    r.header(magic)?;
    let n = r.count("row")?;
    let k = r.width("bit width")?;
    let rows = r.bit_rows(n, k)?;
    r.finish()?;
    Ok((k, rows))
}

pub fn encode_centers(cs: &CenterSet) -> Result<Vec<u8>> {
    encode_bit_rows(CENTERS_MAGIC, cs.k(), cs.centers())
}

pub fn decode_centers(bytes: &[u8]) -> Result<CenterSet> {
    let (k, rows) = decode_bit_rows(CENTERS_MAGIC, bytes)?;
    CenterSet::new(k, rows, CenterMethod::Loaded)
}

pub fn encode_codes(codes: &[PackedCode]) -> Result<Vec<u8>> {
    let k = codes.first().map_or(0, PackedCode::len);
    encode_bit_rows(CODES_MAGIC, k, codes)
}

pub fn decode_codes(bytes: &[u8]) -> Result<Vec<PackedCode>> {
    Ok(decode_bit_rows(CODES_MAGIC, bytes)?.1)
}

pub fn encode_labels(labels: &[LabelSet]) -> Result<Vec<u8>> {
    let rows: Vec<PackedCode> = labels.iter().map(|l| l.bits().clone()).collect();
    let q = rows.first().map_or(0, PackedCode::len);
    encode_bit_rows(LABELS_MAGIC, q, &rows)
}

pub fn decode_labels(bytes: &[u8]) -> Result<Vec<LabelSet>> {
    let (_, rows) = decode_bit_rows(LABELS_MAGIC, bytes)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            LabelSet::from_bits(r).map_err(|_| Error::InvalidLabel(format!("row {i} has no category set")))
        })
        .collect()
}

/// Row-major `n x d` features held at f64 working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub n: usize,
    pub d: usize,
    pub data: Vec<f64>,
}

/// Values are stored as f32; anything not representable in f32 is rounded.
pub fn encode_features(n: usize, d: usize, data: &[f64]) -> Result<Vec<u8>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidDimension(format!("empty feature matrix {n}x{d}")));
    }
    if data.len() != n * d {
        return Err(Error::DimensionMismatch {
            expected: n * d,
            got: data.len(),
        });
    }
    let mut out = header_bytes(FEATURES_MAGIC, n as u64, d as u32);
    out.reserve(4 * data.len());
    for &v in data {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureMatrix> {
    let mut r = Reader::new(bytes);
    r.header(FEATURES_MAGIC)?;
    let n = r.count("row")?;
    let d = r.width("feature dimension")?;
    let len = n.checked_mul(d).and_then(|v| v.checked_mul(4)).unwrap_or(usize::MAX);
    let at = r.offset();
    let raw = r.take(len).map_err(|_| {
        Error::format(at, format!("truncated: {n}x{d} f32 matrix does not fit"))
    })?;
    r.finish()?;
    let data = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    Ok(FeatureMatrix { n, d, data })
}

pub fn encode_model(model: &HashModel) -> Vec<u8> {
    let sizes = model.sizes();
    let mut out = Vec::with_capacity(12 + 4 * sizes.len() + 8 * model.params().len());
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
    for &s in sizes {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    for p in model.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<HashModel> {
    let mut r = Reader::new(bytes);
    r.header(MODEL_MAGIC)?;
    let at = r.offset();
    let count = r.u32()? as usize;
    if count < 2 {
        return Err(Error::format(at, format!("need at least 2 layer sizes, got {count}")));
    }
    let sizes = (0..count)
        .map(|_| r.width("layer size"))
        .collect::<Result<Vec<_>>>()?;
    let n_params = crate::model::param_count(&sizes);
    let at = r.offset();
    let raw = r
        .take(n_params * 8)
        .map_err(|_| Error::format(at, format!("truncated: expected {n_params} parameters")))?;
    r.finish()?;
    let params = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    HashModel::from_params(&sizes, params)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into()
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| {
        std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into()
    })
}

pub fn save_centers(path: impl AsRef<Path>, cs: &CenterSet) -> Result<()> {
    write(path.as_ref(), &encode_centers(cs)?)
}

pub fn load_centers(path: impl AsRef<Path>) -> Result<CenterSet> {
    decode_centers(&read(path.as_ref())?)
}

pub fn save_codes(path: impl AsRef<Path>, codes: &[PackedCode]) -> Result<()> {
    write(path.as_ref(), &encode_codes(codes)?)
}

pub fn load_codes(path: impl AsRef<Path>) -> Result<Vec<PackedCode>> {
    decode_codes(&read(path.as_ref())?)
}

pub fn save_labels(path: impl AsRef<Path>, labels: &[LabelSet]) -> Result<()> {
    write(path.as_ref(), &encode_labels(labels)?)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabelSet>> {
    decode_labels(&read(path.as_ref())?)
}

pub fn save_features(path: impl AsRef<Path>, n: usize, d: usize, data: &[f64]) -> Result<()> {
    write(path.as_ref(), &encode_features(n, d, data)?)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    decode_features(&read(path.as_ref())?)
}

pub fn save_model(path: impl AsRef<Path>, model: &HashModel) -> Result<()> {
    write(path.as_ref(), &encode_model(model))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<HashModel> {
    decode_model(&read(path.as_ref())?)
}

/// Writes a dataset as a feature file plus a label file.
pub fn save_dataset(features: impl AsRef<Path>, labels: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    save_features(features, ds.len(), ds.dim(), ds.features())?;
    save_labels(labels, ds.labels())
}

pub fn load_dataset(features: impl AsRef<Path>, labels: impl AsRef<Path>, split: Split) -> Result<Dataset> {
    let f = load_features(features)?;
    let l = load_labels(labels)?;
    if l.len() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            got: l.len(),
        });
    }
    Dataset::new(f.d, f.data, l, split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centers::generate_centers;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn offset_of(e: Error) -> u64 {
        match e {
            Error::Format { offset, .. } => offset,
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn center_file_layout_is_exact() {
        let cs = generate_centers(2, 4, 0).unwrap();
        let bytes = encode_centers(&cs).unwrap();
        let mut expected = vec![0x43, 0x53, 0x51, 0x48, 1, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0];
        // rows 1111 and 1010, LSB-first
        expected.extend_from_slice(&[0b1111, 0b0101]);
        assert_eq!(bytes, expected);
        let back = decode_centers(&bytes).unwrap();
        assert_eq!(back.centers(), cs.centers());
        assert_eq!(back.method(), CenterMethod::Loaded);
    }

    #[test]
    fn feature_round_trip_is_bit_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let data: Vec<f64> = (0..1600).map(|_| (rng.random::<f32>() * 10.0 - 5.0) as f64).collect();
        let bytes = encode_features(100, 16, &data).unwrap();
        assert_eq!(&bytes[..4], b"CSQF");
        assert_eq!(bytes.len(), 20 + 1600 * 4);
        let back = decode_features(&bytes).unwrap();
        assert_eq!((back.n, back.d), (100, 16));
        assert_eq!(back.data, data);
    }

    #[test]
    fn feature_errors() {
        let mut bytes = encode_features(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(offset_of(decode_features(&bad).unwrap_err()), 0);
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert_eq!(offset_of(decode_features(&bad).unwrap_err()), 4);
        let mut zero = bytes.clone();
        zero[8..16].fill(0);
        assert_eq!(offset_of(decode_features(&zero).unwrap_err()), 8);
        bytes.pop();
        assert_eq!(offset_of(decode_features(&bytes).unwrap_err()), 20);
        assert!(encode_features(0, 2, &[]).is_err());
    }

    #[test]
    fn label_files() {
        let single: Vec<LabelSet> = [0, 2, 1].iter().map(|&c| LabelSet::single(c, 3).unwrap()).collect();
        assert_eq!(decode_labels(&encode_labels(&single).unwrap()).unwrap(), single);

        let multi = vec![LabelSet::from_categories(&[4, 17, 79], 80).unwrap()];
        let back = decode_labels(&encode_labels(&multi).unwrap()).unwrap();
        assert_eq!(back[0].count(), 3);

        let mut bytes = encode_labels(&single).unwrap();
        let last = bytes.len() - 1;
        bytes[last] = 0;
        assert!(matches!(decode_labels(&bytes), Err(Error::InvalidLabel(_))));
        bytes[last] = 0b1000;
        assert!(matches!(decode_labels(&bytes), Err(Error::Format { .. })));
    }

    #[test]
    fn model_round_trip_and_layout() {
        let m = HashModel::init(&[3, 4, 2, 8], 5).unwrap();
        let bytes = encode_model(&m);
        assert_eq!(&bytes[..4], b"CSQM");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 4);
        assert_eq!(bytes.len(), 12 + 16 + 8 * m.params().len());
        let first = f64::from_le_bytes(bytes[28..36].try_into().unwrap());
        assert_eq!(first, m.layer(0).0[0]);
        assert_eq!(decode_model(&bytes).unwrap(), m);
        assert!(decode_model(&bytes[..bytes.len() - 3]).is_err());
    }

    #[test]
    fn truncation_is_always_rejected() {
        let cs = generate_centers(5, 16, 0).unwrap();
        let files = [
            encode_centers(&cs).unwrap(),
            encode_codes(cs.centers()).unwrap(),
            encode_labels(&[LabelSet::single(1, 9).unwrap()]).unwrap(),
            encode_features(1, 3, &[0.5, 1.5, 2.5]).unwrap(),
            encode_model(&HashModel::zeros(&[2, 3, 4]).unwrap()),
        ];
        for file in &files {
            for cut in 0..file.len() {
                let bytes = &file[..cut];
                let failed = match &file[..4] {
                    b"CSQH" => decode_centers(bytes).is_err(),
                    b"CSQC" => decode_codes(bytes).is_err(),
                    b"CSQL" => decode_labels(bytes).is_err(),
                    b"CSQF" => decode_features(bytes).is_err(),
                    _ => decode_model(bytes).is_err(),
                };
                assert!(failed, "accepted {} of {} bytes", cut, file.len());
            }
        }
    }

    proptest! {
        #[test]
        fn code_files_round_trip(k in 1usize..130, n in 1usize..20, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let codes: Vec<PackedCode> = (0..n)
                .map(|_| PackedCode::from_bools(&(0..k).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>()))
                .collect();
            let bytes = encode_codes(&codes).unwrap();
            prop_assert_eq!(bytes.len(), 20 + n * k.div_ceil(8));
            prop_assert_eq!(decode_codes(&bytes).unwrap(), codes);
        }
    }
}
