//! Feature sequence files.
//!
//! Text form: a header line `T=<T> K=<K>` followed by `T` lines of `K`
//! space-separated decimals, printed with enough digits to round-trip.
//!
//! Binary form: magic `OACP`, a version byte, `T` and `K` as little-endian
//! `u64`, then `T*K` little-endian `f64` in row-major order. Loaders detect
//! the form from the magic bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::seq::FeatureSequence;

pub const BINARY_MAGIC: &[u8; 4] = b"OACP";
pub const BINARY_VERSION: u8 = 1;

pub fn write_features_text(seq: &FeatureSequence) -> String {
    let mut out = format!("T={} K={}\n", seq.len(), seq.dim());
    for frame in seq.frames() {
        for (k, v) in frame.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn write_features_binary(seq: &FeatureSequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(21 + seq.as_flat().len() * 8);
    out.extend_from_slice(BINARY_MAGIC);
    out.push(BINARY_VERSION);
    out.extend_from_slice(&(seq.len() as u64).to_le_bytes());
    out.extend_from_slice(&(seq.dim() as u64).to_le_bytes());
    for v in seq.as_flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses either form; `path` is used only for error messages.
pub fn read_features(bytes: &[u8], path: &Path) -> Result<FeatureSequence> {
    if bytes.starts_with(BINARY_MAGIC) {
        return read_binary(bytes, path);
    }
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        msg: format!("not UTF-8 text and no binary magic: {e}"),
    })?;
    read_text(text, path)
}

fn read_text(text: &str, path: &Path) -> Result<FeatureSequence> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let (mut len, mut dim) = (None, None);
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("T", v)) => len = v.parse::<usize>().ok(),
            Some(("K", v)) => dim = v.parse::<usize>().ok(),
            _ => return Err(err(1, format!("malformed header field {field:?}"))),
        }
    }
    let (Some(len), Some(dim)) = (len, dim) else {
        return Err(err(1, format!("header must be `T=<T> K=<K>`, got {header:?}")));
    };
    if len == 0 || dim == 0 {
        return Err(err(1, "T and K must be at least 1".into()));
    }
    let mut data = Vec::with_capacity(len.saturating_mul(dim).min(1 << 24));
    let mut rows = 0;
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        if rows > len {
            return Err(err(line_no, format!("more than {len} frame rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| err(line_no, format!("row {}: bad value {tok:?}: {e}", rows - 1)))?;
            if !v.is_finite() {
                return Err(err(line_no, format!("row {}: non-finite value {tok:?}", rows - 1)));
            }
            data.push(v);
        }
        let width = data.len() - before;
        if width != dim {
            return Err(err(
                line_no,
                format!("row {} has {width} values, expected {dim}", rows - 1),
            ));
        }
    }
    if rows != len {
        return Err(err(rows + 2, format!("expected {len} frame rows, found {rows}")));
    }
    FeatureSequence::from_flat(len, dim, data)
}

fn read_binary(bytes: &[u8], path: &Path) -> Result<FeatureSequence> {
    let fail = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    if bytes.len() < 21 {
        return Err(fail("truncated binary header".into()));
    }
    if bytes[4] != BINARY_VERSION {
        return Err(fail(format!("unsupported binary version {}", bytes[4])));
    }
    let len = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let dim = u64::from_le_bytes(bytes[13..21].try_into().unwrap());
    let expected = len
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| fail(format!("implausible shape T={len} K={dim}")))?;
    let body = &bytes[21..];
    if body.len() != expected {
        return Err(fail(format!(
            "expected {expected} data bytes for T={len} K={dim}, found {}",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureSequence::from_flat(len as usize, dim as usize, data).map_err(|e| fail(e.to_string()))
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_features(&bytes, path)
}

/// Writes the text form.
pub fn save_features(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_features_text(seq)).map_err(|e| Error::io(path, e))
}

pub fn save_features_binary(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_features_binary(seq)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("f.txt")
    }

    #[test]
    fn text_layout() {
        let s = FeatureSequence::from_frames(&[[1.0, 0.5], [-2.0, 1e-300]]).unwrap();
        assert_eq!(write_features_text(&s), "T=2 K=2\n1.0 0.5\n-2.0 1e-300\n");
    }

    #[test]
    fn wrong_width_row_is_named() {
        let err = read_features(b"T=2 K=2\n1 2\n3\n", p()).unwrap_err();
        match err {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("row 1"), "{msg}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(matches!(read_features(b"", p()), Err(Error::Parse { line: 1, .. })));
        assert!(read_features(b"T=2\n1\n2\n", p()).is_err());
        assert!(read_features(b"T=x K=1\n1\n", p()).is_err());
        assert!(read_features(b"T=0 K=1\n", p()).is_err());
        assert!(read_features(b"T=2 K=1\n1\n", p()).is_err());
        assert!(read_features(b"T=1 K=1\n1\n2\n", p()).is_err());
        assert!(matches!(
            read_features(b"T=1 K=1\nNaN\n", p()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_features(b"T=1 K=1\ninf\n", p()).is_err());
        assert!(read_features(b"OACP\x01", p()).is_err());
        let mut bin = write_features_binary(&FeatureSequence::from_signal(&[1.0, 2.0]).unwrap());
        bin.pop();
        assert!(read_features(&bin, p()).is_err());
        bin[4] = 7;
        assert!(read_features(&bin, p()).is_err());
    }

    #[test]
    fn binary_layout() {
        let s = FeatureSequence::from_signal(&[1.5]).unwrap();
        let b = write_features_binary(&s);
        assert_eq!(&b[..5], b"OACP\x01");
        assert_eq!(b.len(), 29);
        assert_eq!(&b[21..], &1.5f64.to_le_bytes());
    }

    fn seq_strategy() -> impl Strategy<Value = FeatureSequence> {
        (1usize..8, 1usize..5).prop_flat_map(|(t, k)| {
            proptest::collection::vec(
                proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
                t * k,
            )
            .prop_map(move |d| FeatureSequence::from_flat(t, k, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn both_forms_round_trip_bit_exactly(s in seq_strategy()) {
            let bits = |s: &FeatureSequence| s.as_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            let t = read_features(write_features_text(&s).as_bytes(), p()).unwrap();
            prop_assert_eq!(bits(&t), bits(&s));
            let b = read_features(&write_features_binary(&s), p()).unwrap();
            prop_assert_eq!(bits(&b), bits(&s));
        }
    }
}
