//! Model checkpoint files.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "OACPMODL"
//! version    u32      CHECKPOINT_VERSION
//! pooling    u8       0 average, 1 max, 2 pyramid, 3 oacp
//! normalize  u8       per-block L2 normalization flag
//! K          u64      input dimensionality
//! c          u64      class count
//! P          u64      pooled length
//! rate       u64      frame sampling rate
//! [pyramid and oacp] L u64, then m_1..m_L as u64
//! [oacp]     l u64, n̄ u64, stride u64
//! params     f64 x N  canonical order: per dimension the n̄ x l filter
//!                     weights then n̄ biases, then W_c (c x P row-major),
//!                     then b_c
//! ```

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{ClassifierModel, PoolingKind};
use crate::convpool::{FilterBank, FilterBankSet};
use crate::error::{Error, Result};
use crate::pooling::PyramidConfig;
use crate::seq::Preprocessing;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"OACPMODL";

/// A trained model together with the ingestion policy it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ClassifierModel,
    pub preprocessing: Preprocessing,
}

pub fn write_model(mut w: impl Write, ckpt: &Checkpoint) -> std::io::Result<()> {
    let m = &ckpt.model;
    let u64le = |v: usize| (v as u64).to_le_bytes();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.push(m.pooling.code());
    buf.push(u8::from(ckpt.preprocessing.l2_normalize));
    buf.extend_from_slice(&u64le(m.input_dim));
    buf.extend_from_slice(&u64le(m.classes));
    buf.extend_from_slice(&u64le(m.pooled_len));
    buf.extend_from_slice(&u64le(ckpt.preprocessing.sample_rate));
    if let Some(p) = &m.pyramid {
        buf.extend_from_slice(&u64le(p.levels()));
        for &s in p.segments() {
            buf.extend_from_slice(&u64le(s));
        }
    }
    if let Some(b) = &m.filter_banks {
        buf.extend_from_slice(&u64le(b.interval()));
        buf.extend_from_slice(&u64le(b.filters()));
        buf.extend_from_slice(&u64le(b.stride()));
    }
    for slice in m.parameter_slices() {
        for v in slice {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> std::result::Result<&[u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> std::result::Result<usize, String> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| format!("size {v} does not fit in memory"))
    }

    fn f64s(&mut self, n: usize) -> std::result::Result<Vec<f64>, String> {
        let bytes = self.take(n.checked_mul(8).ok_or("parameter count overflow")?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Decodes a checkpoint; `path` is only used in error messages.
pub fn read_model(bytes: &[u8], path: &Path) -> Result<Checkpoint> {
    decode(bytes).map_err(|msg| Error::Format {
        path: path.to_path_buf(),
        msg,
    })
}

fn decode(bytes: &[u8]) -> std::result::Result<Checkpoint, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("not a model checkpoint (bad magic)".into());
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let pooling = PoolingKind::from_code(r.u8()?).ok_or("unknown pooling kind")?;
    let l2_normalize = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(format!("bad normalization flag {other}")),
    };
    let input_dim = r.usize()?;
    let classes = r.usize()?;
    let pooled_len = r.usize()?;
    let sample_rate = r.usize()?;
    let pyramid = if pooling.uses_pyramid() {
        let levels = r.usize()?;
        if levels > bytes.len() {
            return Err("implausible pyramid level count".into());
        }
        let segs = (0..levels)
            .map(|_| r.usize())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Some(PyramidConfig::new(segs).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let filter_banks = if pooling == PoolingKind::Oacp {
        let interval = r.usize()?;
        let filters = r.usize()?;
        let stride = r.usize()?;
        let per_bank = interval.checked_mul(filters).ok_or("filter shape overflow")?;
        let mut banks = Vec::with_capacity(input_dim.min(bytes.len()));
        for _ in 0..input_dim {
            let w = r.f64s(per_bank)?;
            let b = r.f64s(filters)?;
            banks.push(FilterBank::new(w, b, interval).map_err(|e| e.to_string())?);
        }
        Some(FilterBankSet::new(banks, stride).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let class_weights = r.f64s(classes.checked_mul(pooled_len).ok_or("head shape overflow")?)?;
    let class_biases = r.f64s(classes)?;
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    let model = ClassifierModel::from_parts(
        pooling,
        input_dim,
        classes,
        pyramid,
        filter_banks,
        class_weights,
        class_biases,
    )
    .map_err(|e| e.to_string())?;
    if model.pooled_len() != pooled_len {
        return Err(format!(
            "pooled length {pooled_len} disagrees with shapes (expected {})",
            model.pooled_len()
        ));
    }
    Ok(Checkpoint {
        model,
        preprocessing: Preprocessing {
            sample_rate,
            l2_normalize,
        },
    })
}

pub fn save_model(path: impl AsRef<Path>, ckpt: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_model(&mut buf, ckpt).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_model(&bytes, path)
}

/// Human-readable dump: `# key=value` metadata lines followed by one
/// parameter per line in canonical order, printed round-trippably.
pub fn export_text(ckpt: &Checkpoint) -> String {
    let m = &ckpt.model;
    let mut out = String::new();
    let _ = writeln!(out, "# format=oacp-model-text version={CHECKPOINT_VERSION}");
    let _ = writeln!(out, "# pooling={}", m.pooling);
    let _ = writeln!(out, "# K={} c={} P={}", m.input_dim, m.classes, m.pooled_len);
    let _ = writeln!(
        out,
        "# sample_rate={} l2_normalize={}",
        ckpt.preprocessing.sample_rate, ckpt.preprocessing.l2_normalize
    );
    if let Some(p) = &m.pyramid {
        let _ = writeln!(out, "# pyramid={p}");
    }
    if let Some(b) = &m.filter_banks {
        let _ = writeln!(
            out,
            "# interval={} filters={} stride={}",
            b.interval(),
            b.filters(),
            b.stride()
        );
        let rate = ckpt.preprocessing.sample_rate.max(1);
        let _ = writeln!(out, "# receptive_field_frames={}", b.interval() * rate);
    }
    let _ = writeln!(out, "# parameters={}", m.parameter_count());
    for slice in m.parameter_slices() {
        for v in slice {
            let _ = writeln!(out, "{v:?}");
        }
    }
    out
}
