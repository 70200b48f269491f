//! Order-agnostic temporal pooling: average, max and temporal pyramid pooling.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::seq::FeatureSequence;

/// Segment counts per pyramid level. The first level always pools the whole
/// sequence (`m_1 = 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PyramidConfig {
    segments: Vec<usize>,
}

impl PyramidConfig {
    pub fn new(segments: Vec<usize>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("pyramid", "at least one level required"));
        }
        if segments[0] != 1 {
            return Err(Error::invalid("pyramid", "first level must have exactly one segment"));
        }
        if segments.contains(&0) {
            return Err(Error::invalid("pyramid", "segment counts must be positive"));
        }
        Ok(Self { segments })
    }

    /// The single-level pyramid, equivalent to max pooling.
    pub fn flat() -> Self {
        Self { segments: vec![1] }
    }

    pub fn segments(&self) -> &[usize] {
        &self.segments
    }

    pub fn levels(&self) -> usize {
        self.segments.len()
    }

    /// Total segment count `M = sum m_i`.
    pub fn total_segments(&self) -> usize {
        self.segments.iter().sum()
    }

    pub fn max_segments(&self) -> usize {
        self.segments.iter().copied().max().unwrap_or(1)
    }
}

impl Default for PyramidConfig {
    fn default() -> Self {
        Self { segments: vec![1, 2] }
    }
}

impl fmt::Display for PyramidConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.segments.iter().map(|m| m.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for PyramidConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let segments = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::invalid("pyramid", format!("{p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(segments)
    }
}

/// Per-dimension mean over frames.
///
/// Each dimension is summed in ascending value order, so the result is
/// bit-identical for any permutation of the frames.
pub fn average_pool(seq: &FeatureSequence) -> Vec<f64> {
    let n = seq.len() as f64;
    let mut column = Vec::with_capacity(seq.len());
    (0..seq.dim())
        .map(|k| {
            column.clear();
            column.extend(seq.frames().map(|f| f[k]));
            column.sort_by(f64::total_cmp);
            column.iter().sum::<f64>() / n
        })
        .collect()
}

pub fn max_pool(seq: &FeatureSequence) -> Vec<f64> {
    max_pool_with_argmax(seq).0
}

/// Max pooling that also reports, per dimension, the first frame attaining
/// the maximum.
pub fn max_pool_with_argmax(seq: &FeatureSequence) -> (Vec<f64>, Vec<usize>) {
    let mut out = seq.frame(0).to_vec();
    let mut arg = vec![0; seq.dim()];
    for (t, frame) in seq.frames().enumerate().skip(1) {
        for k in 0..seq.dim() {
            if frame[k] > out[k] {
                out[k] = frame[k];
                arg[k] = t;
            }
        }
    }
    (out, arg)
}

/// Splits `[0, len)` into `m` contiguous segments, segment `j` covering
/// `[floor(j*len/m), floor((j+1)*len/m))`.
pub fn partition_segments(len: usize, m: usize) -> Result<Vec<Range<usize>>> {
    if m == 0 {
        return Err(Error::invalid("segment count", "must be positive"));
    }
    if len < m {
        return Err(Error::TooShort {
            required: m,
            actual: len,
        });
    }
    Ok((0..m).map(|j| j * len / m..(j + 1) * len / m).collect())
}

/// Pyramid max pooling over a `len x channels` row-major matrix.
///
/// Output layout is level-major, then segment, then channel. Alongside the
/// pooled values it returns, for every output slot, the (first) time index
/// that produced the maximum.
pub fn pyramid_pool_channels(
    values: &[f64],
    len: usize,
    channels: usize,
    cfg: &PyramidConfig,
) -> Result<(Vec<f64>, Vec<usize>)> {
    debug_assert_eq!(values.len(), len * channels);
    let total = cfg.total_segments() * channels;
    let mut out = Vec::with_capacity(total);
    let mut arg = Vec::with_capacity(total);
    for &m in cfg.segments() {
        for seg in partition_segments(len, m)? {
            let start = seg.start;
            let base = out.len();
            out.extend_from_slice(&values[start * channels..(start + 1) * channels]);
            arg.extend(std::iter::repeat_n(start, channels));
            for t in seg.skip(1) {
                let row = &values[t * channels..(t + 1) * channels];
                for (c, &v) in row.iter().enumerate() {
                    if v > out[base + c] {
                        out[base + c] = v;
                        arg[base + c] = t;
                    }
                }
            }
        }
    }
    Ok((out, arg))
}

/// Temporal pyramid pooling of raw frame features. Output has `K * M` values
/// laid out dimension-major: dimension, then level, then segment.
pub fn temporal_pyramid_pool(seq: &FeatureSequence, cfg: &PyramidConfig) -> Result<Vec<f64>> {
    Ok(temporal_pyramid_pool_with_argmax(seq, cfg)?.0)
}

pub fn temporal_pyramid_pool_with_argmax(seq: &FeatureSequence, cfg: &PyramidConfig) -> Result<(Vec<f64>, Vec<usize>)> {
    if seq.len() < cfg.max_segments() {
        return Err(Error::TooShort {
            required: cfg.max_segments(),
            actual: seq.len(),
        });
    }
    let mut out = Vec::with_capacity(seq.dim() * cfg.total_segments());
    let mut arg = Vec::with_capacity(out.capacity());
    for k in 0..seq.dim() {
        let (v, a) = pyramid_pool_channels(&seq.column(k), seq.len(), 1, cfg)?;
        out.extend(v);
        arg.extend(a);
    }
    Ok((out, arg))
}
