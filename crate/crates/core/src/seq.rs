//! Frame-level feature sequences and the preprocessing applied before pooling.

use crate::error::{Error, Result};

/// Norm below which [`l2_normalize_block`] leaves a vector untouched.
pub const NORM_EPSILON: f64 = 1e-12;

/// A `T x K` sequence of frame feature vectors stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    data: Vec<f64>,
    len: usize,
    dim: usize,
}

impl FeatureSequence {
    /// Builds a sequence from row-major data. Requires `T >= 1`, `K >= 1` and
    /// finite values.
    pub fn from_flat(len: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("sequence", "frame count must be at least 1"));
        }
        if dim == 0 {
            return Err(Error::invalid("sequence", "feature dimension must be at least 1"));
        }
        if data.len() != len * dim {
            return Err(Error::LengthMismatch {
                expected: len * dim,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "sequence",
                format!("non-finite value at frame {}, dimension {}", pos / dim, pos % dim),
            ));
        }
        Ok(Self { data, len, dim })
    }

    pub fn from_frames<R: AsRef<[f64]>>(frames: &[R]) -> Result<Self> {
        let dim = frames.first().map_or(0, |f| f.as_ref().len());
        let mut data = Vec::with_capacity(frames.len() * dim);
        for (t, frame) in frames.iter().enumerate() {
            let frame = frame.as_ref();
            if frame.len() != dim {
                return Err(Error::invalid(
                    "sequence",
                    format!("frame {t} has {} values, expected {dim}", frame.len()),
                ));
            }
            data.extend_from_slice(frame);
        }
        Self::from_flat(frames.len(), dim, data)
    }

    /// A single-dimension sequence from a 1D signal.
    pub fn from_signal(signal: &[f64]) -> Result<Self> {
        Self::from_flat(signal.len(), 1, signal.to_vec())
    }

    /// Number of frames `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; sequences hold at least one frame.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Feature dimensionality `K`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.data[t * self.dim + k]
    }

    /// The temporal signal of dimension `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.frames().map(|f| f[k]).collect()
    }

    /// Selects frames by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &t in indices {
            data.extend_from_slice(self.frame(t));
        }
        Self {
            data,
            len: indices.len(),
            dim: self.dim,
        }
    }

    /// Frames in reverse temporal order.
    pub fn reversed(&self) -> Self {
        let idx: Vec<usize> = (0..self.len).rev().collect();
        self.select(&idx)
    }

    /// Keeps dimensions `range` of every frame.
    pub fn slice_dims(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.dim {
            return Err(Error::invalid(
                "dimension range",
                format!("{range:?} for dimension {}", self.dim),
            ));
        }
        let mut data = Vec::with_capacity(self.len * range.len());
        for f in self.frames() {
            data.extend_from_slice(&f[range.clone()]);
        }
        Ok(Self {
            data,
            len: self.len,
            dim: range.len(),
        })
    }

    /// Pads with copies of the last frame up to `min_len` frames.
    pub fn pad_to(&self, min_len: usize) -> Self {
        if self.len >= min_len {
            return self.clone();
        }
        let mut out = self.clone();
        let last = self.frame(self.len - 1).to_vec();
        for _ in self.len..min_len {
            out.data.extend_from_slice(&last);
        }
        out.len = min_len;
        out
    }

    /// Applies `f` to every frame, producing frames of width `dim`.
    pub fn map_frames(&self, dim: usize, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(self.len * dim);
        for frame in self.frames() {
            let out = f(frame);
            if out.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    actual: out.len(),
                });
            }
            data.extend(out);
        }
        Self::from_flat(self.len, dim, data)
    }
}

/// A sequence with its class index.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub sequence: FeatureSequence,
    pub label: usize,
}

impl LabeledSequence {
    pub fn new(sequence: FeatureSequence, label: usize) -> Self {
        Self { sequence, label }
    }
}

/// Checks every label against a declared class count.
pub fn check_labels(data: &[LabeledSequence], classes: usize) -> Result<()> {
    match data.iter().find(|d| d.label >= classes) {
        Some(d) => Err(Error::LabelOutOfRange {
            label: d.label,
            classes,
        }),
        None => Ok(()),
    }
}

/// Keeps frames `0, rate, 2*rate, ...`. A rate of zero is treated as one.
pub fn sample_frames(seq: &FeatureSequence, rate: usize) -> FeatureSequence {
    let rate = rate.max(1);
    let idx: Vec<usize> = (0..seq.len()).step_by(rate).collect();
    seq.select(&idx)
}

/// Scales `v` to unit L2 norm; vectors with norm at most [`NORM_EPSILON`]
/// are returned unchanged.
pub fn l2_normalize_block(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= NORM_EPSILON {
        v.to_vec()
    } else {
        v.iter().map(|x| x / norm).collect()
    }
}

/// L2-normalizes every frame of `seq` independently.
pub fn l2_normalize_frames(seq: &FeatureSequence) -> FeatureSequence {
    seq.map_frames(seq.dim(), l2_normalize_block)
        .expect("normalization preserves shape and finiteness")
}

/// Frame-wise concatenation `[a_t ; b_t]`.
pub fn concat_frame_features(a: &FeatureSequence, b: &FeatureSequence) -> Result<FeatureSequence> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let dim = a.dim() + b.dim();
    let mut data = Vec::with_capacity(a.len() * dim);
    for (fa, fb) in a.frames().zip(b.frames()) {
        data.extend_from_slice(fa);
        data.extend_from_slice(fb);
    }
    Ok(FeatureSequence {
        data,
        len: a.len(),
        dim,
    })
}

/// Ingestion policy applied to every sequence before it reaches a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preprocessing {
    /// Keep one frame out of every `sample_rate`.
    pub sample_rate: usize,
    /// L2-normalize each feature block per frame before concatenation.
    pub l2_normalize: bool,
}

impl Default for Preprocessing {
    fn default() -> Self {
        Self {
            sample_rate: 5,
            l2_normalize: false,
        }
    }
}

impl Preprocessing {
    pub const NONE: Preprocessing = Preprocessing {
        sample_rate: 1,
        l2_normalize: false,
    };

    /// Normalizes (optionally) and concatenates feature blocks, then samples
    /// frames and edge-pads to `min_len`.
    pub fn apply(&self, blocks: &[FeatureSequence], min_len: usize) -> Result<FeatureSequence> {
        let (first, rest) = blocks
            .split_first()
            .ok_or_else(|| Error::invalid("feature blocks", "at least one block required"))?;
        let norm = |s: &FeatureSequence| {
            if self.l2_normalize {
                l2_normalize_frames(s)
            } else {
                s.clone()
            }
        };
        let mut joined = norm(first);
        for b in rest {
            joined = concat_frame_features(&joined, &norm(b))?;
        }
        Ok(sample_frames(&joined, self.sample_rate).pad_to(min_len))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(t: usize, k: usize) -> FeatureSequence {
        let data = (0..t * k).map(|i| i as f64).collect();
        FeatureSequence::from_flat(t, k, data).unwrap()
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(FeatureSequence::from_flat(0, 1, vec![]).is_err());
        assert!(FeatureSequence::from_flat(1, 0, vec![]).is_err());
        assert!(FeatureSequence::from_flat(2, 2, vec![1.0; 3]).is_err());
        assert!(FeatureSequence::from_flat(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(FeatureSequence::from_flat(1, 1, vec![f64::INFINITY]).is_err());
        assert!(FeatureSequence::from_frames(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn sampling_keeps_every_rate_th_frame() {
        let s = ramp(10, 1);
        assert_eq!(sample_frames(&s, 5).as_flat(), &[0.0, 5.0]);
        let s = ramp(7, 1);
        assert_eq!(sample_frames(&s, 3).as_flat(), &[0.0, 3.0, 6.0]);
        let s = ramp(6, 2);
        assert_eq!(sample_frames(&s, 1), s);
        assert_eq!(sample_frames(&s, 100).len(), 1);
    }

    #[test]
    fn sampled_length_is_ceiling() {
        for t in 1..20 {
            for r in 1..8 {
                assert_eq!(sample_frames(&ramp(t, 2), r).len(), t.div_ceil(r));
            }
        }
    }

    #[test]
    fn l2_normalization_cases() {
        assert_eq!(l2_normalize_block(&[3.0, 4.0]), vec![0.6, 0.8]);
        assert_eq!(l2_normalize_block(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(l2_normalize_block(&[5.0]), vec![1.0]);
        let tiny = [1e-13, 0.0];
        assert_eq!(l2_normalize_block(&tiny), tiny.to_vec());
    }

    #[test]
    fn concat_shapes_and_values() {
        let a = ramp(3, 2);
        let b = ramp(3, 5);
        assert_eq!(concat_frame_features(&a, &b).unwrap().dim(), 7);

        let a = FeatureSequence::from_frames(&[[1.0], [2.0]]).unwrap();
        let b = FeatureSequence::from_frames(&[[3.0], [4.0]]).unwrap();
        let c = concat_frame_features(&a, &b).unwrap();
        assert_eq!(c.as_flat(), &[1.0, 3.0, 2.0, 4.0]);

        let err = concat_frame_features(&ramp(3, 1), &ramp(4, 1)).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
    }

    #[test]
    fn padding_replicates_last_frame() {
        let s = FeatureSequence::from_frames(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let p = s.pad_to(4);
        assert_eq!(p.len(), 4);
        assert_eq!(p.frame(3), &[3.0, 4.0]);
        assert_eq!(s.pad_to(1), s);
    }

    #[test]
    fn preprocessing_normalizes_blocks_separately() {
        let a = FeatureSequence::from_frames(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        let b = FeatureSequence::from_frames(&[[2.0], [-5.0]]).unwrap();
        let pre = Preprocessing {
            sample_rate: 1,
            l2_normalize: true,
        };
        let out = pre.apply(&[a, b], 1).unwrap();
        assert_eq!(out.as_flat(), &[0.6, 0.8, 1.0, 0.0, 0.0, -1.0]);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn seq_strategy() -> impl Strategy<Value = FeatureSequence> {
            (1usize..12, 1usize..5).prop_flat_map(|(t, k)| {
                proptest::collection::vec(-100.0f64..100.0, t * k)
                    .prop_map(move |d| FeatureSequence::from_flat(t, k, d).unwrap())
            })
        }

        proptest! {
            #[test]
            fn concat_then_split_round_trips(a in seq_strategy(), extra in 1usize..4) {
                let b = a.map_frames(extra, |f| f.iter().take(1).cycle().take(extra).map(|x| x * 2.0).collect()).unwrap();
                let c = concat_frame_features(&a, &b).unwrap();
                prop_assert_eq!(c.slice_dims(0..a.dim()).unwrap(), a.clone());
                prop_assert_eq!(c.slice_dims(a.dim()..c.dim()).unwrap(), b);
            }

            #[test]
            fn normalized_norm_is_one_or_unchanged(v in proptest::collection::vec(-1e3f64..1e3, 1..10)) {
                let n = l2_normalize_block(&v);
                let before = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let after = n.iter().map(|x| x * x).sum::<f64>().sqrt();
                if before > NORM_EPSILON {
                    prop_assert!((after - 1.0).abs() < 1e-12);
                } else {
                    prop_assert_eq!(n, v);
                }
            }

            #[test]
            fn sampling_composes_with_unit_rate(s in seq_strategy(), r in 1usize..6) {
                prop_assert_eq!(sample_frames(&sample_frames(&s, r), 1), sample_frames(&s, r));
            }
        }
    }
}
