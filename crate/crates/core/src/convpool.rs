//! Order-aware convolutional pooling.
//!
//! Every feature dimension is treated as an independent 1D temporal signal
//! and gets its own small bank of learned filters. A filter of length `l`
//! slides over the signal with a fixed stride; responses pass through a ReLU
//! and are aggregated by temporal pyramid pooling. Because a filter sees a
//! local window in order, the pooled representation responds to local
//! trends that average and max pooling of the raw signal cannot see.
//!
//! Layout of the pooled vector, outermost first: feature dimension, pyramid
//! level, segment within the level, filter channel.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pooling::{pyramid_pool_channels, PyramidConfig};
use crate::seq::FeatureSequence;

/// `n̄` filters of length `l` for one feature dimension. Weights are stored
/// filter-major: row `j` is filter `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    weights: Vec<f64>,
    biases: Vec<f64>,
    interval: usize,
}

impl FilterBank {
    pub fn new(weights: Vec<f64>, biases: Vec<f64>, interval: usize) -> Result<Self> {
        if interval == 0 {
            return Err(Error::invalid("filter bank", "interval must be at least 1"));
        }
        if biases.is_empty() {
            return Err(Error::invalid("filter bank", "at least one filter required"));
        }
        if weights.len() != biases.len() * interval {
            return Err(Error::LengthMismatch {
                expected: biases.len() * interval,
                actual: weights.len(),
            });
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::invalid("filter bank", "parameters must be finite"));
        }
        Ok(Self {
            weights,
            biases,
            interval,
        })
    }

    pub fn from_filters<R: AsRef<[f64]>>(filters: &[R], biases: Vec<f64>) -> Result<Self> {
        let interval = filters.first().map_or(0, |f| f.as_ref().len());
        if filters.iter().any(|f| f.as_ref().len() != interval) {
            return Err(Error::invalid("filter bank", "filters must share one length"));
        }
        let weights = filters.iter().flat_map(|f| f.as_ref().to_vec()).collect();
        Self::new(weights, biases, interval)
    }

    pub fn interval(&self) -> usize {
        self.interval
    }

    pub fn filters(&self) -> usize {
        self.biases.len()
    }

    pub fn filter(&self, j: usize) -> &[f64] {
        &self.weights[j * self.interval..(j + 1) * self.interval]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.biases)
    }
}

/// Post-ReLU responses of one bank along one signal: `T_out x n̄`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSequence {
    values: Vec<f64>,
    len: usize,
    channels: usize,
}

impl ResponseSequence {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.channels..(t + 1) * self.channels]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }
}

/// Number of filter positions for a signal of `len` frames.
pub fn output_len(len: usize, interval: usize, stride: usize) -> Option<usize> {
    (len >= interval && stride >= 1).then(|| (len - interval) / stride + 1)
}

/// Smallest signal length for which `stride`-spaced windows of `interval`
/// frames yield at least `positions` responses.
pub fn min_input_len(interval: usize, stride: usize, positions: usize) -> usize {
    interval + positions.saturating_sub(1) * stride
}

/// Linear filter outputs before the activation, `T_out x n̄` row-major.
pub(crate) fn conv_pre_activation(signal: &[f64], bank: &FilterBank, stride: usize) -> Result<(Vec<f64>, usize)> {
    let l = bank.interval;
    let positions = output_len(signal.len(), l, stride).ok_or(Error::TooShort {
        required: l,
        actual: signal.len(),
    })?;
    let n = bank.filters();
    let mut pre = Vec::with_capacity(positions * n);
    for t in 0..positions {
        let window = &signal[t * stride..t * stride + l];
        for j in 0..n {
            let w = bank.filter(j);
            let mut acc = 0.0;
            for i in 0..l {
                acc += w[i] * window[i];
            }
            pre.push(acc + bank.biases[j]);
        }
    }
    Ok((pre, positions))
}

#[inline]
pub(crate) fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Applies one filter bank along a 1D signal, followed by ReLU.
pub fn conv_dim_forward(signal: &[f64], bank: &FilterBank, stride: usize) -> Result<ResponseSequence> {
    if stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1"));
    }
    let (mut values, len) = conv_pre_activation(signal, bank, stride)?;
    values.iter_mut().for_each(|v| *v = relu(*v));
    Ok(ResponseSequence {
        values,
        len,
        channels: bank.filters(),
    })
}

/// One filter bank per feature dimension plus the shared stride.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBankSet {
    banks: Vec<FilterBank>,
    stride: usize,
}

impl FilterBankSet {
    pub fn new(banks: Vec<FilterBank>, stride: usize) -> Result<Self> {
        let first = banks
            .first()
            .ok_or_else(|| Error::invalid("filter bank set", "at least one bank required"))?;
        if stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        let (l, n) = (first.interval(), first.filters());
        if banks.iter().any(|b| b.interval() != l || b.filters() != n) {
            return Err(Error::invalid(
                "filter bank set",
                "banks must share interval and filter count",
            ));
        }
        Ok(Self { banks, stride })
    }

    /// All-zero parameters.
    pub fn zeros(dim: usize, interval: usize, filters: usize, stride: usize) -> Result<Self> {
        if dim == 0 || interval == 0 || filters == 0 {
            return Err(Error::invalid("filter bank set", "shape arguments must be at least 1"));
        }
        let bank = FilterBank::new(vec![0.0; interval * filters], vec![0.0; filters], interval)?;
        Self::new(vec![bank; dim], stride)
    }

    /// Weights uniform in `[-a, a]` with `a = sqrt(6 / (l + n̄))`, zero biases.
    pub fn random(dim: usize, interval: usize, filters: usize, stride: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut set = Self::zeros(dim, interval, filters, stride)?;
        let a = (6.0 / (interval + filters) as f64).sqrt();
        for bank in &mut set.banks {
            bank.weights.iter_mut().for_each(|w| *w = rng.random_range(-a..=a));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.banks.len()
    }

    pub fn interval(&self) -> usize {
        self.banks[0].interval()
    }

    pub fn filters(&self) -> usize {
        self.banks[0].filters()
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn banks(&self) -> &[FilterBank] {
        &self.banks
    }

    pub(crate) fn banks_mut(&mut self) -> &mut [FilterBank] {
        &mut self.banks
    }

    /// Number of allocated scalar parameters (weights plus biases).
    pub fn parameter_count(&self) -> usize {
        self.banks.iter().map(|b| b.weights.len() + b.biases.len()).sum()
    }

    /// Shortest input that yields enough responses for `cfg`.
    pub fn min_input_len(&self, cfg: &PyramidConfig) -> usize {
        min_input_len(self.interval(), self.stride, cfg.max_segments())
    }

    /// Length of the pooled representation, `K * n̄ * M`.
    pub fn pooled_len(&self, cfg: &PyramidConfig) -> usize {
        self.dim() * self.filters() * cfg.total_segments()
    }
}

/// Everything the backward pass needs from an order-aware forward pass.
#[derive(Debug, Clone)]
pub struct OacpTrace {
    pub pooled: Vec<f64>,
    /// Per dimension, the `T_out x n̄` pre-activation matrix.
    pub pre_activations: Vec<Vec<f64>>,
    /// For every pooled slot, the response time index that won the max.
    pub argmax: Vec<usize>,
    pub positions: usize,
}

pub fn oacp_forward(seq: &FeatureSequence, set: &FilterBankSet, cfg: &PyramidConfig) -> Result<Vec<f64>> {
    Ok(oacp_forward_traced(seq, set, cfg)?.pooled)
}

pub fn oacp_forward_traced(seq: &FeatureSequence, set: &FilterBankSet, cfg: &PyramidConfig) -> Result<OacpTrace> {
    if seq.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: seq.dim(),
        });
    }
    let required = set.min_input_len(cfg);
    if seq.len() < required {
        return Err(Error::TooShort {
            required,
            actual: seq.len(),
        });
    }
    let n = set.filters();
    let mut pooled = Vec::with_capacity(set.pooled_len(cfg));
    let mut argmax = Vec::with_capacity(pooled.capacity());
    let mut pre_activations = Vec::with_capacity(set.dim());
    let mut positions = 0;
    for (k, bank) in set.banks.iter().enumerate() {
        let (pre, len) = conv_pre_activation(&seq.column(k), bank, set.stride)?;
        let act: Vec<f64> = pre.iter().map(|&v| relu(v)).collect();
        let (p, a) = pyramid_pool_channels(&act, len, n, cfg)?;
        pooled.extend(p);
        argmax.extend(a);
        pre_activations.push(pre);
        positions = len;
    }
    Ok(OacpTrace {
        pooled,
        pre_activations,
        argmax,
        positions,
    })
}

/// Parameters of a single convolution spanning all `K` dimensions with `n`
/// filters of length `l`: `l*K*n + n`.
pub fn param_count_joint(dim: u64, interval: u64, filters: u64) -> u64 {
    interval * dim * filters + filters
}

/// Parameters of `K` per-dimension banks of `n̄` filters: `l*K*n̄ + K*n̄`.
pub fn param_count_perdim(dim: u64, interval: u64, filters: u64) -> u64 {
    interval * dim * filters + dim * filters
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pooling::max_pool;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diff_bank() -> FilterBank {
        FilterBank::from_filters(&[[-1.0, 1.0]], vec![0.0]).unwrap()
    }

    #[test]
    fn rising_ramp_detected_falling_suppressed() {
        let up = conv_dim_forward(&[0.0, 1.0, 2.0, 3.0], &diff_bank(), 1).unwrap();
        assert_eq!(up.as_flat(), &[1.0, 1.0, 1.0]);
        let down = conv_dim_forward(&[3.0, 2.0, 1.0, 0.0], &diff_bank(), 1).unwrap();
        assert_eq!(down.as_flat(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn signal_of_interval_length_gives_one_row() {
        let bank = FilterBank::from_filters(&[[1.0, 2.0, 3.0], [0.5, 0.5, 0.5]], vec![0.0, -1.0]).unwrap();
        let r = conv_dim_forward(&[1.0, 1.0, 1.0], &bank, 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.row(0), &[6.0, 0.5]);
    }

    #[test]
    fn short_signal_rejected() {
        let bank = FilterBank::from_filters(&[[1.0, 1.0, 1.0]], vec![0.0]).unwrap();
        assert!(matches!(
            conv_dim_forward(&[1.0, 2.0], &bank, 1),
            Err(Error::TooShort { required: 3, actual: 2 })
        ));
    }

    #[test]
    fn stride_two_positions() {
        let bank = FilterBank::from_filters(&[[1.0, 0.0]], vec![0.0]).unwrap();
        let r = conv_dim_forward(&[1.0, 2.0, 3.0, 4.0, 5.0], &bank, 2).unwrap();
        assert_eq!(r.as_flat(), &[1.0, 3.0]);
    }

    #[test]
    fn identity_filter_reduces_to_max_pool() {
        let bank = FilterBank::from_filters(&[[1.0]], vec![0.0]).unwrap();
        let set = FilterBankSet::new(vec![bank], 1).unwrap();
        let seq = FeatureSequence::from_signal(&[0.5, 2.0, 1.0, 0.0]).unwrap();
        let out = oacp_forward(&seq, &set, &PyramidConfig::flat()).unwrap();
        assert_eq!(out, max_pool(&seq));
    }

    #[test]
    fn ramps_separate_after_pooling() {
        let set = FilterBankSet::new(vec![diff_bank()], 1).unwrap();
        let up = FeatureSequence::from_signal(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let flat = PyramidConfig::flat();
        assert_eq!(oacp_forward(&up, &set, &flat).unwrap(), vec![1.0]);
        assert_eq!(oacp_forward(&up.reversed(), &set, &flat).unwrap(), vec![0.0]);
    }

    #[test]
    fn pooled_layout_is_dimension_level_segment_channel() {
        // dimension 0 rises, dimension 1 falls; two filters pick up each trend
        let up = FilterBank::from_filters(&[[-1.0, 1.0], [1.0, -1.0]], vec![0.0, 0.0]).unwrap();
        let set = FilterBankSet::new(vec![up.clone(), up], 1).unwrap();
        let seq = FeatureSequence::from_frames(&[[0.0, 4.0], [1.0, 3.0], [3.0, 1.0], [6.0, 0.0], [10.0, 0.0]]).unwrap();
        let out = oacp_forward(&seq, &set, &PyramidConfig::default()).unwrap();
        // dim 0 responses: [1,0],[2,0],[3,0],[4,0]; dim 1: [0,1],[0,2],[0,1],[0,0]
        assert_eq!(out, vec![4.0, 0.0, 2.0, 0.0, 4.0, 0.0, 0.0, 2.0, 0.0, 2.0, 0.0, 1.0]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let set = FilterBankSet::zeros(2, 2, 1, 1).unwrap();
        let seq = FeatureSequence::from_signal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            oacp_forward(&seq, &set, &PyramidConfig::flat()),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn too_few_positions_for_pyramid_rejected() {
        let set = FilterBankSet::zeros(1, 3, 1, 1).unwrap();
        let seq = FeatureSequence::from_signal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(oacp_forward(&seq, &set, &PyramidConfig::default()).is_err());
        assert_eq!(set.min_input_len(&PyramidConfig::default()), 4);
    }

    #[test]
    fn parameter_count_formulas() {
        assert_eq!(param_count_joint(10_000, 8, 4000), 320_004_000);
        assert_eq!(param_count_joint(10_000, 5, 4000), 200_004_000);
        assert_eq!(param_count_joint(1, 1, 1), 2);
        assert_eq!(param_count_perdim(10_000, 8, 3), 270_000);
        assert_eq!(param_count_perdim(10_000, 5, 3), 180_000);
        assert_eq!(param_count_perdim(1, 1, 1), 2);
    }

    #[test]
    fn bank_validation() {
        assert!(FilterBank::new(vec![1.0], vec![0.0], 0).is_err());
        assert!(FilterBank::new(vec![1.0, 2.0, 3.0], vec![0.0], 2).is_err());
        assert!(FilterBank::new(vec![f64::NAN], vec![0.0], 1).is_err());
        let a = FilterBank::new(vec![1.0, 2.0], vec![0.0], 2).unwrap();
        let b = FilterBank::new(vec![1.0], vec![0.0], 1).unwrap();
        assert!(FilterBankSet::new(vec![a, b], 1).is_err());
        assert!(FilterBankSet::zeros(1, 1, 1, 0).is_err());
    }

    #[test]
    fn random_init_respects_glorot_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let set = FilterBankSet::random(4, 8, 3, 1, &mut rng).unwrap();
        let a = (6.0f64 / 11.0).sqrt();
        for bank in set.banks() {
            assert!(bank.weights().iter().all(|w| w.abs() <= a));
            assert!(bank.biases().iter().all(|&b| b == 0.0));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn responses_are_nonnegative(
                signal in proptest::collection::vec(-10.0f64..10.0, 3..20),
                w in proptest::collection::vec(-2.0f64..2.0, 3),
                b in -1.0f64..1.0,
                stride in 1usize..3,
            ) {
                let bank = FilterBank::new(w, vec![b], 3).unwrap();
                let r = conv_dim_forward(&signal, &bank, stride).unwrap();
                prop_assert!(r.as_flat().iter().all(|&v| v >= 0.0));
            }

            #[test]
            fn positive_homogeneity_without_bias(
                signal in proptest::collection::vec(-10.0f64..10.0, 2..12),
                w in proptest::collection::vec(-2.0f64..2.0, 2),
                exp in -3i32..4,
            ) {
                // power-of-two scale keeps every product and sum exact up to rounding position
                let alpha = 2f64.powi(exp);
                let bank = FilterBank::new(w, vec![0.0], 2).unwrap();
                let base = conv_dim_forward(&signal, &bank, 1).unwrap();
                let scaled: Vec<f64> = signal.iter().map(|v| v * alpha).collect();
                let r = conv_dim_forward(&scaled, &bank, 1).unwrap();
                for (x, y) in base.as_flat().iter().zip(r.as_flat()) {
                    prop_assert_eq!(x * alpha, *y);
                }
            }

            #[test]
            fn perdim_below_joint_once_joint_uses_twice_the_filters(
                k in 1u64..10_000, l in 1u64..20, nbar in 1u64..10, extra in 0u64..100,
            ) {
                let n = 2 * nbar + extra;
                prop_assert!(param_count_perdim(k, l, nbar) <= param_count_joint(k, l, n));
            }
        }
    }
}
