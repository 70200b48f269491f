//! Softmax classification head over a pooled sequence representation, with
//! exact backpropagation through the pooling stage.

mod checkpoint;
mod gradcheck;
mod train;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convpool::{oacp_forward_traced, FilterBankSet, OacpTrace};
use crate::error::{Error, Result};
use crate::pooling::{average_pool, max_pool_with_argmax, temporal_pyramid_pool_with_argmax, PyramidConfig};
use crate::seq::{FeatureSequence, LabeledSequence};

pub use checkpoint::{export_text, load_model, read_model, save_model, write_model, Checkpoint, CHECKPOINT_VERSION};
pub use gradcheck::{grad_check, GradCheckReport, TIE_PERTURBATION};
pub use train::{evaluate, predict, sgd_train, EpochStats, Evaluation, TrainConfig};

/// Floor added inside the log of the instance loss.
pub const LOG_EPSILON: f64 = 1e-15;

/// How a sequence is turned into a fixed-length vector before the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolingKind {
    Average,
    Max,
    Pyramid,
    Oacp,
}

impl PoolingKind {
    pub const ALL: [PoolingKind; 4] = [Self::Average, Self::Max, Self::Pyramid, Self::Oacp];

    pub fn name(self) -> &'static str {
        match self {
            Self::Average => "average",
            Self::Max => "max",
            Self::Pyramid => "pyramid",
            Self::Oacp => "oacp",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Self::Average => 0,
            Self::Max => 1,
            Self::Pyramid => 2,
            Self::Oacp => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    pub fn uses_pyramid(self) -> bool {
        matches!(self, Self::Pyramid | Self::Oacp)
    }
}

impl fmt::Display for PoolingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PoolingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::invalid("pooling kind", format!("unknown kind {s:?}")))
    }
}

/// Shape and hyperparameters needed to build a fresh model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub pooling: PoolingKind,
    pub input_dim: usize,
    pub classes: usize,
    /// Filter length `l` (oacp only).
    pub interval: usize,
    pub stride: usize,
    /// Filters per dimension `n̄` (oacp only).
    pub filters: usize,
    pub pyramid: PyramidConfig,
}

impl ModelConfig {
    pub fn new(pooling: PoolingKind, input_dim: usize, classes: usize) -> Self {
        Self {
            pooling,
            input_dim,
            classes,
            interval: 8,
            stride: 1,
            filters: 3,
            pyramid: PyramidConfig::default(),
        }
    }

    /// Builds a model with seeded symmetric uniform initialization.
    pub fn build(&self, seed: u64) -> Result<ClassifierModel> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ClassifierModel::random(self, &mut rng)
    }
}

/// Pooling stage plus softmax head `Y = softmax(W_c P + b_c)`.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    pooling: PoolingKind,
    input_dim: usize,
    classes: usize,
    pooled_len: usize,
    pyramid: Option<PyramidConfig>,
    filter_banks: Option<FilterBankSet>,
    /// `c x P`, row-major.
    class_weights: Vec<f64>,
    class_biases: Vec<f64>,
    version: u64,
}

/// Bit-level equality of structure and parameters; the mutation counter is
/// not compared.
impl PartialEq for ClassifierModel {
    fn eq(&self, other: &Self) -> bool {
        let bits = |m: &ClassifierModel| m.parameters().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        self.pooling == other.pooling
            && self.input_dim == other.input_dim
            && self.classes == other.classes
            && self.pyramid == other.pyramid
            && self
                .filter_banks
                .as_ref()
                .map(|s| (s.interval(), s.filters(), s.stride()))
                == other
                    .filter_banks
                    .as_ref()
                    .map(|s| (s.interval(), s.filters(), s.stride()))
            && bits(self) == bits(other)
    }
}

fn pooled_len_for(
    pooling: PoolingKind,
    input_dim: usize,
    pyramid: Option<&PyramidConfig>,
    banks: Option<&FilterBankSet>,
) -> Result<usize> {
    let need_pyramid = || pyramid.ok_or_else(|| Error::invalid("model", format!("{pooling} pooling needs a pyramid")));
    Ok(match pooling {
        PoolingKind::Average | PoolingKind::Max => input_dim,
        PoolingKind::Pyramid => input_dim * need_pyramid()?.total_segments(),
        PoolingKind::Oacp => {
            let banks = banks.ok_or_else(|| Error::invalid("model", "oacp pooling needs filter banks"))?;
            banks.pooled_len(need_pyramid()?)
        }
    })
}

impl ClassifierModel {
    pub fn random(cfg: &ModelConfig, rng: &mut impl Rng) -> Result<Self> {
        if cfg.input_dim == 0 {
            return Err(Error::invalid("model", "input dimension must be at least 1"));
        }
        if cfg.classes < 2 {
            return Err(Error::invalid("model", "need at least two classes"));
        }
        let filter_banks = match cfg.pooling {
            PoolingKind::Oacp => Some(FilterBankSet::random(
                cfg.input_dim,
                cfg.interval,
                cfg.filters,
                cfg.stride,
                rng,
            )?),
            _ => None,
        };
        let pyramid = cfg.pooling.uses_pyramid().then(|| cfg.pyramid.clone());
        let pooled_len = pooled_len_for(cfg.pooling, cfg.input_dim, pyramid.as_ref(), filter_banks.as_ref())?;
        let a = (6.0 / (pooled_len + cfg.classes) as f64).sqrt();
        let class_weights = (0..cfg.classes * pooled_len)
            .map(|_| rng.random_range(-a..=a))
            .collect();
        Ok(Self {
            pooling: cfg.pooling,
            input_dim: cfg.input_dim,
            classes: cfg.classes,
            pooled_len,
            pyramid,
            filter_banks,
            class_weights,
            class_biases: vec![0.0; cfg.classes],
            version: 0,
        })
    }

    /// Assembles a model from explicit parameters, validating every shape.
    pub fn from_parts(
        pooling: PoolingKind,
        input_dim: usize,
        classes: usize,
        pyramid: Option<PyramidConfig>,
        filter_banks: Option<FilterBankSet>,
        class_weights: Vec<f64>,
        class_biases: Vec<f64>,
    ) -> Result<Self> {
        if classes < 2 {
            return Err(Error::invalid("model", "need at least two classes"));
        }
        if input_dim == 0 {
            return Err(Error::invalid("model", "input dimension must be at least 1"));
        }
        let pyramid = if pooling.uses_pyramid() { pyramid } else { None };
        let filter_banks = if pooling == PoolingKind::Oacp {
            filter_banks
        } else {
            None
        };
        if let Some(banks) = &filter_banks {
            if banks.dim() != input_dim {
                return Err(Error::DimensionMismatch {
                    expected: input_dim,
                    actual: banks.dim(),
                });
            }
        }
        let pooled_len = pooled_len_for(pooling, input_dim, pyramid.as_ref(), filter_banks.as_ref())?;
        if class_weights.len() != classes * pooled_len {
            return Err(Error::LengthMismatch {
                expected: classes * pooled_len,
                actual: class_weights.len(),
            });
        }
        if class_biases.len() != classes {
            return Err(Error::LengthMismatch {
                expected: classes,
                actual: class_biases.len(),
            });
        }
        if class_weights.iter().chain(&class_biases).any(|v| !v.is_finite()) {
            return Err(Error::invalid("model", "parameters must be finite"));
        }
        Ok(Self {
            pooling,
            input_dim,
            classes,
            pooled_len,
            pyramid,
            filter_banks,
            class_weights,
            class_biases,
            version: 0,
        })
    }

    pub fn pooling(&self) -> PoolingKind {
        self.pooling
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Length `P` of the pooled representation.
    pub fn pooled_len(&self) -> usize {
        self.pooled_len
    }

    pub fn pyramid(&self) -> Option<&PyramidConfig> {
        self.pyramid.as_ref()
    }

    pub fn filter_banks(&self) -> Option<&FilterBankSet> {
        self.filter_banks.as_ref()
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }

    pub fn class_biases(&self) -> &[f64] {
        &self.class_biases
    }

    /// Mutation counter; bumped whenever parameters are handed out mutably.
    pub fn version(&self) -> u64 {
        self.version
    }

    /// Shortest sequence the pooling stage accepts.
    pub fn min_sequence_len(&self) -> usize {
        match (&self.filter_banks, &self.pyramid) {
            (Some(banks), Some(p)) => banks.min_input_len(p),
            (None, Some(p)) => p.max_segments(),
            _ => 1,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.filter_banks.as_ref().map_or(0, FilterBankSet::parameter_count)
            + self.class_weights.len()
            + self.class_biases.len()
    }

    /// Parameter slices in canonical order: per filter bank its weights then
    /// biases, then the class weights, then the class biases.
    pub fn parameter_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        if let Some(banks) = &self.filter_banks {
            for b in banks.banks() {
                out.push(b.weights());
                out.push(b.biases());
            }
        }
        out.push(&self.class_weights);
        out.push(&self.class_biases);
        out
    }

    /// Mutable parameter slices in canonical order. Invalidates outstanding
    /// forward caches.
    pub fn parameter_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.version += 1;
        let mut out: Vec<&mut [f64]> = Vec::new();
        if let Some(banks) = &mut self.filter_banks {
            for b in banks.banks_mut() {
                let (w, bias) = b.parts_mut();
                out.push(w);
                out.push(bias);
            }
        }
        out.push(&mut self.class_weights);
        out.push(&mut self.class_biases);
        out
    }

    /// All parameters flattened in canonical order.
    pub fn parameters(&self) -> Vec<f64> {
        self.parameter_slices().concat()
    }

    /// Overwrites parameter `index` of the canonical flattening.
    pub fn set_parameter(&mut self, mut index: usize, value: f64) {
        for slice in self.parameter_slices_mut() {
            if index < slice.len() {
                slice[index] = value;
                return;
            }
            index -= slice.len();
        }
        panic!("parameter index out of range");
    }

    /// FNV-1a over the bit patterns of every parameter.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for slice in self.parameter_slices() {
            for v in slice {
                for byte in v.to_bits().to_le_bytes() {
                    h ^= u64::from(byte);
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }

    fn check_input(&self, seq: &FeatureSequence) -> Result<()> {
        if seq.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: seq.dim(),
            });
        }
        Ok(())
    }

    /// Pooled representation `P` of a sequence.
    pub fn pool(&self, seq: &FeatureSequence) -> Result<Vec<f64>> {
        Ok(self.pool_routed(seq)?.0)
    }

    fn pool_routed(&self, seq: &FeatureSequence) -> Result<(Vec<f64>, Route)> {
        self.check_input(seq)?;
        Ok(match self.pooling {
            PoolingKind::Average => (average_pool(seq), Route::Head),
            PoolingKind::Max => {
                let (p, _) = max_pool_with_argmax(seq);
                (p, Route::Head)
            }
            PoolingKind::Pyramid => {
                let cfg = self.pyramid.as_ref().expect("pyramid model has a pyramid");
                let (p, _) = temporal_pyramid_pool_with_argmax(seq, cfg)?;
                (p, Route::Head)
            }
            PoolingKind::Oacp => {
                let banks = self.filter_banks.as_ref().expect("oacp model has filter banks");
                let cfg = self.pyramid.as_ref().expect("oacp model has a pyramid");
                let trace = oacp_forward_traced(seq, banks, cfg)?;
                let pooled = trace.pooled.clone();
                (
                    pooled,
                    Route::Oacp {
                        trace,
                        input: seq.clone(),
                    },
                )
            }
        })
    }

    /// Unnormalized class scores `W_c P + b_c`.
    pub fn logits(&self, pooled: &[f64]) -> Vec<f64> {
        self.class_weights
            .chunks_exact(self.pooled_len)
            .zip(&self.class_biases)
            .map(|(row, b)| {
                let mut acc = 0.0;
                for (w, p) in row.iter().zip(pooled) {
                    acc += w * p;
                }
                acc + b
            })
            .collect()
    }
}

/// What backward needs to route gradients below the pooled vector.
#[derive(Debug, Clone)]
enum Route {
    /// No trainable parameters below the head.
    Head,
    Oacp {
        trace: OacpTrace,
        input: FeatureSequence,
    },
}

/// State retained by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    pooled: Vec<f64>,
    logits: Vec<f64>,
    probs: Vec<f64>,
    route: Route,
}

impl ForwardCache {
    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Response-domain argmax per pooled slot (oacp only).
    pub fn argmax(&self) -> Option<&[usize]> {
        match &self.route {
            Route::Oacp { trace, .. } => Some(&trace.argmax),
            _ => None,
        }
    }
}

/// Gradients of the instance loss, shaped like the trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// Per dimension, `n̄ x l` filter-major like the bank weights.
    pub filter_weights: Vec<Vec<f64>>,
    pub filter_biases: Vec<Vec<f64>>,
    pub class_weights: Vec<f64>,
    pub class_biases: Vec<f64>,
    /// Gradient at the logits, `probs - onehot(label)`.
    pub logits: Vec<f64>,
}

impl Gradients {
    /// Slices in the same canonical order as
    /// [`ClassifierModel::parameter_slices`].
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for (w, b) in self.filter_weights.iter().zip(&self.filter_biases) {
            out.push(w);
            out.push(b);
        }
        out.push(&self.class_weights);
        out.push(&self.class_biases);
        out
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.slices().concat()
    }
}

/// Max-shifted softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Negative log-likelihood of one instance.
pub fn instance_loss(probs: &[f64], label: usize) -> Result<f64> {
    let p = probs.get(label).ok_or(Error::LabelOutOfRange {
        label,
        classes: probs.len(),
    })?;
    Ok(-(p + LOG_EPSILON).ln())
}

/// Summed instance losses over a labeled dataset.
pub fn dataset_loss(model: &ClassifierModel, data: &[LabeledSequence]) -> Result<f64> {
    data.iter().try_fold(0.0, |acc, d| {
        let (probs, _) = forward(model, &d.sequence)?;
        Ok(acc + instance_loss(&probs, d.label)?)
    })
}

/// Class probabilities for `seq` plus the cache needed by [`backward`].
pub fn forward(model: &ClassifierModel, seq: &FeatureSequence) -> Result<(Vec<f64>, ForwardCache)> {
    let (pooled, route) = model.pool_routed(seq)?;
    let logits = model.logits(&pooled);
    let probs = softmax(&logits);
    let cache = ForwardCache {
        version: model.version,
        pooled,
        logits,
        probs: probs.clone(),
        route,
    };
    Ok((probs, cache))
}

/// Gradients of `-log Y(label)` with respect to every trainable parameter.
pub fn backward(model: &ClassifierModel, cache: &ForwardCache, label: usize) -> Result<Gradients> {
    if cache.version != model.version {
        return Err(Error::StaleCache {
            cache: cache.version,
            model: model.version,
        });
    }
    if label >= model.classes {
        return Err(Error::LabelOutOfRange {
            label,
            classes: model.classes,
        });
    }
    let p_len = model.pooled_len;
    let mut d_logits = cache.probs.clone();
    d_logits[label] -= 1.0;

    let mut class_weights = vec![0.0; model.class_weights.len()];
    for (row, &g) in class_weights.chunks_exact_mut(p_len).zip(&d_logits) {
        for (w, p) in row.iter_mut().zip(&cache.pooled) {
            *w = g * p;
        }
    }

    let (filter_weights, filter_biases) = match (&cache.route, &model.filter_banks) {
        (Route::Oacp { trace, input }, Some(banks)) => {
            let mut d_pooled = vec![0.0; p_len];
            for (row, &g) in model.class_weights.chunks_exact(p_len).zip(&d_logits) {
                for (d, w) in d_pooled.iter_mut().zip(row) {
                    *d += w * g;
                }
            }
            conv_backward(banks, trace, input, &d_pooled)
        }
        _ => (Vec::new(), Vec::new()),
    };

    Ok(Gradients {
        filter_weights,
        filter_biases,
        class_weights,
        class_biases: d_logits.clone(),
        logits: d_logits,
    })
}

fn conv_backward(
    banks: &FilterBankSet,
    trace: &OacpTrace,
    input: &FeatureSequence,
    d_pooled: &[f64],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = banks.filters();
    let l = banks.interval();
    let stride = banks.stride();
    let block = d_pooled.len() / banks.dim();
    let mut d_weights = Vec::with_capacity(banks.dim());
    let mut d_biases = Vec::with_capacity(banks.dim());
    for k in 0..banks.dim() {
        let pre = &trace.pre_activations[k];
        let mut d_act = vec![0.0; pre.len()];
        for s in 0..block {
            let slot = k * block + s;
            let t = trace.argmax[slot];
            d_act[t * n + s % n] += d_pooled[slot];
        }
        let signal = input.column(k);
        let mut dw = vec![0.0; n * l];
        let mut db = vec![0.0; n];
        for t in 0..trace.positions {
            let window = &signal[t * stride..t * stride + l];
            for j in 0..n {
                let idx = t * n + j;
                if pre[idx] <= 0.0 || d_act[idx] == 0.0 {
                    continue;
                }
                let g = d_act[idx];
                db[j] += g;
                for (w, x) in dw[j * l..(j + 1) * l].iter_mut().zip(window) {
                    *w += g * x;
                }
            }
        }
        d_weights.push(dw);
        d_biases.push(db);
    }
    (d_weights, d_biases)
}
