//! Synthetic tasks in which frame order is the only class signal.
//!
//! Every task builds its classes from a shared per-dimension multiset of
//! values (`t / (T - 1)` for `t` in `0..T`) arranged in a class-specific
//! temporal order, then adds independent Gaussian noise. Average and max
//! pooling of the noiseless sequences are therefore identical across
//! classes.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::seq::{FeatureSequence, LabeledSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// Rising ramp versus its exact reversal.
    TrendPair,
    /// Rising ramp versus the same frames with every block of
    /// [`PERMUTED_BLOCK`] frames reversed in place.
    PermutedPair,
    /// Monotone rise, rise-then-fall and fall-then-rise.
    MulticlassTrend,
}

/// Block length of the local reversal used by [`TaskKind::PermutedPair`].
pub const PERMUTED_BLOCK: usize = 4;

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::TrendPair => "trend-pair",
            TaskKind::PermutedPair => "permuted-pair",
            TaskKind::MulticlassTrend => "multiclass-trend",
        }
    }

    pub fn class_names(self) -> Vec<String> {
        let names: &[&str] = match self {
            TaskKind::TrendPair => &["rising", "falling"],
            TaskKind::PermutedPair => &["ordered", "block-reversed"],
            TaskKind::MulticlassTrend => &["rise", "rise-then-fall", "fall-then-rise"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn classes(self) -> usize {
        self.class_names().len()
    }

    /// Frame index order of class `class` for a sequence of `len` frames:
    /// position `t` holds value rank `order[t]`.
    pub fn order(self, class: usize, len: usize) -> Vec<usize> {
        let rising: Vec<usize> = (0..len).collect();
        match (self, class) {
            (_, 0) => rising,
            (TaskKind::TrendPair, _) => rising.into_iter().rev().collect(),
            (TaskKind::PermutedPair, _) => rising
                .chunks(PERMUTED_BLOCK.min(len))
                .flat_map(|c| c.iter().rev().copied())
                .collect(),
            (TaskKind::MulticlassTrend, 1) => {
                let up = (0..len).step_by(2);
                let down = (1..len).step_by(2).rev();
                up.chain(down).collect()
            }
            (TaskKind::MulticlassTrend, _) => {
                let down = (0..len).step_by(2).rev();
                let up = (1..len).step_by(2);
                down.chain(up).collect()
            }
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [TaskKind::TrendPair, TaskKind::PermutedPair, TaskKind::MulticlassTrend]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid("task", format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub task: TaskKind,
    /// Training sequences per class.
    pub n_train: usize,
    /// Test sequences per class.
    pub n_test: usize,
    pub len: usize,
    pub dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            task: TaskKind::TrendPair,
            n_train: 200,
            n_test: 100,
            len: 40,
            dim: 16,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub train: Vec<LabeledSequence>,
    pub test: Vec<LabeledSequence>,
    pub class_names: Vec<String>,
}

/// Generates train and test splits. Classes are interleaved
/// (`0, 1, .., c-1, 0, 1, ..`); train and test use separate random streams.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    if spec.len < 2 {
        return Err(Error::invalid("synthetic spec", "sequences need at least 2 frames"));
    }
    if spec.dim == 0 || spec.n_train == 0 || spec.n_test == 0 {
        return Err(Error::invalid(
            "synthetic spec",
            "dimension and counts must be at least 1",
        ));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::invalid(
            "noise",
            format!("sigma {} must be finite and nonnegative", spec.noise_sigma),
        ));
    }
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::invalid("noise", format!("sigma {}: {e}", spec.noise_sigma)))?;
    let classes = spec.task.classes();
    let orders: Vec<Vec<usize>> = (0..classes).map(|c| spec.task.order(c, spec.len)).collect();
    let denom = (spec.len - 1) as f64;

    let split = |stream: u64, per_class: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(stream);
        let mut out = Vec::with_capacity(per_class * classes);
        for _ in 0..per_class {
            for (label, order) in orders.iter().enumerate() {
                let mut data = Vec::with_capacity(spec.len * spec.dim);
                for &rank in order {
                    let base = rank as f64 / denom;
                    for _ in 0..spec.dim {
                        let v = if spec.noise_sigma > 0.0 {
                            base + noise.sample(&mut rng)
                        } else {
                            base
                        };
                        data.push(v);
                    }
                }
                let seq = FeatureSequence::from_flat(spec.len, spec.dim, data).expect("finite by construction");
                out.push(LabeledSequence::new(seq, label));
            }
        }
        out
    };

    Ok(SyntheticData {
        train: split(0, spec.n_train),
        test: split(1, spec.n_test),
        class_names: spec.task.class_names(),
    })
}
