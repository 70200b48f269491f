use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{backward, forward, instance_loss, ClassifierModel};
use crate::error::{Error, Result};
use crate::seq::{check_labels, FeatureSequence, LabeledSequence};

/// Per-instance SGD settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Heavy-ball momentum in `[0, 1)`; 0 is plain SGD.
    pub momentum: f64,
    /// L2 penalty folded into the gradient.
    pub weight_decay: f64,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 50,
            momentum: 0.0,
            weight_decay: 0.0,
            seed: 0,
            shuffle_each_epoch: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate", "must be finite and nonnegative"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum", "must lie in [0, 1)"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::invalid("weight decay", "must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Running statistics of one training epoch, measured on each instance just
/// before its update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Summed instance losses.
    pub loss: f64,
    pub mean_loss: f64,
    pub accuracy: f64,
}

/// Trains `model` one instance at a time.
///
/// The visiting order is reshuffled every epoch from `cfg.seed`, so the run
/// is fully determined by the seed, the data order and the config.
pub fn sgd_train(
    mut model: ClassifierModel,
    data: &[LabeledSequence],
    cfg: &TrainConfig,
) -> Result<(ClassifierModel, Vec<EpochStats>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("training data", "no instances"));
    }
    check_labels(data, model.classes())?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut velocity: Vec<Vec<f64>> = model.parameter_slices().iter().map(|s| vec![0.0; s.len()]).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if cfg.shuffle_each_epoch {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        let mut correct = 0usize;
        for &i in &order {
            let item = &data[i];
            let (probs, cache) = forward(&model, &item.sequence)?;
            let loss = instance_loss(&probs, item.label)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    instance: i,
                    loss,
                });
            }
            total += loss;
            if argmax(&probs) == item.label {
                correct += 1;
            }
            let grads = backward(&model, &cache, item.label)?;
            let mut finite = true;
            for ((param, grad), vel) in model
                .parameter_slices_mut()
                .into_iter()
                .zip(grads.slices())
                .zip(&mut velocity)
            {
                for ((p, g), v) in param.iter_mut().zip(grad).zip(vel.iter_mut()) {
                    *v = cfg.momentum * *v + (g + cfg.weight_decay * *p);
                    *p -= cfg.learning_rate * *v;
                    finite &= p.is_finite();
                }
            }
            if !finite {
                return Err(Error::Divergence {
                    epoch,
                    instance: i,
                    loss: f64::NAN,
                });
            }
        }
        let n = data.len() as f64;
        history.push(EpochStats {
            epoch,
            loss: total,
            mean_loss: total / n,
            accuracy: correct as f64 / n,
        });
    }
    Ok((model, history))
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict(model: &ClassifierModel, seq: &FeatureSequence) -> Result<usize> {
    let (probs, _) = forward(model, seq)?;
    Ok(argmax(&probs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// `confusion[true][predicted]` counts.
    pub confusion: Vec<Vec<u64>>,
}

pub fn evaluate(model: &ClassifierModel, data: &[LabeledSequence]) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::invalid("evaluation data", "no instances"));
    }
    check_labels(data, model.classes())?;
    let c = model.classes();
    let mut confusion = vec![vec![0u64; c]; c];
    let mut correct = 0;
    for item in data {
        let pred = predict(model, &item.sequence)?;
        confusion[item.label][pred] += 1;
        if pred == item.label {
            correct += 1;
        }
    }
    Ok(Evaluation {
        accuracy: correct as f64 / data.len() as f64,
        correct,
        total: data.len(),
        confusion,
    })
}
