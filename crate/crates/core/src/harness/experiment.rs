//! Like-for-like comparison of pooling methods behind the same softmax head.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{evaluate, sgd_train, ModelConfig, PoolingKind, TrainConfig};
use crate::pooling::PyramidConfig;
use crate::seq::LabeledSequence;

/// One row of a comparison: a pooling method and its shape parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub name: String,
    pub pooling: PoolingKind,
    pub interval: usize,
    pub stride: usize,
    pub filters: usize,
    pub pyramid: PyramidConfig,
}

impl MethodConfig {
    /// Defaults: interval 8, stride 1, 3 filters, pyramid `[1, 2]`.
    pub fn new(pooling: PoolingKind) -> Self {
        Self {
            name: pooling.name().to_string(),
            pooling,
            interval: 8,
            stride: 1,
            filters: 3,
            pyramid: PyramidConfig::default(),
        }
    }

    pub fn model_config(&self, input_dim: usize, classes: usize) -> ModelConfig {
        ModelConfig {
            pooling: self.pooling,
            input_dim,
            classes,
            interval: self.interval,
            stride: self.stride,
            filters: self.filters,
            pyramid: self.pyramid.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub final_train_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub confusion: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: MethodConfig,
    /// Trainable parameters of the whole classifier.
    pub parameters: usize,
    /// Training or evaluation failure, recorded without aborting other rows.
    pub outcome: std::result::Result<MethodOutcome, String>,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub const CSV_HEADER: &'static str =
        "method,pooling,interval,stride,filters,pyramid,parameters,final_train_loss,train_accuracy,test_accuracy,status";

    /// CSV with one line per row. Wall time is left out so identical runs
    /// produce identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let m = &r.method;
            let (interval, stride, filters) = match m.pooling {
                PoolingKind::Oacp => (m.interval.to_string(), m.stride.to_string(), m.filters.to_string()),
                _ => (String::new(), String::new(), String::new()),
            };
            let pyramid = if m.pooling.uses_pyramid() {
                m.pyramid
                    .segments()
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            } else {
                String::new()
            };
            let _ = write!(
                out,
                "{},{},{interval},{stride},{filters},{pyramid},{}",
                m.name, m.pooling, r.parameters
            );
            match &r.outcome {
                Ok(o) => {
                    let _ = writeln!(
                        out,
                        ",{:.6},{:.4},{:.4},ok",
                        o.final_train_loss, o.train_accuracy, o.test_accuracy
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, ",,,,\"failed: {}\"", e.replace('"', "'"));
                }
            }
        }
        out
    }

    pub fn row(&self, name: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.method.name == name)
    }
}

fn shapes(train: &[LabeledSequence], test: &[LabeledSequence]) -> Result<(usize, usize)> {
    let first = train
        .first()
        .ok_or_else(|| Error::invalid("training data", "no instances"))?;
    if test.is_empty() {
        return Err(Error::invalid("test data", "no instances"));
    }
    let classes = train.iter().chain(test).map(|d| d.label).max().unwrap_or(0) + 1;
    Ok((first.sequence.dim(), classes.max(2)))
}

fn padded(data: &[LabeledSequence], min_len: usize) -> Vec<LabeledSequence> {
    data.iter()
        .map(|d| LabeledSequence::new(d.sequence.pad_to(min_len), d.label))
        .collect()
}

/// Trains and evaluates each method with the same seed and config.
///
/// Sequences shorter than a method needs are edge-padded for that method.
/// The class count is one more than the largest label seen.
pub fn run_comparison(
    train: &[LabeledSequence],
    test: &[LabeledSequence],
    methods: &[MethodConfig],
    cfg: &TrainConfig,
) -> Result<ResultTable> {
    if methods.is_empty() {
        return Err(Error::invalid("methods", "at least one method required"));
    }
    let (dim, classes) = shapes(train, test)?;
    let mut rows = Vec::with_capacity(methods.len());
    for method in methods {
        let start = Instant::now();
        let model = method.model_config(dim, classes).build(cfg.seed)?;
        let parameters = model.parameter_count();
        let min_len = model.min_sequence_len();
        let outcome = (|| -> Result<MethodOutcome> {
            let train = padded(train, min_len);
            let test = padded(test, min_len);
            let (model, history) = sgd_train(model, &train, cfg)?;
            let last = history.last().expect("at least one epoch");
            let ev = evaluate(&model, &test)?;
            Ok(MethodOutcome {
                final_train_loss: last.mean_loss,
                train_accuracy: last.accuracy,
                test_accuracy: ev.accuracy,
                confusion: ev.confusion,
            })
        })()
        .map_err(|e| e.to_string());
        rows.push(ResultRow {
            method: method.clone(),
            parameters,
            outcome,
            wall_time: start.elapsed(),
        });
    }
    Ok(ResultTable { rows })
}

/// Order-aware pooling with a varying number of filters per dimension, one
/// row per entry of `filter_counts`.
pub fn sweep_filters(
    train: &[LabeledSequence],
    test: &[LabeledSequence],
    filter_counts: &[usize],
    base: &MethodConfig,
    cfg: &TrainConfig,
) -> Result<ResultTable> {
    let methods: Vec<MethodConfig> = filter_counts
        .iter()
        .map(|&n| MethodConfig {
            name: format!("oacp-n{n}"),
            pooling: PoolingKind::Oacp,
            filters: n,
            ..base.clone()
        })
        .collect();
    run_comparison(train, test, &methods, cfg)
}
