//! Order-aware convolutional pooling for classifying sequences of frame-level
//! feature vectors.
//!
//! Each feature dimension's evolution over time is filtered by its own small
//! bank of learned 1D filters, the ReLU responses are aggregated with
//! temporal pyramid pooling, and a softmax head is trained end to end with
//! per-instance SGD. Average, max and temporal pyramid pooling are provided
//! as baselines behind the same head, along with a class-signature
//! dimensionality reducer and an experiment harness.
//!
//! Modules, bottom up:
//!
//! - [`seq`]: feature sequences, frame sampling, per-block L2 normalization
//! - [`pooling`]: average, max and temporal pyramid pooling
//! - [`convpool`]: per-dimension filter banks and parameter accounting
//! - [`model`]: softmax head, backpropagation, SGD, gradient checking, checkpoints
//! - [`dimreduce`]: class-mean signatures clustered with k-means
//! - [`harness`]: synthetic data, feature files, manifests, comparisons
//! - [`cli`]: the `oacp` command line

pub mod cli;
pub mod convpool;
pub mod dimreduce;
pub mod error;
pub mod harness;
pub mod model;
pub mod pooling;
pub mod seq;

pub use error::{Error, Result};
