//! Everything around the math: synthetic tasks, feature files, dataset
//! manifests and the comparison runner.

pub mod experiment;
pub mod features;
pub mod manifest;
pub mod synth;

pub use experiment::{run_comparison, sweep_filters, MethodConfig, MethodOutcome, ResultRow, ResultTable};
pub use features::{load_features, read_features, save_features, save_features_binary, write_features_text};
pub use manifest::{DatasetManifest, ManifestEntry};
pub use synth::{gen_synthetic, SyntheticData, SyntheticSpec, TaskKind};
