//! Compares backpropagated gradients with central differences for every
//! pooling kind on a small random instance.

use oacp::model::{grad_check, ModelConfig, PoolingKind};
use oacp::seq::{FeatureSequence, LabeledSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> oacp::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (len, dim, classes) = (6, 3, 3);
    let data = (0..len * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let example = LabeledSequence::new(FeatureSequence::from_flat(len, dim, data)?, 1);

    for kind in PoolingKind::ALL {
        let model = ModelConfig {
            interval: 2,
            filters: 2,
            ..ModelConfig::new(kind, dim, classes)
        }
        .build(9)?;
        let report = grad_check(&model, &example, 1e-5, 9)?;
        println!(
            "{:<8} {:>3} params  max rel error {:.2e}",
            kind.name(),
            report.parameters,
            report.max_relative_error
        );
    }
    Ok(())
}
