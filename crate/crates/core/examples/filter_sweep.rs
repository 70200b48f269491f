//! Varies the number of filters per dimension on the block-reversal task.

use oacp::harness::{gen_synthetic, sweep_filters, MethodConfig, SyntheticSpec, TaskKind};
use oacp::model::{PoolingKind, TrainConfig};

fn main() -> oacp::Result<()> {
    let data = gen_synthetic(&SyntheticSpec {
        task: TaskKind::PermutedPair,
        n_train: 80,
        n_test: 40,
        len: 24,
        dim: 6,
        noise_sigma: 0.1,
        seed: 5,
    })?;
    let base = MethodConfig {
        interval: 4,
        ..MethodConfig::new(PoolingKind::Oacp)
    };
    let cfg = TrainConfig {
        epochs: 30,
        seed: 3,
        ..TrainConfig::default()
    };
    let table = sweep_filters(&data.train, &data.test, &[1, 2, 3, 5], &base, &cfg)?;
    println!("{:<8} {:>10} {:>10}", "method", "params", "test acc");
    for row in &table.rows {
        let acc = match &row.outcome {
            Ok(o) => format!("{:.3}", o.test_accuracy),
            Err(e) => e.clone(),
        };
        println!("{:<8} {:>10} {:>10}", row.method.name, row.parameters, acc);
    }
    Ok(())
}
