//! Trains average, max, temporal pyramid and order-aware pooling on the
//! trend-pair task and prints the comparison table.
//!
//! ```text
//! cargo run --release --example compare_pooling -- [epochs] [lr]
//! ```

use oacp::harness::{gen_synthetic, run_comparison, MethodConfig, SyntheticSpec};
use oacp::model::{PoolingKind, TrainConfig};

fn main() -> oacp::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().and_then(|a| a.parse().ok()).unwrap_or(30);
    let lr = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.01);

    let data = gen_synthetic(&SyntheticSpec::default())?;
    let methods: Vec<MethodConfig> = PoolingKind::ALL.into_iter().map(MethodConfig::new).collect();
    let cfg = TrainConfig {
        learning_rate: lr,
        epochs,
        seed: 7,
        ..TrainConfig::default()
    };
    let table = run_comparison(&data.train, &data.test, &methods, &cfg)?;
    print!("{}", table.to_csv());
    for row in &table.rows {
        eprintln!("{:>8}: {:.2?}", row.method.name, row.wall_time);
    }
    Ok(())
}
