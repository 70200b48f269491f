//! Trains an order-aware classifier on the three-class trend task, saves a
//! checkpoint, reloads it and checks the reloaded model agrees.
//!
//! ```text
//! cargo run --release --example train_oacp -- [epochs]
//! ```

use oacp::harness::{gen_synthetic, SyntheticSpec, TaskKind};
use oacp::model::{evaluate, load_model, save_model, sgd_train, Checkpoint, ModelConfig, PoolingKind, TrainConfig};
use oacp::seq::Preprocessing;

fn main() -> oacp::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let spec = SyntheticSpec {
        task: TaskKind::MulticlassTrend,
        n_train: 60,
        n_test: 30,
        len: 30,
        dim: 4,
        noise_sigma: 0.15,
        seed: 11,
    };
    let data = gen_synthetic(&spec)?;

    let cfg = ModelConfig {
        interval: 5,
        filters: 2,
        ..ModelConfig::new(PoolingKind::Oacp, spec.dim, spec.task.classes())
    };
    let model = cfg.build(1)?;
    println!(
        "{} parameters, pooled length {}",
        model.parameter_count(),
        model.pooled_len()
    );

    let train_cfg = TrainConfig {
        learning_rate: 0.02,
        epochs,
        momentum: 0.5,
        seed: 1,
        ..TrainConfig::default()
    };
    let (model, history) = sgd_train(model, &data.train, &train_cfg)?;
    for h in history.iter().step_by(5).chain(history.last()) {
        println!(
            "epoch {:>3}  mean loss {:.4}  train acc {:.3}",
            h.epoch, h.mean_loss, h.accuracy
        );
    }

    let ev = evaluate(&model, &data.test)?;
    println!("test accuracy {:.3}", ev.accuracy);
    for (name, row) in data.class_names.iter().zip(&ev.confusion) {
        println!("  {name:<16} {row:?}");
    }

    let dir = std::env::temp_dir().join("oacp-train-example");
    std::fs::create_dir_all(&dir).map_err(|e| oacp::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let path = dir.join("model.bin");
    save_model(
        &path,
        &Checkpoint {
            model: model.clone(),
            preprocessing: Preprocessing::NONE,
        },
    )?;
    let reloaded = load_model(&path)?.model;
    assert_eq!(reloaded, model);
    assert_eq!(evaluate(&reloaded, &data.test)?, ev);
    println!("checkpoint {} reloads bit-exactly", path.display());
    Ok(())
}
