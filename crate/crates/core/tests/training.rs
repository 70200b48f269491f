use oacp::harness::{gen_synthetic, SyntheticSpec, TaskKind};
use oacp::model::{evaluate, load_model, save_model, sgd_train, Checkpoint, ModelConfig, PoolingKind, TrainConfig};
use oacp::seq::{LabeledSequence, Preprocessing};

fn padded(data: &[LabeledSequence], len: usize) -> Vec<LabeledSequence> {
    data.iter()
        .map(|d| LabeledSequence::new(d.sequence.pad_to(len), d.label))
        .collect()
}

#[test]
fn oacp_solves_multiclass_trend_and_checkpoint_matches() {
    let spec = SyntheticSpec {
        task: TaskKind::MulticlassTrend,
        n_train: 40,
        n_test: 20,
        len: 24,
        dim: 3,
        noise_sigma: 0.1,
        seed: 4,
    };
    let data = gen_synthetic(&spec).unwrap();
    let model = ModelConfig {
        interval: 4,
        filters: 2,
        ..ModelConfig::new(PoolingKind::Oacp, 3, 3)
    }
    .build(2)
    .unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.02,
        epochs: 25,
        momentum: 0.5,
        seed: 2,
        ..TrainConfig::default()
    };
    let (model, history) = sgd_train(model, &data.train, &cfg).unwrap();
    assert!(history.last().unwrap().mean_loss < history[0].mean_loss);
    let ev = evaluate(&model, &data.test).unwrap();
    assert!(ev.accuracy >= 0.9, "{ev:?}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    let ckpt = Checkpoint {
        model: model.clone(),
        preprocessing: Preprocessing::NONE,
    };
    save_model(&path, &ckpt).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, ckpt);
    assert_eq!(back.model.checksum(), model.checksum());
    assert_eq!(evaluate(&back.model, &data.test).unwrap(), ev);
}

#[test]
fn average_pooling_separates_mean_shifted_classes() {
    let data = gen_synthetic(&SyntheticSpec {
        n_train: 30,
        n_test: 15,
        len: 10,
        dim: 2,
        noise_sigma: 0.05,
        seed: 1,
        ..SyntheticSpec::default()
    })
    .unwrap();
    // shift class 1 upward so its mean differs
    let shift = |d: &[LabeledSequence]| -> Vec<LabeledSequence> {
        d.iter()
            .map(|x| {
                let off = x.label as f64;
                LabeledSequence::new(
                    x.sequence
                        .map_frames(2, |f| f.iter().map(|v| v + off).collect())
                        .unwrap(),
                    x.label,
                )
            })
            .collect()
    };
    let (train, test) = (shift(&data.train), shift(&data.test));
    let model = ModelConfig::new(PoolingKind::Average, 2, 2).build(0).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.1,
        epochs: 20,
        ..TrainConfig::default()
    };
    let (model, _) = sgd_train(model, &train, &cfg).unwrap();
    assert!(evaluate(&model, &test).unwrap().accuracy > 0.95);
}

#[test]
fn baselines_at_chance_on_noiseless_trend_pair() {
    let data = gen_synthetic(&SyntheticSpec {
        n_train: 20,
        n_test: 20,
        len: 12,
        dim: 2,
        noise_sigma: 0.0,
        seed: 0,
        ..SyntheticSpec::default()
    })
    .unwrap();
    for kind in [PoolingKind::Average, PoolingKind::Max] {
        let model = ModelConfig::new(kind, 2, 2).build(3).unwrap();
        let cfg = TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        };
        let (model, _) = sgd_train(model, &data.train, &cfg).unwrap();
        assert_eq!(evaluate(&model, &data.test).unwrap().accuracy, 0.5, "{kind}");
    }
    let model = ModelConfig::new(PoolingKind::Oacp, 2, 2).build(3).unwrap();
    let len = model.min_sequence_len();
    let cfg = TrainConfig {
        learning_rate: 0.05,
        epochs: 20,
        ..TrainConfig::default()
    };
    let (model, _) = sgd_train(model, &padded(&data.train, len), &cfg).unwrap();
    assert_eq!(evaluate(&model, &padded(&data.test, len)).unwrap().accuracy, 1.0);
}
