//! Writes two feature blocks per sequence in the text and binary formats,
//! lists them in a manifest and loads them back with frame sampling and
//! per-block normalization.

use oacp::harness::{save_features, save_features_binary, DatasetManifest, ManifestEntry};
use oacp::seq::{FeatureSequence, Preprocessing};

fn main() -> oacp::Result<()> {
    let dir = std::env::temp_dir().join("oacp-feature-example");
    std::fs::create_dir_all(&dir).map_err(|e| oacp::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let mut manifest = DatasetManifest::new(vec!["up".into(), "down".into()], "demo", &dir);
    for (i, label) in [0usize, 1].into_iter().enumerate() {
        let ramp: Vec<[f64; 2]> = (0..10).map(|t| [t as f64, 1.0 + t as f64 * 0.5]).collect();
        let mut appearance = FeatureSequence::from_frames(&ramp)?;
        if label == 1 {
            appearance = appearance.reversed();
        }
        let motion = appearance.map_frames(1, |f| vec![f[1] - f[0]])?;
        let a = format!("appearance_{i}.txt");
        let m = format!("motion_{i}.bin");
        save_features(&appearance, dir.join(&a))?;
        save_features_binary(&motion, dir.join(&m))?;
        manifest.entries.push(ManifestEntry {
            paths: vec![a.into(), m.into()],
            label,
        });
    }
    let path = dir.join("demo.manifest");
    manifest.save(&path)?;
    print!("{}", manifest.to_text());

    let reloaded = DatasetManifest::load(&path)?;
    let pre = Preprocessing {
        sample_rate: 3,
        l2_normalize: true,
    };
    for item in reloaded.load_sequences(&pre, 6)? {
        let s = &item.sequence;
        println!(
            "label {} -> T={} K={}, first frame {:.3?}",
            item.label,
            s.len(),
            s.dim(),
            s.frame(0)
        );
    }
    Ok(())
}
