//! Dataset manifests.
//!
//! ```text
//! # comments and blank lines are ignored
//! classes=rising,falling
//! split=train
//! train/seq_00000.txt 0
//! appearance/v1.txt,motion/v1.bin 1
//! ```
//!
//! Each entry line is a comma-separated list of feature files (blocks that
//! are concatenated frame-wise) followed by the class index. Relative paths
//! resolve against the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use super::features::load_features;
use crate::error::{Error, Result};
use crate::seq::{LabeledSequence, Preprocessing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Feature blocks, relative to the manifest directory unless absolute.
    pub paths: Vec<PathBuf>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub class_names: Vec<String>,
    pub split_tag: String,
    /// Directory relative entry paths resolve against.
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(class_names: Vec<String>, split_tag: impl Into<String>, base_dir: impl Into<PathBuf>) -> Self {
        Self {
            entries: Vec::new(),
            class_names,
            split_tag: split_tag.into(),
            base_dir: base_dir.into(),
        }
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn push(&mut self, path: impl Into<PathBuf>, label: usize) {
        self.entries.push(ManifestEntry {
            paths: vec![path.into()],
            label,
        });
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("classes={}\nsplit={}\n", self.class_names.join(","), self.split_tag);
        for e in &self.entries {
            let paths: Vec<String> = e.paths.iter().map(|p| p.display().to_string()).collect();
            out.push_str(&format!("{} {}\n", paths.join(","), e.label));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut class_names = None;
        let mut split_tag = String::new();
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("classes=") {
                let names: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
                if names.iter().any(String::is_empty) {
                    return Err(err(line_no, "empty class name".into()));
                }
                class_names = Some(names);
                continue;
            }
            if let Some(v) = line.strip_prefix("split=") {
                split_tag = v.trim().to_string();
                continue;
            }
            let (paths, label) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| err(line_no, format!("expected `<path> <label>`, got {line:?}")))?;
            let label: usize = label
                .parse()
                .map_err(|e| err(line_no, format!("bad label {label:?}: {e}")))?;
            let paths: Vec<PathBuf> = paths.trim().split(',').map(|p| PathBuf::from(p.trim())).collect();
            entries.push((line_no, ManifestEntry { paths, label }));
        }
        let class_names = class_names.ok_or_else(|| err(1, "missing `classes=` line".into()))?;
        if let Some((line, e)) = entries.iter().find(|(_, e)| e.label >= class_names.len()) {
            return Err(err(
                *line,
                format!("label {} out of range for {} classes", e.label, class_names.len()),
            ));
        }
        Ok(Self {
            entries: entries.into_iter().map(|(_, e)| e).collect(),
            class_names,
            split_tag,
            base_dir,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Loads every entry unprocessed (blocks concatenated, no sampling).
    pub fn load_raw(&self) -> Result<Vec<LabeledSequence>> {
        self.load_sequences(&Preprocessing::NONE, 1)
    }

    /// Loads every entry, applying `pre` and edge-padding to `min_len`.
    pub fn load_sequences(&self, pre: &Preprocessing, min_len: usize) -> Result<Vec<LabeledSequence>> {
        self.entries
            .iter()
            .map(|e| {
                let blocks = e
                    .paths
                    .iter()
                    .map(|p| load_features(self.resolve(p)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LabeledSequence::new(pre.apply(&blocks, min_len)?, e.label))
            })
            .collect()
    }
}
