//! Directory layout of training corpora and test trial sets.
//!
//! Both are directories of `trial_NNN/` subdirectories. A training trial
//! holds `recording` and `envelope`; a test trial holds `recording`,
//! `target`, `masker1`, `masker2` and optionally `meta.json`. Signals are
//! `.bin` or `.csv` files.

use std::fs;
use std::path::{Path, PathBuf};

use aad_core::attention::{CocktailTrial, TrialMetadata};
use aad_core::signal::io::{load_envelope, load_recording};
use aad_core::signal::MultiChannelRecording;

use crate::error::{CliError, CliResult};
use crate::output::{input_digest, FileDigest};

pub const TEST_STREAMS: [&str; 3] = ["target", "masker1", "masker2"];

pub fn trial_dir_name(i: usize) -> String {
    format!("trial_{i:03}")
}

/// `trial_*` subdirectories of `root`, sorted by name.
pub fn trial_dirs(root: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(root).map_err(|e| CliError::Data(format!("cannot read {}: {e}", root.display())))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let is_trial = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("trial_"));
        if is_trial && path.is_dir() {
            dirs.push(path);
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        return Err(CliError::Data(format!("no trial_* directories in {}", root.display())));
    }
    Ok(dirs)
}

fn signal_file(dir: &Path, stem: &str) -> CliResult<PathBuf> {
    for ext in ["bin", "csv"] {
        let p = dir.join(format!("{stem}.{ext}"));
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(CliError::Data(format!(
        "{} has no {stem}.bin or {stem}.csv",
        dir.display()
    )))
}

/// Loaded trials plus digests of every file read.
pub struct Loaded<T> {
    pub items: Vec<T>,
    pub inputs: Vec<FileDigest>,
}

pub fn load_training(root: &Path) -> CliResult<Loaded<(MultiChannelRecording, aad_core::signal::Envelope)>> {
    let mut items = Vec::new();
    let mut inputs = Vec::new();
    for dir in trial_dirs(root)? {
        let rec_path = signal_file(&dir, "recording")?;
        let env_path = signal_file(&dir, "envelope")?;
        items.push((load_recording(&rec_path)?, load_envelope(&env_path)?));
        inputs.push(input_digest(root, &rec_path)?);
        inputs.push(input_digest(root, &env_path)?);
    }
    Ok(Loaded { items, inputs })
}

pub fn load_test(root: &Path) -> CliResult<Loaded<CocktailTrial>> {
    let mut items = Vec::new();
    let mut inputs = Vec::new();
    for dir in trial_dirs(root)? {
        let rec_path = signal_file(&dir, "recording")?;
        let recording = load_recording(&rec_path)?;
        inputs.push(input_digest(root, &rec_path)?);
        let mut candidates = Vec::with_capacity(3);
        for stem in TEST_STREAMS {
            let p = signal_file(&dir, stem)?;
            candidates.push(load_envelope(&p)?);
            inputs.push(input_digest(root, &p)?);
        }
        let meta_path = dir.join("meta.json");
        let metadata = if meta_path.is_file() {
            inputs.push(input_digest(root, &meta_path)?);
            let text = fs::read_to_string(&meta_path)?;
            serde_json::from_str::<TrialMetadata>(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", meta_path.display())))?
        } else {
            TrialMetadata::default()
        };
        let candidates: [_; 3] = candidates.try_into().expect("three streams");
        items.push(CocktailTrial::new(recording, candidates, metadata)?);
    }
    Ok(Loaded { items, inputs })
}
