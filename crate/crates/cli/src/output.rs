//! Output directories and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use aad_core::signal::io::{write_binary, write_csv};
use aad_core::signal::{Envelope, MultiChannelRecording};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// On-disk signal encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Bin,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Bin => "bin",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Collects every file written by a command so the manifest can list them.
pub struct OutputDir {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Data(format!("cannot create output directory {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.written.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    pub fn write_recording(&mut self, stem: &str, rec: &MultiChannelRecording, format: Format) -> CliResult<()> {
        let mut buf = Vec::new();
        match format {
            Format::Bin => write_binary(rec, &mut buf)?,
            Format::Csv => write_csv(rec, &mut buf)?,
        }
        self.write(&format!("{stem}.{}", format.extension()), &buf)
    }

    pub fn write_envelope(&mut self, stem: &str, env: &Envelope, format: Format) -> CliResult<()> {
        let rec = MultiChannelRecording::from_channels(vec![env.samples().to_vec()], env.rate())?;
        self.write_recording(stem, &rec, format)
    }

    /// Writes `manifest.json` last, listing all other outputs.
    pub fn finish<C: Serialize>(
        mut self,
        command: &str,
        seed: Option<u64>,
        config: &C,
        inputs: Vec<FileDigest>,
    ) -> CliResult<()> {
        let config = serde_json::to_value(config)?;
        let manifest = Manifest {
            tool: "aad",
            command: command.to_string(),
            versions: BTreeMap::from([("aad-cli", env!("CARGO_PKG_VERSION")), ("aad-core", aad_core::VERSION)]),
            seed,
            config_hash: sha256_hex(serde_json::to_string(&config)?.as_bytes()),
            config,
            inputs,
            outputs: self
                .written
                .iter()
                .map(|(path, sha256)| FileDigest {
                    path: path.clone(),
                    sha256: sha256.clone(),
                })
                .collect(),
        };
        self.write_json(MANIFEST, &manifest)
    }
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    command: String,
    versions: BTreeMap<&'static str, &'static str>,
    seed: Option<u64>,
    config_hash: String,
    config: serde_json::Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

/// Digest of an input file, named relative to `base`.
pub fn input_digest(base: &Path, path: &Path) -> CliResult<FileDigest> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let rel = path.strip_prefix(base).unwrap_or(path);
    let name = if rel.as_os_str().is_empty() {
        path.file_name().map(Path::new).unwrap_or(path)
    } else {
        rel
    };
    Ok(FileDigest {
        path: name.to_string_lossy().replace('\\', "/"),
        sha256: sha256_hex(&bytes),
    })
}
