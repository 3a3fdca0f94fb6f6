use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to repeat a run: the resolved flags, the seed and
/// content hashes of the inputs and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    /// Input path to SHA-256.
    pub input_digest: BTreeMap<String, String>,
    pub tool_version: String,
    /// Output file name to SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))
    }

    /// Fails if any recorded input changed since the run.
    pub fn verify_inputs(&self) -> Result<(), CliError> {
        for (path, digest) in &self.input_digest {
            let now = sha256_file(Path::new(path))?;
            if &now != digest {
                return Err(CliError::Manifest(format!("input {path} changed since the recorded run")));
            }
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// Canonical form of an input path, so a manifest works from any directory.
pub fn canonical_input(path: &Path) -> Result<PathBuf, CliError> {
    fs::canonicalize(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Output directory that records what was written to it.
pub struct OutDir {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Output(format!("{}: {e}", root.display())))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        self.written.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(crate::Error::from)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes the manifest last, listing every other output.
    pub fn finish<P: Serialize>(
        mut self,
        command: &str,
        parameters: &P,
        seed: Option<u64>,
        inputs: &[PathBuf],
    ) -> Result<RunManifest, CliError> {
        let mut input_digest = BTreeMap::new();
        for p in inputs {
            input_digest.insert(p.display().to_string(), sha256_file(p)?);
        }
        let manifest = RunManifest {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).map_err(crate::Error::from)?,
            seed,
            input_digest,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: std::mem::take(&mut self.written),
        };
        self.write_json(MANIFEST_FILE, &manifest)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
