//! Output staging, reproducibility manifest and number formatting.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

/// Files produced by a command, written only once the command has finished.
#[derive(Debug, Default)]
pub struct Staged {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_sha256: String,
    input_sha256: Option<String>,
    params_sha256: Option<String>,
    files: Vec<&'a str>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn file_hash(path: Option<&Path>) -> Result<Option<String>, CliError> {
    match path {
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display())))?;
            Ok(Some(sha256_hex(&bytes)))
        }
        None => Ok(None),
    }
}

/// Writes the staged files and `manifest.json` into the configured output directory.
///
/// The config hash leaves out the output directory, so identical runs into
/// different directories produce identical manifests.
pub fn commit(command: &str, cfg: &RunConfig, staged: &Staged) -> Result<(), CliError> {
    let hashed = RunConfig {
        out: Default::default(),
        ..cfg.clone()
    };
    let config_json = serde_json::to_vec(&hashed).expect("config serializes");
    let manifest = Manifest {
        tool: "gts",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_sha256: sha256_hex(&config_json),
        input_sha256: file_hash(cfg.input.as_deref())?,
        params_sha256: file_hash(cfg.params.as_deref())?,
        files: staged.files.iter().map(|(n, _)| n.as_str()).collect(),
    };
    let dir = &cfg.out;
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    for (name, bytes) in &staged.files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

/// Six significant digits, plain notation for moderate magnitudes.
pub fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0401234567), "0.0401235");
        assert_eq!(sig6(-8.923214), "-8.92321");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
