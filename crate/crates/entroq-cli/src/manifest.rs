//! Run manifests: the fully resolved configuration of a run, written next
//! to its outputs so any output file can be regenerated bit-identically.

use std::path::Path;

use serde::Serialize;

use entroq_core::error::Result;

#[derive(Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a C,
}

/// Reads the `ENTROQ_SEED` override, falling back to the given seed.
pub fn effective_seed(requested: u64) -> u64 {
    match std::env::var("ENTROQ_SEED") {
        Ok(v) => v.parse().unwrap_or(requested),
        Err(_) => requested,
    }
}

pub fn write_manifest<C: Serialize>(
    dir: &Path,
    command: &str,
    seed: u64,
    config: &C,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let manifest = RunManifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}
