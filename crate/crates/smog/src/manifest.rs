//! Run manifests: every subcommand records what it ran with, next to its
//! outputs, so any result file can be traced back to exact inputs and
//! seeds, and reruns with an identical manifest reproduce identical
//! outputs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;

use crate::sidecar::write_kv;

#[derive(Debug)]
pub struct RunManifest {
    subcommand: String,
    seed: u64,
    inputs: Vec<(String, String)>,
    params: Vec<(String, String)>,
    start_unix: u64,
}

impl RunManifest {
    pub fn start(subcommand: &str, seed: u64) -> RunManifest {
        RunManifest {
            subcommand: subcommand.to_string(),
            seed,
            inputs: Vec::new(),
            params: Vec::new(),
            start_unix: unix_now(),
        }
    }

    pub fn input(&mut self, key: &str, path: &Path) {
        self.inputs
            .push((key.to_string(), path.display().to_string()));
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }

    /// Write the manifest next to the run's primary output.
    pub fn write(&self, output: &Path) -> Result<()> {
        let mut pairs: Vec<(&str, String)> = vec![
            ("subcommand", self.subcommand.clone()),
            ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
            ("seed", self.seed.to_string()),
            ("start_time_unix", self.start_unix.to_string()),
            ("end_time_unix", unix_now().to_string()),
        ];
        for (key, value) in &self.inputs {
            pairs.push(("input", format!("{key}: {value}")));
        }
        for (key, value) in &self.params {
            pairs.push(("param", format!("{key} = {value}")));
        }
        write_kv(&manifest_path(output), &pairs)
    }
}

/// `<output>.manifest` beside the output file or directory.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    name.push_str(".manifest");
    output.with_file_name(name)
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
