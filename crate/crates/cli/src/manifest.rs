//! Run manifests: enough provenance to regenerate a report from its raw file,
//! and per-chunk completion for resuming interrupted runs.

use std::path::Path;

use anyhow::{Context, Result};
use lpp_core::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::config::config_hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkStatus {
    Pending,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkRecord {
    pub index: usize,
    pub start: u64,
    pub end: u64,
    pub status: ChunkStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub raw: String,
    pub report: String,
    pub manifest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    /// Half-open sample index range.
    pub sample_range: [u64; 2],
    pub chunk_size: u64,
    pub outputs: Outputs,
    pub started: String,
    pub finished: Option<String>,
    pub chunks: Vec<ChunkRecord>,
    pub library_version: String,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// `[start, end)` chunks of at most `size` indices covering `0..samples`.
pub fn chunk_ranges(samples: u64, size: u64) -> Vec<(u64, u64)> {
    (0..samples.div_ceil(size))
        .map(|c| (c * size, ((c + 1) * size).min(samples)))
        .collect()
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, outputs: Outputs) -> Self {
        let chunks = chunk_ranges(config.samples, config.chunk_size)
            .into_iter()
            .enumerate()
            .map(|(index, (start, end))| ChunkRecord {
                index,
                start,
                end,
                status: ChunkStatus::Pending,
            })
            .collect();
        RunManifest {
            experiment: config.experiment.name().to_string(),
            config_hash: config_hash(config),
            config: config.clone(),
            master_seed: config.master_seed,
            sample_range: [0, config.samples],
            chunk_size: config.chunk_size,
            outputs,
            started: now(),
            finished: None,
            chunks,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.finished.is_some() && self.chunks.iter().all(|c| c.status == ChunkStatus::Complete)
    }

    /// True when the embedded config still hashes to the recorded hash.
    pub fn is_consistent(&self) -> bool {
        config_hash(&self.config) == self.config_hash
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    /// Atomic write through a temporary file.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpp_core::ExperimentKind;

    #[test]
    fn chunks_cover_the_range() {
        assert_eq!(chunk_ranges(0, 64), vec![]);
        assert_eq!(chunk_ranges(64, 64), vec![(0, 64)]);
        assert_eq!(chunk_ranges(130, 64), vec![(0, 64), (64, 128), (128, 130)]);
    }

    #[test]
    fn manifest_round_trips() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Transversal, 130, 5);
        cfg.r_grid = vec![10];
        cfg.k_grid = vec![1.0];
        let outputs = Outputs {
            raw: "raw.csv".into(),
            report: "report.json".into(),
            manifest: "manifest.json".into(),
        };
        let mut m = RunManifest::new(&cfg, outputs);
        assert_eq!(m.chunks.len(), 3);
        assert!(!m.is_complete() && m.is_consistent());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        m.save(&path).unwrap();
        assert_eq!(RunManifest::load(&path).unwrap(), m);
        for c in &mut m.chunks {
            c.status = ChunkStatus::Complete;
        }
        m.finished = Some(now());
        assert!(m.is_complete());
        m.config.master_seed = 6;
        assert!(!m.is_consistent());
    }
}
