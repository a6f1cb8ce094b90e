//! Loading experiment configs and applying command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use lpp_core::ExperimentConfig;
use sha2::{Digest, Sha256};

/// Environment variable supplying the worker count when the config omits it.
pub const THREADS_ENV: &str = "LPP_LAB_THREADS";

/// Flags that replace config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<u32>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn env_workers() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| anyhow!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

/// Parses a config document. Precedence for `workers`: flag, then the
/// document, then `env_workers`, then 1.
pub fn parse_config(text: &str, overrides: &Overrides, env_workers: Option<usize>) -> Result<ExperimentConfig> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| anyhow!("invalid config: {e}"))?;
    let has_workers = value.get("workers").is_some();
    let mut cfg: ExperimentConfig = serde_json::from_value(value).map_err(|e| anyhow!("invalid config: {e}"))?;
    if !has_workers {
        if let Some(w) = env_workers {
            cfg.workers = w;
        }
    }
    if let Some(n) = overrides.n {
        cfg.n = n;
    }
    if let Some(s) = overrides.samples {
        cfg.samples = s;
    }
    if let Some(seed) = overrides.seed {
        cfg.master_seed = seed;
    }
    if let Some(w) = overrides.workers {
        cfg.workers = w;
    }
    if let Some(out) = &overrides.out {
        cfg.out_path = Some(out.display().to_string());
    }
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &Overrides, env_workers: Option<usize>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text, overrides, env_workers).with_context(|| format!("config {}", path.display()))
}

/// SHA-256 of the compact JSON serialization.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_string(cfg).expect("configs serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{"experiment":"corr_decay","n":2000,"r_grid":[32,64,128],"samples":500,"master_seed":7}"#;

    #[test]
    fn overrides_replace_fields() {
        let o = Overrides {
            n: Some(4000),
            samples: Some(10),
            seed: Some(9),
            workers: Some(3),
            out: Some(PathBuf::from("x/y")),
        };
        let c = parse_config(DOC, &o, Some(8)).unwrap();
        assert_eq!((c.n, c.samples, c.master_seed, c.workers), (4000, 10, 9, 3));
        assert_eq!(c.out_path.as_deref(), Some("x/y"));
    }

    #[test]
    fn env_workers_is_only_a_default() {
        let c = parse_config(DOC, &Overrides::default(), Some(8)).unwrap();
        assert_eq!(c.workers, 8);
        let with = DOC.replace("\"samples\"", "\"workers\":2,\"samples\"");
        let c = parse_config(&with, &Overrides::default(), Some(8)).unwrap();
        assert_eq!(c.workers, 2);
        let c = parse_config(DOC, &Overrides::default(), None).unwrap();
        assert_eq!(c.workers, 1);
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse_config(DOC, &Overrides::default(), None).unwrap();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.master_seed += 1;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn malformed_documents_are_reported() {
        let e = parse_config("{", &Overrides::default(), None).unwrap_err();
        assert!(e.to_string().starts_with("invalid config"));
        let e = parse_config(r#"{"experiment":"warp","samples":1}"#, &Overrides::default(), None).unwrap_err();
        assert!(e.to_string().contains("warp"));
    }
}
