//! Config resolution, output directories and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use spinxfer::harness::{ExperimentConfig, TrialSet};
use spinxfer::io::MANIFEST_SCHEMA;
use spinxfer::spin_model::Breaker;

use crate::{BreakerArg, Common};

/// Loads `--config` (or the defaults) and applies flag overrides.
pub fn resolve(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(n) = common.spins {
        cfg.n_spins = n;
    }
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = common.trials {
        cfg.n_trials = t;
    }
    if !common.tf.is_empty() {
        cfg.t_f = common.tf.clone();
    }
    if let Some(b) = common.beta {
        cfg.beta = b;
    }
    if let Some(b) = common.breaker {
        cfg.breaker = match b {
            BreakerArg::Single => Breaker::SingleSiteZ,
            BreakerArg::Sum => Breaker::FullSumZ,
        };
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    if let Some(w) = common.workers {
        if w == 0 {
            bail!("--workers must be at least 1");
        }
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    cfg.validate().context("invalid configuration")?;
    Ok(cfg)
}

/// Creates the output directory: the explicit one, or
/// `runs/<command>-<unix seconds>-<first 8 hex of the config hash>`.
pub fn output_dir(explicit: Option<&Path>, command: &str, config_hash: &str) -> Result<PathBuf> {
    let dir = match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            PathBuf::from("runs").join(format!("{command}-{secs}-{}", &config_hash[..8]))
        }
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Manifest of the non-campaign commands.
#[derive(Serialize)]
pub struct RunManifest<'a, S: Serialize> {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config_hash: String,
    pub config: &'a ExperimentConfig,
    pub trial_set: &'a TrialSet,
    pub summary: S,
    pub files: BTreeMap<String, String>,
}

/// Writes `manifest.json` listing the checksums of `files` (relative to `dir`).
pub fn write_manifest<S: Serialize>(
    dir: &Path,
    command: &str,
    config: &ExperimentConfig,
    trial_set: &TrialSet,
    summary: S,
    files: &[String],
) -> Result<()> {
    let mut sums = BTreeMap::new();
    for f in files {
        sums.insert(f.clone(), file_sha256(&dir.join(f))?);
    }
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_hash: config.hash(),
        config,
        trial_set,
        summary,
        files: sums,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text).context("writing manifest.json")?;
    Ok(())
}
