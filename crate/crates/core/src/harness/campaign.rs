use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sha256_hex, ExperimentConfig, TrialSet};
use crate::error::{invalid, Result};
use crate::io;
use crate::seeding::{derive_seed, fnv1a};

/// One (trial, t_f, scheme) cell of a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 1-based run number.
    pub trial: usize,
    pub tf_index: usize,
    pub t_f: f64,
    pub scheme: String,
    /// `None` when the cell failed.
    pub best_fidelity: Option<f64>,
    pub n_evals: usize,
    pub wall_s: Option<f64>,
    pub converged: bool,
    pub seed: u64,
    /// Checksum of the trial set the cell was computed on.
    pub trial_set: String,
    pub error: Option<String>,
    pub params: Vec<f64>,
}

/// Seed of a campaign cell: `derive_seed(master, [trial, tf_index, fnv1a(scheme_id)])`.
pub fn cell_seed(master_seed: u64, trial: usize, tf_index: usize, scheme_id: &str) -> u64 {
    derive_seed(master_seed, &[trial as u64, tf_index as u64, fnv1a(scheme_id)])
}

#[derive(Clone, Debug, Default)]
pub struct CampaignOptions {
    /// Write per-cell files, `campaign.csv` and `manifest.json` here; cells
    /// already present from an interrupted run are reused.
    pub out_dir: Option<PathBuf>,
    /// Fill `wall_s` (makes the output timing-dependent).
    pub record_wall_time: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEntry {
    pub trial: usize,
    pub tf_index: usize,
    pub t_f: f64,
    pub scheme: String,
    pub seed: u64,
    pub status: CellStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub trial_set: TrialSet,
    pub cells: Vec<CellEntry>,
    /// SHA-256 of each finalized output file.
    pub files: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct CampaignOutput {
    /// Ordered by (trial, t_f index, scheme order in the config).
    pub records: Vec<TrialRecord>,
    pub manifest: Manifest,
    pub failures: usize,
    /// Cells taken from an earlier, interrupted run.
    pub reused: usize,
}

struct Cell {
    trial: usize,
    tf_index: usize,
    t_f: f64,
    scheme: usize,
    id: String,
    seed: u64,
}

fn cell_file(dir: &Path, c: &Cell) -> PathBuf {
    dir.join("cells").join(format!("t{:04}_f{:02}_{}.json", c.trial, c.tf_index, c.id))
}

fn load_cell(path: &Path, c: &Cell, checksum: &str) -> Option<TrialRecord> {
    let rec: TrialRecord = serde_json::from_slice(&fs::read(path).ok()?).ok()?;
    let matches = rec.trial == c.trial
        && rec.tf_index == c.tf_index
        && rec.scheme == c.id
        && rec.seed == c.seed
        && rec.trial_set == checksum
        && rec.error.is_none();
    matches.then_some(rec)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn run_cell(config: &ExperimentConfig, trials: &TrialSet, c: &Cell, timed: bool) -> TrialRecord {
    let start = Instant::now();
    let outcome = config.problem(trials, c.trial, c.t_f).and_then(|p| config.schemes[c.scheme].run(&p, c.seed));
    let wall_s = timed.then(|| start.elapsed().as_secs_f64());
    let mut rec = TrialRecord {
        trial: c.trial,
        tf_index: c.tf_index,
        t_f: c.t_f,
        scheme: c.id.clone(),
        best_fidelity: None,
        n_evals: 0,
        wall_s,
        converged: false,
        seed: c.seed,
        trial_set: trials.checksum.clone(),
        error: None,
        params: Vec::new(),
    };
    match outcome {
        Ok(o) => {
            rec.best_fidelity = Some(o.result.best_fidelity);
            rec.n_evals = o.result.evaluations;
            rec.converged = o.result.converged;
            rec.params = o.result.best_params;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Evaluates every (trial, t_f, scheme) cell. A failing cell is recorded
/// with its error message and does not stop the campaign.
pub fn run_campaign(config: &ExperimentConfig, options: &CampaignOptions) -> Result<CampaignOutput> {
    config.validate()?;
    let trials = config.trial_set()?;
    let ids: Vec<String> = config.schemes.iter().map(|s| s.id()).collect();
    let mut cells = Vec::new();
    for trial in 1..=config.n_trials {
        for (tf_index, &t_f) in config.t_f.iter().enumerate() {
            for (scheme, id) in ids.iter().enumerate() {
                let seed = cell_seed(config.master_seed, trial, tf_index, id);
                cells.push(Cell { trial, tf_index, t_f, scheme, id: id.clone(), seed });
            }
        }
    }

    let mut manifest = Manifest {
        schema: io::MANIFEST_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config.hash(),
        config: ExperimentConfig { output_dir: None, ..config.clone() },
        trial_set: trials.clone(),
        cells: cells
            .iter()
            .map(|c| CellEntry {
                trial: c.trial,
                tf_index: c.tf_index,
                t_f: c.t_f,
                scheme: c.id.clone(),
                seed: c.seed,
                status: CellStatus::Pending,
            })
            .collect(),
        files: BTreeMap::new(),
    };

    let dir = options.out_dir.as_deref();
    let mut existing: Vec<Option<TrialRecord>> = vec![None; cells.len()];
    if let Some(dir) = dir {
        fs::create_dir_all(dir.join("cells"))?;
        let manifest_path = dir.join("manifest.json");
        if manifest_path.exists() {
            let old: Manifest = serde_json::from_slice(&fs::read(&manifest_path)?)?;
            if old.config_hash != manifest.config_hash {
                return Err(invalid(format!("{} holds a different campaign", dir.display())));
            }
        }
        for (slot, c) in existing.iter_mut().zip(&cells) {
            *slot = load_cell(&cell_file(dir, c), c, &trials.checksum);
        }
        write_atomic(&manifest_path, &serde_json::to_vec_pretty(&manifest)?)?;
    }
    let reused = existing.iter().filter(|r| r.is_some()).count();

    let records = cells
        .par_iter()
        .zip(existing.into_par_iter())
        .map(|(c, old)| -> Result<TrialRecord> {
            if let Some(rec) = old {
                return Ok(rec);
            }
            let rec = run_cell(config, &trials, c, options.record_wall_time);
            if let Some(dir) = dir {
                write_atomic(&cell_file(dir, c), &serde_json::to_vec_pretty(&rec)?)?;
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut failures = 0;
    for (entry, rec) in manifest.cells.iter_mut().zip(&records) {
        entry.status = if rec.error.is_some() {
            failures += 1;
            CellStatus::Failed
        } else {
            CellStatus::Done
        };
    }
    if let Some(dir) = dir {
        let csv_path = dir.join("campaign.csv");
        io::write_campaign(&csv_path, &records)?;
        manifest.files.insert("campaign.csv".into(), sha256_hex(&fs::read(&csv_path)?));
        write_atomic(&dir.join("manifest.json"), &serde_json::to_vec_pretty(&manifest)?)?;
    }
    Ok(CampaignOutput { records, manifest, failures, reused })
}
