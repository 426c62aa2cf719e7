use serde::{Deserialize, Serialize};

use super::campaign::TrialRecord;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub trial: usize,
    pub t_f: f64,
    pub scheme: String,
    pub f_ref: f64,
    pub f_other: f64,
    /// F_ref − F_other.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub t_f: f64,
    pub scheme: String,
    pub n: usize,
    pub median_delta: f64,
    pub median_abs_delta: f64,
    pub mean_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub reference: String,
    pub trial_set: String,
    pub rows: Vec<ComparisonRow>,
    pub summary: Vec<ComparisonSummary>,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// ΔF = F_ref − F_other per trial and final time for every scheme
/// (the reference included), with per-(t_f, scheme) medians.
/// Failed cells are skipped.
pub fn compare_schemes(records: &[TrialRecord], reference: &str) -> Result<ComparisonRecord> {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.best_fidelity.is_some()).collect();
    let trial_set = ok.first().map(|r| r.trial_set.clone()).unwrap_or_default();
    if let Some(bad) = ok.iter().find(|r| r.trial_set != trial_set) {
        return Err(Error::TrialSetMismatch(format!(
            "trial {} of {} used {} but {} was expected",
            bad.trial, bad.scheme, bad.trial_set, trial_set
        )));
    }
    if !ok.iter().any(|r| r.scheme == reference) {
        return Err(invalid(format!("no results for reference scheme {reference}")));
    }
    let mut schemes: Vec<&str> = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    for r in &ok {
        if !schemes.contains(&r.scheme.as_str()) {
            schemes.push(&r.scheme);
        }
        if !times.contains(&r.t_f) {
            times.push(r.t_f);
        }
    }
    let find = |trial: usize, t_f: f64, scheme: &str| {
        ok.iter().find(|r| r.trial == trial && r.t_f == t_f && r.scheme == scheme).and_then(|r| r.best_fidelity)
    };
    let mut trials: Vec<usize> = ok.iter().map(|r| r.trial).collect();
    trials.sort_unstable();
    trials.dedup();

    let mut rows = Vec::new();
    for &trial in &trials {
        for &t_f in &times {
            let Some(f_ref) = find(trial, t_f, reference) else { continue };
            for &scheme in &schemes {
                if let Some(f_other) = find(trial, t_f, scheme) {
                    rows.push(ComparisonRow {
                        trial,
                        t_f,
                        scheme: scheme.to_string(),
                        f_ref,
                        f_other,
                        delta: f_ref - f_other,
                    });
                }
            }
        }
    }
    let mut summary = Vec::new();
    for &t_f in &times {
        for &scheme in &schemes {
            let d: Vec<f64> = rows.iter().filter(|r| r.t_f == t_f && r.scheme == scheme).map(|r| r.delta).collect();
            if d.is_empty() {
                continue;
            }
            let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
            summary.push(ComparisonSummary {
                t_f,
                scheme: scheme.to_string(),
                n: d.len(),
                median_delta: median(&d),
                median_abs_delta: median(&abs),
                mean_delta: d.iter().sum::<f64>() / d.len() as f64,
            });
        }
    }
    Ok(ComparisonRecord { reference: reference.to_string(), trial_set, rows, summary })
}
