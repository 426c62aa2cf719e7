//! CSV and manifest formats.
//!
//! Every CSV starts with a tag line `# schema=<name> [key=value ...]`
//! followed by a header row. Numbers are written with 12 significant digits
//! in exponent form (`{:.11e}`) so files diff cleanly across platforms.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{invalid, Result};
use crate::harness::{ComparisonRecord, LandscapeGrid, TrialRecord};
use crate::spin_model::Spectrum;

pub const CAMPAIGN_SCHEMA: &str = "spinxfer.campaign.v1";
pub const LANDSCAPE_SCHEMA: &str = "spinxfer.landscape.v1";
pub const COMPARISON_SCHEMA: &str = "spinxfer.comparison.v1";
pub const COMPARISON_SUMMARY_SCHEMA: &str = "spinxfer.comparison_summary.v1";
pub const SPECTRUM_SCHEMA: &str = "spinxfer.spectrum.v1";
pub const PULSE_SCHEMA: &str = "spinxfer.pulse.v1";
pub const TRAJECTORY_SCHEMA: &str = "spinxfer.trajectory.v1";
pub const HISTORY_SCHEMA: &str = "spinxfer.history.v1";
pub const MANIFEST_SCHEMA: &str = "spinxfer.manifest.v1";

/// 12 significant digits, exponent form; −0 prints as 0.
pub fn fmt_num(x: f64) -> String {
    format!("{:.11e}", x + 0.0)
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| invalid(format!("not a number: {s:?}")))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_num(s).map(Some)
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| invalid(format!("not a count: {s:?}")))
}

fn write_table(
    path: &Path,
    schema: &str,
    meta: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "# schema={schema}")?;
    for (k, v) in meta {
        write!(out, " {k}={v}")?;
    }
    writeln!(out)?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Schema name and key=value annotations of a CSV's tag line.
pub fn read_schema(path: &Path) -> Result<(String, BTreeMap<String, String>)> {
    let mut line = String::new();
    BufReader::new(File::open(path)?).read_line(&mut line)?;
    let rest = line
        .trim_end()
        .strip_prefix("# ")
        .ok_or_else(|| invalid(format!("{} has no schema tag", path.display())))?;
    let mut schema = None;
    let mut meta = BTreeMap::new();
    for part in rest.split(' ') {
        if let Some((k, v)) = part.split_once('=') {
            if k == "schema" {
                schema = Some(v.to_string());
            } else {
                meta.insert(k.to_string(), v.to_string());
            }
        }
    }
    let schema = schema.ok_or_else(|| invalid(format!("{} has no schema tag", path.display())))?;
    Ok((schema, meta))
}

fn read_rows(path: &Path, expected: &str) -> Result<Vec<csv::StringRecord>> {
    let (schema, _) = read_schema(path)?;
    if schema != expected {
        return Err(invalid(format!("{}: schema {schema}, expected {expected}", path.display())));
    }
    let mut r = csv::ReaderBuilder::new().flexible(true).comment(Some(b'#')).from_path(path)?;
    r.records().map(|x| x.map_err(Into::into)).collect()
}

/// `k, E_k, gap_k` with 1-based k and gap_k = E_{k+1} − E_k (empty on the last row).
pub fn write_spectrum(path: &Path, spectrum: &Spectrum<f64>) -> Result<()> {
    let e = &spectrum.eigenvalues;
    let rows = (0..e.len()).map(|k| {
        let gap = e.get(k + 1).map(|next| fmt_num(next - e[k])).unwrap_or_default();
        vec![(k + 1).to_string(), fmt_num(e[k]), gap]
    });
    write_table(path, SPECTRUM_SCHEMA, &[], &["k", "E_k", "gap_k"], rows)
}

/// Pulse samples `t, g`.
pub fn write_pulse(path: &Path, family: &str, samples: &[(f64, f64)]) -> Result<()> {
    let rows = samples.iter().map(|(t, g)| vec![fmt_num(*t), fmt_num(*g)]);
    write_table(path, PULSE_SCHEMA, &[("family", family.to_string())], &["t", "g"], rows)
}

/// `t, F, norm` along a propagation.
pub fn write_trajectory(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let rows = rows.iter().map(|(t, f, n)| vec![fmt_num(*t), fmt_num(*f), fmt_num(*n)]);
    write_table(path, TRAJECTORY_SCHEMA, &[], &["t", "F", "norm"], rows)
}

/// Optimizer cost history `step, cost`.
pub fn write_history(path: &Path, scheme: &str, history: &[f64]) -> Result<()> {
    let rows = history.iter().enumerate().map(|(i, c)| vec![i.to_string(), fmt_num(*c)]);
    write_table(path, HISTORY_SCHEMA, &[("scheme", scheme.to_string())], &["step", "cost"], rows)
}

/// `x, y, F` rows in grid order; axis names, trial and t_f go in the tag line.
pub fn write_landscape(path: &Path, grid: &LandscapeGrid) -> Result<()> {
    let meta = [
        ("trial", grid.trial.to_string()),
        ("scheme", grid.scheme.clone()),
        ("tf", fmt_num(grid.t_f)),
        ("x", grid.axis_names.first().cloned().unwrap_or_default()),
        ("y", grid.axis_names.get(1).cloned().unwrap_or_default()),
        ("nx", grid.x.len().to_string()),
        ("ny", grid.y.len().to_string()),
    ];
    let rows = grid
        .x
        .iter()
        .enumerate()
        .flat_map(|(i, x)| grid.y.iter().enumerate().map(move |(j, y)| (i, j, *x, *y)))
        .map(|(i, j, x, y)| vec![fmt_num(x), fmt_num(y), fmt_num(grid.at(i, j))]);
    write_table(path, LANDSCAPE_SCHEMA, &meta, &["x", "y", "F"], rows)
}

/// Reads `(x, y, F)` triples back.
pub fn read_landscape(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    read_rows(path, LANDSCAPE_SCHEMA)?
        .iter()
        .map(|r| Ok((parse_num(&r[0])?, parse_num(&r[1])?, parse_num(&r[2])?)))
        .collect()
}

const CAMPAIGN_HEADER: [&str; 11] =
    ["trial", "tf", "scheme", "best_F", "n_evals", "wall_s", "converged", "seed", "trial_set", "error", "params"];

/// One row per cell; the best parameters fill the trailing columns.
pub fn write_campaign(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        let mut row = vec![
            r.trial.to_string(),
            fmt_num(r.t_f),
            r.scheme.clone(),
            opt_num(r.best_fidelity),
            r.n_evals.to_string(),
            opt_num(r.wall_s),
            r.converged.to_string(),
            r.seed.to_string(),
            r.trial_set.clone(),
            r.error.clone().unwrap_or_default(),
        ];
        row.extend(r.params.iter().map(|p| fmt_num(*p)));
        row
    });
    write_table(path, CAMPAIGN_SCHEMA, &[], &CAMPAIGN_HEADER, rows)
}

/// Inverse of [`write_campaign`]; `tf_index` follows first-appearance order of t_f.
pub fn read_campaign(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut times: Vec<f64> = Vec::new();
    read_rows(path, CAMPAIGN_SCHEMA)?
        .iter()
        .map(|r| {
            if r.len() < 10 {
                return Err(invalid(format!("campaign row has {} fields", r.len())));
            }
            let t_f = parse_num(&r[1])?;
            let tf_index = times.iter().position(|t| *t == t_f).unwrap_or_else(|| {
                times.push(t_f);
                times.len() - 1
            });
            Ok(TrialRecord {
                trial: parse_usize(&r[0])?,
                tf_index,
                t_f,
                scheme: r[2].to_string(),
                best_fidelity: parse_opt(&r[3])?,
                n_evals: parse_usize(&r[4])?,
                wall_s: parse_opt(&r[5])?,
                converged: &r[6] == "true",
                seed: r[7].parse().map_err(|_| invalid(format!("bad seed {:?}", &r[7])))?,
                trial_set: r[8].to_string(),
                error: (!r[9].is_empty()).then(|| r[9].to_string()),
                params: r.iter().skip(10).map(parse_num).collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Per-trial ΔF rows.
pub fn write_comparison(path: &Path, cmp: &ComparisonRecord) -> Result<()> {
    let meta = [("reference", cmp.reference.clone()), ("trial_set", cmp.trial_set.clone())];
    let rows = cmp.rows.iter().map(|r| {
        vec![r.trial.to_string(), fmt_num(r.t_f), r.scheme.clone(), fmt_num(r.f_ref), fmt_num(r.f_other), fmt_num(r.delta)]
    });
    write_table(path, COMPARISON_SCHEMA, &meta, &["trial", "tf", "scheme", "F_ref", "F_other", "delta_F"], rows)
}

/// Per-(t_f, scheme) medians of ΔF.
pub fn write_comparison_summary(path: &Path, cmp: &ComparisonRecord) -> Result<()> {
    let meta = [("reference", cmp.reference.clone())];
    let rows = cmp.summary.iter().map(|s| {
        vec![
            fmt_num(s.t_f),
            s.scheme.clone(),
            s.n.to_string(),
            fmt_num(s.median_delta),
            fmt_num(s.median_abs_delta),
            fmt_num(s.mean_delta),
        ]
    });
    let header = ["tf", "scheme", "n", "median_delta_F", "median_abs_delta_F", "mean_delta_F"];
    write_table(path, COMPARISON_SUMMARY_SCHEMA, &meta, &header, rows)
}
