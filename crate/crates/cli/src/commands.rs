use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use spinxfer::dynamics::{norm, state_fidelity, ControlProblem};
use spinxfer::harness::{
    cell_seed, compare_schemes, landscape_sweep, run_campaign, CampaignOptions, ExperimentConfig,
    TrialSet,
};
use spinxfer::io;
use spinxfer::optimizers::SearchBox;
use spinxfer::pulses::{PiecewiseConstantPulse, PulseFamily, PulseSpec};
use spinxfer::spin_model::{build_terms, diagonalize, odd_gap_report};

use crate::config::{output_dir, resolve, write_manifest};
use crate::{Common, FamilyArg, PulseArg};

pub enum Status {
    Complete,
    /// Number of failed cells.
    Partial(usize),
}

/// Resolved config, its trial set (long enough to contain `trial`) and the output directory.
fn setup(common: &Common, command: &str, trial: usize) -> Result<(ExperimentConfig, TrialSet, PathBuf)> {
    let mut cfg = resolve(common)?;
    if trial == 0 {
        bail!("--trial is 1-based");
    }
    // A trial's couplings do not depend on how many trials are drawn.
    cfg.n_trials = cfg.n_trials.max(trial);
    let trials = cfg.trial_set()?;
    let dir = output_dir(cfg.output_dir.as_deref(), command, &cfg.hash())?;
    // The manifest sits inside the directory; echoing its path would make
    // otherwise identical runs differ.
    cfg.output_dir = None;
    Ok((cfg, trials, dir))
}

fn single_tf(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.t_f.as_slice() {
        [t] => Ok(*t),
        _ => bail!("this command takes a single final time; pass --tf <value>"),
    }
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ")
}

#[derive(Serialize)]
struct SpectrumSummary {
    trial: usize,
    couplings: Vec<f64>,
    pair_count: usize,
    min_gap: f64,
    odd_gaps_uniform: bool,
    odd_gap: Option<f64>,
}

pub fn spectrum(common: &Common, trial: usize, tol: f64) -> Result<Status> {
    let (cfg, trials, dir) = setup(common, "spectrum", trial)?;
    let couplings = trials.trial(trial)?.to_vec();
    let spec = cfg.chain(&couplings);
    let spectrum = diagonalize(&build_terms(&spec)?.static_hamiltonian())?;
    io::write_spectrum(&dir.join("spectrum.csv"), &spectrum)?;
    let report = spectrum.degeneracy_report(tol)?;
    let odd = odd_gap_report(&spectrum, cfg.beta, tol);

    println!("spins={} trial={trial} breaker={:?} beta={}", cfg.n_spins, cfg.breaker, cfg.beta);
    println!("couplings=[{}]", fmt_list(&couplings));
    println!("pair_count={}", report.pair_count);
    println!("min_gap={:e}", report.min_gap);
    let odd_gap = odd.odd_gaps.first().copied();
    if let Some(g) = odd_gap {
        println!(
            "odd_gap={g:e} uniform={} equals_beta={} equals_2beta={}",
            odd.uniform, odd.matches_beta, odd.matches_two_beta
        );
    }
    println!("wrote {}", dir.join("spectrum.csv").display());

    let summary = SpectrumSummary {
        trial,
        couplings,
        pair_count: report.pair_count,
        min_gap: report.min_gap,
        odd_gaps_uniform: odd.uniform,
        odd_gap,
    };
    write_manifest(&dir, "spectrum", &cfg, &trials, summary, &["spectrum.csv".into()])?;
    Ok(Status::Complete)
}

fn build_pulse(kind: PulseArg, params: &[f64], t_f: f64) -> Result<PulseSpec<f64>> {
    let pulse = match kind {
        PulseArg::Zero => {
            if !params.is_empty() {
                bail!("the zero pulse takes no --params");
            }
            PulseSpec::zero(t_f)
        }
        PulseArg::Gaussian => PulseFamily::Gaussian.build(params, t_f)?,
        PulseArg::Polynomial => {
            if params.is_empty() {
                bail!("the polynomial pulse needs at least one node value in --params");
            }
            PulseFamily::Polynomial { n_lambda: params.len() }.build(params, t_f)?
        }
        PulseArg::Bins => PulseSpec::PiecewiseConstant(PiecewiseConstantPulse::new(params.to_vec(), t_f)?),
    };
    Ok(pulse)
}

#[derive(Serialize)]
struct EvolveSummary {
    trial: usize,
    t_f: f64,
    family: &'static str,
    params: Vec<f64>,
    fidelity: f64,
    subspace_fidelity: f64,
    substeps: usize,
    converged: bool,
}

pub fn evolve(
    common: &Common,
    trial: usize,
    kind: PulseArg,
    params: &[f64],
    samples: usize,
    trajectory: Option<usize>,
) -> Result<Status> {
    let (mut cfg, trials, dir) = setup(common, "evolve", trial)?;
    let t_f = single_tf(&cfg)?;
    if samples < 2 {
        bail!("--samples must be at least 2");
    }
    cfg.propagation.trajectory_samples = trajectory;
    let problem = cfg.problem(&trials, trial, t_f)?;
    let pulse = build_pulse(kind, params, t_f)?;
    let result = problem.evolve(&pulse)?;
    let fs = problem.subspace_fidelity(&pulse)?;

    let mut files = vec!["pulse.csv".to_string()];
    io::write_pulse(&dir.join("pulse.csv"), pulse.family_name(), &pulse.sample_uniform(samples))?;
    if let Some(traj) = &result.trajectory {
        let rows: Vec<(f64, f64, f64)> =
            traj.iter().map(|(t, psi)| (*t, state_fidelity(&problem.boundary.psi_f, psi), norm(psi))).collect();
        io::write_trajectory(&dir.join("trajectory.csv"), &rows)?;
        files.push("trajectory.csv".into());
    }

    println!("F = {:.6}", result.fidelity);
    println!("F_S = {fs:.6}");
    println!("substeps = {} converged = {}", result.substeps, result.converged);
    if !result.converged {
        eprintln!("warning: propagation hit the substep cap before reaching the tolerance");
    }
    let summary = EvolveSummary {
        trial,
        t_f,
        family: pulse.family_name(),
        params: params.to_vec(),
        fidelity: result.fidelity,
        subspace_fidelity: fs,
        substeps: result.substeps,
        converged: result.converged,
    };
    write_manifest(&dir, "evolve", &cfg, &trials, summary, &files)?;
    Ok(Status::Complete)
}

#[derive(Serialize)]
struct SweepSummary {
    t_f: f64,
    file: String,
    best_params: Vec<f64>,
    best_fidelity: f64,
    converged: bool,
}

pub fn sweep(common: &Common, trial: usize, family: FamilyArg, resolution: usize) -> Result<Status> {
    let (cfg, trials, dir) = setup(common, "sweep", trial)?;
    let (family, search_box) = match family {
        FamilyArg::Gaussian => (PulseFamily::Gaussian, SearchBox::gaussian(resolution)),
        FamilyArg::Polynomial => (PulseFamily::Polynomial { n_lambda: 2 }, SearchBox::polynomial(2, resolution)),
    };
    let mut summary = Vec::new();
    for (idx, &t_f) in cfg.t_f.iter().enumerate() {
        let problem: ControlProblem<f64> = cfg.problem(&trials, trial, t_f)?;
        let grid = landscape_sweep(&problem, trial, &family, &search_box)?;
        let file = format!("landscape_f{idx:02}.csv");
        io::write_landscape(&dir.join(&file), &grid)?;
        println!("t_f={t_f} best F={:.6} at [{}] -> {file}", grid.best_fidelity, fmt_list(&grid.best_params));
        if !grid.converged {
            eprintln!("warning: some propagations at t_f={t_f} hit the substep cap");
        }
        summary.push(SweepSummary {
            t_f,
            file,
            best_params: grid.best_params,
            best_fidelity: grid.best_fidelity,
            converged: grid.converged,
        });
    }
    let files: Vec<String> = summary.iter().map(|s| s.file.clone()).collect();
    write_manifest(&dir, "sweep", &cfg, &trials, summary, &files)?;
    Ok(Status::Complete)
}

#[derive(Serialize)]
struct OptimizeSummary {
    t_f: f64,
    scheme: String,
    seed: u64,
    best_fidelity: Option<f64>,
    evaluations: usize,
    converged: bool,
    params: Vec<f64>,
    error: Option<String>,
}

pub fn optimize(common: &Common, trial: usize) -> Result<Status> {
    let (cfg, trials, dir) = setup(common, "optimize", trial)?;
    let mut summary = Vec::new();
    let mut files = Vec::new();
    let mut failures = 0;
    for (idx, &t_f) in cfg.t_f.iter().enumerate() {
        let problem = cfg.problem(&trials, trial, t_f)?;
        for scheme in &cfg.schemes {
            let id = scheme.id();
            let seed = cell_seed(cfg.master_seed, trial, idx, &id);
            let mut row = OptimizeSummary {
                t_f,
                scheme: id.clone(),
                seed,
                best_fidelity: None,
                evaluations: 0,
                converged: false,
                params: Vec::new(),
                error: None,
            };
            match scheme.run(&problem, seed) {
                Ok(outcome) => {
                    let pulse_file = format!("pulse_{id}_f{idx:02}.csv");
                    let history_file = format!("history_{id}_f{idx:02}.csv");
                    io::write_pulse(&dir.join(&pulse_file), outcome.pulse.family_name(), &outcome.pulse.sample_uniform(1001))?;
                    io::write_history(&dir.join(&history_file), &id, &outcome.result.history)?;
                    files.extend([pulse_file, history_file]);
                    let r = outcome.result;
                    println!("t_f={t_f} {id}: F={:.6} evals={} converged={}", r.best_fidelity, r.evaluations, r.converged);
                    row.best_fidelity = Some(r.best_fidelity);
                    row.evaluations = r.evaluations;
                    row.converged = r.converged;
                    row.params = r.best_params;
                }
                Err(e) => {
                    eprintln!("t_f={t_f} {id}: failed: {e}");
                    failures += 1;
                    row.error = Some(e.to_string());
                }
            }
            summary.push(row);
        }
    }
    write_manifest(&dir, "optimize", &cfg, &trials, summary, &files)?;
    Ok(if failures == 0 { Status::Complete } else { Status::Partial(failures) })
}

pub fn campaign(common: &Common, timing: bool) -> Result<Status> {
    let mut cfg = resolve(common)?;
    let dir = output_dir(cfg.output_dir.as_deref(), "campaign", &cfg.hash())?;
    cfg.output_dir = None;
    let out = run_campaign(&cfg, &CampaignOptions { out_dir: Some(dir.clone()), record_wall_time: timing })
        .with_context(|| format!("campaign in {}", dir.display()))?;
    println!(
        "{} cells ({} reused, {} failed) -> {}",
        out.records.len(),
        out.reused,
        out.failures,
        dir.join("campaign.csv").display()
    );
    Ok(if out.failures == 0 { Status::Complete } else { Status::Partial(out.failures) })
}

pub fn compare(input: &Path, reference: &str, out: Option<PathBuf>) -> Result<Status> {
    let csv = if input.is_dir() { input.join("campaign.csv") } else { input.to_path_buf() };
    let records = io::read_campaign(&csv).with_context(|| format!("reading {}", csv.display()))?;
    let cmp = compare_schemes(&records, reference)?;
    let dir = match out {
        Some(d) => d,
        None => csv.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    io::write_comparison(&dir.join("comparison.csv"), &cmp)?;
    io::write_comparison_summary(&dir.join("comparison_summary.csv"), &cmp)?;
    println!("reference={reference}");
    for s in &cmp.summary {
        println!(
            "t_f={} {}: median dF={:.6} median |dF|={:.6} mean dF={:.6} (n={})",
            s.t_f, s.scheme, s.median_delta, s.median_abs_delta, s.mean_delta, s.n
        );
    }
    println!("wrote {}", dir.join("comparison.csv").display());
    Ok(Status::Complete)
}
