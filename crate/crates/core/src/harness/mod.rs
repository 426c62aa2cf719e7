//! Reproducible experiment campaigns: coupling draws, multi-trial runs over
//! final times and schemes, fidelity landscapes and scheme comparisons.

mod campaign;
mod compare;
mod landscape;

pub use campaign::{cell_seed, run_campaign, CampaignOptions, CampaignOutput, CellEntry, Manifest, TrialRecord};
pub use compare::{compare_schemes, median, ComparisonRecord, ComparisonRow, ComparisonSummary};
pub use landscape::{landscape_sweep, LandscapeGrid};

use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{ControlProblem, PropagationSettings};
use crate::error::{invalid, Result};
use crate::optimizers::{
    dcrab_optimize, grape_optimize, grid_search, random_search, DcrabConfig, GrapeConfig, OptimizationResult, SearchBox,
};
use crate::pulses::{PulseFamily, PulseSpec};
use crate::seeding::{derive_seed, rng_for};
use crate::spin_model::{Breaker, IndexBase, SpinChainSpec, SubspaceDefinition, DEFAULT_BETA};

/// Coupling draws shared by every scheme of a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub master_seed: u64,
    pub n_spins: usize,
    /// `couplings[r]` belongs to trial `r + 1`.
    pub couplings: Vec<Vec<f64>>,
    pub trial_seeds: Vec<u64>,
    /// SHA-256 over the seed, sizes and coupling bit patterns.
    pub checksum: String,
}

impl TrialSet {
    pub fn n_trials(&self) -> usize {
        self.couplings.len()
    }

    /// Couplings of trial `trial` (1-based).
    pub fn trial(&self, trial: usize) -> Result<&[f64]> {
        trial
            .checked_sub(1)
            .and_then(|r| self.couplings.get(r))
            .map(Vec::as_slice)
            .ok_or_else(|| invalid(format!("trial {trial} outside 1..={}", self.n_trials())))
    }
}

/// Trial `r` (1-based) draws its J_{i,i+1} i.i.d. uniform on [−1, 1] from
/// `ChaCha8(derive_seed(master_seed, [r]))`.
pub fn draw_couplings(master_seed: u64, n_trials: usize, n_spins: usize) -> Result<TrialSet> {
    if n_trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    if n_spins < 2 {
        return Err(invalid("need at least two spins"));
    }
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update((n_trials as u64).to_le_bytes());
    hasher.update((n_spins as u64).to_le_bytes());
    let mut couplings = Vec::with_capacity(n_trials);
    let mut trial_seeds = Vec::with_capacity(n_trials);
    for r in 1..=n_trials as u64 {
        trial_seeds.push(derive_seed(master_seed, &[r]));
        let mut rng = rng_for(master_seed, &[r]);
        let js: Vec<f64> = (0..n_spins).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        for j in &js {
            hasher.update(j.to_bits().to_le_bytes());
        }
        couplings.push(js);
    }
    let checksum = hex(&hasher.finalize());
    Ok(TrialSet { master_seed, n_spins, couplings, trial_seeds, checksum })
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// A pulse-design scheme with its settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    /// Brute-force grid over the Gaussian box a ∈ [−50, 50], ω ∈ [0.02, 4].
    GaussianGrid { resolution: usize },
    /// Brute-force grid over λ_k ∈ [−30, 30].
    PolynomialGrid { n_lambda: usize, resolution: usize },
    /// Uniform random guesses over λ_k ∈ [−30, 30].
    PolynomialRandom { n_lambda: usize, n_guesses: usize },
    Grape(GrapeConfig),
    Dcrab(DcrabConfig),
}

/// Best result of one scheme on one problem.
#[derive(Clone, Debug)]
pub struct SchemeOutcome {
    pub result: OptimizationResult<f64>,
    pub pulse: PulseSpec<f64>,
}

impl Scheme {
    /// Short identifier used in file names and result tables.
    pub fn id(&self) -> String {
        match self {
            Scheme::GaussianGrid { .. } => "gaussian".into(),
            Scheme::PolynomialGrid { n_lambda, .. } => format!("poly{n_lambda}_grid"),
            Scheme::PolynomialRandom { n_lambda, .. } => format!("poly{n_lambda}_random"),
            Scheme::Grape(c) => format!("grape{}", c.n_bins),
            Scheme::Dcrab(c) => match c.n_bins {
                Some(n) => format!("dcrab{n}"),
                None => "dcrab_smooth".into(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scheme::GaussianGrid { resolution } | Scheme::PolynomialGrid { resolution, .. } if *resolution == 0 => {
                Err(invalid("grid resolution must be at least 1"))
            }
            Scheme::PolynomialGrid { n_lambda: 0, .. } | Scheme::PolynomialRandom { n_lambda: 0, .. } => {
                Err(invalid("polynomial schemes need n_lambda >= 1"))
            }
            Scheme::PolynomialRandom { n_guesses: 0, .. } => Err(invalid("random search needs n_guesses >= 1")),
            Scheme::Grape(c) => c.validate(),
            Scheme::Dcrab(c) => c.validate(),
            _ => Ok(()),
        }
    }

    pub fn run(&self, problem: &ControlProblem<f64>, seed: u64) -> Result<SchemeOutcome> {
        self.validate()?;
        let smooth = |family: PulseFamily, result: OptimizationResult<f64>| -> Result<SchemeOutcome> {
            let pulse = family.build(&result.best_params, problem.t_f)?;
            Ok(SchemeOutcome { result, pulse })
        };
        match self {
            Scheme::GaussianGrid { resolution } => {
                let g = grid_search(problem, &PulseFamily::Gaussian, &SearchBox::gaussian(*resolution))?;
                smooth(PulseFamily::Gaussian, g.result)
            }
            Scheme::PolynomialGrid { n_lambda, resolution } => {
                let family = PulseFamily::Polynomial { n_lambda: *n_lambda };
                let g = grid_search(problem, &family, &SearchBox::polynomial(*n_lambda, *resolution))?;
                smooth(family, g.result)
            }
            Scheme::PolynomialRandom { n_lambda, n_guesses } => {
                let family = PulseFamily::Polynomial { n_lambda: *n_lambda };
                let r = random_search(problem, &family, &SearchBox::polynomial(*n_lambda, 1), *n_guesses, seed)?;
                smooth(family, r)
            }
            Scheme::Grape(c) => {
                let run = grape_optimize(problem, c, seed)?;
                Ok(SchemeOutcome { result: run.result, pulse: PulseSpec::PiecewiseConstant(run.pulse) })
            }
            Scheme::Dcrab(c) => {
                let run = dcrab_optimize(problem, c, seed)?;
                Ok(SchemeOutcome { result: run.result, pulse: PulseSpec::Dressed(run.pulse) })
            }
        }
    }
}

fn default_master_seed() -> u64 {
    1
}
fn default_trials() -> usize {
    20
}
fn default_spins() -> usize {
    4
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_tf() -> Vec<f64> {
    vec![0.1, 1.0, 5.0]
}
fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::GaussianGrid { resolution: 101 }]
}

/// Propagation settings for campaign-scale work: coarser first attempt and a
/// 1e-6 fidelity tolerance (ample for landscapes and best-of searches).
pub fn campaign_propagation() -> PropagationSettings {
    PropagationSettings { substeps: 32, convergence_tol: 1e-6, ..PropagationSettings::default() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_spins")]
    pub n_spins: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub breaker: Breaker,
    #[serde(default)]
    pub index_base: IndexBase,
    /// Explicit eigenstate bands; the standard bands when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceDefinition>,
    #[serde(default = "default_tf")]
    pub t_f: Vec<f64>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "campaign_propagation")]
    pub propagation: PropagationSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: default_master_seed(),
            n_trials: default_trials(),
            n_spins: default_spins(),
            beta: default_beta(),
            breaker: Breaker::default(),
            index_base: IndexBase::default(),
            subspace: None,
            t_f: default_tf(),
            schemes: default_schemes(),
            propagation: campaign_propagation(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(invalid("n_trials must be at least 1"));
        }
        if self.n_spins < 2 || self.n_spins > crate::spin_model::MAX_SPINS {
            return Err(invalid(format!("n_spins must be in 2..={}", crate::spin_model::MAX_SPINS)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta must be finite and non-negative"));
        }
        if self.t_f.is_empty() || self.t_f.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(invalid("t_f list must be non-empty with positive finite values"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("at least one scheme is required"));
        }
        let mut ids: Vec<String> = self.schemes.iter().map(Scheme::id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("scheme identifiers must be unique"));
        }
        for s in &self.schemes {
            s.validate()?;
        }
        self.propagation.validate()?;
        self.subspaces()?.positions(1usize << self.n_spins)?;
        Ok(())
    }

    pub fn subspaces(&self) -> Result<SubspaceDefinition> {
        match self.subspace {
            Some(s) => Ok(s),
            None => SubspaceDefinition::standard(self.n_spins, self.index_base),
        }
    }

    pub fn trial_set(&self) -> Result<TrialSet> {
        draw_couplings(self.master_seed, self.n_trials, self.n_spins)
    }

    pub fn chain(&self, couplings: &[f64]) -> SpinChainSpec<f64> {
        SpinChainSpec::new(couplings.to_vec()).with_beta(self.beta).with_breaker(self.breaker)
    }

    /// The transfer problem for one trial of `trials` at final time `t_f`.
    pub fn problem(&self, trials: &TrialSet, trial: usize, t_f: f64) -> Result<ControlProblem<f64>> {
        ControlProblem::from_spec(&self.chain(trials.trial(trial)?), &self.subspaces()?, t_f, self.propagation)
    }

    /// SHA-256 of the JSON echo with `output_dir` cleared.
    pub fn hash(&self) -> String {
        let mut echo = self.clone();
        echo.output_dir = None;
        sha256_hex(&serde_json::to_vec(&echo).expect("config serializes"))
    }
}
