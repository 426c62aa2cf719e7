//! dCRAB: successive Nelder–Mead searches over small random Fourier bases,
//! each one dressing the best pulse found so far.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadConfig};
use super::OptimizationResult;
use crate::dynamics::ControlProblem;
use crate::error::{invalid, Result};
use crate::pulses::{make_random_basis, sample_to_bins, DressedPulse, DressingTerm, PulseSpec};
use crate::scalar::Real;
use crate::seeding::rng_for;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DcrabConfig {
    pub super_iterations: usize,
    /// Fourier frequencies per super-iteration (each brings a cos and a sin coefficient).
    pub components: usize,
    pub principal_max: usize,
    pub restarts: usize,
    pub envelope: bool,
    /// Score pulses on this many midpoint-sampled bins, each propagated
    /// exactly; `None` propagates the smooth pulse.
    pub n_bins: Option<usize>,
    /// Stop early once 1 − F drops below this.
    pub cost_threshold: f64,
    pub nelder_mead: NelderMeadConfig,
}

impl Default for DcrabConfig {
    fn default() -> Self {
        Self {
            super_iterations: 8,
            components: 3,
            principal_max: 10,
            restarts: 4,
            envelope: true,
            n_bins: Some(100),
            cost_threshold: 1e-4,
            nelder_mead: NelderMeadConfig::default(),
        }
    }
}

impl DcrabConfig {
    pub fn validate(&self) -> Result<()> {
        if self.super_iterations == 0 || self.components == 0 || self.principal_max == 0 || self.restarts == 0 {
            return Err(invalid("dCRAB counts must all be at least 1"));
        }
        if self.n_bins == Some(0) {
            return Err(invalid("dCRAB n_bins must be at least 1"));
        }
        self.nelder_mead.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary<T> {
    pub seed: u64,
    pub best_fidelity: T,
    /// Best fidelity before the first and after every super-iteration.
    pub fidelity_history: Vec<T>,
    pub evaluations: usize,
    /// Super-iterations whose inner search ran out of budget.
    pub capped_searches: usize,
}

#[derive(Clone, Debug)]
pub struct DcrabRun<T> {
    pub result: OptimizationResult<T>,
    pub pulse: DressedPulse<T>,
    pub restarts: Vec<RestartSummary<T>>,
}

fn score<T: Real>(problem: &ControlProblem<T>, pulse: &DressedPulse<T>, n_bins: Option<usize>) -> Result<T> {
    let spec = PulseSpec::Dressed(pulse.clone());
    match n_bins {
        Some(n) => Ok(problem.bins_fidelity(&sample_to_bins(&spec, n)?.bins)),
        None => problem.fidelity(&spec),
    }
}

fn layer<T: Real>(coeffs: &[T], freqs: &[T]) -> Vec<DressingTerm<T>> {
    freqs
        .iter()
        .enumerate()
        .map(|(i, &frequency)| DressingTerm { c_cos: coeffs[2 * i], c_sin: coeffs[2 * i + 1], frequency })
        .collect()
}

fn restart<T: Real>(
    problem: &ControlProblem<T>,
    config: &DcrabConfig,
    seed: u64,
) -> Result<(DressedPulse<T>, RestartSummary<T>)> {
    let mut rng = rng_for(seed, &[]);
    let mut pulse = DressedPulse::bare(problem.t_f, config.envelope);
    let mut best = score(problem, &pulse, config.n_bins)?;
    let mut summary =
        RestartSummary { seed, best_fidelity: best, fidelity_history: vec![best], evaluations: 1, capped_searches: 0 };
    let target = T::one() - T::lit(config.cost_threshold);
    for _ in 0..config.super_iterations {
        if best > target {
            break;
        }
        let freqs = make_random_basis(&mut rng, config.components, problem.t_f, config.principal_max)?;
        let x0 = vec![T::zero(); 2 * config.components];
        let nm = nelder_mead(
            |c| Ok(T::one() - score(problem, &pulse.dressed_with(layer(c, &freqs)), config.n_bins)?),
            &x0,
            &config.nelder_mead,
        )?;
        summary.evaluations += nm.evaluations;
        if !nm.converged {
            summary.capped_searches += 1;
        }
        let candidate = T::one() - nm.f;
        if candidate >= best {
            pulse = pulse.dressed_with(layer(&nm.x, &freqs));
            best = candidate;
        }
        summary.fidelity_history.push(best);
    }
    summary.best_fidelity = best;
    Ok((pulse, summary))
}

/// Runs `config.restarts` independent dCRAB searches (restart `r` seeded from
/// `(seed, r)`) and keeps the best (first restart on ties).
pub fn dcrab_optimize<T: Real>(problem: &ControlProblem<T>, config: &DcrabConfig, seed: u64) -> Result<DcrabRun<T>> {
    config.validate()?;
    let runs = (0..config.restarts)
        .into_par_iter()
        .map(|r| restart(problem, config, crate::seeding::derive_seed(seed, &[r as u64])))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, (_, s)) in runs.iter().enumerate() {
        if s.best_fidelity > runs[best].1.best_fidelity {
            best = i;
        }
    }
    let restarts: Vec<RestartSummary<T>> = runs.iter().map(|(_, s)| s.clone()).collect();
    let (pulse, top) = runs.into_iter().nth(best).expect("at least one restart");
    let best_params = pulse.layers.iter().flatten().flat_map(|t| [t.c_cos, t.c_sin, t.frequency]).collect();
    let result = OptimizationResult {
        best_params,
        best_fidelity: top.best_fidelity.max(T::zero()).min(T::one()),
        evaluations: restarts.iter().map(|s| s.evaluations).sum(),
        history: top.fidelity_history.iter().map(|f| T::one() - *f).collect(),
        converged: top.capped_searches == 0,
        seed: Some(seed),
    };
    Ok(DcrabRun { result, pulse, restarts })
}
