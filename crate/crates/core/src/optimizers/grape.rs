//! Gradient descent on the transfer cost C = 1 − |⟨ψ_f|U_N…U_1|ψ_i⟩|² over
//! piecewise-constant controls, each bin propagated exactly.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OptimizationResult;
use crate::dynamics::{inner, ControlProblem, Workspace};
use crate::error::{invalid, Result};
use crate::pulses::PiecewiseConstantPulse;
use crate::scalar::{Complex, Real};
use crate::seeding::rng_for;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientScheme {
    /// Exact derivative of each bin propagator.
    #[default]
    Exact,
    /// −2Δt·Im[⟨χ_j|H1|ψ_j⟩⟨ψ_N|ψ_f⟩], accurate to first order in Δt.
    FirstOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrapeConfig {
    pub n_bins: usize,
    pub max_iterations: usize,
    /// Initial step length ε along −∇C.
    pub initial_step: f64,
    /// Step multiplier after a rejected trial.
    pub backtrack: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Step multiplier while expanding an accepted step.
    pub step_growth: f64,
    /// Expansion attempts per iteration.
    pub max_expansions: usize,
    /// Line search gives up below this step length.
    pub min_step: f64,
    pub cost_threshold: f64,
    pub stagnation_tol: f64,
    pub starts: usize,
    /// Initial bins are uniform in [−init_range, init_range].
    pub init_range: f64,
    pub gradient: GradientScheme,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self {
            n_bins: 100,
            max_iterations: 500,
            initial_step: 0.1,
            backtrack: 0.5,
            armijo: 1e-4,
            step_growth: 2.0,
            max_expansions: 60,
            min_step: 1e-12,
            cost_threshold: 1e-4,
            stagnation_tol: 1e-10,
            starts: 5,
            init_range: 5.0,
            gradient: GradientScheme::Exact,
        }
    }
}

impl GrapeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 || self.starts == 0 {
            return Err(invalid("GRAPE needs n_bins >= 1 and starts >= 1"));
        }
        if !(self.initial_step > 0.0) || !(self.min_step > 0.0) {
            return Err(invalid("GRAPE step lengths must be positive"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) || !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(invalid("GRAPE needs backtrack and armijo in (0, 1)"));
        }
        if !(self.step_growth > 1.0) || !(self.init_range >= 0.0) {
            return Err(invalid("GRAPE needs step_growth > 1 and init_range >= 0"));
        }
        Ok(())
    }
}

pub fn grape_cost<T: Real>(problem: &ControlProblem<T>, bins: &[T]) -> T {
    T::one() - problem.bins_fidelity(bins)
}

/// ∂C/∂u_j with the exact per-bin derivative.
pub fn grape_gradient<T: Real>(problem: &ControlProblem<T>, bins: &[T]) -> Vec<T> {
    grape_gradient_with(problem, bins, GradientScheme::Exact)
}

/// One forward pass storing ψ_j, one backward pass carrying
/// χ_j = U_{j+1}†…U_N†ψ_f.
pub fn grape_gradient_with<T: Real>(problem: &ControlProblem<T>, bins: &[T], scheme: GradientScheme) -> Vec<T> {
    let n = bins.len();
    if n == 0 {
        return Vec::new();
    }
    let h = &problem.hamiltonian;
    let dim = problem.dim();
    let dt = problem.t_f / T::from_count(n);
    let mut ws = Workspace::new(dim);

    // states[j] = ψ_j = U_j…U_1 ψ_i
    let mut states = Vec::with_capacity(n + 1);
    let mut psi = problem.boundary.psi_i.clone();
    states.push(psi.clone());
    for &u in bins {
        h.exp_step(u, dt, &mut psi, &mut ws);
        states.push(psi.clone());
    }
    let overlap = inner(&problem.boundary.psi_f, &states[n]);
    let two = T::lit(2.0);

    let mut grad = vec![T::zero(); n];
    let mut chi = problem.boundary.psi_f.clone();
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); dim];
    for j in (0..n).rev() {
        // chi = χ_{j+1} in 1-based bin numbering: paired with states[j + 1].
        grad[j] = match scheme {
            GradientScheme::Exact => {
                let mut fwd = states[j].clone();
                h.exp_step_with_derivative(bins[j], dt, &mut fwd, &mut scratch);
                let d_overlap = inner(&chi, &scratch);
                -two * (overlap.conj() * d_overlap).re
            }
            GradientScheme::FirstOrder => {
                h.apply_control(&states[j + 1], &mut scratch);
                -two * dt * (inner(&chi, &scratch) * overlap.conj()).im
            }
        };
        h.exp_step(bins[j], -dt, &mut chi, &mut ws);
    }
    grad
}

/// One gradient-descent run from `initial`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Descent<T> {
    pub bins: Vec<T>,
    pub cost: T,
    /// Cost after each accepted step, starting with the initial cost.
    pub history: Vec<T>,
    pub iterations: usize,
    pub evaluations: usize,
    /// Reached the cost threshold or stalled (|Δcost| below tolerance).
    pub converged: bool,
}

fn descend<T: Real>(u: &[T], g: &[T], step: T) -> Vec<T> {
    u.iter().zip(g).map(|(x, d)| *x - step * *d).collect()
}

pub fn grape_descend<T: Real>(problem: &ControlProblem<T>, config: &GrapeConfig, initial: Vec<T>) -> Result<Descent<T>> {
    config.validate()?;
    if initial.is_empty() {
        return Err(invalid("GRAPE needs at least one bin"));
    }
    let threshold = T::lit(config.cost_threshold);
    let armijo = T::lit(config.armijo);
    let mut u = initial;
    let mut cost = grape_cost(problem, &u);
    let mut run = Descent { bins: Vec::new(), cost, history: vec![cost], iterations: 0, evaluations: 1, converged: false };
    let mut step = T::lit(config.initial_step);

    while cost >= threshold && run.iterations < config.max_iterations {
        let g = grape_gradient_with(problem, &u, config.gradient);
        run.evaluations += 1;
        let g2: T = g.iter().map(|x| *x * *x).sum();
        if g2 == T::zero() {
            run.converged = true;
            break;
        }
        let sufficient = |c: T, step: T| c <= cost - armijo * step * g2;
        let mut accepted = None;
        loop {
            let c = grape_cost(problem, &descend(&u, &g, step));
            run.evaluations += 1;
            if sufficient(c, step) {
                accepted = Some(c);
                break;
            }
            step = step * T::lit(config.backtrack);
            if step < T::lit(config.min_step) {
                break;
            }
        }
        let Some(mut c) = accepted else { break };
        // Expand while the longer step still passes Armijo and lowers C further.
        for _ in 0..config.max_expansions {
            let longer = step * T::lit(config.step_growth);
            let c_long = grape_cost(problem, &descend(&u, &g, longer));
            run.evaluations += 1;
            if !(sufficient(c_long, longer) && c_long < c) {
                break;
            }
            step = longer;
            c = c_long;
        }
        let delta = cost - c;
        u = descend(&u, &g, step);
        cost = c;
        run.history.push(cost);
        run.iterations += 1;
        if delta < T::lit(config.stagnation_tol) {
            run.converged = true;
            break;
        }
    }
    if cost < threshold {
        run.converged = true;
    }
    run.bins = u;
    run.cost = cost;
    Ok(run)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrapeRun<T> {
    pub result: OptimizationResult<T>,
    pub pulse: PiecewiseConstantPulse<T>,
    /// Every start, in start order.
    pub starts: Vec<Descent<T>>,
}

/// Multi-start descent; start `s` draws its bins from the seed derived from
/// `(seed, s)`. Returns the lowest final cost (first start on ties).
pub fn grape_optimize<T: Real>(problem: &ControlProblem<T>, config: &GrapeConfig, seed: u64) -> Result<GrapeRun<T>> {
    config.validate()?;
    let range = config.init_range;
    let starts = (0..config.starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng_for(seed, &[s as u64]);
            let init: Vec<T> = (0..config.n_bins).map(|_| T::lit(rng.gen_range(-range..=range))).collect();
            grape_descend(problem, config, init)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, s) in starts.iter().enumerate() {
        if s.cost < starts[best].cost {
            best = i;
        }
    }
    let b = &starts[best];
    let result = OptimizationResult {
        best_params: b.bins.clone(),
        best_fidelity: (T::one() - b.cost).max(T::zero()).min(T::one()),
        evaluations: starts.iter().map(|s| s.evaluations).sum(),
        history: b.history.clone(),
        converged: b.converged,
        seed: Some(seed),
    };
    let pulse = PiecewiseConstantPulse::new(b.bins.clone(), problem.t_f)?;
    Ok(GrapeRun { result, pulse, starts })
}
