//! Pulse searches: brute-force grid, random search, GRAPE and dCRAB (with its
//! Nelder–Mead inner loop), plus a central-difference gradient used to check
//! analytic gradients.

mod dcrab;
mod grape;
mod nelder_mead;
mod search;

pub use dcrab::{dcrab_optimize, DcrabConfig, DcrabRun, RestartSummary};
pub use grape::{
    grape_cost, grape_descend, grape_gradient, grape_gradient_with, grape_optimize, Descent, GradientScheme,
    GrapeConfig, GrapeRun,
};
pub use nelder_mead::{nelder_mead, NelderMeadConfig, NelderMeadResult};
pub use search::{grid_search, grid_search_with, random_search, random_search_with, GridSearch, SearchBox};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult<T> {
    pub best_params: Vec<T>,
    pub best_fidelity: T,
    /// Fidelity evaluations; a gradient counts as one.
    pub evaluations: usize,
    /// Cost (1 − F) after each accepted step, starting with the initial point.
    pub history: Vec<T>,
    pub converged: bool,
    pub seed: Option<u64>,
}

/// Central differences (f(x + h·e_k) − f(x − h·e_k)) / 2h for every coordinate.
pub fn finite_difference_gradient<T, F>(mut objective: F, x: &[T], h: T) -> Result<Vec<T>>
where
    T: Real,
    F: FnMut(&[T]) -> T,
{
    if !(h > T::zero()) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let mut probe = x.to_vec();
    let two_h = h + h;
    let mut grad = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        probe[k] = x[k] + h;
        let up = objective(&probe);
        probe[k] = x[k] - h;
        let down = objective(&probe);
        probe[k] = x[k];
        grad.push((up - down) / two_h);
    }
    Ok(grad)
}
