use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OptimizationResult;
use crate::dynamics::ControlProblem;
use crate::error::{invalid, Error, Result};
use crate::pulses::PulseFamily;
use crate::scalar::Real;
use crate::seeding::rng_for;

/// Axis-aligned parameter box with a grid resolution per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub resolution: Vec<usize>,
}

impl<T: Real> SearchBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>, resolution: Vec<usize>) -> Result<Self> {
        let b = Self { lower, upper, resolution };
        b.validate()?;
        Ok(b)
    }

    /// a ∈ [−50, 50], ω ∈ [0.02, 4].
    pub fn gaussian(resolution: usize) -> Self {
        Self {
            lower: vec![T::lit(-50.0), T::lit(0.02)],
            upper: vec![T::lit(50.0), T::lit(4.0)],
            resolution: vec![resolution; 2],
        }
    }

    /// λ_k ∈ [−30, 30].
    pub fn polynomial(n_lambda: usize, resolution: usize) -> Self {
        Self {
            lower: vec![T::lit(-30.0); n_lambda],
            upper: vec![T::lit(30.0); n_lambda],
            resolution: vec![resolution; n_lambda],
        }
    }

    pub fn for_family(family: &PulseFamily, resolution: usize) -> Self {
        match family {
            PulseFamily::Gaussian => Self::gaussian(resolution),
            PulseFamily::Polynomial { n_lambda } => Self::polynomial(*n_lambda, resolution),
        }
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if d == 0 || self.upper.len() != d || self.resolution.len() != d {
            return Err(invalid("search box needs matching, non-empty bounds and resolutions"));
        }
        for k in 0..d {
            if !(self.lower[k] < self.upper[k]) || !self.lower[k].is_finite() || !self.upper[k].is_finite() {
                return Err(invalid(format!("axis {k}: need finite lower < upper")));
            }
        }
        Ok(())
    }

    /// Grid points of axis `k`, endpoints included; a single point sits at the lower bound.
    pub fn axis_points(&self, k: usize) -> Vec<T> {
        let n = self.resolution[k];
        let (lo, hi) = (self.lower[k], self.upper[k]);
        match n {
            0 => return Vec::new(),
            1 => return vec![lo],
            _ => {}
        }
        let span = hi - lo;
        let last = T::from_count(n - 1);
        (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + span * T::from_count(i) / last })
            .collect()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        (0..self.dims())
            .map(|k| self.lower[k] + (self.upper[k] - self.lower[k]) * T::lit(rng.gen::<f64>()))
            .collect()
    }
}

/// Grid search outcome with the full surface; `values` is row-major with the
/// last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearch<T> {
    pub result: OptimizationResult<T>,
    pub axes: Vec<Vec<T>>,
    pub values: Vec<T>,
    /// Evaluations whose propagation hit the substep cap.
    pub unconverged: usize,
}

fn point_at<T: Copy>(axes: &[Vec<T>], mut linear: usize) -> Vec<T> {
    let mut p = Vec::with_capacity(axes.len());
    for axis in axes.iter().rev() {
        p.push(axis[linear % axis.len()]);
        linear /= axis.len();
    }
    p.reverse();
    p
}

/// First index of the maximum; NaN never wins.
fn argmax<T: Real>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] || (values[best].is_nan() && !v.is_nan()) {
            best = i;
        }
    }
    best
}

/// Evaluates `objective` on every grid point of the box.
pub fn grid_search_with<T, F>(search_box: &SearchBox<T>, objective: F) -> Result<GridSearch<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    search_box.validate()?;
    let axes: Vec<Vec<T>> = (0..search_box.dims()).map(|k| search_box.axis_points(k)).collect();
    let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
    let total = match total {
        Some(0) | None => return Err(invalid("empty or oversized grid")),
        Some(n) => n,
    };
    let values = (0..total)
        .into_par_iter()
        .map(|i| objective(&point_at(&axes, i)))
        .collect::<Result<Vec<T>>>()?;
    let best = argmax(&values);
    let result = OptimizationResult {
        best_params: point_at(&axes, best),
        best_fidelity: values[best],
        evaluations: total,
        history: Vec::new(),
        converged: true,
        seed: None,
    };
    Ok(GridSearch { result, axes, values, unconverged: 0 })
}

/// Brute-force search of a pulse family over the box.
///
/// `result.converged` is false when any propagation hit the substep cap.
pub fn grid_search<T: Real>(
    problem: &ControlProblem<T>,
    family: &PulseFamily,
    search_box: &SearchBox<T>,
) -> Result<GridSearch<T>> {
    if search_box.dims() != family.dimension() {
        return Err(Error::Dimension { expected: family.dimension(), got: search_box.dims() });
    }
    let unconverged = AtomicUsize::new(0);
    let mut out = grid_search_with(search_box, |p| {
        let run = problem.evolve(&family.build(p, problem.t_f)?)?;
        if !run.converged {
            unconverged.fetch_add(1, Ordering::Relaxed);
        }
        Ok(run.fidelity)
    })?;
    out.unconverged = unconverged.into_inner();
    out.result.converged = out.unconverged == 0;
    Ok(out)
}

/// Scores `n_guesses` uniform draws from the box; draws depend only on `seed`.
pub fn random_search_with<T, F>(
    search_box: &SearchBox<T>,
    n_guesses: usize,
    seed: u64,
    objective: F,
) -> Result<OptimizationResult<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    search_box.validate()?;
    if n_guesses == 0 {
        return Err(invalid("random search needs at least one guess"));
    }
    let mut rng = rng_for(seed, &[]);
    let guesses: Vec<Vec<T>> = (0..n_guesses).map(|_| search_box.sample(&mut rng)).collect();
    let values = guesses.par_iter().map(|g| objective(g)).collect::<Result<Vec<T>>>()?;
    let best = argmax(&values);
    Ok(OptimizationResult {
        best_params: guesses[best].clone(),
        best_fidelity: values[best],
        evaluations: n_guesses,
        history: Vec::new(),
        converged: true,
        seed: Some(seed),
    })
}

pub fn random_search<T: Real>(
    problem: &ControlProblem<T>,
    family: &PulseFamily,
    search_box: &SearchBox<T>,
    n_guesses: usize,
    seed: u64,
) -> Result<OptimizationResult<T>> {
    if search_box.dims() != family.dimension() {
        return Err(Error::Dimension { expected: family.dimension(), got: search_box.dims() });
    }
    let unconverged = AtomicUsize::new(0);
    let mut out = random_search_with(search_box, n_guesses, seed, |p| {
        let run = problem.evolve(&family.build(p, problem.t_f)?)?;
        if !run.converged {
            unconverged.fetch_add(1, Ordering::Relaxed);
        }
        Ok(run.fidelity)
    })?;
    out.converged = unconverged.into_inner() == 0;
    Ok(out)
}
