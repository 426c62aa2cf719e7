use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NelderMeadConfig {
    /// Edge length of the initial simplex along each coordinate.
    pub initial_scale: f64,
    /// Stop once every vertex is within this distance (max norm) of the best one.
    pub xtol: f64,
    /// Stop once the vertex values span less than this.
    pub ftol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { initial_scale: 1.0, xtol: 1e-8, ftol: 1e-8, max_evaluations: 2000 }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_scale > 0.0) || !(self.xtol >= 0.0) || !(self.ftol >= 0.0) || self.max_evaluations == 0 {
            return Err(invalid("Nelder-Mead needs scale > 0, tolerances >= 0 and max_evaluations >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult<T> {
    pub x: Vec<T>,
    pub f: T,
    pub evaluations: usize,
    /// False when the evaluation budget ran out before a tolerance was met.
    pub converged: bool,
}

/// Minimizes `objective` with the standard simplex moves
/// (reflection 1, expansion 2, contraction ½, shrink ½).
pub fn nelder_mead<T, F>(mut objective: F, x0: &[T], config: &NelderMeadConfig) -> Result<NelderMeadResult<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T>,
{
    config.validate()?;
    let n = x0.len();
    if n == 0 {
        return Err(invalid("Nelder-Mead needs at least one coordinate"));
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| -> Result<T> {
        *evals += 1;
        let v = objective(x)?;
        // NaN compares as worse than anything.
        Ok(if v.is_nan() { T::infinity() } else { v })
    };

    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)?));
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] = v[k] + T::lit(config.initial_scale);
        let f = eval(&v, &mut evals)?;
        simplex.push((v, f));
    }

    loop {
        // Stable sort keeps earlier vertices first among equals.
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        let spread = f_worst - f_best;
        let size = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max);
        if spread <= T::lit(config.ftol) || size <= T::lit(config.xtol) {
            return Ok(done(simplex, evals, true));
        }
        if evals >= config.max_evaluations {
            return Ok(done(simplex, evals, false));
        }

        let mut centroid = vec![T::zero(); n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c = *c + *x;
            }
        }
        let inv = T::one() / T::from_count(n);
        centroid.iter_mut().for_each(|c| *c = *c * inv);
        let worst = simplex[n].0.clone();
        let along = |t: T| -> Vec<T> { centroid.iter().zip(&worst).map(|(c, w)| *c + t * (*c - *w)).collect() };

        let xr = along(T::one());
        let fr = eval(&xr, &mut evals)?;
        if fr < f_best {
            let xe = along(two);
            let fe = eval(&xe, &mut evals)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < f_worst {
            let xc = along(half);
            let fc = eval(&xc, &mut evals)?;
            let ok = fc <= fr;
            (xc, fc, ok)
        } else {
            let xc = along(-half);
            let fc = eval(&xc, &mut evals)?;
            let ok = fc < f_worst;
            (xc, fc, ok)
        };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex[1..].iter_mut() {
            let v: Vec<T> = best.iter().zip(&vertex.0).map(|(b, x)| *b + half * (*x - *b)).collect();
            let f = eval(&v, &mut evals)?;
            *vertex = (v, f);
        }
    }
}

fn done<T: Real>(mut simplex: Vec<(Vec<T>, T)>, evaluations: usize, converged: bool) -> NelderMeadResult<T> {
    let (x, f) = simplex.swap_remove(0);
    NelderMeadResult { x, f, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let cfg = NelderMeadConfig { ftol: 1e-14, xtol: 1e-10, ..Default::default() };
        let r = nelder_mead(|x: &[f64]| Ok((x[0] - 3.0).powi(2)), &[0.0], &cfg).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn constant_objective_stops_at_once() {
        let r = nelder_mead(|_: &[f64]| Ok(4.0), &[1.0, 2.0, 3.0], &NelderMeadConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.evaluations, 4);
        assert_eq!(r.x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let cfg = NelderMeadConfig { max_evaluations: 10, ..Default::default() };
        let r = nelder_mead(|x: &[f64]| Ok(x[0].powi(2) + 10.0 * x[1].powi(2)), &[5.0, 5.0], &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.f < 275.0);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| Ok((x[0] - 1.0).powi(2) + (x[0] * x[1]).sin());
        let a = nelder_mead(f, &[0.3, 0.2], &NelderMeadConfig::default()).unwrap();
        let b = nelder_mead(f, &[0.3, 0.2], &NelderMeadConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
