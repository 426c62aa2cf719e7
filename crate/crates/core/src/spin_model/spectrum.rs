use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::eigen::symmetric_eigen;
use super::{build_terms, Operator, SpinChainSpec};

/// Components smaller than this are skipped when fixing eigenvector signs.
pub const SIGN_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignConvention {
    /// The first component with magnitude above [`SIGN_THRESHOLD`] is positive.
    FirstSignificantPositive,
}

/// Ascending eigenvalues with paired, sign-fixed real eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<T>,
    /// `eigenvectors[k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<T>>,
    pub convention: SignConvention,
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Smallest adjacent gap, or `None` for a one-level spectrum.
    pub fn min_gap(&self) -> Option<T> {
        gap_profile(self).into_iter().reduce(T::min)
    }

    /// Re-normalizes every eigenvector's sign; idempotent.
    pub fn apply_sign_convention(&mut self) {
        match self.convention {
            SignConvention::FirstSignificantPositive => self.eigenvectors.iter_mut().for_each(|v| fix_sign(v)),
        }
    }

    pub fn degeneracy_report(&self, tol: T) -> Result<DegeneracyReport<T>> {
        if !(tol > T::zero()) {
            return Err(Error::Invalid("degeneracy tolerance must be positive".into()));
        }
        let gaps = gap_profile(self);
        let pair_count = gaps.iter().filter(|&&g| g < tol).count();
        let min_gap = gaps.iter().copied().reduce(T::min).unwrap_or_else(T::zero);
        Ok(DegeneracyReport { pair_count, min_gap })
    }
}

/// Diagonalizes a real symmetric operator.
pub fn diagonalize<T: Real>(h: &Operator<T>) -> Result<Spectrum<T>> {
    let scale = h.max_abs().max(T::one());
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) * scale;
    let defect = h.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian { defect: defect.to_f64_lossy() });
    }
    let n = h.dim();
    let (eigenvalues, cols) = symmetric_eigen(h)?;
    let eigenvectors = (0..n).map(|k| (0..n).map(|r| cols[r * n + k]).collect()).collect();
    let mut spectrum = Spectrum { eigenvalues, eigenvectors, convention: SignConvention::FirstSignificantPositive };
    spectrum.apply_sign_convention();
    Ok(spectrum)
}

fn fix_sign<T: Real>(v: &mut [T]) {
    if let Some(&lead) = v.iter().find(|x| x.abs() > T::lit(SIGN_THRESHOLD)) {
        if lead < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Adjacent gaps `E_{k+1} - E_k`.
pub fn gap_profile<T: Real>(spectrum: &Spectrum<T>) -> Vec<T> {
    spectrum.eigenvalues.windows(2).map(|w| w[1] - w[0]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegeneracyReport<T> {
    /// Adjacent eigenvalue pairs closer than the tolerance.
    pub pair_count: usize,
    /// Smallest adjacent gap (0 when levels coincide exactly).
    pub min_gap: T,
}

/// Builds the static Hamiltonian H0 + βH2 of `spec`, diagonalizes it and
/// counts near-degenerate adjacent pairs.
pub fn degeneracy_report<T: Real>(spec: &SpinChainSpec<T>, tol: T) -> Result<DegeneracyReport<T>> {
    if !(tol > T::zero()) {
        return Err(Error::Invalid("degeneracy tolerance must be positive".into()));
    }
    let terms = build_terms(spec)?;
    diagonalize(&terms.static_hamiltonian())?.degeneracy_report(tol)
}

/// The gaps between levels k and k+1 for odd 1-based k, compared with β and 2β.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OddGapReport<T> {
    pub odd_gaps: Vec<T>,
    /// All odd gaps agree with each other within the tolerance.
    pub uniform: bool,
    pub matches_beta: bool,
    pub matches_two_beta: bool,
}

pub fn odd_gap_report<T: Real>(spectrum: &Spectrum<T>, beta: T, tol: T) -> OddGapReport<T> {
    let odd_gaps: Vec<T> = gap_profile(spectrum).into_iter().step_by(2).collect();
    let first = odd_gaps.first().copied().unwrap_or_else(T::zero);
    let uniform = odd_gaps.iter().all(|g| (*g - first).abs() <= tol);
    let all_near = |target: T| !odd_gaps.is_empty() && odd_gaps.iter().all(|g| (*g - target).abs() <= tol);
    OddGapReport {
        matches_beta: all_near(beta),
        matches_two_beta: all_near(beta + beta),
        uniform,
        odd_gaps,
    }
}
