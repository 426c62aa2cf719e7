use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

use super::Spectrum;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexBase {
    /// Ground state is k = 1.
    #[default]
    OneBased,
    /// Ground state is k = 0.
    ZeroBased,
}

/// Inclusive eigenstate-index ranges of the initial and target subspaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceDefinition {
    pub index_base: IndexBase,
    pub initial: (usize, usize),
    pub target: (usize, usize),
}

impl SubspaceDefinition {
    /// The standard bands [2^N·3/16, 2^N·6/16] and [2^N·11/16, 2^N·14/16].
    pub fn standard(n_spins: usize, index_base: IndexBase) -> Result<Self> {
        if n_spins < 4 {
            return Err(Error::Subspace(format!("standard bands need at least 4 spins, got {n_spins}")));
        }
        let unit = (1usize << n_spins) / 16;
        Ok(Self { index_base, initial: (3 * unit, 6 * unit), target: (11 * unit, 14 * unit) })
    }

    fn offset(&self) -> usize {
        match self.index_base {
            IndexBase::OneBased => 1,
            IndexBase::ZeroBased => 0,
        }
    }

    /// Zero-based position ranges `(initial, target)`, validated against `dim`.
    pub fn positions(&self, dim: usize) -> Result<(std::ops::RangeInclusive<usize>, std::ops::RangeInclusive<usize>)> {
        let off = self.offset();
        let convert = |(lo, hi): (usize, usize), name: &str| -> Result<std::ops::RangeInclusive<usize>> {
            if lo > hi {
                return Err(Error::Subspace(format!("{name} range [{lo}, {hi}] is empty")));
            }
            if lo < off || hi - off >= dim {
                return Err(Error::Subspace(format!(
                    "{name} range [{lo}, {hi}] outside [{off}, {}]",
                    dim - 1 + off
                )));
            }
            Ok((lo - off)..=(hi - off))
        };
        let a = convert(self.initial, "initial")?;
        let b = convert(self.target, "target")?;
        if a.start() <= b.end() && b.start() <= a.end() {
            return Err(Error::Subspace("initial and target ranges overlap".into()));
        }
        Ok((a, b))
    }
}

/// Equal-weight superpositions over the two eigenbands plus the bands themselves
/// (which define the projectors P_i and P_f).
#[derive(Clone, Debug)]
pub struct BoundaryStates<T> {
    pub psi_i: Vec<Complex<T>>,
    pub psi_f: Vec<Complex<T>>,
    pub initial_basis: Vec<Vec<T>>,
    pub target_basis: Vec<Vec<T>>,
    pub c_i: T,
    pub c_f: T,
}

impl<T: Real> BoundaryStates<T> {
    pub fn dim(&self) -> usize {
        self.psi_i.len()
    }

    /// P_i v.
    pub fn project_initial(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        project(&self.initial_basis, v)
    }

    /// P_f v.
    pub fn project_target(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        project(&self.target_basis, v)
    }
}

fn project<T: Real>(basis: &[Vec<T>], v: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); v.len()];
    for phi in basis {
        let amp = phi.iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (&p, x)| acc + x * p);
        for (o, &p) in out.iter_mut().zip(phi) {
            *o = *o + amp * p;
        }
    }
    out
}

pub fn build_boundary_states<T: Real>(spectrum: &Spectrum<T>, subs: &SubspaceDefinition) -> Result<BoundaryStates<T>> {
    let dim = spectrum.dim();
    let (init, target) = subs.positions(dim)?;
    let band = |r: std::ops::RangeInclusive<usize>| -> Vec<Vec<T>> {
        r.map(|k| spectrum.eigenvectors[k].clone()).collect()
    };
    let initial_basis = band(init);
    let target_basis = band(target);
    let superpose = |basis: &[Vec<T>]| -> (Vec<Complex<T>>, T) {
        let c = T::one() / T::from_count(basis.len()).sqrt();
        let state = (0..dim)
            .map(|r| Complex::new(c * basis.iter().map(|v| v[r]).fold(T::zero(), |a, x| a + x), T::zero()))
            .collect();
        (state, c)
    };
    let (psi_i, c_i) = superpose(&initial_basis);
    let (psi_f, c_f) = superpose(&target_basis);
    Ok(BoundaryStates { psi_i, psi_f, initial_basis, target_basis, c_i, c_f })
}
