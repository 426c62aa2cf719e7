//! Random-coupling transverse Ising ring: Hamiltonian terms, static spectrum
//! and the subspace boundary states.
//!
//! Basis convention: site `i` (0-based) is bit `n_spins - 1 - i` of the basis
//! index, bit value 0 is spin up (σz = +1). Index 0 is therefore |↑↑…↑⟩ and
//! site 0 is the most significant bit.

mod boundary;
pub(crate) mod eigen;
mod operator;
mod spectrum;

pub use boundary::{build_boundary_states, BoundaryStates, IndexBase, SubspaceDefinition};
pub use operator::Operator;
pub use spectrum::{
    degeneracy_report, diagonalize, gap_profile, odd_gap_report, DegeneracyReport, OddGapReport,
    SignConvention, Spectrum,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest chain the dense representation accepts.
pub const MAX_SPINS: usize = 14;

/// Default degeneracy-breaking strength.
pub const DEFAULT_BETA: f64 = 1e-3;

/// Which operator multiplies β.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Breaker {
    /// σz on the first site.
    #[default]
    SingleSiteZ,
    /// Σ_i σz_i (total magnetization).
    FullSumZ,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinChainSpec<T> {
    pub n_spins: usize,
    /// `couplings[i]` couples site `i` to site `(i + 1) % n_spins`.
    pub couplings: Vec<T>,
    pub beta: T,
    pub breaker: Breaker,
}

impl<T: Real> SpinChainSpec<T> {
    /// Chain with the default breaker (σz on site 1, β = 0.001).
    pub fn new(couplings: Vec<T>) -> Self {
        Self {
            n_spins: couplings.len(),
            couplings,
            beta: T::lit(DEFAULT_BETA),
            breaker: Breaker::SingleSiteZ,
        }
    }

    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_breaker(mut self, breaker: Breaker) -> Self {
        self.breaker = breaker;
        self
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins < 2 {
            return Err(Error::TooFewSpins(self.n_spins));
        }
        if self.n_spins > MAX_SPINS {
            return Err(Error::Invalid(format!(
                "{} spins exceeds the dense limit of {MAX_SPINS}",
                self.n_spins
            )));
        }
        if self.couplings.len() != self.n_spins {
            return Err(Error::CouplingCount { expected: self.n_spins, got: self.couplings.len() });
        }
        if self.beta < T::zero() || !self.beta.is_finite() {
            return Err(Error::Invalid("beta must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Classical energy −Σ J_i s_i s_{i+1} of a basis configuration.
    pub fn ising_energy(&self, config: usize) -> T {
        let n = self.n_spins;
        (0..n)
            .map(|i| {
                let j = (i + 1) % n;
                -self.couplings[i] * spin_z(config, i, n) * spin_z(config, j, n)
            })
            .fold(T::zero(), |acc, x| acc + x)
    }

    /// Diagonal of the breaker operator H2.
    pub fn breaker_diagonal(&self) -> Vec<T> {
        let n = self.n_spins;
        (0..self.dim())
            .map(|s| match self.breaker {
                Breaker::SingleSiteZ => spin_z(s, 0, n),
                Breaker::FullSumZ => (0..n).map(|i| spin_z::<T>(s, i, n)).fold(T::zero(), |a, x| a + x),
            })
            .collect()
    }

    /// Diagonal of the static Hamiltonian H0 + βH2.
    pub fn static_diagonal(&self) -> Vec<T> {
        self.breaker_diagonal()
            .into_iter()
            .enumerate()
            .map(|(s, b)| self.ising_energy(s) + self.beta * b)
            .collect()
    }
}

/// σz eigenvalue (±1) of `site` in basis state `config`.
#[inline]
pub fn spin_z<T: Real>(config: usize, site: usize, n_spins: usize) -> T {
    if (config >> (n_spins - 1 - site)) & 1 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// The three Hamiltonian terms H0 (couplings), H1 (control, −Σσx) and H2 (breaker).
#[derive(Clone, Debug)]
pub struct ModelTerms<T> {
    pub n_spins: usize,
    pub beta: T,
    pub h0: Operator<T>,
    pub h1: Operator<T>,
    pub h2: Operator<T>,
}

impl<T: Real> ModelTerms<T> {
    /// H0 + βH2.
    pub fn static_hamiltonian(&self) -> Operator<T> {
        self.h0.add_scaled(&self.h2, self.beta)
    }

    /// H0 + βH2 + g·H1 at a fixed control value.
    pub fn snapshot(&self, control: T) -> Operator<T> {
        self.static_hamiltonian().add_scaled(&self.h1, control)
    }
}

pub fn build_terms<T: Real>(spec: &SpinChainSpec<T>) -> Result<ModelTerms<T>> {
    spec.validate()?;
    let n = spec.n_spins;
    let dim = spec.dim();
    let h0_diag: Vec<T> = (0..dim).map(|s| spec.ising_energy(s)).collect();
    let h0 = Operator::from_diagonal(&h0_diag);
    let h2 = Operator::from_diagonal(&spec.breaker_diagonal());
    let mut h1 = Operator::zeros(dim);
    for s in 0..dim {
        for site in 0..n {
            h1.set(s, s ^ (1 << (n - 1 - site)), -T::one());
        }
    }
    Ok(ModelTerms { n_spins: n, beta: spec.beta, h0, h1, h2 })
}
