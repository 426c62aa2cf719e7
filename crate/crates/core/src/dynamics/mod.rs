//! Time evolution under H(t) = H0 + g(t)·H1 + β·H2 and the fidelity measures.

mod kernel;
mod unitary;

pub use kernel::{ControlTerm, Hamiltonian, Workspace};
pub use unitary::{step_propagator, ComplexMatrix};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::PulseSpec;
use crate::scalar::{Complex, Real};
use crate::spin_model::{build_boundary_states, diagonalize, BoundaryStates, SpinChainSpec, SubspaceDefinition};

pub type StateVector<T> = Vec<Complex<T>>;

/// How smooth pulses are discretized into exactly-exponentiated substeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMethod {
    /// H frozen at the substep midpoint (second order).
    MidpointPiecewiseConstant,
    /// Two-node Gauss–Legendre Magnus expansion with the commutator term (fourth order).
    #[default]
    Magnus4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationSettings {
    /// Substeps of the first attempt; doubled until the fidelity settles.
    pub substeps: usize,
    pub convergence_tol: f64,
    pub max_substeps: usize,
    pub method: PropagationMethod,
    /// Keep the state at t = 0 and at `s` evenly spaced times up to t_f
    /// (snapped to substep boundaries) from the final attempt.
    pub trajectory_samples: Option<usize>,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        Self {
            substeps: 128,
            convergence_tol: 1e-10,
            max_substeps: 65536,
            method: PropagationMethod::default(),
            trajectory_samples: None,
        }
    }
}

impl PropagationSettings {
    pub fn with_method(mut self, method: PropagationMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.convergence_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.substeps == 0 || self.max_substeps < self.substeps {
            return Err(Error::Invalid("need 0 < substeps <= max_substeps".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Invalid("convergence_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult<T> {
    pub final_state: StateVector<T>,
    pub fidelity: T,
    pub trajectory: Option<Vec<(T, StateVector<T>)>>,
    /// Substeps of the accepted attempt (bins for piecewise-constant pulses).
    pub substeps: usize,
    pub converged: bool,
}

pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|x| x.norm_sqr()).fold(T::zero(), |a, x| a + x).sqrt()
}

/// |⟨target|final⟩|².
pub fn state_fidelity<T: Real>(psi_target: &[Complex<T>], psi_final: &[Complex<T>]) -> T {
    inner(psi_target, psi_final).norm_sqr()
}

/// Evolves `psi0` over the pulse window with a fixed discretization.
///
/// Piecewise-constant pulses take one exact step per bin and ignore
/// `method`/`substeps`.
pub fn evolve_fixed<T: Real>(
    h: &Hamiltonian<T>,
    psi0: &[Complex<T>],
    pulse: &PulseSpec<T>,
    method: PropagationMethod,
    substeps: usize,
) -> StateVector<T> {
    run(h, psi0, pulse, method, substeps, None).0
}

type Trajectory<T> = Vec<(T, StateVector<T>)>;

fn run<T: Real>(
    h: &Hamiltonian<T>,
    psi0: &[Complex<T>],
    pulse: &PulseSpec<T>,
    method: PropagationMethod,
    substeps: usize,
    samples: Option<usize>,
) -> (StateVector<T>, Option<Trajectory<T>>) {
    let mut psi = psi0.to_vec();
    let mut ws = Workspace::new(psi.len());
    let t_f = pulse.duration();

    let (steps, dt) = match pulse {
        PulseSpec::PiecewiseConstant(p) => (p.bins.len(), p.bin_width()),
        _ => (substeps, t_f / T::from_count(substeps)),
    };
    // Record after the steps closest to k·t_f/s, k = 1..=s (plus t = 0).
    let marks: Option<Vec<usize>> = samples.map(|s| {
        let s = s.clamp(1, steps.max(1));
        let mut m: Vec<usize> = (1..=s).map(|k| (k * steps + s / 2) / s).collect();
        m.dedup();
        m
    });
    let mut next_mark = 0;
    let mut traj = marks.as_ref().map(|_| vec![(T::zero(), psi.clone())]);

    let offset = T::lit(3f64.sqrt() / 6.0);
    let half = T::lit(0.5);
    for j in 0..steps {
        let t0 = dt * T::from_count(j);
        match pulse {
            PulseSpec::PiecewiseConstant(p) => h.exp_step(p.bins[j], dt, &mut psi, &mut ws),
            _ => match method {
                PropagationMethod::MidpointPiecewiseConstant => {
                    h.exp_step(pulse.value(t0 + half * dt), dt, &mut psi, &mut ws)
                }
                PropagationMethod::Magnus4 => {
                    let g1 = pulse.value(t0 + (half - offset) * dt);
                    let g2 = pulse.value(t0 + (half + offset) * dt);
                    h.magnus4_step(g1, g2, dt, &mut psi, &mut ws)
                }
            },
        }
        if let (Some(marks), Some(traj)) = (marks.as_ref(), traj.as_mut()) {
            if marks.get(next_mark) == Some(&(j + 1)) {
                traj.push((dt * T::from_count(j + 1), psi.clone()));
                next_mark += 1;
            }
        }
    }
    (psi, traj)
}

/// Evolves until `score(final_state)` changes by less than the tolerance
/// between successive substep doublings.
fn run_converged<T: Real>(
    h: &Hamiltonian<T>,
    psi0: &[Complex<T>],
    pulse: &PulseSpec<T>,
    settings: &PropagationSettings,
    score: impl Fn(&[Complex<T>]) -> T,
) -> Result<EvolutionResult<T>> {
    settings.validate()?;
    if psi0.len() != h.dim() {
        return Err(Error::Dimension { expected: h.dim(), got: psi0.len() });
    }
    let t_f = pulse.duration();
    if !(t_f > T::zero()) {
        return Err(Error::Invalid("final time must be positive".into()));
    }
    if let PulseSpec::PiecewiseConstant(p) = pulse {
        let (state, trajectory) = run(h, psi0, pulse, settings.method, 0, settings.trajectory_samples);
        let fidelity = score(&state);
        return Ok(EvolutionResult { final_state: state, fidelity, trajectory, substeps: p.bins.len(), converged: true });
    }
    let tol = T::lit(settings.convergence_tol);
    let mut m = settings.substeps;
    let (mut state, mut trajectory) = run(h, psi0, pulse, settings.method, m, settings.trajectory_samples);
    let mut fidelity = score(&state);
    loop {
        if m * 2 > settings.max_substeps {
            return Ok(EvolutionResult { final_state: state, fidelity, trajectory, substeps: m, converged: false });
        }
        m *= 2;
        let (next, next_traj) = run(h, psi0, pulse, settings.method, m, settings.trajectory_samples);
        let next_fid = score(&next);
        let settled = (next_fid - fidelity).abs() < tol;
        state = next;
        trajectory = next_traj;
        fidelity = next_fid;
        if settled {
            return Ok(EvolutionResult { final_state: state, fidelity, trajectory, substeps: m, converged: true });
        }
    }
}

/// Propagates `psi0` under the pulse and reports the fidelity with `target`.
pub fn propagate<T: Real>(
    h: &Hamiltonian<T>,
    psi0: &[Complex<T>],
    target: &[Complex<T>],
    pulse: &PulseSpec<T>,
    settings: &PropagationSettings,
) -> Result<EvolutionResult<T>> {
    let n0 = norm(psi0);
    if (n0 - T::one()).abs() > T::lit(1e-10).max(T::epsilon() * T::lit(64.0)) {
        return Err(Error::Invalid(format!("initial state norm {} is not 1", n0)));
    }
    if target.len() != h.dim() {
        return Err(Error::Dimension { expected: h.dim(), got: target.len() });
    }
    run_converged(h, psi0, pulse, settings, |s| state_fidelity(target, s))
}

/// F_S = |⟨ψ_f| P_f U P_i |ψ_i⟩|², with `u_action` applying U to a state.
pub fn subspace_fidelity<T: Real, F>(
    bands: &BoundaryStates<T>,
    psi_i: &[Complex<T>],
    psi_f: &[Complex<T>],
    u_action: F,
) -> Result<T>
where
    F: FnOnce(&[Complex<T>]) -> Result<StateVector<T>>,
{
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
    for a in &bands.initial_basis {
        for b in &bands.target_basis {
            let overlap = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            if overlap.abs() > tol {
                return Err(Error::Subspace("initial and target projectors overlap".into()));
            }
        }
    }
    let projected = bands.project_initial(psi_i);
    let evolved = u_action(&projected)?;
    let landed = bands.project_target(&evolved);
    Ok(state_fidelity(psi_f, &landed))
}

/// A transfer task: the chain, its boundary states, the final time and the
/// propagation settings used to score pulses.
#[derive(Clone, Debug)]
pub struct ControlProblem<T> {
    pub hamiltonian: Hamiltonian<T>,
    pub boundary: BoundaryStates<T>,
    pub t_f: T,
    pub settings: PropagationSettings,
}

impl<T: Real> ControlProblem<T> {
    pub fn from_spec(
        spec: &SpinChainSpec<T>,
        subspaces: &SubspaceDefinition,
        t_f: T,
        settings: PropagationSettings,
    ) -> Result<Self> {
        if !(t_f > T::zero()) {
            return Err(Error::Invalid("final time must be positive".into()));
        }
        let hamiltonian = Hamiltonian::from_spec(spec)?;
        let spectrum = diagonalize(&hamiltonian.snapshot(T::zero()))?;
        let boundary = build_boundary_states(&spectrum, subspaces)?;
        Ok(Self { hamiltonian, boundary, t_f, settings })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn evolve(&self, pulse: &PulseSpec<T>) -> Result<EvolutionResult<T>> {
        propagate(&self.hamiltonian, &self.boundary.psi_i, &self.boundary.psi_f, pulse, &self.settings)
    }

    /// Transfer fidelity F of a pulse.
    pub fn fidelity(&self, pulse: &PulseSpec<T>) -> Result<T> {
        Ok(self.evolve(pulse)?.fidelity)
    }

    /// F_S for a pulse, using the discretization that `evolve` settles on.
    pub fn subspace_fidelity(&self, pulse: &PulseSpec<T>) -> Result<T> {
        let substeps = self.evolve(pulse)?.substeps;
        let b = &self.boundary;
        subspace_fidelity(b, &b.psi_i, &b.psi_f, |v| {
            Ok(evolve_fixed(&self.hamiltonian, v, pulse, self.settings.method, substeps))
        })
    }

    /// Fidelity of piecewise-constant controls spanning `[0, t_f]`.
    pub fn bins_fidelity(&self, bins: &[T]) -> T {
        let mut psi = self.boundary.psi_i.clone();
        let mut ws = Workspace::new(psi.len());
        let dt = self.t_f / T::from_count(bins.len());
        for &u in bins {
            self.hamiltonian.exp_step(u, dt, &mut psi, &mut ws);
        }
        state_fidelity(&self.boundary.psi_f, &psi)
    }
}
