//! Fast application of the chain Hamiltonian and of exponentials of its
//! (anti-Hermitian) generators to state vectors.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};
use crate::spin_model::{ModelTerms, Operator, SpinChainSpec};

/// Control operator multiplying g(t).
#[derive(Clone, Debug)]
pub enum ControlTerm<T> {
    /// −Σ_i σx_i on an `n_spins` chain, applied by bit flips.
    TransverseField { n_spins: usize },
    /// Arbitrary real symmetric operator.
    Dense(Operator<T>),
}

/// H(t) = D + g(t)·B with D diagonal in the computational basis.
#[derive(Clone, Debug)]
pub struct Hamiltonian<T> {
    static_diag: Vec<T>,
    control: ControlTerm<T>,
    static_bound: T,
    control_bound: T,
}

impl<T: Real> Hamiltonian<T> {
    pub fn new(static_diag: Vec<T>, control: ControlTerm<T>) -> Result<Self> {
        let dim = static_diag.len();
        let control_bound = match &control {
            ControlTerm::TransverseField { n_spins } => {
                if 1usize << n_spins != dim {
                    return Err(Error::Dimension { expected: dim, got: 1 << n_spins });
                }
                T::from_count(*n_spins)
            }
            ControlTerm::Dense(op) => {
                if op.dim() != dim {
                    return Err(Error::Dimension { expected: dim, got: op.dim() });
                }
                let defect = op.hermiticity_defect();
                if defect > T::lit(1e-12) * op.max_abs().max(T::one()) {
                    return Err(Error::NotHermitian { defect: defect.to_f64_lossy() });
                }
                op.inf_norm()
            }
        };
        let static_bound = static_diag.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        Ok(Self { static_diag, control, static_bound, control_bound })
    }

    /// H0 + βH2 with the transverse-field control of `spec`.
    pub fn from_spec(spec: &SpinChainSpec<T>) -> Result<Self> {
        spec.validate()?;
        Self::new(spec.static_diagonal(), ControlTerm::TransverseField { n_spins: spec.n_spins })
    }

    /// Built from explicit terms; H0 and H2 must be diagonal.
    pub fn from_terms(terms: &ModelTerms<T>) -> Result<Self> {
        let stat = terms.static_hamiltonian();
        if !stat.is_diagonal() {
            return Err(Error::Invalid("static Hamiltonian must be diagonal".into()));
        }
        Self::new(stat.diagonal(), ControlTerm::Dense(terms.h1.clone()))
    }

    /// Same static part with a different control operator.
    pub fn with_control(&self, control: ControlTerm<T>) -> Result<Self> {
        Self::new(self.static_diag.clone(), control)
    }

    pub fn dim(&self) -> usize {
        self.static_diag.len()
    }

    pub fn static_diagonal(&self) -> &[T] {
        &self.static_diag
    }

    pub fn control(&self) -> &ControlTerm<T> {
        &self.control
    }

    /// Dense snapshot D + g·B.
    pub fn snapshot(&self, g: T) -> Operator<T> {
        let mut op = match &self.control {
            ControlTerm::Dense(b) => b.scaled(g),
            ControlTerm::TransverseField { n_spins } => {
                let n = *n_spins;
                let mut op = Operator::zeros(self.dim());
                for s in 0..self.dim() {
                    for site in 0..n {
                        op.set(s, s ^ (1 << (n - 1 - site)), -g);
                    }
                }
                op
            }
        };
        for (i, &d) in self.static_diag.iter().enumerate() {
            op.set(i, i, op.get(i, i) + d);
        }
        op
    }

    /// out = B v.
    pub fn apply_control(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        match &self.control {
            ControlTerm::Dense(b) => b.apply_into(v, out),
            ControlTerm::TransverseField { n_spins } => {
                let n = *n_spins;
                for (s, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for site in 0..n {
                        acc = acc + v[s ^ (1 << (n - 1 - site))];
                    }
                    *o = -acc;
                }
            }
        }
    }

    /// out = (D + g·B) v.
    pub fn apply(&self, g: T, v: &[Complex<T>], out: &mut [Complex<T>]) {
        self.apply_control(v, out);
        for ((o, x), &d) in out.iter_mut().zip(v).zip(&self.static_diag) {
            *o = *o * g + x * d;
        }
    }

    /// Bound on ‖D + g·B‖.
    pub fn norm_bound(&self, g: T) -> T {
        self.static_bound + g.abs() * self.control_bound
    }
}

/// Largest ‖generator‖ handled by a single Taylor chunk.
const CHUNK_NORM: f64 = 2.0;

/// Scratch buffers reused across exponential applications.
#[derive(Clone, Debug, Default)]
pub struct Workspace<T> {
    term: Vec<Complex<T>>,
    next: Vec<Complex<T>>,
    tmp: Vec<Complex<T>>,
    tmp2: Vec<Complex<T>>,
}

impl<T: Real> Workspace<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![Complex::new(T::zero(), T::zero()); dim];
        Self { term: z.clone(), next: z.clone(), tmp: z.clone(), tmp2: z }
    }

    fn ensure(&mut self, dim: usize) {
        if self.term.len() != dim {
            *self = Self::new(dim);
        }
    }
}

fn inf_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.re.abs().max(x.im.abs())))
}

/// v ← exp(G) v for an anti-Hermitian generator `G` with ‖G‖ ≤ `bound`,
/// by scaling into chunks and summing each Taylor series to machine precision.
///
/// `apply(x, out, tmp)` must write G x into `out` (`tmp` is free scratch).
fn expm_action<T: Real, F>(v: &mut [Complex<T>], bound: T, ws: &mut Workspace<T>, mut apply: F)
where
    F: FnMut(&[Complex<T>], &mut [Complex<T>], &mut [Complex<T>]),
{
    let dim = v.len();
    ws.ensure(dim);
    let chunks = (bound / T::lit(CHUNK_NORM)).ceil().to_usize().unwrap_or(1).max(1);
    let inv_chunks = T::one() / T::from_count(chunks);
    let chunk_bound = bound * inv_chunks;
    let eps = T::epsilon();
    let Workspace { term, next, tmp, .. } = ws;
    for _ in 0..chunks {
        term.copy_from_slice(v);
        let mut k = 0usize;
        loop {
            k += 1;
            apply(term, next, tmp);
            let scale = inv_chunks / T::from_count(k);
            for (t, n) in term.iter_mut().zip(next.iter()) {
                *t = n * scale;
            }
            for (x, t) in v.iter_mut().zip(term.iter()) {
                *x = *x + t;
            }
            let small = inf_norm(term) <= eps * inf_norm(v);
            if (small && T::from_count(k) > chunk_bound) || k > 200 {
                break;
            }
        }
    }
}

impl<T: Real> Hamiltonian<T> {
    /// ψ ← exp(−i·dt·(D + g·B)) ψ.
    pub fn exp_step(&self, g: T, dt: T, psi: &mut [Complex<T>], ws: &mut Workspace<T>) {
        if dt == T::zero() {
            return;
        }
        let bound = self.norm_bound(g) * dt.abs();
        expm_action(psi, bound, ws, |x, out, _| {
            self.apply(g, x, out);
            for o in out.iter_mut() {
                // −i·dt·(Hx)
                *o = Complex::new(o.im * dt, -o.re * dt);
            }
        });
    }

    /// One fourth-order Magnus step from `t` to `t + dt` with control values
    /// `g1`, `g2` at the two Gauss–Legendre nodes.
    pub fn magnus4_step(&self, g1: T, g2: T, dt: T, psi: &mut [Complex<T>], ws: &mut Workspace<T>) {
        let g_mean = (g1 + g2) * T::lit(0.5);
        // Ω = −i·dt·(D + ḡB) + κ[D, B],  κ = (√3/12)·dt²·(g2 − g1)
        let kappa = T::lit(3f64.sqrt() / 12.0) * dt * dt * (g2 - g1);
        let bound = self.norm_bound(g_mean) * dt.abs()
            + kappa.abs() * T::lit(2.0) * self.static_bound * self.control_bound;
        let dim = psi.len();
        ws.ensure(dim);
        let mut scratch = std::mem::take(&mut ws.tmp2);
        expm_action(psi, bound, ws, |x, out, tmp| {
            match &self.control {
                ControlTerm::TransverseField { n_spins } => {
                    let n = *n_spins;
                    let d = &self.static_diag;
                    for (s, o) in out.iter_mut().enumerate() {
                        let mut acc = Complex::new(T::zero(), T::zero());
                        for site in 0..n {
                            let t = s ^ (1 << (n - 1 - site));
                            // B_st = −1: coefficient −(−i·dt·ḡ + κ(d_s − d_t))
                            let c = Complex::new(-kappa * (d[s] - d[t]), dt * g_mean);
                            acc = acc + c * x[t];
                        }
                        *o = acc + Complex::new(x[s].im * dt * d[s], -x[s].re * dt * d[s]);
                    }
                }
                ControlTerm::Dense(_) => {
                    // tmp = B x ; scratch = B (D x)
                    self.apply_control(x, tmp);
                    for ((o, xi), &d) in out.iter_mut().zip(x).zip(&self.static_diag) {
                        *o = xi * d;
                    }
                    self.apply_control(out, &mut scratch);
                    for i in 0..dim {
                        let d = self.static_diag[i];
                        let h = x[i] * d + tmp[i] * g_mean;
                        let comm = tmp[i] * d - scratch[i];
                        out[i] = Complex::new(h.im * dt, -h.re * dt) + comm * kappa;
                    }
                }
            }
        });
        ws.tmp2 = scratch;
    }

    /// Applies exp(−i·dt·(D + u·B)) to ψ and, in the same pass, writes the
    /// exact derivative (∂/∂u) exp(−i·dt·(D + u·B)) ψ into `d_psi`.
    ///
    /// Uses exp of the block-triangular generator [[M, −i·dt·B], [0, M]],
    /// whose upper-right block is the derivative of exp(M).
    pub fn exp_step_with_derivative(
        &self,
        u: T,
        dt: T,
        psi: &mut [Complex<T>],
        d_psi: &mut [Complex<T>],
    ) {
        let dim = psi.len();
        let mut stacked: Vec<Complex<T>> = Vec::with_capacity(2 * dim);
        stacked.resize(dim, Complex::new(T::zero(), T::zero()));
        stacked.extend_from_slice(psi);
        let bound = (self.norm_bound(u) + self.control_bound) * dt.abs();
        let mut block_ws = Workspace::new(2 * dim);
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); dim];
        expm_action(&mut stacked, bound, &mut block_ws, |x, out, _| {
            let (x_top, x_bot) = x.split_at(dim);
            let (o_top, o_bot) = out.split_at_mut(dim);
            self.apply(u, x_top, o_top);
            self.apply_control(x_bot, &mut scratch);
            for (o, s) in o_top.iter_mut().zip(&scratch) {
                *o = *o + s;
            }
            self.apply(u, x_bot, o_bot);
            for o in out.iter_mut() {
                *o = Complex::new(o.im * dt, -o.re * dt);
            }
        });
        d_psi.copy_from_slice(&stacked[..dim]);
        psi.copy_from_slice(&stacked[dim..]);
    }
}
