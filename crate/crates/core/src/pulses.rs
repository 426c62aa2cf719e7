//! Control pulse families: Gaussian, boundary-constrained polynomial,
//! piecewise-constant bins and dressed random-Fourier pulses.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Default number of samples for exported pulse shapes.
pub const DEFAULT_EXPORT_POINTS: usize = 512;

/// Gaussian-enveloped sin² pulse `a·exp[−32(t − t_f/2)²/t_f²]·sin²(2πωt/t_f)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianParams<T> {
    pub a: T,
    pub omega: T,
    pub t_f: T,
}

impl<T: Real> GaussianParams<T> {
    pub fn new(a: T, omega: T, t_f: T) -> Self {
        Self { a, omega, t_f }
    }

    #[inline]
    pub fn value(&self, t: T) -> T {
        let x = t - self.t_f * T::lit(0.5);
        let envelope = (-T::lit(32.0) * x * x / (self.t_f * self.t_f)).exp();
        let s = (T::TAU() * t * self.omega / self.t_f).sin();
        self.a * envelope * s * s
    }
}

/// Polynomial pulse with vanishing value, slope and curvature at both ends,
/// passing through `lambdas[k-1]` at `t = k·t_f/(N_λ+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialParams<T> {
    pub lambdas: Vec<T>,
    pub t_f: T,
    /// `coefficients[j]` multiplies `t^j`, `j = 0..=N_λ+5` (the constant term is zero).
    pub coefficients: Vec<T>,
    /// Same polynomial in the scaled variable `τ = t/t_f`.
    tau_coefficients: Vec<T>,
}

impl<T: Real> PolynomialParams<T> {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    #[inline]
    pub fn value(&self, t: T) -> T {
        let tau = t / self.t_f;
        self.tau_coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * tau + c)
    }

    /// Horner evaluation on the unscaled coefficients.
    pub fn value_unscaled(&self, t: T) -> T {
        self.coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
    }
}

/// Solves for the polynomial through the fixed points `lambdas`.
pub fn solve_polynomial<T: Real>(lambdas: &[T], t_f: T) -> Result<PolynomialParams<T>> {
    if lambdas.is_empty() {
        return Err(invalid("polynomial pulse needs at least one fixed point"));
    }
    check_duration(t_f)?;
    let n_lambda = lambdas.len();
    let degree = n_lambda + 5;
    // Unknowns b_1..b_degree in τ; b_0 = 0 from g(0) = 0.
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(degree);
    let mut rhs: Vec<T> = Vec::with_capacity(degree);
    let power_row = |tau: T, deriv: usize| -> Vec<T> {
        (1..=degree)
            .map(|j| {
                if j < deriv {
                    return T::zero();
                }
                let falling = (0..deriv).fold(T::one(), |acc, i| acc * T::from_count(j - i));
                falling * tau.powi((j - deriv) as i32)
            })
            .collect()
    };
    for deriv in 1..=2 {
        rows.push(power_row(T::zero(), deriv));
        rhs.push(T::zero());
    }
    for deriv in 0..=2 {
        rows.push(power_row(T::one(), deriv));
        rhs.push(T::zero());
    }
    for (k, &lambda) in lambdas.iter().enumerate() {
        let tau = T::from_count(k + 1) / T::from_count(n_lambda + 1);
        rows.push(power_row(tau, 0));
        rhs.push(lambda);
    }
    let solution = solve_linear(rows, rhs)?;
    let mut tau_coefficients = Vec::with_capacity(degree + 1);
    tau_coefficients.push(T::zero());
    tau_coefficients.extend(solution);
    let coefficients = tau_coefficients
        .iter()
        .enumerate()
        .map(|(j, &b)| b / t_f.powi(j as i32))
        .collect();
    Ok(PolynomialParams { lambdas: lambdas.to_vec(), t_f, coefficients, tau_coefficients })
}

/// Gaussian elimination with partial pivoting plus one round of iterative refinement.
pub(crate) fn solve_linear<T: Real>(a: Vec<Vec<T>>, b: Vec<T>) -> Result<Vec<T>> {
    let mut x = eliminate(a.clone(), b.clone())?;
    let residual: Vec<T> = a
        .iter()
        .zip(&b)
        .map(|(row, &bi)| bi - row.iter().zip(&x).fold(T::zero(), |acc, (&r, &xi)| acc + r * xi))
        .collect();
    let correction = eliminate(a, residual)?;
    for (xi, ci) in x.iter_mut().zip(correction) {
        *xi = *xi + ci;
    }
    Ok(x)
}

fn eliminate<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs())).max(T::min_positive_value());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty pivot range");
        if a[pivot][col].abs() <= scale * T::epsilon() * T::from_count(n) {
            return Err(Error::Singular);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let delta = factor * a[col][k];
                a[row][k] = a[row][k] - delta;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let tail = ((row + 1)..n).fold(T::zero(), |acc, k| acc + a[row][k] * x[k]);
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// Control held at `bins[j]` on `[j·Δt, (j+1)·Δt)`, `Δt = t_f / bins.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstantPulse<T> {
    pub bins: Vec<T>,
    pub t_f: T,
}

impl<T: Real> PiecewiseConstantPulse<T> {
    pub fn new(bins: Vec<T>, t_f: T) -> Result<Self> {
        if bins.is_empty() {
            return Err(invalid("piecewise-constant pulse needs at least one bin"));
        }
        check_duration(t_f)?;
        Ok(Self { bins, t_f })
    }

    pub fn bin_width(&self) -> T {
        self.t_f / T::from_count(self.bins.len())
    }

    #[inline]
    pub fn value(&self, t: T) -> T {
        let n = self.bins.len();
        let j = (t / self.bin_width()).floor().to_usize().unwrap_or(0).min(n - 1);
        self.bins[j]
    }
}

/// One random Fourier component `c_cos·cos(ωt) + c_sin·sin(ωt)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressingTerm<T> {
    pub c_cos: T,
    pub c_sin: T,
    pub frequency: T,
}

/// A base pulse dressed with layers of random Fourier terms, one layer per
/// dCRAB super-iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedPulse<T> {
    pub base: Box<PulseSpec<T>>,
    pub layers: Vec<Vec<DressingTerm<T>>>,
    /// Multiply the dressing by sin²(πt/t_f) so it vanishes at both ends.
    pub envelope: bool,
    pub t_f: T,
}

impl<T: Real> DressedPulse<T> {
    /// Zero base pulse without dressing.
    pub fn bare(t_f: T, envelope: bool) -> Self {
        Self { base: Box::new(PulseSpec::zero(t_f)), layers: Vec::new(), envelope, t_f }
    }

    /// A copy with one more dressing layer.
    pub fn dressed_with(&self, layer: Vec<DressingTerm<T>>) -> Self {
        let mut next = self.clone();
        next.layers.push(layer);
        next
    }

    pub fn envelope_at(&self, t: T) -> T {
        if self.envelope {
            let s = (T::PI() * t / self.t_f).sin();
            s * s
        } else {
            T::one()
        }
    }

    pub fn dressing_at(&self, t: T) -> T {
        self.layers
            .iter()
            .flatten()
            .fold(T::zero(), |acc, term| {
                let wt = term.frequency * t;
                acc + term.c_cos * wt.cos() + term.c_sin * wt.sin()
            })
    }

    #[inline]
    pub fn value(&self, t: T) -> T {
        let base = self.base.value(t);
        if self.layers.is_empty() {
            return base;
        }
        base + self.envelope_at(t) * self.dressing_at(t)
    }
}

/// Frequencies `(n_i + r_i)·π/t_f` with `n_i ∈ 1..=principal_max` and `r_i ∈ [−½, ½]`.
pub fn make_random_basis<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n_components: usize,
    t_f: T,
    principal_max: usize,
) -> Result<Vec<T>> {
    if n_components == 0 {
        return Err(invalid("random basis needs at least one component"));
    }
    if principal_max == 0 {
        return Err(invalid("principal_max must be at least 1"));
    }
    check_duration(t_f)?;
    Ok((0..n_components)
        .map(|_| {
            let n = rng.gen_range(1..=principal_max);
            let r: f64 = rng.gen_range(-0.5..=0.5);
            T::lit(n as f64 + r) * T::PI() / t_f
        })
        .collect())
}

/// Tagged union over the pulse families.
#[derive(Clone, Debug, PartialEq)]
pub enum PulseSpec<T> {
    Gaussian(GaussianParams<T>),
    Polynomial(PolynomialParams<T>),
    PiecewiseConstant(PiecewiseConstantPulse<T>),
    Dressed(DressedPulse<T>),
}

impl<T: Real> PulseSpec<T> {
    /// Identically zero control over `[0, t_f]`.
    pub fn zero(t_f: T) -> Self {
        PulseSpec::PiecewiseConstant(PiecewiseConstantPulse { bins: vec![T::zero()], t_f })
    }

    pub fn duration(&self) -> T {
        match self {
            PulseSpec::Gaussian(p) => p.t_f,
            PulseSpec::Polynomial(p) => p.t_f,
            PulseSpec::PiecewiseConstant(p) => p.t_f,
            PulseSpec::Dressed(p) => p.t_f,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            PulseSpec::Gaussian(_) => "gaussian",
            PulseSpec::Polynomial(_) => "polynomial",
            PulseSpec::PiecewiseConstant(_) => "piecewise",
            PulseSpec::Dressed(_) => "dressed",
        }
    }

    /// Value without a window check.
    #[inline]
    pub fn value(&self, t: T) -> T {
        match self {
            PulseSpec::Gaussian(p) => p.value(t),
            PulseSpec::Polynomial(p) => p.value(t),
            PulseSpec::PiecewiseConstant(p) => p.value(t),
            PulseSpec::Dressed(p) => p.value(t),
        }
    }

    /// Value at `t`, rejecting times outside `[0, t_f]`.
    pub fn eval(&self, t: T) -> Result<T> {
        let t_f = self.duration();
        if !(t >= T::zero() && t <= t_f) {
            return Err(Error::OutOfWindow { t: t.to_f64_lossy(), t_f: t_f.to_f64_lossy() });
        }
        Ok(self.value(t))
    }

    /// Samples on `n_points` uniformly spaced times including both endpoints.
    pub fn sample_uniform(&self, n_points: usize) -> Vec<(T, T)> {
        let t_f = self.duration();
        match n_points {
            0 => Vec::new(),
            1 => vec![(T::zero(), self.value(T::zero()))],
            _ => (0..n_points)
                .map(|i| {
                    let t = t_f * T::from_count(i) / T::from_count(n_points - 1);
                    (t, self.value(t))
                })
                .collect(),
        }
    }
}

/// Piecewise-constant approximation taking each bin's value at its midpoint.
pub fn sample_to_bins<T: Real>(pulse: &PulseSpec<T>, n_bins: usize) -> Result<PiecewiseConstantPulse<T>> {
    if n_bins == 0 {
        return Err(invalid("n_bins must be at least 1"));
    }
    let t_f = pulse.duration();
    let width = t_f / T::from_count(n_bins);
    let bins = (0..n_bins)
        .map(|j| pulse.value(width * (T::from_count(j) + T::lit(0.5))))
        .collect();
    PiecewiseConstantPulse::new(bins, t_f)
}

fn check_duration<T: Real>(t_f: T) -> Result<()> {
    if t_f > T::zero() && t_f.is_finite() {
        Ok(())
    } else {
        Err(invalid("pulse duration must be positive and finite"))
    }
}

/// Low-dimensional pulse parameterizations searched by the grid and random searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum PulseFamily {
    /// Parameters `[a, ω]`.
    Gaussian,
    /// Parameters `[λ_1, …, λ_n]`.
    Polynomial { n_lambda: usize },
}

impl PulseFamily {
    pub fn dimension(&self) -> usize {
        match self {
            PulseFamily::Gaussian => 2,
            PulseFamily::Polynomial { n_lambda } => *n_lambda,
        }
    }

    pub fn build<T: Real>(&self, params: &[T], t_f: T) -> Result<PulseSpec<T>> {
        if params.len() != self.dimension() {
            return Err(Error::Dimension { expected: self.dimension(), got: params.len() });
        }
        check_duration(t_f)?;
        match self {
            PulseFamily::Gaussian => Ok(PulseSpec::Gaussian(GaussianParams::new(params[0], params[1], t_f))),
            PulseFamily::Polynomial { .. } => Ok(PulseSpec::Polynomial(solve_polynomial(params, t_f)?)),
        }
    }

    /// Axis names used in landscape files.
    pub fn axis_names(&self) -> Vec<String> {
        match self {
            PulseFamily::Gaussian => vec!["a".into(), "omega".into()],
            PulseFamily::Polynomial { n_lambda } => (1..=*n_lambda).map(|k| format!("lambda{k}")).collect(),
        }
    }
}
