use crate::error::Result;
use crate::scalar::{Complex, Real};
use crate::spin_model::{diagonalize, Operator};

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.get(j, i).conj());
            }
        }
        Self { dim: n, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = data[i * n + j] + a * other.get(k, j);
                }
            }
        }
        Self { dim: n, data }
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, x)| acc + a * x)
            })
            .collect()
    }

    /// max |(U†U − I)_ij|.
    pub fn unitarity_defect(&self) -> T {
        let p = self.adjoint().matmul(self);
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((p.get(i, j) - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }
}

/// U = exp(−i·dt·H) through the eigendecomposition of the real symmetric snapshot.
pub fn step_propagator<T: Real>(h: &Operator<T>, dt: T) -> Result<ComplexMatrix<T>> {
    let spectrum = diagonalize(h)?;
    let n = h.dim();
    let phases: Vec<Complex<T>> = spectrum
        .eigenvalues
        .iter()
        .map(|&e| Complex::from_polar(T::one(), -e * dt))
        .collect();
    let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
    for (k, v) in spectrum.eigenvectors.iter().enumerate() {
        let ph = phases[k];
        for i in 0..n {
            let vi = ph * v[i];
            for j in 0..n {
                data[i * n + j] = data[i * n + j] + vi * v[j];
            }
        }
    }
    Ok(ComplexMatrix { dim: n, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_model::{build_terms, SpinChainSpec};

    #[test]
    fn zero_time_is_identity() {
        let h = build_terms(&SpinChainSpec::new(vec![0.2, 0.9, -0.4])).unwrap().snapshot(1.1);
        let u = step_propagator(&h, 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-14);
    }

    #[test]
    fn diagonal_hamiltonian_gives_phases() {
        let diag = [0.5, -1.25, 2.0];
        let u = step_propagator(&Operator::from_diagonal(&diag), 0.7).unwrap();
        for (i, &d) in diag.iter().enumerate() {
            let expected = Complex::from_polar(1.0, -0.7 * d);
            assert!((u.get(i, i) - expected).norm() < 1e-15);
        }
        assert!(u.get(0, 1).norm() == 0.0);
    }

    #[test]
    fn forward_backward_and_unitarity() {
        let h = build_terms(&SpinChainSpec::new(vec![0.2, 0.9, -0.4, 0.6])).unwrap().snapshot(-3.3);
        let u = step_propagator(&h, 0.37).unwrap();
        let v = step_propagator(&h, -0.37).unwrap();
        assert!(u.matmul(&v).max_abs_diff(&ComplexMatrix::identity(16)) < 1e-12);
        assert!(u.unitarity_defect() < 1e-10);
    }
}
