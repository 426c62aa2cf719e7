use crate::scalar::{Complex, Real};

/// Dense square matrix in the computational z-basis.
///
/// Every term of the transverse Ising Hamiltonian has real matrix elements
/// (σx and σz are real), so operators are stored as real matrices and
/// "Hermitian" reduces to "symmetric".
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> Operator<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.data[i * dim + i] = T::one();
        }
        op
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op.data[i * diag.len() + i] = d;
        }
        op
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Row-major construction; panics when `data.len() != dim * dim`.
    pub fn from_row_major(dim: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), dim * dim, "row-major data has wrong length");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == T::zero()))
    }

    /// Largest entrywise deviation from symmetry, `max |H_ij - H_ji|`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &Self, scale: T) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + scale * b).collect();
        Self { dim: self.dim, data }
    }

    pub fn scaled(&self, scale: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&a| a * scale).collect() }
    }

    /// Maximum absolute row sum (induced ∞-norm), an upper bound on the spectral radius.
    pub fn inf_norm(&self) -> T {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim];
        self.apply_into(v, &mut out);
        out
    }

    pub fn apply_into(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        debug_assert_eq!(v.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let mut acc = Complex::new(T::zero(), T::zero());
            for (&h, x) in row.iter().zip(v) {
                acc = acc + x * h;
            }
            *o = acc;
        }
    }

    pub fn apply_real(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(v).map(|(&h, &x)| h * x).sum()
            })
            .collect()
    }
}
