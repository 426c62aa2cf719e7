//! Real symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicit-shift QL iteration (the EISPACK `tred2`/`tql2` pair).

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::operator::Operator;

/// Eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues in ascending order and eigenvectors as columns of a
/// row-major `n x n` buffer (`vecs[row * n + col]`). No sign convention is
/// applied here.
pub(crate) fn symmetric_eigen<T: Real>(op: &Operator<T>) -> Result<(Vec<T>, Vec<T>)> {
    let n = op.dim();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut v = op.as_slice().to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;

    // Ascending order; ties keep the solver's order so the result is deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vecs = vec![T::zero(); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vecs[row * n + new_col] = v[row * n + old_col];
        }
    }
    Ok((values, vecs))
}

fn tred2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let at = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
                v[at(j, i)] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }

            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g = g + v[at(k, j)] * d[k];
                    e[k] = e[k] + v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] = v[at(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    // Accumulate the Householder transformations.
    for i in 0..(n - 1) {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] = v[at(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = T::zero();
    }
    v[at(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) -> Result<()> {
    let at = |r: usize, c: usize| r * n + c;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let two = T::lit(2.0);
    let eps = T::epsilon();
    let max_iter = 30 * n.max(1) + 30;
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] == 0 guarantees m < n.

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v[at(k, i + 1)];
                        v[at(k, i + 1)] = s * v[at(k, i)] + c * hk;
                        v[at(k, i)] = c * v[at(k, i)] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent cyclic Jacobi solver used as an oracle for eigenvalues.
    fn jacobi_eigenvalues(op: &Operator<f64>) -> Vec<f64> {
        let n = op.dim();
        let mut a: Vec<f64> = op.as_slice().to_vec();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j].powi(2))
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    fn pseudo_random_symmetric(n: usize, seed: u64) -> Operator<f64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut op = Operator::zeros(n);
        for i in 0..n {
            for j in i..n {
                let x = next();
                op.set(i, j, x);
                op.set(j, i, x);
            }
        }
        op
    }

    #[test]
    fn matches_jacobi_oracle_and_residuals() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (16, 4), (33, 5)] {
            let op = pseudo_random_symmetric(n, seed);
            let (vals, vecs) = symmetric_eigen(&op).unwrap();
            let oracle = jacobi_eigenvalues(&op);
            for (a, b) in vals.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
            let norm = op.inf_norm();
            for k in 0..n {
                let col: Vec<f64> = (0..n).map(|r| vecs[r * n + k]).collect();
                let hv = op.apply_real(&col);
                let res: f64 = hv.iter().zip(&col).map(|(h, c)| (h - vals[k] * c).powi(2)).sum::<f64>().sqrt();
                assert!(res <= 1e-10 * norm.max(1.0), "residual {res}");
                let nrm: f64 = col.iter().map(|x| x * x).sum();
                assert!((nrm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_input_is_exact() {
        let op = Operator::from_diagonal(&[3.0, -1.0, 2.0, -1.0]);
        let (vals, _) = symmetric_eigen(&op).unwrap();
        assert_eq!(vals, vec![-1.0, -1.0, 2.0, 3.0]);
    }

    #[test]
    fn works_in_single_precision() {
        let op64 = pseudo_random_symmetric(8, 9);
        let op32 = Operator::<f32>::from_fn(8, |i, j| op64.get(i, j) as f32);
        let (v32, _) = symmetric_eigen(&op32).unwrap();
        let (v64, _) = symmetric_eigen(&op64).unwrap();
        for (a, b) in v32.iter().zip(&v64) {
            assert!((*a as f64 - b).abs() < 1e-4);
        }
    }
}
