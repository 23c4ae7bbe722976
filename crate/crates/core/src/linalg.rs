//! Dense Cholesky factorizations (real symmetric and complex Hermitian).

use num_complex::Complex;

use crate::Real;

/// Dot product with four interleaved partial sums.
fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let (xc, yc) = (x.chunks_exact(4), y.chunks_exact(4));
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        for k in 0..4 {
            acc[k] = acc[k] + a[k] * b[k];
        }
    }
    let tail = xr.iter().zip(yr).fold(T::zero(), |s, (&a, &b)| s + a * b);
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower-triangular Cholesky factor stored row-major in a full `n×n` buffer.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    lower: Vec<T>,
}

/// Factorization breakdown: the Schur-complement pivot at `index` was `pivot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite<T> {
    pub index: usize,
    pub pivot: T,
}

impl<T: Real> Cholesky<T> {
    /// Factors the symmetric matrix `a` (row-major, only the lower triangle is
    /// read) with `jitter` added to the diagonal.
    pub fn factor(a: &[T], n: usize, jitter: T) -> Result<Self, NotPositiveDefinite<T>> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let (ri, rj) = (i * n, j * n);
                let s = a[ri + j] - dot(&l[ri..ri + j], &l[rj..rj + j]);
                if i == j {
                    let s = s + jitter;
                    if !(s > T::zero()) {
                        return Err(NotPositiveDefinite { index: i, pivot: s });
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(Self { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Computes `L z`.
    pub fn mul_lower(&self, z: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let row = &self.lower[i * n..i * n + i + 1];
                row.iter().zip(z).fold(T::zero(), |acc, (&l, &x)| acc + l * x)
            })
            .collect()
    }

    /// Smallest diagonal entry of the factor, squared.
    pub fn min_pivot(&self) -> T {
        (0..self.n)
            .map(|i| self.lower[i * self.n + i].powi(2))
            .fold(T::infinity(), T::min)
    }
}

/// Solves the Hermitian positive definite system `a x = b`.
///
/// Returns `None` when a pivot is not positive. The second element is the
/// squared ratio of the largest to smallest Cholesky diagonal, a cheap
/// condition estimate.
pub fn solve_hermitian<T: Real>(
    a: &[Complex<T>],
    b: &[Complex<T>],
) -> Option<(Vec<Complex<T>>, T)> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let zero = Complex::new(T::zero(), T::zero());
    let mut l = vec![zero; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                if !(s.re > T::zero()) {
                    return None;
                }
                l[i * n + i] = Complex::new(s.re.sqrt(), T::zero());
            } else {
                l[i * n + j] = s / l[j * n + j].re;
            }
        }
    }
    let mut y = vec![zero; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    let mut x = vec![zero; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[k * n + i].conj() * x[k];
        }
        x[i] = s / l[i * n + i].re;
    }
    let diag = (0..n).map(|i| l[i * n + i].re);
    let (lo, hi) = diag.fold((T::infinity(), T::zero()), |(lo, hi), d| (lo.min(d), hi.max(d)));
    Some((x, (hi / lo).powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reconstructs_spd_matrix() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let c = Cholesky::factor(&a, 3, 0.0).unwrap();
        for col in 0..3 {
            let mut e = [0.0; 3];
            e[col] = 1.0;
            let lz = c.mul_lower(&e);
            // (L Lᵀ)[i][col] = Σ_k L[i][k] L[col][k]
            for i in 0..3 {
                let v: f64 = (0..3).map(|k| c.lower[i * 3 + k] * c.lower[col * 3 + k]).sum();
                assert_relative_eq!(v, a[i * 3 + col], epsilon = 1e-12);
            }
            assert_eq!(lz.len(), 3);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        let err = Cholesky::factor(&a, 2, 0.0).unwrap_err();
        assert_eq!(err.index, 1);
        assert!(err.pivot < 0.0);
    }

    #[test]
    fn hermitian_solve() {
        let c = |re, im| Complex::new(re, im);
        let a = [c(3.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(4.0, 0.0)];
        let x_true = [c(0.5, 2.0), c(-1.0, 0.25)];
        let b: Vec<_> = (0..2).map(|i| a[i * 2] * x_true[0] + a[i * 2 + 1] * x_true[1]).collect();
        let (x, cond) = solve_hermitian(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert_relative_eq!(u.re, v.re, epsilon = 1e-12);
            assert_relative_eq!(u.im, v.im, epsilon = 1e-12);
        }
        assert!(cond >= 1.0);
    }
}
