//! Minimal dense linear algebra: Cholesky factorization of symmetric
//! positive-definite systems, sized for ridge-regression design matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float as _;

/// The matrix handed to [`Cholesky::factor`] was not positive definite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotPositiveDefinite;

impl fmt::Display for NotPositiveDefinite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "matrix is not positive definite")
    }
}

impl core::error::Error for NotPositiveDefinite {}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric positive-definite matrix given row-major.
    ///
    /// Only the lower triangle of `a` is read.
    pub fn factor(a: &[f64], dim: usize) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(a.len(), dim * dim, "matrix buffer does not match dimension");
        let mut l = vec![0.0f64; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let dot: f64 = l[i * dim..i * dim + j]
                    .iter()
                    .zip(&l[j * dim..j * dim + j])
                    .map(|(x, y)| x * y)
                    .sum();
                let v = a[i * dim + j] - dot;
                if i == j {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(NotPositiveDefinite);
                    }
                    l[i * dim + i] = v.sqrt();
                } else {
                    l[i * dim + j] = v / l[j * dim + j];
                }
            }
        }
        Ok(Self { dim, l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `L y = b` in place of `out`.
    pub fn solve_lower_into(&self, b: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let dot: f64 = self.l[i * d..i * d + i]
                .iter()
                .zip(&out[..i])
                .map(|(x, y)| x * y)
                .sum();
            out[i] = (b[i] - dot) / self.l[i * d + i];
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut x = vec![0.0f64; d];
        self.solve_lower_into(b, &mut x);
        // Back substitution with Lᵀ.
        for i in (0..d).rev() {
            let mut v = x[i];
            for k in i + 1..d {
                v -= self.l[k * d + i] * x[k];
            }
            x[i] = v / self.l[i * d + i];
        }
        x
    }

    /// Computes `xᵀ A⁻¹ x = ‖L⁻¹x‖²` using `scratch` as the substitution
    /// buffer (`scratch.len() == dim`).
    pub fn quad_form_into(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        self.solve_lower_into(x, scratch);
        scratch.iter().map(|v| v * v).sum()
    }

    /// Computes `xᵀ A⁻¹ x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0f64; self.dim];
        self.quad_form_into(x, &mut scratch)
    }
}
