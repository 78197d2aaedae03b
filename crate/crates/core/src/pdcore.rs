//! Symmetric positive-definite matrices with a cached Cholesky factor.
//!
//! Positive definiteness is decided operationally: a matrix is accepted iff its
//! Cholesky factorization runs to completion with every pivot strictly above
//! `PIVOT_TOLERANCE` times the largest diagonal entry. Inputs are symmetrized
//! as `(A + Aᵀ) / 2` before factoring. The only other way in is from an exact
//! factor produced by a sampler.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot threshold used by every positive-definiteness decision in the crate.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// A symmetric positive-definite matrix with cached lower Cholesky factor and log-determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct PdMatrix {
    entries: DMatrix<f64>,
    factor: DMatrix<f64>,
    logdet: f64,
}

impl PdMatrix {
    /// Symmetrizes and factors `raw`.
    pub fn new(raw: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = raw.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let entries = (&raw + raw.transpose()) * 0.5;
        let factor = cholesky(&entries)?;
        let logdet = 2.0 * factor.diagonal().iter().map(|x| x.ln()).sum::<f64>();
        Ok(Self { entries, factor, logdet })
    }

    /// Builds from row-major nested rows, as found in the JSON interchange format.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        for row in rows {
            if row.len() != d {
                return Err(Error::NotSquare { rows: d, cols: row.len() });
            }
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    /// Assembles `L Lᵀ` from a known lower-triangular factor with a positive, finite diagonal.
    ///
    /// Used where the factor is exact by construction (Bartlett draws); the pivot
    /// threshold is not re-applied.
    pub(crate) fn from_factor(factor: DMatrix<f64>) -> Option<Self> {
        if !factor.is_square() || factor.diagonal().iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return None;
        }
        let factor = factor.lower_triangle();
        let product = &factor * factor.transpose();
        let entries = (&product + product.transpose()) * 0.5;
        let logdet = 2.0 * factor.diagonal().iter().map(|x| x.ln()).sum::<f64>();
        Some(Self { entries, factor, logdet })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is positive definite")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Lower-triangular `L` with `L Lᵀ = A`.
    #[inline]
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// `log|A| = 2 Σ log Lᵢᵢ`.
    #[inline]
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    /// Solves `A X = B` through the cached factor.
    ///
    /// Panics if `B` does not have `dim()` rows.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(rhs.nrows(), self.dim(), "solve: right-hand side has wrong row count");
        let y = self.factor.solve_lower_triangular(rhs).expect("Cholesky factor has a positive diagonal");
        self.factor.tr_solve_lower_triangular(&y).expect("Cholesky factor has a positive diagonal")
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        assert_eq!(rhs.len(), self.dim(), "solve: right-hand side has wrong length");
        let y = self.factor.solve_lower_triangular(rhs).expect("Cholesky factor has a positive diagonal");
        self.factor.tr_solve_lower_triangular(&y).expect("Cholesky factor has a positive diagonal")
    }

    /// `A⁻¹`, re-validated as a positive-definite matrix.
    pub fn inverse(&self) -> Result<PdMatrix> {
        let d = self.dim();
        PdMatrix::new(self.solve(&DMatrix::identity(d, d)))
    }

    /// `c·A` for `c > 0`. The factor is rescaled rather than recomputed.
    pub fn scaled(&self, c: f64) -> Result<PdMatrix> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NotPositiveDefinite { index: 0, pivot: c, threshold: 0.0 });
        }
        Ok(Self {
            entries: &self.entries * c,
            factor: &self.factor * c.sqrt(),
            logdet: self.logdet + self.dim() as f64 * c.ln(),
        })
    }

    /// `tr(A B)` as the elementwise sum `Σᵢⱼ Aᵢⱼ Bᵢⱼ` (both operands symmetric).
    pub fn trace_product(&self, other: &PdMatrix) -> Result<f64> {
        self.trace_product_sym(other.matrix())
    }

    /// `tr(A B)` for a symmetric `B` that need not be positive definite (e.g. a scatter matrix).
    pub fn trace_product_sym(&self, other: &DMatrix<f64>) -> Result<f64> {
        check_dim(self.dim(), other.nrows())?;
        check_dim(self.dim(), other.ncols())?;
        Ok(self.entries.dot(other))
    }

    /// `vᵀ A v = ‖Lᵀ v‖²`, non-negative by construction.
    pub fn quad_form(&self, v: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        Ok((self.factor.transpose() * v).norm_squared())
    }

    /// `vᵀ A⁻¹ v = ‖L⁻¹ v‖²`.
    pub fn inv_quad_form(&self, v: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        let y = self.factor.solve_lower_triangular(v).expect("Cholesky factor has a positive diagonal");
        Ok(y.norm_squared())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.entries)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Cholesky–Banachiewicz with the crate-wide relative pivot threshold.
fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = a.nrows();
    let max_diag = a.diagonal().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = PIVOT_TOLERANCE * max_diag.max(0.0);
    let mut l = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        // `!(x > t)` also rejects NaN.
        if !(pivot > threshold) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot, threshold });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..d {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}
