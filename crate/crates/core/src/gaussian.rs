//! Multivariate Gaussian in covariance form: density, entropy, closed-form KL
//! divergence and expected log-likelihood.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::pdcore::{check_dim, PdMatrix};

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: PdMatrix,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: PdMatrix) -> Result<Self> {
        check_dim(cov.dim(), mean.len())?;
        Ok(Self { mean, cov })
    }

    pub fn standard(dim: usize) -> Self {
        Self { mean: DVector::zeros(dim), cov: PdMatrix::identity(dim) }
    }

    /// `N(mean, precision⁻¹)`; the precision is inverted once.
    pub fn from_precision(mean: DVector<f64>, precision: &PdMatrix) -> Result<Self> {
        Self::new(mean, precision.inverse()?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    #[inline]
    pub fn cov(&self) -> &PdMatrix {
        &self.cov
    }

    pub fn logpdf(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let maha = self.cov.inv_quad_form(&(x - &self.mean))?;
        Ok(-0.5 * (self.dim() as f64 * LN_2PI + self.cov.logdet() + maha))
    }

    pub fn entropy(&self) -> f64 {
        0.5 * (self.dim() as f64 * (1.0 + LN_2PI) + self.cov.logdet())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + self.cov.cholesky_factor() * z
    }
}

/// `D_KL(p ‖ q)` in closed form.
pub fn kl(p: &Gaussian, q: &Gaussian) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    let d = p.dim() as f64;
    let trace = q.cov.solve(p.cov.matrix()).trace();
    let maha = q.cov.inv_quad_form(&(&q.mean - &p.mean))?;
    Ok(0.5 * (trace + maha - d + q.cov.logdet() - p.cov.logdet()))
}

/// `E_{x~p}[log N(x | mu, P⁻¹)]`.
pub fn expected_loglik(p: &Gaussian, mu: &DVector<f64>, precision: &PdMatrix) -> Result<f64> {
    check_dim(p.dim(), mu.len())?;
    check_dim(p.dim(), precision.dim())?;
    let d = p.dim() as f64;
    let trace = precision.trace_product(&p.cov)?;
    let maha = precision.quad_form(&(&p.mean - mu))?;
    Ok(-0.5 * (d * LN_2PI - precision.logdet() + trace + maha))
}

/// `log N(x | mean, precision⁻¹)` evaluated without inverting the precision.
pub fn logpdf_precision(x: &DVector<f64>, mean: &DVector<f64>, precision: &PdMatrix) -> Result<f64> {
    check_dim(precision.dim(), x.len())?;
    check_dim(precision.dim(), mean.len())?;
    let maha = precision.quad_form(&(x - mean))?;
    Ok(-0.5 * (x.len() as f64 * LN_2PI - precision.logdet() + maha))
}
