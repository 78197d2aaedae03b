//! Wishart and normal-Wishart priors specified by a mode and a pseudocount.
//!
//! A prior is written as an energy `-α · D_KL(N(m, Σ) ‖ N(μ, P⁻¹))`. With the
//! mean known (`m = μ`) this is, up to a constant, `W(P | (αΣ)⁻¹, α + d + 1)`;
//! with the mean unknown it is `W(P | (αΣ)⁻¹, α + d) · N(μ | m, (αP)⁻¹)`.
//! In both cases the mode is `(m, Σ⁻¹)` and `α` adds to the data count in the
//! posterior. The resulting Wishart shape stays above `d - 1` for every `α > 0`,
//! so `α` can be taken towards zero without leaving the family.
//!
//! Classical `(V, ν)` parameters are derived read-only views; priors are only
//! ever constructed from `(Σ, α)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gaussian::logpdf_precision;
use crate::pdcore::{check_dim, PdMatrix};
use crate::wishart::WishartParams;

fn check_pseudocount(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPseudocount(alpha))
    }
}

/// Prior on the precision `P` of `N(μ, P⁻¹)` with `μ` known.
#[derive(Debug, Clone, PartialEq)]
pub struct KlWishartPrior {
    known_mean: DVector<f64>,
    mode_cov: PdMatrix,
    pseudocount: f64,
}

impl KlWishartPrior {
    pub fn new(known_mean: DVector<f64>, mode_cov: PdMatrix, pseudocount: f64) -> Result<Self> {
        check_dim(mode_cov.dim(), known_mean.len())?;
        check_pseudocount(pseudocount)?;
        Ok(Self { known_mean, mode_cov, pseudocount })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mode_cov.dim()
    }

    #[inline]
    pub fn known_mean(&self) -> &DVector<f64> {
        &self.known_mean
    }

    /// `Σ`, the covariance at the prior mode.
    #[inline]
    pub fn mode_cov(&self) -> &PdMatrix {
        &self.mode_cov
    }

    /// `α`.
    #[inline]
    pub fn pseudocount(&self) -> f64 {
        self.pseudocount
    }

    /// `W(P | (αΣ)⁻¹, α + d + 1)`.
    pub fn to_wishart(&self) -> WishartParams {
        let scatter = self.mode_cov.scaled(self.pseudocount).expect("pseudocount is positive");
        WishartParams::new(scatter, self.pseudocount + self.dim() as f64 + 1.0).expect("shape α + d + 1 exceeds d - 1")
    }

    /// The prior mode `Σ⁻¹`.
    pub fn mode(&self) -> Result<PdMatrix> {
        self.mode_cov.inverse()
    }

    pub fn log_density(&self, precision: &PdMatrix) -> Result<f64> {
        self.to_wishart().log_pdf(precision)
    }
}

/// Joint prior on `(μ, P)` for `N(μ, P⁻¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KlNormalWishartPrior {
    prior_mean: DVector<f64>,
    mode_cov: PdMatrix,
    pseudocount: f64,
}

/// Classical normal-Wishart view: `W(P | S⁻¹, ν) · N(μ | mean, (κP)⁻¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalWishart {
    pub wishart: WishartParams,
    pub mean: DVector<f64>,
    /// `κ`, the factor multiplying `P` in the conditional precision of `μ`.
    pub mean_precision_scale: f64,
}

impl NormalWishart {
    pub fn log_pdf(&self, mu: &DVector<f64>, precision: &PdMatrix) -> Result<f64> {
        let w = self.wishart.log_pdf(precision)?;
        let conditional = precision.scaled(self.mean_precision_scale)?;
        Ok(w + logpdf_precision(mu, &self.mean, &conditional)?)
    }
}

impl KlNormalWishartPrior {
    pub fn new(prior_mean: DVector<f64>, mode_cov: PdMatrix, pseudocount: f64) -> Result<Self> {
        check_dim(mode_cov.dim(), prior_mean.len())?;
        check_pseudocount(pseudocount)?;
        Ok(Self { prior_mean, mode_cov, pseudocount })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mode_cov.dim()
    }

    /// `m`.
    #[inline]
    pub fn prior_mean(&self) -> &DVector<f64> {
        &self.prior_mean
    }

    /// `Σ`.
    #[inline]
    pub fn mode_cov(&self) -> &PdMatrix {
        &self.mode_cov
    }

    /// `α`.
    #[inline]
    pub fn pseudocount(&self) -> f64 {
        self.pseudocount
    }

    /// `W(P | (αΣ)⁻¹, α + d) · N(μ | m, (αP)⁻¹)`.
    pub fn to_normal_wishart(&self) -> NormalWishart {
        let scatter = self.mode_cov.scaled(self.pseudocount).expect("pseudocount is positive");
        let wishart =
            WishartParams::new(scatter, self.pseudocount + self.dim() as f64).expect("shape α + d exceeds d - 1");
        NormalWishart { wishart, mean: self.prior_mean.clone(), mean_precision_scale: self.pseudocount }
    }

    /// The joint mode `(m, Σ⁻¹)`.
    pub fn mode(&self) -> Result<(DVector<f64>, PdMatrix)> {
        Ok((self.prior_mean.clone(), self.mode_cov.inverse()?))
    }

    pub fn log_density(&self, mu: &DVector<f64>, precision: &PdMatrix) -> Result<f64> {
        self.to_normal_wishart().log_pdf(mu, precision)
    }
}
