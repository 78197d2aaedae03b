//! Wishart and normal-Wishart conjugate priors for the multivariate Gaussian,
//! parameterized by a prior mode and a pseudocount.
//!
//! The prior energy is a scaled KL divergence between Gaussians. That gives
//!
//! * [`KlWishartPrior`]: `W(P | (αΣ)⁻¹, α + d + 1)` for a known mean,
//! * [`KlNormalWishartPrior`]: `W(P | (αΣ)⁻¹, α + d) · N(μ | m, (αP)⁻¹)` otherwise,
//!
//! with mode `(m, Σ⁻¹)` and pseudocount `α`. The [`inference`] module performs
//! the conjugate updates and the `α → 0` limit, whose MAP is the maximum-likelihood
//! estimate. [`verify`] checks the underlying identities numerically.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example` lists them.

// `!(x > t)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod inference;
pub mod io;
pub mod klpriors;
pub mod pdcore;
pub mod verify;
pub mod wishart;

pub use error::{Error, Result};
pub use gaussian::{expected_loglik, kl, Gaussian};
pub use inference::{
    map_known_mean, map_unknown, ml_estimate, noninformative_posterior, posterior_known_mean,
    posterior_known_mean_from_stats, posterior_unknown, suff_stats, MeanMode, Posterior, PosteriorKnownMean,
    PosteriorNormalWishart, SufficientStats,
};
pub use klpriors::{KlNormalWishartPrior, KlWishartPrior, NormalWishart};
pub use pdcore::PdMatrix;
pub use verify::CheckReport;
pub use wishart::{validate_shape, InverseWishartParams, WishartParams};
