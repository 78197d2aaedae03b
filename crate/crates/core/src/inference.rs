//! Conjugate updates, MAP estimates and the non-informative limit.
//!
//! Posteriors stay inside the mode-and-pseudocount family: after `n` points a
//! prior with pseudocount `α` becomes one with pseudocount `α + n`. The
//! non-informative case is never a prior. It is the exact `α = 0` substitution
//! into the posterior formulas, and it only exists once the data alone pin
//! down a positive-definite scatter.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::klpriors::{KlNormalWishartPrior, KlWishartPrior, NormalWishart};
use crate::pdcore::{check_dim, PdMatrix};
use crate::wishart::WishartParams;

/// `(n, x̄, S̃₀)` with `S̃₀ = Σ (xᵢ - x̄)(xᵢ - x̄)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    count: usize,
    sample_mean: DVector<f64>,
    centered_scatter: DMatrix<f64>,
}

impl SufficientStats {
    /// Two passes: the mean first, then the centered scatter.
    pub fn from_data(data: &[DVector<f64>]) -> Result<Self> {
        let first = data.first().ok_or(Error::EmptyData)?;
        let d = first.len();
        for (row, x) in data.iter().enumerate() {
            if x.len() != d {
                return Err(Error::RaggedData { row, expected: d, found: x.len() });
            }
        }
        let n = data.len();
        let mean = data.iter().fold(DVector::zeros(d), |acc, x| acc + x) / n as f64;
        let mut scatter = DMatrix::zeros(d, d);
        for x in data {
            let c = x - &mean;
            scatter.ger(1.0, &c, &c, 1.0);
        }
        Ok(Self { count: n, sample_mean: mean, centered_scatter: symmetrize(scatter) })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let data: Vec<DVector<f64>> = rows.iter().map(|r| DVector::from_column_slice(r)).collect();
        Self::from_data(&data)
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.sample_mean.len()
    }

    #[inline]
    pub fn sample_mean(&self) -> &DVector<f64> {
        &self.sample_mean
    }

    #[inline]
    pub fn centered_scatter(&self) -> &DMatrix<f64> {
        &self.centered_scatter
    }

    /// `Σ (xᵢ - μ)(xᵢ - μ)ᵀ = S̃₀ + n (x̄ - μ)(x̄ - μ)ᵀ`.
    pub fn scatter_about(&self, mu: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), mu.len())?;
        let delta = &self.sample_mean - mu;
        let mut s = self.centered_scatter.clone();
        s.ger(self.count as f64, &delta, &delta, 1.0);
        Ok(symmetrize(s))
    }

    /// Pairwise combination of two batches.
    pub fn merge(&self, other: &SufficientStats) -> Result<SufficientStats> {
        check_dim(self.dim(), other.dim())?;
        let (n1, n2) = (self.count as f64, other.count as f64);
        let n = n1 + n2;
        let delta = &other.sample_mean - &self.sample_mean;
        let mean = &self.sample_mean + &delta * (n2 / n);
        let mut scatter = &self.centered_scatter + &other.centered_scatter;
        scatter.ger(n1 * n2 / n, &delta, &delta, 1.0);
        Ok(Self { count: self.count + other.count, sample_mean: mean, centered_scatter: symmetrize(scatter) })
    }
}

pub fn suff_stats(data: &[DVector<f64>]) -> Result<SufficientStats> {
    SufficientStats::from_data(data)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `scatter / count` as a positive-definite matrix. Every covariance estimate of
/// the form scatter-over-count goes through here, so the `α = 0` MAP and the ML
/// estimate are the same floating-point computation.
fn scatter_over_count(scatter: &PdMatrix, count: f64) -> Result<PdMatrix> {
    PdMatrix::new(scatter.matrix() / count)
        .map_err(|e| Error::DegenerateScatter(format!("scatter / {count} is not positive definite: {e}")))
}

/// `W(P | S̄⁻¹, n + α + d + 1)` for a known mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorKnownMean {
    known_mean: DVector<f64>,
    pseudocount: f64,
    wishart: WishartParams,
}

impl PosteriorKnownMean {
    fn from_scatter(known_mean: DVector<f64>, pseudocount: f64, scatter: DMatrix<f64>) -> Result<Self> {
        let d = known_mean.len() as f64;
        let scatter = PdMatrix::new(scatter)
            .map_err(|e| Error::DegenerateScatter(format!("posterior scatter is not positive definite: {e}")))?;
        let wishart = WishartParams::new(scatter, pseudocount + d + 1.0)?;
        Ok(Self { known_mean, pseudocount, wishart })
    }

    #[inline]
    pub fn wishart(&self) -> &WishartParams {
        &self.wishart
    }

    #[inline]
    pub fn known_mean(&self) -> &DVector<f64> {
        &self.known_mean
    }

    /// `n + α`.
    #[inline]
    pub fn pseudocount(&self) -> f64 {
        self.pseudocount
    }

    /// `S̄ = αΣ + Σ (xᵢ - μ)(xᵢ - μ)ᵀ`.
    #[inline]
    pub fn scatter(&self) -> &PdMatrix {
        self.wishart.scatter()
    }

    /// `P̂⁻¹ = S̄ / (n + α)`, the inverse of the MAP precision. This is not the
    /// mode of the posterior over the covariance; see [`Self::covariance_mode`].
    pub fn map_cov(&self) -> Result<PdMatrix> {
        scatter_over_count(self.scatter(), self.pseudocount)
    }

    /// Mode of the induced inverse-Wishart law on `C = P⁻¹`: `S̄ / (n + α + 2d + 2)`.
    pub fn covariance_mode(&self) -> PdMatrix {
        crate::wishart::InverseWishartParams::new(self.scatter().clone(), self.wishart.shape())
            .expect("shape already validated")
            .mode()
    }

    /// The same law as a prior with mode covariance `S̄ / (n + α)` and pseudocount `n + α`.
    pub fn as_prior(&self) -> Result<KlWishartPrior> {
        KlWishartPrior::new(self.known_mean.clone(), self.map_cov()?, self.pseudocount)
    }

    pub fn log_density(&self, precision: &PdMatrix) -> Result<f64> {
        self.wishart.log_pdf(precision)
    }
}

pub fn posterior_known_mean(prior: &KlWishartPrior, data: &[DVector<f64>]) -> Result<PosteriorKnownMean> {
    let d = prior.dim();
    let mu = prior.known_mean();
    let mut scatter = prior.mode_cov().matrix() * prior.pseudocount();
    for (row, x) in data.iter().enumerate() {
        if x.len() != d {
            return Err(Error::RaggedData { row, expected: d, found: x.len() });
        }
        let c = x - mu;
        scatter.ger(1.0, &c, &c, 1.0);
    }
    PosteriorKnownMean::from_scatter(mu.clone(), prior.pseudocount() + data.len() as f64, scatter)
}

/// Same update as [`posterior_known_mean`], driven by sufficient statistics.
pub fn posterior_known_mean_from_stats(prior: &KlWishartPrior, stats: &SufficientStats) -> Result<PosteriorKnownMean> {
    check_dim(prior.dim(), stats.dim())?;
    let scatter = prior.mode_cov().matrix() * prior.pseudocount() + stats.scatter_about(prior.known_mean())?;
    PosteriorKnownMean::from_scatter(prior.known_mean().clone(), prior.pseudocount() + stats.count() as f64, scatter)
}

/// MAP precision `P̂ = (n + α) S̄⁻¹`.
pub fn map_known_mean(post: &PosteriorKnownMean) -> Result<PdMatrix> {
    post.map_cov()?.inverse()
}

/// Normal-Wishart posterior in mode-and-pseudocount form `(α*, m*, Σ*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorNormalWishart {
    pseudocount_post: f64,
    mean_post: DVector<f64>,
    mode_cov_post: PdMatrix,
}

impl PosteriorNormalWishart {
    /// `α* = α + n`.
    #[inline]
    pub fn pseudocount(&self) -> f64 {
        self.pseudocount_post
    }

    /// `m*`.
    #[inline]
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean_post
    }

    /// `Σ*`.
    #[inline]
    pub fn mode_cov(&self) -> &PdMatrix {
        &self.mode_cov_post
    }

    pub fn as_prior(&self) -> KlNormalWishartPrior {
        KlNormalWishartPrior::new(self.mean_post.clone(), self.mode_cov_post.clone(), self.pseudocount_post)
            .expect("posterior pseudocount is positive")
    }

    /// `W(P | (α*Σ*)⁻¹, α* + d) · N(μ | m*, (α*P)⁻¹)`.
    pub fn to_normal_wishart(&self) -> NormalWishart {
        self.as_prior().to_normal_wishart()
    }

    pub fn log_density(&self, mu: &DVector<f64>, precision: &PdMatrix) -> Result<f64> {
        self.as_prior().log_density(mu, precision)
    }
}

/// `α* = α + n`, `m* = (αm + n x̄)/(α + n)`,
/// `α*Σ* = αΣ + S̃₀ + (nα/(n + α)) (m - x̄)(m - x̄)ᵀ`.
pub fn posterior_unknown(prior: &KlNormalWishartPrior, stats: &SufficientStats) -> Result<PosteriorNormalWishart> {
    check_dim(prior.dim(), stats.dim())?;
    let alpha = prior.pseudocount();
    let n = stats.count() as f64;
    let alpha_post = alpha + n;
    let mean_post = (prior.prior_mean() * alpha + stats.sample_mean() * n) / alpha_post;
    let delta = prior.prior_mean() - stats.sample_mean();
    let mut scaled = prior.mode_cov().matrix() * alpha + stats.centered_scatter();
    scaled.ger(n * alpha / alpha_post, &delta, &delta, 1.0);
    let scaled =
        PdMatrix::new(scaled).map_err(|e| Error::DegenerateScatter(format!("α*Σ* is not positive definite: {e}")))?;
    Ok(PosteriorNormalWishart {
        pseudocount_post: alpha_post,
        mean_post,
        mode_cov_post: scatter_over_count(&scaled, alpha_post)?,
    })
}

/// `(μ̂, P̂⁻¹) = (m*, Σ*)`.
pub fn map_unknown(post: &PosteriorNormalWishart) -> (DVector<f64>, PdMatrix) {
    (post.mean_post.clone(), post.mode_cov_post.clone())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanMode<'a> {
    Known(&'a DVector<f64>),
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Posterior {
    KnownMean(PosteriorKnownMean),
    UnknownMean(PosteriorNormalWishart),
}

impl Posterior {
    /// MAP mean and the inverse of the MAP precision.
    pub fn map(&self) -> Result<(DVector<f64>, PdMatrix)> {
        match self {
            Posterior::KnownMean(p) => Ok((p.known_mean().clone(), p.map_cov()?)),
            Posterior::UnknownMean(p) => Ok(map_unknown(p)),
        }
    }

    pub fn pseudocount(&self) -> f64 {
        match self {
            Posterior::KnownMean(p) => p.pseudocount(),
            Posterior::UnknownMean(p) => p.pseudocount(),
        }
    }
}

fn insufficient(which: &str, needed: usize, stats: &SufficientStats, e: Option<Error>) -> Error {
    let reason = match e {
        Some(e) => format!(": {e}"),
        None => String::new(),
    };
    Error::InsufficientData(format!(
        "{which} needs n >= {needed} and a positive-definite scatter (n = {}, d = {}){reason}",
        stats.count(),
        stats.dim()
    ))
}

/// Rank-checked scatter for the `α = 0` limit: about `μ` when known (n ≥ d),
/// centered otherwise (n ≥ d + 1).
fn limit_scatter(stats: &SufficientStats, which: MeanMode<'_>) -> Result<PdMatrix> {
    let d = stats.dim();
    let (label, needed, raw) = match which {
        MeanMode::Known(mu) => ("known-mean limit", d, stats.scatter_about(mu)?),
        MeanMode::Unknown => ("unknown-mean limit", d + 1, stats.centered_scatter().clone()),
    };
    if stats.count() < needed {
        return Err(insufficient(label, needed, stats, None));
    }
    PdMatrix::new(raw).map_err(|e| insufficient(label, needed, stats, Some(e)))
}

/// The posterior at `α = 0`, obtained by substituting `α = 0` into the update
/// formulas. `sigma_direction` does not enter the result; in debug builds the
/// result is compared against `α = 1e-8` posteriors built from two different
/// mode covariances.
pub fn noninformative_posterior(
    stats: &SufficientStats,
    which: MeanMode<'_>,
    sigma_direction: &PdMatrix,
) -> Result<Posterior> {
    check_dim(stats.dim(), sigma_direction.dim())?;
    let scatter = limit_scatter(stats, which)?;
    let n = stats.count() as f64;
    let post = match which {
        MeanMode::Known(mu) => {
            let wishart = WishartParams::new(scatter, n + stats.dim() as f64 + 1.0)?;
            Posterior::KnownMean(PosteriorKnownMean { known_mean: mu.clone(), pseudocount: n, wishart })
        }
        MeanMode::Unknown => Posterior::UnknownMean(PosteriorNormalWishart {
            pseudocount_post: n,
            mean_post: stats.sample_mean().clone(),
            mode_cov_post: scatter_over_count(&scatter, n)?,
        }),
    };
    #[cfg(debug_assertions)]
    assert_limit_independent_of_direction(stats, which, sigma_direction, &post);
    Ok(post)
}

#[cfg(debug_assertions)]
fn assert_limit_independent_of_direction(
    stats: &SufficientStats,
    which: MeanMode<'_>,
    sigma_direction: &PdMatrix,
    limit: &Posterior,
) {
    let (_, limit_cov) = limit.map().expect("limit posterior has a MAP");
    let d = stats.dim();
    // Rescale both directions to the trace of the limit estimate so the comparison is scale-free.
    let target = limit_cov.matrix().trace();
    let other = if sigma_direction.matrix().is_identity(0.0) {
        PdMatrix::from_diagonal(&(1..=d).map(|i| i as f64).collect::<Vec<_>>()).expect("positive diagonal")
    } else {
        PdMatrix::identity(d)
    };
    let alpha = 1e-8;
    let covs: Vec<DMatrix<f64>> = [sigma_direction, &other]
        .iter()
        .map(|sigma| {
            let sigma = sigma.scaled(target / sigma.matrix().trace()).expect("positive trace");
            let cov = match which {
                MeanMode::Known(mu) => {
                    let prior = KlWishartPrior::new(mu.clone(), sigma, alpha).expect("valid prior");
                    posterior_known_mean_from_stats(&prior, stats).and_then(|p| p.map_cov())
                }
                MeanMode::Unknown => {
                    let prior =
                        KlNormalWishartPrior::new(stats.sample_mean().clone(), sigma, alpha).expect("valid prior");
                    posterior_unknown(&prior, stats).map(|p| p.mode_cov().clone())
                }
            };
            cov.expect("tiny-alpha posterior exists when the limit does").matrix().clone()
        })
        .collect();
    let scale = limit_cov.matrix().norm();
    for cov in &covs {
        let rel = (cov - limit_cov.matrix()).norm() / scale;
        debug_assert!(rel < 1e-6, "non-informative limit depends on the prior direction: {rel:e}");
    }
}

/// Maximum-likelihood `(μ̂, Ĉ)`: `Ĉ = scatter / n` about the known mean, or `(x̄, S̃₀ / n)`.
pub fn ml_estimate(stats: &SufficientStats, known_mu: Option<&DVector<f64>>) -> Result<(DVector<f64>, PdMatrix)> {
    let which = match known_mu {
        Some(mu) => MeanMode::Known(mu),
        None => MeanMode::Unknown,
    };
    let scatter = limit_scatter(stats, which)?;
    let mean = known_mu.cloned().unwrap_or_else(|| stats.sample_mean().clone());
    Ok((mean, scatter_over_count(&scatter, stats.count() as f64)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Gaussian;
    use proptest::{prelude::any, prop_assert, prop_assert_eq, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn rand_pd(d: usize, rng: &mut ChaCha8Rng) -> PdMatrix {
        let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        PdMatrix::new(&b * b.transpose() + DMatrix::identity(d, d) * 0.4).unwrap()
    }

    fn rand_vec(d: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0))
    }

    fn rand_data(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
        let g = Gaussian::new(rand_vec(d, rng), rand_pd(d, rng)).unwrap();
        (0..n).map(|_| g.sample(rng)).collect()
    }

    fn spread(v: &[f64]) -> f64 {
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn suff_stats_examples() {
        let s = suff_stats(&[v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).unwrap();
        assert_eq!(s.count(), 2);
        assert_eq!(s.sample_mean(), &v(&[0.0, 0.0]));
        assert_eq!(s.centered_scatter(), &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));

        let one = suff_stats(&[v(&[3.0, -1.0, 2.0])]).unwrap();
        assert_eq!(one.sample_mean(), &v(&[3.0, -1.0, 2.0]));
        assert_eq!(one.centered_scatter(), &DMatrix::zeros(3, 3));

        assert_eq!(suff_stats(&[]).unwrap_err(), Error::EmptyData);
        assert!(matches!(suff_stats(&[v(&[1.0]), v(&[1.0, 2.0])]), Err(Error::RaggedData { row: 1, .. })));
    }

    #[test]
    fn suff_stats_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = rand_data(3, 20, &mut rng);
        let c = rand_vec(3, &mut rng) * 100.0;
        let shifted: Vec<_> = data.iter().map(|x| x + &c).collect();
        let (a, b) = (suff_stats(&data).unwrap(), suff_stats(&shifted).unwrap());
        assert!((b.sample_mean() - a.sample_mean() - &c).norm() < 1e-12);
        assert!((b.centered_scatter() - a.centered_scatter()).norm() < 1e-10);
    }

    #[test]
    fn merge_equals_concatenation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = rand_data(3, 37, &mut rng);
        let whole = suff_stats(&data).unwrap();
        for split in [1, 10, 36] {
            let merged = suff_stats(&data[..split]).unwrap().merge(&suff_stats(&data[split..]).unwrap()).unwrap();
            assert_eq!(merged.count(), whole.count());
            assert!((merged.sample_mean() - whole.sample_mean()).norm() < 1e-13);
            assert!((merged.centered_scatter() - whole.centered_scatter()).norm() < 1e-11);
        }
    }

    #[test]
    fn known_mean_posterior_example() {
        let prior = KlWishartPrior::new(DVector::zeros(2), PdMatrix::identity(2), 2.0).unwrap();
        let post = posterior_known_mean(&prior, &[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!((post.scatter().matrix() - DMatrix::identity(2, 2) * 3.0).norm() < 1e-15);
        assert_eq!(post.wishart().shape(), 7.0);
        assert_eq!(post.pseudocount(), 4.0);
        assert!((post.map_cov().unwrap().matrix() - DMatrix::identity(2, 2) * 0.75).norm() < 1e-15);
        let p_hat = map_known_mean(&post).unwrap();
        assert!((p_hat.matrix() - DMatrix::identity(2, 2) * (4.0 / 3.0)).norm() < 1e-14);

        let tiny = KlWishartPrior::new(DVector::zeros(2), PdMatrix::identity(2), 1e-12).unwrap();
        let post = posterior_known_mean(&tiny, &[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!((post.map_cov().unwrap().matrix() - DMatrix::identity(2, 2) * 0.5).norm() < 1e-11);
    }

    #[test]
    fn known_mean_empty_data_returns_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let prior = KlWishartPrior::new(rand_vec(3, &mut rng), rand_pd(3, &mut rng), 1.7).unwrap();
        let post = posterior_known_mean(&prior, &[]).unwrap();
        let w = prior.to_wishart();
        assert_eq!(post.wishart().shape(), w.shape());
        assert_eq!(post.pseudocount(), prior.pseudocount());
        assert!((post.scatter().matrix() - w.scatter().matrix()).norm() < 1e-14);
        assert!(posterior_known_mean(&prior, &[v(&[1.0])]).is_err());
    }

    #[test]
    fn known_mean_data_and_stats_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = rand_data(3, 15, &mut rng);
        let prior = KlWishartPrior::new(rand_vec(3, &mut rng), rand_pd(3, &mut rng), 0.8).unwrap();
        let a = posterior_known_mean(&prior, &data).unwrap();
        let b = posterior_known_mean_from_stats(&prior, &suff_stats(&data).unwrap()).unwrap();
        assert_eq!(a.wishart().shape(), b.wishart().shape());
        assert!((a.scatter().matrix() - b.scatter().matrix()).norm() < 1e-11);
    }

    #[test]
    fn known_mean_conjugacy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (d, n) in [(1, 4), (2, 10), (3, 2), (4, 30)] {
            let data = rand_data(d, n, &mut rng);
            let mu = rand_vec(d, &mut rng);
            let prior = KlWishartPrior::new(mu.clone(), rand_pd(d, &mut rng), 0.3 + rng.random::<f64>()).unwrap();
            let post = posterior_known_mean(&prior, &data).unwrap();
            let r: Vec<f64> = (0..100)
                .map(|_| {
                    let p = rand_pd(d, &mut rng);
                    let lik = Gaussian::from_precision(mu.clone(), &p).unwrap();
                    let ll: f64 = data.iter().map(|x| lik.logpdf(x).unwrap()).sum();
                    post.log_density(&p).unwrap() - prior.log_density(&p).unwrap() - ll
                })
                .collect();
            assert!(spread(&r) < 1e-8, "d={d} n={n}: {}", spread(&r));
        }
    }

    #[test]
    fn known_mean_map_equals_wishart_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in 1..=5 {
            let data = rand_data(d, 12, &mut rng);
            let prior = KlWishartPrior::new(rand_vec(d, &mut rng), rand_pd(d, &mut rng), 0.5).unwrap();
            let post = posterior_known_mean(&prior, &data).unwrap();
            let a = map_known_mean(&post).unwrap();
            let b = post.wishart().mode().unwrap();
            assert!((a.matrix() - b.matrix()).norm() / b.matrix().norm() < 1e-12);
        }
    }

    #[test]
    fn map_precision_inverse_differs_from_covariance_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (d, n, alpha) = (3, 9, 0.6);
        let data = rand_data(d, n, &mut rng);
        let prior = KlWishartPrior::new(DVector::zeros(d), rand_pd(d, &mut rng), alpha).unwrap();
        let post = posterior_known_mean(&prior, &data).unwrap();
        let factor = (n as f64 + alpha + 2.0 * d as f64 + 2.0) / (n as f64 + alpha);
        let expected = post.covariance_mode().matrix() * factor;
        let map_inv = post.map_cov().unwrap();
        assert!((map_inv.matrix() - &expected).norm() / expected.norm() < 1e-14);
    }

    #[test]
    fn unknown_mean_posterior_example() {
        let prior = KlNormalWishartPrior::new(DVector::zeros(2), PdMatrix::identity(2), 1.0).unwrap();
        let post = posterior_unknown(&prior, &suff_stats(&[v(&[2.0, 0.0])]).unwrap()).unwrap();
        assert_eq!(post.pseudocount(), 2.0);
        assert_eq!(post.mean(), &v(&[1.0, 0.0]));
        let expected = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.5]);
        assert!((post.mode_cov().matrix() - &expected).norm() < 1e-15);
        let (mu_hat, cov_hat) = map_unknown(&post);
        assert_eq!(mu_hat, v(&[1.0, 0.0]));
        assert!((cov_hat.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn coupling_term_vanishes_at_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = rand_data(3, 8, &mut rng);
        let stats = suff_stats(&data).unwrap();
        let sigma = rand_pd(3, &mut rng);
        let prior = KlNormalWishartPrior::new(stats.sample_mean().clone(), sigma.clone(), 2.5).unwrap();
        let post = posterior_unknown(&prior, &stats).unwrap();
        let expected = sigma.matrix() * 2.5 + stats.centered_scatter();
        assert!((post.mode_cov().matrix() * post.pseudocount() - expected).norm() < 1e-12);
    }

    #[test]
    fn unknown_mean_conjugacy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (d, n) in [(1, 3), (2, 10), (5, 3), (3, 25)] {
            let data = rand_data(d, n, &mut rng);
            let prior =
                KlNormalWishartPrior::new(rand_vec(d, &mut rng), rand_pd(d, &mut rng), 0.2 + rng.random::<f64>())
                    .unwrap();
            let post = posterior_unknown(&prior, &suff_stats(&data).unwrap()).unwrap();
            let r: Vec<f64> = (0..100)
                .map(|_| {
                    let mu = rand_vec(d, &mut rng);
                    let p = rand_pd(d, &mut rng);
                    let lik = Gaussian::from_precision(mu.clone(), &p).unwrap();
                    let ll: f64 = data.iter().map(|x| lik.logpdf(x).unwrap()).sum();
                    post.log_density(&mu, &p).unwrap() - prior.log_density(&mu, &p).unwrap() - ll
                })
                .collect();
            assert!(spread(&r) < 1e-8, "d={d} n={n}: {}", spread(&r));
        }
    }

    #[test]
    fn family_closure_under_batches() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let data = rand_data(3, 40, &mut rng);
        let prior = KlNormalWishartPrior::new(rand_vec(3, &mut rng), rand_pd(3, &mut rng), 0.7).unwrap();
        let whole = posterior_unknown(&prior, &suff_stats(&data).unwrap()).unwrap();
        for split in [1, 17, 39] {
            let first = posterior_unknown(&prior, &suff_stats(&data[..split]).unwrap()).unwrap();
            let second = posterior_unknown(&first.as_prior(), &suff_stats(&data[split..]).unwrap()).unwrap();
            assert_eq!(second.pseudocount(), whole.pseudocount());
            assert!((second.mean() - whole.mean()).norm() <= 1e-13 * whole.mean().norm().max(1.0));
            let rel =
                (second.mode_cov().matrix() - whole.mode_cov().matrix()).norm() / whole.mode_cov().matrix().norm();
            assert!(rel < 1e-10, "split {split}: {rel}");
        }
    }

    #[test]
    fn known_mean_family_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = rand_data(2, 25, &mut rng);
        let prior = KlWishartPrior::new(rand_vec(2, &mut rng), rand_pd(2, &mut rng), 1.3).unwrap();
        let whole = posterior_known_mean(&prior, &data).unwrap();
        let first = posterior_known_mean(&prior, &data[..9]).unwrap();
        let second = posterior_known_mean(&first.as_prior().unwrap(), &data[9..]).unwrap();
        assert_eq!(second.pseudocount(), whole.pseudocount());
        assert!(
            (second.scatter().matrix() - whole.scatter().matrix()).norm() / whole.scatter().matrix().norm() < 1e-12
        );
    }

    #[test]
    fn noninformative_known_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let data = rand_data(3, 10, &mut rng);
        let stats = suff_stats(&data).unwrap();
        let mu = rand_vec(3, &mut rng);
        let post = noninformative_posterior(&stats, MeanMode::Known(&mu), &rand_pd(3, &mut rng)).unwrap();
        let Posterior::KnownMean(p) = &post else { panic!("wrong variant") };
        assert_eq!(p.wishart().shape(), 10.0 + 3.0 + 1.0);
        let mut scatter = DMatrix::zeros(3, 3);
        for x in &data {
            scatter += (x - &mu) * (x - &mu).transpose();
        }
        assert!((p.map_cov().unwrap().matrix() - scatter / 10.0).norm() < 1e-12);
        let (_, ml) = ml_estimate(&stats, Some(&mu)).unwrap();
        assert_eq!(post.map().unwrap().1, ml);
    }

    #[test]
    fn noninformative_unknown_mean_is_ml() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let stats = suff_stats(&rand_data(3, 6, &mut rng)).unwrap();
        let post = noninformative_posterior(&stats, MeanMode::Unknown, &PdMatrix::identity(3)).unwrap();
        let (mu_hat, cov_hat) = post.map().unwrap();
        assert_eq!(&mu_hat, stats.sample_mean());
        let (ml_mu, ml_cov) = ml_estimate(&stats, None).unwrap();
        assert_eq!(mu_hat, ml_mu);
        assert_eq!(cov_hat, ml_cov);
        assert!((cov_hat.matrix() - stats.centered_scatter() / 6.0).norm() < 1e-14);
        assert_eq!(post.pseudocount(), 6.0);
    }

    #[test]
    fn noninformative_rank_conditions() {
        let collinear = suff_stats(&[v(&[1.0, 1.0]), v(&[2.0, 2.0])]).unwrap();
        let err = noninformative_posterior(&collinear, MeanMode::Known(&v(&[0.0, 0.0])), &PdMatrix::identity(2));
        assert!(matches!(err, Err(Error::InsufficientData(_))));
        // n = d is enough for a known mean but not for an unknown one.
        let two = suff_stats(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!(noninformative_posterior(&two, MeanMode::Known(&v(&[0.0, 0.0])), &PdMatrix::identity(2)).is_ok());
        let err = noninformative_posterior(&two, MeanMode::Unknown, &PdMatrix::identity(2)).unwrap_err();
        assert!(err.to_string().contains("n >= 3"), "{err}");
        assert!(ml_estimate(&two, None).is_err());
    }

    #[test]
    fn ml_examples() {
        let stats = suff_stats(&[v(&[-1.0]), v(&[1.0])]).unwrap();
        let (mu, cov) = ml_estimate(&stats, None).unwrap();
        assert_eq!(mu, v(&[0.0]));
        assert_eq!(cov.matrix()[(0, 0)], 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let data = rand_data(2, 20, &mut rng);
        let c = 3.5;
        let scaled: Vec<_> = data.iter().map(|x| x * c).collect();
        let (_, a) = ml_estimate(&suff_stats(&data).unwrap(), None).unwrap();
        let (_, b) = ml_estimate(&suff_stats(&scaled).unwrap(), None).unwrap();
        assert!((b.matrix() - a.matrix() * (c * c)).norm() < 1e-11);
    }

    #[test]
    fn tiny_alpha_map_converges_to_ml() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let stats = suff_stats(&rand_data(3, 50, &mut rng)).unwrap();
        let sigma = rand_pd(3, &mut rng);
        let (_, ml) = ml_estimate(&stats, None).unwrap();
        let ratio = sigma.matrix().norm() / ml.matrix().norm();
        for k in 1..=8 {
            let alpha = 10f64.powi(-k);
            let prior = KlNormalWishartPrior::new(DVector::zeros(3), sigma.clone(), alpha).unwrap();
            let (_, cov) = map_unknown(&posterior_unknown(&prior, &stats).unwrap());
            let rel = (cov.matrix() - ml.matrix()).norm() / ml.matrix().norm();
            assert!(rel < 10.0 * alpha * ratio, "k={k}: {rel}");
        }
    }

    /// Central differences over the d(d+1)/2 free entries of a symmetric matrix.
    fn sym_gradient(f: impl Fn(&PdMatrix) -> f64, at: &PdMatrix, h: f64) -> f64 {
        let d = at.dim();
        let mut sq = 0.0;
        for i in 0..d {
            for j in 0..=i {
                let mut e = DMatrix::zeros(d, d);
                e[(i, j)] = h;
                e[(j, i)] = h;
                let plus = PdMatrix::new(at.matrix() + &e).unwrap();
                let minus = PdMatrix::new(at.matrix() - &e).unwrap();
                sq += ((f(&plus) - f(&minus)) / (2.0 * h)).powi(2);
            }
        }
        sq.sqrt()
    }

    #[test]
    fn known_mean_map_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let data = rand_data(2, 20, &mut rng);
        let prior = KlWishartPrior::new(DVector::zeros(2), rand_pd(2, &mut rng), 1.0).unwrap();
        let post = posterior_known_mean(&prior, &data).unwrap();
        let p_hat = map_known_mean(&post).unwrap();
        let f = |p: &PdMatrix| post.log_density(p).unwrap();
        assert!(sym_gradient(f, &p_hat, 1e-6) < 1e-5);
        assert!(sym_gradient(f, &p_hat.scaled(1.2).unwrap(), 1e-6) > 1e-3);
    }

    proptest! {
        #[test]
        fn merged_stats_match_concatenation(seed in any::<u64>(), d in 1usize..=4, n in 2usize..40, frac in 0.05f64..0.95) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<_> = (0..n).map(|_| rand_vec(d, &mut rng)).collect();
            let cut = ((n as f64 * frac) as usize).clamp(1, n - 1);
            let merged = suff_stats(&data[..cut]).unwrap().merge(&suff_stats(&data[cut..]).unwrap()).unwrap();
            let whole = suff_stats(&data).unwrap();
            prop_assert_eq!(merged.count(), whole.count());
            prop_assert!((merged.sample_mean() - whole.sample_mean()).norm() < 1e-12 * (1.0 + whole.sample_mean().norm()));
            prop_assert!((merged.centered_scatter() - whole.centered_scatter()).norm() < 1e-10 * (1.0 + whole.centered_scatter().norm()));
        }

        #[test]
        fn posterior_ignores_data_order(seed in any::<u64>(), d in 1usize..=4, n in 1usize..30, alpha in 0.05f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut data: Vec<_> = (0..n).map(|_| rand_vec(d, &mut rng)).collect();
            let prior = KlNormalWishartPrior::new(rand_vec(d, &mut rng), rand_pd(d, &mut rng), alpha).unwrap();
            let a = posterior_unknown(&prior, &suff_stats(&data).unwrap()).unwrap();
            data.reverse();
            let b = posterior_unknown(&prior, &suff_stats(&data).unwrap()).unwrap();
            prop_assert_eq!(a.pseudocount(), b.pseudocount());
            prop_assert!((a.mode_cov().matrix() - b.mode_cov().matrix()).norm() < 1e-10 * a.mode_cov().matrix().norm());
        }
    }
}
