//! Numerical verification harness.
//!
//! Each check draws random inputs from a caller-owned RNG, evaluates one
//! identity, and reports the worst residual (or z-score) against a fixed
//! threshold. Identities that hold only up to an additive constant are tested
//! as the spread `max - min` of the residual over the sampled points.
//!
//! The `*_with` variants accept a [`Mutation`] that deliberately corrupts one
//! formula; the harness is expected to flag every mutation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gaussian::{expected_loglik, kl, Gaussian};
use crate::inference::{
    map_known_mean, map_unknown, ml_estimate, noninformative_posterior, posterior_known_mean,
    posterior_known_mean_from_stats, posterior_unknown, suff_stats, MeanMode,
};
use crate::klpriors::{KlNormalWishartPrior, KlWishartPrior};
use crate::pdcore::PdMatrix;
use crate::wishart::{validate_shape, InverseWishartParams, WishartParams};

pub const PROPORTIONALITY_TOL: f64 = 1e-9;
pub const CONJUGACY_TOL: f64 = 1e-8;
pub const MOMENT_Z_MAX: f64 = 4.0;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const GRADIENT_STEP: f64 = 1e-6;
pub const JACOBIAN_TOL: f64 = 1e-10;
pub const CLOSURE_TOL: f64 = 1e-10;
/// Relative slack for quantities the closure update reproduces up to rounding (α*, m*).
pub const CLOSURE_EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: statistic <= threshold, statistic, threshold, detail: detail.into() }
    }

    /// Folds several reports into one carrying the worst normalized statistic.
    pub fn aggregate(name: impl Into<String>, reports: &[CheckReport]) -> Self {
        let worst = reports
            .iter()
            .max_by(|a, b| a.ratio().partial_cmp(&b.ratio()).unwrap_or(std::cmp::Ordering::Greater))
            .expect("at least one report");
        let failed = reports.iter().filter(|r| !r.passed).count();
        let detail = format!("{} configurations, {failed} failed; worst: {}", reports.len(), worst.detail);
        let mut out = Self::new(name, worst.statistic, worst.threshold, detail);
        out.passed = failed == 0;
        out
    }

    fn ratio(&self) -> f64 {
        if self.statistic.is_nan() {
            f64::INFINITY
        } else if self.threshold > 0.0 {
            self.statistic / self.threshold
        } else if self.statistic <= self.threshold {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Deliberate formula corruptions used as negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Known-mean prior mapped to shape `α + d` instead of `α + d + 1`.
    KnownMeanShape,
    /// Posterior mean `(m + x̄) / 2` instead of the count-weighted mean.
    UnweightedPosteriorMean,
    /// Gradient evaluated away from the MAP point.
    OffMapPoint,
}

/// Random inputs shared by the checks, examples and tests.
pub mod gen {
    use super::*;

    /// `B Bᵀ + ½ I` with `B` uniform on `[-1, 1]`.
    pub fn random_pd<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PdMatrix {
        let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        PdMatrix::new(&b * b.transpose() + DMatrix::identity(d, d) * 0.5).expect("shifted Gram matrix is PD")
    }

    pub fn random_vec<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(d, |_, _| rng.random_range(-scale..scale))
    }

    /// `n` draws from a random Gaussian.
    pub fn random_data<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Vec<DVector<f64>> {
        let g = Gaussian::new(random_vec(d, 2.0, rng), random_pd(d, rng)).expect("matching dims");
        (0..n).map(|_| g.sample(rng)).collect()
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    max - min
}

fn known_mean_wishart(prior: &KlWishartPrior, mutation: Mutation) -> WishartParams {
    match mutation {
        Mutation::KnownMeanShape => {
            let d = prior.dim() as f64;
            let scatter = prior.mode_cov().scaled(prior.pseudocount()).expect("positive pseudocount");
            // α + d stays above d - 1, so the corrupted law is still a valid Wishart.
            WishartParams::new(scatter, prior.pseudocount() + d).expect("valid shape")
        }
        _ => prior.to_wishart(),
    }
}

/// Constancy of `log p(P) + α·KL(N(μ,Σ) ‖ N(μ,P⁻¹))` and of
/// `log p(μ,P) + α·KL(N(m,Σ) ‖ N(μ,P⁻¹))` over random evaluation points.
pub fn check_proportionality<R: Rng + ?Sized>(d: usize, alpha: f64, trials: usize, rng: &mut R) -> CheckReport {
    check_proportionality_with(d, alpha, trials, rng, Mutation::None)
}

pub fn check_proportionality_with<R: Rng + ?Sized>(
    d: usize,
    alpha: f64,
    trials: usize,
    rng: &mut R,
    mutation: Mutation,
) -> CheckReport {
    let name = "proportionality";
    let mut run = || -> Result<(f64, f64, f64)> {
        let m = gen::random_vec(d, 2.0, rng);
        let sigma = gen::random_pd(d, rng);
        let known = KlWishartPrior::new(m.clone(), sigma.clone(), alpha)?;
        let joint = KlNormalWishartPrior::new(m.clone(), sigma.clone(), alpha)?;
        let wishart = known_mean_wishart(&known, mutation);
        let target = Gaussian::new(m.clone(), sigma.clone())?;
        let mut known_res = Vec::with_capacity(trials);
        let mut joint_res = Vec::with_capacity(trials);
        let mut scalar_err: f64 = 0.0;
        for _ in 0..trials {
            let p = gen::random_pd(d, rng);
            let mu = gen::random_vec(d, 2.0, rng);
            let lp = wishart.log_pdf(&p)?;
            known_res.push(lp + alpha * kl(&target, &Gaussian::from_precision(m.clone(), &p)?)?);
            let q = Gaussian::from_precision(mu.clone(), &p)?;
            joint_res.push(joint.log_density(&mu, &p)? + alpha * kl(&target, &q)?);
            if d == 1 {
                // W(v, ν) at d = 1 is Gamma(ν/2, 2v).
                let (k, theta, x) = (wishart.shape() / 2.0, 2.0 * wishart.scale().matrix()[(0, 0)], p.matrix()[(0, 0)]);
                let gamma = (k - 1.0) * x.ln() - x / theta - k * theta.ln() - libm::lgamma(k);
                scalar_err = scalar_err.max((lp - gamma).abs());
            }
        }
        Ok((spread(&known_res), spread(&joint_res), scalar_err))
    };
    match run() {
        Ok((a, b, c)) => CheckReport::new(
            name,
            a.max(b).max(c),
            PROPORTIONALITY_TOL,
            format!("d={d} alpha={alpha} trials={trials}: known-mean spread {a:.3e}, normal-Wishart spread {b:.3e}, scalar gamma error {c:.3e}"),
        ),
        Err(e) => CheckReport::new(name, f64::INFINITY, PROPORTIONALITY_TOL, format!("d={d} alpha={alpha}: error {e}")),
    }
}

/// Constancy of `log posterior - (log prior + log likelihood)` for both cases.
pub fn check_conjugacy<R: Rng + ?Sized>(d: usize, n: usize, alpha: f64, trials: usize, rng: &mut R) -> CheckReport {
    check_conjugacy_with(d, n, alpha, trials, rng, Mutation::None)
}

pub fn check_conjugacy_with<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    alpha: f64,
    trials: usize,
    rng: &mut R,
    mutation: Mutation,
) -> CheckReport {
    let name = "conjugacy";
    let mut run = || -> Result<(f64, f64)> {
        let data = gen::random_data(d, n, rng);
        let stats = suff_stats(&data)?;
        let known_prior = KlWishartPrior::new(gen::random_vec(d, 2.0, rng), gen::random_pd(d, rng), alpha)?;
        let joint_prior = KlNormalWishartPrior::new(gen::random_vec(d, 2.0, rng), gen::random_pd(d, rng), alpha)?;
        let known_post = posterior_known_mean(&known_prior, &data)?;
        let mut joint_post = posterior_unknown(&joint_prior, &stats)?.as_prior();
        if mutation == Mutation::UnweightedPosteriorMean {
            let bad_mean = (joint_prior.prior_mean() + stats.sample_mean()) * 0.5;
            joint_post = KlNormalWishartPrior::new(bad_mean, joint_post.mode_cov().clone(), joint_post.pseudocount())?;
        }
        let mut known_res = Vec::with_capacity(trials);
        let mut joint_res = Vec::with_capacity(trials);
        for _ in 0..trials {
            let p = gen::random_pd(d, rng);
            let mu = gen::random_vec(d, 2.0, rng);
            let lik_known = Gaussian::from_precision(known_prior.known_mean().clone(), &p)?;
            let lik_joint = Gaussian::from_precision(mu.clone(), &p)?;
            let mut ll_known = 0.0;
            let mut ll_joint = 0.0;
            for x in &data {
                ll_known += lik_known.logpdf(x)?;
                ll_joint += lik_joint.logpdf(x)?;
            }
            known_res.push(known_post.log_density(&p)? - known_prior.log_density(&p)? - ll_known);
            joint_res.push(joint_post.log_density(&mu, &p)? - joint_prior.log_density(&mu, &p)? - ll_joint);
        }
        Ok((spread(&known_res), spread(&joint_res)))
    };
    match run() {
        Ok((a, b)) => CheckReport::new(
            name,
            a.max(b),
            CONJUGACY_TOL,
            format!("d={d} n={n} alpha={alpha}: known-mean spread {a:.3e}, normal-Wishart spread {b:.3e}"),
        ),
        Err(e) => CheckReport::new(name, f64::INFINITY, CONJUGACY_TOL, format!("d={d} n={n} alpha={alpha}: error {e}")),
    }
}

/// Monte Carlo z-scores of `E[P] = νV` and, when `ν > d + 1`, `E[P⁻¹] = S/(ν-d-1)`.
///
/// Also confirms `E[P⁻¹] = E[P]⁻¹ · ν/(ν-d-1)` to rounding; a violation forces failure.
pub fn check_moments<R: Rng + ?Sized>(d: usize, nu: f64, samples: usize, rng: &mut R) -> CheckReport {
    let name = "moments";
    let mut run = || -> Result<(f64, Option<f64>, f64)> {
        let w = WishartParams::from_scale(gen::random_pd(d, rng), nu)?;
        let with_inverse = nu > d as f64 + 1.0;
        let mut sum = DMatrix::zeros(d, d);
        let mut sq = DMatrix::zeros(d, d);
        let mut inv_sum = DMatrix::zeros(d, d);
        let mut inv_sq = DMatrix::zeros(d, d);
        let eye = DMatrix::identity(d, d);
        for _ in 0..samples {
            let p = w.sample(rng);
            sum += p.matrix();
            sq += p.matrix().component_mul(p.matrix());
            if with_inverse {
                let inv = p.solve(&eye);
                inv_sq += inv.component_mul(&inv);
                inv_sum += inv;
            }
        }
        let z_mean = max_z(&sum, &sq, w.mean().matrix(), samples);
        let mut factor_err = 0.0;
        let z_inv = if with_inverse {
            let exact_inv = w.mean_inverse()?;
            let mean_then_inverse = w.mean().inverse()?;
            let factor = nu / (nu - d as f64 - 1.0);
            factor_err = (mean_then_inverse.matrix() * factor - exact_inv.matrix()).norm() / exact_inv.matrix().norm();
            Some(max_z(&inv_sum, &inv_sq, exact_inv.matrix(), samples))
        } else {
            None
        };
        Ok((z_mean, z_inv, factor_err))
    };
    match run() {
        Ok((zm, zi, fe)) => {
            let mut stat = zm.max(zi.unwrap_or(0.0));
            if !(fe < 1e-12) {
                stat = f64::INFINITY;
            }
            let inv = zi.map_or("n/a (nu <= d+1)".to_string(), |z| format!("{z:.3}"));
            CheckReport::new(
                name,
                stat,
                MOMENT_Z_MAX,
                format!("d={d} nu={nu} samples={samples}: max z E[P] {zm:.3}, max z E[P^-1] {inv}, inverse-of-mean factor error {fe:.1e}"),
            )
        }
        Err(e) => CheckReport::new(name, f64::INFINITY, MOMENT_Z_MAX, format!("d={d} nu={nu}: error {e}")),
    }
}

fn max_z(sum: &DMatrix<f64>, sq: &DMatrix<f64>, exact: &DMatrix<f64>, n: usize) -> f64 {
    let nf = n as f64;
    let mut worst: f64 = 0.0;
    for i in 0..sum.nrows() {
        for j in 0..sum.ncols() {
            let mean = sum[(i, j)] / nf;
            let var = (sq[(i, j)] / nf - mean * mean) * nf / (nf - 1.0);
            let z = (mean - exact[(i, j)]).abs() / (var / nf).sqrt();
            worst = worst.max(if z.is_nan() { f64::INFINITY } else { z });
        }
    }
    worst
}

/// `Z Zᵀ` from `nu_int` Gaussian columns has rank `nu_int` (the zero matrix at 0)
/// and is rejected as a precision unless `nu_int = d`.
pub fn check_rank_deficiency<R: Rng + ?Sized>(d: usize, nu_int: usize, rng: &mut R) -> CheckReport {
    let name = "rank_deficiency";
    let v = gen::random_pd(d, rng);
    let mut z = DMatrix::zeros(d, nu_int);
    for j in 0..nu_int {
        let col = Gaussian::new(DVector::zeros(d), v.clone()).expect("dims").sample(rng);
        z.set_column(j, &col);
    }
    let scatter = &z * z.transpose();
    let sv = scatter.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|s| **s > 1e-10 * smax && smax > 0.0).count();
    let accepted = PdMatrix::new(scatter.clone()).is_ok();
    let shape_ok = validate_shape(nu_int as f64, d).is_ok();
    let mut mismatches = 0usize;
    mismatches += usize::from(rank != nu_int.min(d));
    mismatches += usize::from(accepted != (nu_int >= d));
    mismatches += usize::from(shape_ok != (nu_int >= d));
    if nu_int == 0 {
        mismatches += usize::from(scatter.iter().any(|x| *x != 0.0));
    }
    CheckReport::new(
        name,
        mismatches as f64,
        0.0,
        format!("d={d} nu={nu_int}: numerical rank {rank}, make_pd accepted={accepted}, shape valid={shape_ok}"),
    )
}

/// Central-difference gradient over the free entries of a symmetric matrix (and
/// optionally a vector), shrinking the step if a perturbation leaves the PD cone.
fn fd_gradient_norm(
    f: &dyn Fn(&DVector<f64>, &PdMatrix) -> Result<f64>,
    mu: &DVector<f64>,
    p: &PdMatrix,
    include_mean: bool,
) -> Result<f64> {
    let d = p.dim();
    let mut sq = 0.0;
    if include_mean {
        for i in 0..d {
            let h = GRADIENT_STEP;
            let mut e = DVector::zeros(d);
            e[i] = h;
            let g = (f(&(mu + &e), p)? - f(&(mu - &e), p)?) / (2.0 * h);
            sq += g * g;
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let mut h = GRADIENT_STEP;
            loop {
                let mut e = DMatrix::zeros(d, d);
                e[(i, j)] = h;
                e[(j, i)] = h;
                match (PdMatrix::new(p.matrix() + &e), PdMatrix::new(p.matrix() - &e)) {
                    (Ok(plus), Ok(minus)) => {
                        let g = (f(mu, &plus)? - f(mu, &minus)?) / (2.0 * h);
                        sq += g * g;
                        break;
                    }
                    _ => h *= 0.5,
                }
            }
        }
    }
    Ok(sq.sqrt())
}

/// Finite-difference gradient norms of the posterior log-density at the analytic
/// MAP points, for the known-mean and the joint unknown-mean posteriors.
pub fn check_map_gradient<R: Rng + ?Sized>(d: usize, n: usize, alpha: f64, rng: &mut R) -> CheckReport {
    check_map_gradient_with(d, n, alpha, rng, Mutation::None)
}

pub fn check_map_gradient_with<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    alpha: f64,
    rng: &mut R,
    mutation: Mutation,
) -> CheckReport {
    let name = "map_gradient";
    let off = mutation == Mutation::OffMapPoint;
    let mut run = || -> Result<(f64, f64)> {
        let data = gen::random_data(d, n, rng);
        let stats = suff_stats(&data)?;
        let known_prior = KlWishartPrior::new(gen::random_vec(d, 2.0, rng), gen::random_pd(d, rng), alpha)?;
        let known_post = posterior_known_mean(&known_prior, &data)?;
        let mut p_hat = map_known_mean(&known_post)?;
        if off {
            p_hat = p_hat.scaled(1.2)?;
        }
        let known_mu = known_prior.known_mean().clone();
        let known_f = |_: &DVector<f64>, p: &PdMatrix| known_post.log_density(p);
        let g_known = fd_gradient_norm(&known_f, &known_mu, &p_hat, false)?;

        let joint_prior = KlNormalWishartPrior::new(gen::random_vec(d, 2.0, rng), gen::random_pd(d, rng), alpha)?;
        let joint_post = posterior_unknown(&joint_prior, &stats)?;
        let (mut mu_hat, cov_hat) = map_unknown(&joint_post);
        let mut p_joint = cov_hat.inverse()?;
        if off {
            mu_hat.add_scalar_mut(0.1);
            p_joint = p_joint.scaled(1.2)?;
        }
        let joint_f = |mu: &DVector<f64>, p: &PdMatrix| joint_post.log_density(mu, p);
        let g_joint = fd_gradient_norm(&joint_f, &mu_hat, &p_joint, true)?;
        Ok((g_known, g_joint))
    };
    match run() {
        Ok((a, b)) => CheckReport::new(
            name,
            a.max(b),
            GRADIENT_TOL,
            format!(
                "d={d} n={n} alpha={alpha}{}: known-mean |grad| {a:.3e}, joint |grad| {b:.3e}",
                if off { " (off-MAP)" } else { "" }
            ),
        ),
        Err(e) => CheckReport::new(name, f64::INFINITY, GRADIENT_TOL, format!("d={d} n={n}: error {e}")),
    }
}

/// Constancy of `log p(μ,P) - α·E_{N(m,Σ)}[log N(x | μ, P⁻¹)]`, and of the
/// known-mean analogue with `m = μ`.
pub fn check_pseudodata<R: Rng + ?Sized>(d: usize, alpha: f64, trials: usize, rng: &mut R) -> CheckReport {
    let name = "pseudodata";
    let mut run = || -> Result<(f64, f64)> {
        let m = gen::random_vec(d, 2.0, rng);
        let sigma = gen::random_pd(d, rng);
        let source = Gaussian::new(m.clone(), sigma.clone())?;
        let joint = KlNormalWishartPrior::new(m.clone(), sigma.clone(), alpha)?;
        let known = KlWishartPrior::new(m.clone(), sigma, alpha)?;
        let mut joint_res = Vec::with_capacity(trials);
        let mut known_res = Vec::with_capacity(trials);
        for _ in 0..trials {
            let p = gen::random_pd(d, rng);
            let mu = gen::random_vec(d, 2.0, rng);
            joint_res.push(joint.log_density(&mu, &p)? - alpha * expected_loglik(&source, &mu, &p)?);
            known_res.push(known.log_density(&p)? - alpha * expected_loglik(&source, &m, &p)?);
        }
        Ok((spread(&joint_res), spread(&known_res)))
    };
    match run() {
        Ok((a, b)) => CheckReport::new(
            name,
            a.max(b),
            PROPORTIONALITY_TOL,
            format!("d={d} alpha={alpha} trials={trials}: normal-Wishart spread {a:.3e}, known-mean spread {b:.3e}"),
        ),
        Err(e) => CheckReport::new(name, f64::INFINITY, PROPORTIONALITY_TOL, format!("d={d}: error {e}")),
    }
}

/// `|log IW(C | S,ν) - log W(C⁻¹ | S⁻¹,ν) + (d+1) log|C||` on random instances, plus
/// the exact ratio `(n+α+2d+2)/(n+α)` between the inverse MAP precision and the
/// covariance mode of a known-mean posterior.
pub fn check_inverse_wishart<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> CheckReport {
    let name = "inverse_wishart";
    let mut run = || -> Result<(f64, f64)> {
        let mut jac: f64 = 0.0;
        let mut factor: f64 = 0.0;
        for _ in 0..trials {
            let d = rng.random_range(1..=4);
            let nu = d as f64 - 1.0 + 0.05 + rng.random::<f64>() * 6.0;
            let s = gen::random_pd(d, rng);
            let c = gen::random_pd(d, rng);
            let iw = InverseWishartParams::new(s.clone(), nu)?;
            let w = WishartParams::new(s, nu)?;
            let r = iw.log_pdf(&c)? - w.log_pdf(&c.inverse()?)? + (d as f64 + 1.0) * c.logdet();
            jac = jac.max(r.abs());

            let n = rng.random_range(1..=20);
            let alpha = 0.1 + rng.random::<f64>() * 3.0;
            let prior = KlWishartPrior::new(gen::random_vec(d, 1.0, rng), gen::random_pd(d, rng), alpha)?;
            let post = posterior_known_mean(&prior, &gen::random_data(d, n, rng))?;
            let ratio = (n as f64 + alpha + 2.0 * d as f64 + 2.0) / (n as f64 + alpha);
            let expected = post.covariance_mode().matrix() * ratio;
            let rel = (post.map_cov()?.matrix() - &expected).norm() / expected.norm();
            factor = factor.max(rel);
        }
        Ok((jac, factor))
    };
    match run() {
        Ok((a, b)) => CheckReport::new(
            name,
            a.max(b),
            JACOBIAN_TOL,
            format!("trials={trials}: Jacobian relation residual {a:.3e}, MAP-vs-mode factor error {b:.3e}"),
        ),
        Err(e) => CheckReport::new(name, f64::INFINITY, JACOBIAN_TOL, format!("error {e}")),
    }
}

/// `α = 0` MAP equals the ML estimate bit for bit, and the MAP at `α = 10⁻ᵏ`
/// approaches it with error below `10·α·‖Σ‖/‖S̃₀/n‖`. The statistic is the worst
/// observed error as a fraction of that bound (infinite on a bitwise mismatch).
pub fn check_noninformative<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> CheckReport {
    let name = "noninformative_limit";
    let mut run = || -> Result<(bool, f64)> {
        let data = gen::random_data(d, n, rng);
        let stats = suff_stats(&data)?;
        let sigma = gen::random_pd(d, rng);
        let mu = gen::random_vec(d, 2.0, rng);

        let limit_unknown = noninformative_posterior(&stats, MeanMode::Unknown, &sigma)?.map()?;
        let limit_known = noninformative_posterior(&stats, MeanMode::Known(&mu), &sigma)?.map()?;
        let ml_unknown = ml_estimate(&stats, None)?;
        let ml_known = ml_estimate(&stats, Some(&mu))?;
        let bitwise = limit_unknown == ml_unknown && limit_known == ml_known;

        let mut worst: f64 = 0.0;
        let ml_norm = ml_unknown.1.matrix().norm().min(ml_known.1.matrix().norm());
        let bound_unit = 10.0 * sigma.matrix().norm() / ml_norm;
        for k in 1..=8 {
            let alpha = 10f64.powi(-k);
            let joint = KlNormalWishartPrior::new(gen::random_vec(d, 2.0, rng), sigma.clone(), alpha)?;
            let (_, cov) = map_unknown(&posterior_unknown(&joint, &stats)?);
            let rel = (cov.matrix() - ml_unknown.1.matrix()).norm() / ml_unknown.1.matrix().norm();
            worst = worst.max(rel / (alpha * bound_unit));

            let known = KlWishartPrior::new(mu.clone(), sigma.clone(), alpha)?;
            let cov = posterior_known_mean_from_stats(&known, &stats)?.map_cov()?;
            let rel = (cov.matrix() - ml_known.1.matrix()).norm() / ml_known.1.matrix().norm();
            worst = worst.max(rel / (alpha * bound_unit));
        }
        Ok((bitwise, worst))
    };
    match run() {
        Ok((bitwise, worst)) => CheckReport::new(
            name,
            if bitwise { worst } else { f64::INFINITY },
            1.0,
            format!("d={d} n={n}: alpha=0 MAP bitwise equal to ML: {bitwise}; worst tiny-alpha error / first-order bound {worst:.3e}"),
        ),
        Err(e) => CheckReport::new(name, f64::INFINITY, 1.0, format!("d={d} n={n}: error {e}")),
    }
}

/// Sequential two-batch updates against a single update on the concatenation.
pub fn check_closure<R: Rng + ?Sized>(d: usize, n: usize, splits: usize, rng: &mut R) -> CheckReport {
    let name = "family_closure";
    let mut run = || -> Result<(f64, f64)> {
        let data = gen::random_data(d, n, rng);
        let prior = KlNormalWishartPrior::new(
            gen::random_vec(d, 2.0, rng),
            gen::random_pd(d, rng),
            0.1 + rng.random::<f64>() * 3.0,
        )?;
        let whole = posterior_unknown(&prior, &suff_stats(&data)?)?;
        let mut worst_exact: f64 = 0.0;
        let mut worst_sigma: f64 = 0.0;
        for _ in 0..splits {
            let cut = rng.random_range(1..n);
            let first = posterior_unknown(&prior, &suff_stats(&data[..cut])?)?;
            let second = posterior_unknown(&first.as_prior(), &suff_stats(&data[cut..])?)?;
            let da = (second.pseudocount() - whole.pseudocount()).abs() / whole.pseudocount();
            let dm = (second.mean() - whole.mean()).norm() / whole.mean().norm().max(1.0);
            let ds = (second.mode_cov().matrix() - whole.mode_cov().matrix()).norm() / whole.mode_cov().matrix().norm();
            worst_exact = worst_exact.max(da).max(dm);
            worst_sigma = worst_sigma.max(ds);
        }
        Ok((worst_exact, worst_sigma))
    };
    match run() {
        Ok((exact, sigma)) => CheckReport::new(
            name,
            if exact <= CLOSURE_EXACT_TOL { sigma } else { f64::INFINITY },
            CLOSURE_TOL,
            format!(
                "d={d} n={n} splits={splits}: alpha*/m* relative error {exact:.3e}, sigma* relative error {sigma:.3e}"
            ),
        ),
        Err(e) => CheckReport::new(name, f64::INFINITY, CLOSURE_TOL, format!("d={d} n={n}: error {e}")),
    }
}

/// Names accepted by [`run_suite`] besides `all`.
pub const SUITES: &[&str] = &[
    "proportionality",
    "conjugacy",
    "moments",
    "rank_deficiency",
    "map_gradient",
    "pseudodata",
    "inverse_wishart",
    "noninformative_limit",
    "family_closure",
];

/// Runs one named suite with its default parameters and returns a single
/// aggregated report, or `None` for an unknown name.
///
/// Defaults: proportionality and pseudodata over `d ∈ {1,2,3,5}`, `α ∈ {0.1,1,7}`
/// with 200 points; conjugacy over 20 random `(d, n, α)` configurations (some
/// with `n < d`) and 100 points; moments at `(d, ν) ∈ {(1,1.5), (2,5), (3,6.5)}`
/// with 10⁵ draws; rank deficiency at `d = 3`, `ν ∈ {0,1,2,3}`; MAP gradients at
/// `(2, 20, 1)` and `(3, 30, 0.5)`; inverse-Wishart over 100 instances; the
/// non-informative limit at `d = 3`, `n = 50`; closure over 50 random splits.
pub fn run_suite(name: &str, seed: u64) -> Option<CheckReport> {
    let index = SUITES.iter().position(|s| *s == name)?;
    // Each suite owns an independent stream.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    let rng = &mut rng;
    let grid = [1usize, 2, 3, 5].iter().flat_map(|&d| [0.1, 1.0, 7.0].map(move |a| (d, a)));
    let reports: Vec<CheckReport> = match name {
        "proportionality" => grid.map(|(d, a)| check_proportionality(d, a, 200, rng)).collect(),
        "pseudodata" => grid.map(|(d, a)| check_pseudodata(d, a, 200, rng)).collect(),
        "conjugacy" => (0..20)
            .map(|i| {
                let d = rng.random_range(1..=5);
                let n = if i % 4 == 0 { rng.random_range(1..=d) } else { rng.random_range(1..=40) };
                let alpha = 0.1 + rng.random::<f64>() * 5.0;
                check_conjugacy(d, n, alpha, 100, rng)
            })
            .collect(),
        "moments" => {
            [(1, 1.5), (2, 5.0), (3, 6.5)].into_iter().map(|(d, nu)| check_moments(d, nu, 100_000, rng)).collect()
        }
        "rank_deficiency" => (0..=3).map(|nu| check_rank_deficiency(3, nu, rng)).collect(),
        "map_gradient" => vec![check_map_gradient(2, 20, 1.0, rng), check_map_gradient(3, 30, 0.5, rng)],
        "inverse_wishart" => vec![check_inverse_wishart(100, rng)],
        "noninformative_limit" => vec![check_noninformative(3, 50, rng)],
        "family_closure" => vec![check_closure(3, 60, 50, rng)],
        _ => unreachable!("name validated against SUITES"),
    };
    Some(CheckReport::aggregate(name, &reports))
}

/// `all` expands to every suite in [`SUITES`] order.
pub fn run_named(name: &str, seed: u64) -> Option<Vec<CheckReport>> {
    if name == "all" {
        return Some(SUITES.iter().map(|s| run_suite(s, seed).expect("known suite")).collect());
    }
    run_suite(name, seed).map(|r| vec![r])
}
