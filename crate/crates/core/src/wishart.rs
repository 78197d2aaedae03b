//! Wishart and inverse-Wishart distributions with real shape.
//!
//! Both families are parameterized on the scatter side: `W(P | S⁻¹, ν)` has
//! density proportional to `|P|^{(ν-d-1)/2} exp(-½ tr(P S))`, and
//! `IW(C | S, ν)` is the law of `C = P⁻¹` for that `P`. The shape must satisfy
//! `ν > d - 1` strictly; below that threshold the Wishart has no density on
//! the positive-definite cone.

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::pdcore::{check_dim, PdMatrix};

/// Accepts `nu` iff it is a finite real strictly above `d - 1`.
pub fn validate_shape(nu: f64, d: usize) -> Result<()> {
    if nu.is_finite() && nu > d as f64 - 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidShape { shape: nu, dim: d })
    }
}

/// `log Γ_d(a) = (d(d-1)/4) log π + Σ_{j=1..d} log Γ(a + (1-j)/2)`.
pub fn ln_multivariate_gamma(d: usize, a: f64) -> f64 {
    let df = d as f64;
    let head = df * (df - 1.0) / 4.0 * PI.ln();
    (1..=d).fold(head, |acc, j| acc + libm::lgamma(a + (1.0 - j as f64) / 2.0))
}

/// `W(S⁻¹, ν)`; the scale `V = S⁻¹` is cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartParams {
    scatter: PdMatrix,
    scale: PdMatrix,
    shape: f64,
}

impl WishartParams {
    /// Builds from the scatter-side parameter `S = V⁻¹`.
    pub fn new(scatter: PdMatrix, shape: f64) -> Result<Self> {
        validate_shape(shape, scatter.dim())?;
        let scale = scatter.inverse()?;
        Ok(Self { scatter, scale, shape })
    }

    /// Builds from the scale matrix `V`.
    pub fn from_scale(scale: PdMatrix, shape: f64) -> Result<Self> {
        validate_shape(shape, scale.dim())?;
        let scatter = scale.inverse()?;
        Ok(Self { scatter, scale, shape })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.scatter.dim()
    }

    /// `S = V⁻¹`.
    #[inline]
    pub fn scatter(&self) -> &PdMatrix {
        &self.scatter
    }

    /// `V`.
    #[inline]
    pub fn scale(&self) -> &PdMatrix {
        &self.scale
    }

    #[inline]
    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// `log Z = (νd/2) log 2 + (ν/2) log|V| + log Γ_d(ν/2)`.
    pub fn log_normalizer(&self) -> f64 {
        let (nu, d) = (self.shape, self.dim() as f64);
        nu * d / 2.0 * LN_2 - nu / 2.0 * self.scatter.logdet() + ln_multivariate_gamma(self.dim(), nu / 2.0)
    }

    pub fn log_pdf(&self, precision: &PdMatrix) -> Result<f64> {
        check_dim(self.dim(), precision.dim())?;
        let d = self.dim() as f64;
        let tr = precision.trace_product(&self.scatter)?;
        Ok((self.shape - d - 1.0) / 2.0 * precision.logdet() - 0.5 * tr - self.log_normalizer())
    }

    /// `E[P] = ν V`.
    pub fn mean(&self) -> PdMatrix {
        self.scale.scaled(self.shape).expect("shape is positive")
    }

    /// `E[P⁻¹] = S / (ν - d - 1)`, defined for `ν > d + 1`.
    pub fn mean_inverse(&self) -> Result<PdMatrix> {
        let excess = self.shape - self.dim() as f64 - 1.0;
        if !(excess > 0.0) {
            return Err(Error::ShapeTooSmall { shape: self.shape, dim: self.dim() });
        }
        self.scatter.scaled(1.0 / excess)
    }

    /// `(ν - d - 1) V`, defined for `ν > d + 1`.
    pub fn mode(&self) -> Result<PdMatrix> {
        let excess = self.shape - self.dim() as f64 - 1.0;
        if !(excess > 0.0) {
            return Err(Error::NoInteriorMode { shape: self.shape, dim: self.dim() });
        }
        self.scale.scaled(excess)
    }

    /// Bartlett draw: `L T Tᵀ Lᵀ` with `L` the Cholesky factor of `V`, `T` lower
    /// triangular, `Tᵢᵢ² ~ χ²(ν - i + 1)` and standard normal entries below the diagonal.
    ///
    /// The product `L T` is the exact Cholesky factor of the draw, so the result is
    /// assembled from it directly instead of being refactored.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PdMatrix {
        let d = self.dim();
        let chi: Vec<Gamma<f64>> = (0..d)
            .map(|i| Gamma::new((self.shape - i as f64) / 2.0, 2.0).expect("shape validated above d - 1"))
            .collect();
        loop {
            let mut t = DMatrix::<f64>::zeros(d, d);
            for i in 0..d {
                t[(i, i)] = chi[i].sample(rng).sqrt();
                for j in 0..i {
                    t[(i, j)] = rng.sample(StandardNormal);
                }
            }
            // A zero diagonal needs a gamma draw that underflows; redraw rather than return a singular matrix.
            if let Some(draw) = PdMatrix::from_factor(self.scale.cholesky_factor() * t) {
                return draw;
            }
        }
    }
}

/// `IW(S, ν)`: `C ~ IW(S, ν)` iff `C⁻¹ ~ W(S⁻¹, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseWishartParams {
    scatter: PdMatrix,
    shape: f64,
}

impl InverseWishartParams {
    pub fn new(scatter: PdMatrix, shape: f64) -> Result<Self> {
        validate_shape(shape, scatter.dim())?;
        Ok(Self { scatter, shape })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.scatter.dim()
    }

    #[inline]
    pub fn scatter(&self) -> &PdMatrix {
        &self.scatter
    }

    #[inline]
    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// The Wishart law of `C⁻¹`, `W(S⁻¹, ν)`.
    pub fn precision_law(&self) -> WishartParams {
        WishartParams::new(self.scatter.clone(), self.shape).expect("parameters already validated")
    }

    /// Closed form `(ν/2) log|S| - (νd/2) log 2 - log Γ_d(ν/2) - ((ν+d+1)/2) log|C| - ½ tr(S C⁻¹)`.
    pub fn log_pdf(&self, cov: &PdMatrix) -> Result<f64> {
        check_dim(self.dim(), cov.dim())?;
        let (nu, d) = (self.shape, self.dim() as f64);
        let tr = cov.solve(self.scatter.matrix()).trace();
        Ok(nu / 2.0 * self.scatter.logdet()
            - nu * d / 2.0 * LN_2
            - ln_multivariate_gamma(self.dim(), nu / 2.0)
            - (nu + d + 1.0) / 2.0 * cov.logdet()
            - 0.5 * tr)
    }

    /// `S / (ν + d + 1)`.
    pub fn mode(&self) -> PdMatrix {
        let d = self.dim() as f64;
        self.scatter.scaled(1.0 / (self.shape + d + 1.0)).expect("positive factor")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PdMatrix> {
        self.precision_law().sample(rng).inverse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use proptest::{prelude::any, prop_assert, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_pd(d: usize, rng: &mut ChaCha8Rng) -> PdMatrix {
        let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        PdMatrix::new(&b * b.transpose() + DMatrix::identity(d, d) * 0.4).unwrap()
    }

    fn rand_sym(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let e = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        (&e + e.transpose()) * (0.5 * scale)
    }

    /// log density of Gamma(k, θ) at x.
    fn gamma_logpdf(x: f64, k: f64, theta: f64) -> f64 {
        (k - 1.0) * x.ln() - x / theta - k * theta.ln() - libm::lgamma(k)
    }

    fn scalar(x: f64) -> PdMatrix {
        PdMatrix::from_diagonal(&[x]).unwrap()
    }

    /// ∫₀^hi f(p) dp with p = u⁵ to tame the p^{(ν-2)/2} singularity at zero.
    fn integrate_positive(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
        let k = 5.0;
        let umax = hi.powf(1.0 / k);
        let n = 200_000;
        let h = umax / n as f64;
        let g = |u: f64| if u == 0.0 { 0.0 } else { f(u.powf(k)) * k * u.powf(k - 1.0) };
        let mut s = g(0.0) + g(umax);
        for i in 1..n {
            s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn shape_validation() {
        assert!(validate_shape(3.5, 3).is_ok());
        assert!(matches!(validate_shape(2.0, 3), Err(Error::InvalidShape { .. })));
        assert!(validate_shape(0.0, 1).is_err());
        assert!(validate_shape(1e-9, 1).is_ok());
        assert!(validate_shape(f64::NAN, 1).is_err());
        let msg = validate_shape(2.0, 3).unwrap_err().to_string();
        assert!(msg.contains("shape > d - 1"), "{msg}");
        assert!(WishartParams::new(PdMatrix::identity(3), 2.0).is_err());
    }

    #[test]
    fn multivariate_gamma_reduces_to_univariate() {
        for a in [0.3, 1.0, 2.5, 7.25] {
            assert!((ln_multivariate_gamma(1, a) - libm::lgamma(a)).abs() < 1e-14);
        }
        // Γ_2(a) = √π Γ(a) Γ(a - ½)
        let a = 3.3;
        let expected = 0.5 * PI.ln() + libm::lgamma(a) + libm::lgamma(a - 0.5);
        assert!((ln_multivariate_gamma(2, a) - expected).abs() < 1e-13);
    }

    #[test]
    fn scalar_log_pdf_matches_gamma_density() {
        let w = WishartParams::from_scale(scalar(1.0), 2.0).unwrap();
        let lp = w.log_pdf(&scalar(1.0)).unwrap();
        assert!((lp - (0.5f64.ln() - 0.5)).abs() < 1e-14);
        assert!((lp + 1.1931471805599454).abs() < 1e-12);

        for (v, nu, x) in [(0.7, 1.3, 0.2), (2.0, 5.0, 9.0), (0.1, 3.7, 0.05)] {
            let w = WishartParams::from_scale(scalar(v), nu).unwrap();
            let expected = gamma_logpdf(x, nu / 2.0, 2.0 * v);
            assert!((w.log_pdf(&scalar(x)).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_density_normalizes() {
        for nu in [1.2, 2.0, 3.0, 5.0] {
            let w = WishartParams::from_scale(scalar(1.0), nu).unwrap();
            let total = integrate_positive(|p| w.log_pdf(&scalar(p)).unwrap().exp(), 200.0);
            assert!((total - 1.0).abs() < 1e-6, "nu={nu}: {total}");
        }
    }

    #[test]
    fn log_pdf_dimension_mismatch() {
        let w = WishartParams::new(PdMatrix::identity(2), 3.0).unwrap();
        assert!(matches!(w.log_pdf(&PdMatrix::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn moments_and_mode() {
        let w = WishartParams::from_scale(PdMatrix::identity(3), 5.0).unwrap();
        assert!((w.mean().matrix() - DMatrix::identity(3, 3) * 5.0).norm() < 1e-14);

        let w = WishartParams::from_scale(PdMatrix::from_diagonal(&[1.0, 2.0]).unwrap(), 5.0).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![5.0, 10.0]));
        assert!((w.mean().matrix() - expected).norm() < 1e-13);

        let w = WishartParams::new(scalar(2.0), 4.0).unwrap();
        assert!((w.mean_inverse().unwrap().matrix()[(0, 0)] - 1.0).abs() < 1e-15);
        let w = WishartParams::new(PdMatrix::identity(2), 5.0).unwrap();
        assert!((w.mean_inverse().unwrap().matrix() - DMatrix::identity(2, 2) * 0.5).norm() < 1e-15);
        assert!(matches!(
            WishartParams::new(PdMatrix::identity(2), 3.0).unwrap().mean_inverse(),
            Err(Error::ShapeTooSmall { .. })
        ));

        let w = WishartParams::from_scale(PdMatrix::identity(2), 6.0).unwrap();
        assert!((w.mode().unwrap().matrix() - DMatrix::identity(2, 2) * 3.0).norm() < 1e-14);
        let boundary = WishartParams::from_scale(PdMatrix::identity(2), 3.0).unwrap();
        assert!(matches!(boundary.mode(), Err(Error::NoInteriorMode { .. })));
    }

    #[test]
    fn mode_beats_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in 1..=4 {
            let w = WishartParams::new(rand_pd(d, &mut rng), d as f64 + 1.5 + rng.random::<f64>() * 4.0).unwrap();
            let mode = w.mode().unwrap();
            let at_mode = w.log_pdf(&mode).unwrap();
            for _ in 0..50 {
                let e = rand_sym(d, 0.05 * mode.matrix().norm(), &mut rng);
                if let Ok(p) = PdMatrix::new(mode.matrix() + e) {
                    assert!(at_mode > w.log_pdf(&p).unwrap());
                }
                for c in [0.99, 1.01] {
                    assert!(at_mode > w.log_pdf(&mode.scaled(c).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn scaling_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let d = rng.random_range(1..=4);
            let nu = d as f64 - 1.0 + 0.1 + rng.random::<f64>() * 5.0;
            let v = rand_pd(d, &mut rng);
            let p = rand_pd(d, &mut rng);
            let a = DMatrix::from_fn(d, d, |i, j| rng.random_range(-1.0..1.0) + if i == j { 1.5 } else { 0.0 });
            let w = WishartParams::from_scale(v.clone(), nu).unwrap();
            let wa = WishartParams::from_scale(PdMatrix::new(&a * v.matrix() * a.transpose()).unwrap(), nu).unwrap();
            let pa = PdMatrix::new(&a * p.matrix() * a.transpose()).unwrap();
            let jac = (d as f64 + 1.0) * a.determinant().abs().ln();
            let r = w.log_pdf(&p).unwrap() - wa.log_pdf(&pa).unwrap() - jac;
            assert!(r.abs() < 1e-9, "residual {r}");
        }
    }

    #[test]
    fn sampler_is_deterministic_and_pd() {
        let w = WishartParams::new(PdMatrix::from_diagonal(&[1.0, 2.0, 0.5]).unwrap(), 4.5).unwrap();
        let a = w.sample(&mut ChaCha8Rng::seed_from_u64(42));
        let b = w.sample(&mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let draw = w.sample(&mut rng);
            let refactored = PdMatrix::new(draw.matrix().clone()).unwrap();
            assert!((refactored.logdet() - draw.logdet()).abs() < 1e-9);
        }
    }

    fn assert_mean_within(w: &WishartParams, n: usize, z_max: f64, seed: u64) {
        let d = w.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = DMatrix::<f64>::zeros(d, d);
        let mut sq = DMatrix::<f64>::zeros(d, d);
        for _ in 0..n {
            let p = w.sample(&mut rng);
            sum += p.matrix();
            sq += p.matrix().component_mul(p.matrix());
        }
        let nf = n as f64;
        let mean = &sum / nf;
        let exact = w.mean();
        for i in 0..d {
            for j in 0..d {
                let var = (sq[(i, j)] / nf - mean[(i, j)].powi(2)) * nf / (nf - 1.0);
                let z = (mean[(i, j)] - exact.matrix()[(i, j)]).abs() / (var / nf).sqrt();
                assert!(z < z_max, "(d={d}, nu={}) entry ({i},{j}) z={z}", w.shape());
            }
        }
    }

    #[test]
    fn sampler_mean_matches_nu_v() {
        assert_mean_within(&WishartParams::from_scale(scalar(1.0), 4.0).unwrap(), 100_000, 3.0, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (d, nu) in [(1, 1.5), (2, 3.5), (3, 4.2)] {
            let w = WishartParams::from_scale(rand_pd(d, &mut rng), nu).unwrap();
            assert_mean_within(&w, 100_000, 3.0, 100 + d as u64);
        }
    }

    #[test]
    fn inverse_wishart_jacobian_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let d = rng.random_range(1..=4);
            let nu = d as f64 - 1.0 + 0.05 + rng.random::<f64>() * 6.0;
            let s = rand_pd(d, &mut rng);
            let c = rand_pd(d, &mut rng);
            let iw = InverseWishartParams::new(s.clone(), nu).unwrap();
            let w = WishartParams::new(s, nu).unwrap();
            let r = iw.log_pdf(&c).unwrap() - w.log_pdf(&c.inverse().unwrap()).unwrap() + (d as f64 + 1.0) * c.logdet();
            assert!(r.abs() < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn scalar_inverse_wishart_is_inverse_gamma() {
        for (s, nu, c) in [(1.0f64, 2.0, 0.5f64), (3.0, 0.4, 2.0), (0.2, 7.0, 0.03)] {
            let iw = InverseWishartParams::new(scalar(s), nu).unwrap();
            let (a, b) = (nu / 2.0, s / 2.0);
            let expected = a * b.ln() - libm::lgamma(a) - (a + 1.0) * c.ln() - b / c;
            assert!((iw.log_pdf(&scalar(c)).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_wishart_mode_beats_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for d in 1..=4 {
            let iw = InverseWishartParams::new(rand_pd(d, &mut rng), d as f64 + rng.random::<f64>() * 3.0).unwrap();
            let mode = iw.mode();
            let at_mode = iw.log_pdf(&mode).unwrap();
            for _ in 0..50 {
                let e = rand_sym(d, 0.05 * mode.matrix().norm(), &mut rng);
                if let Ok(c) = PdMatrix::new(mode.matrix() + e) {
                    assert!(at_mode > iw.log_pdf(&c).unwrap());
                }
            }
        }
    }

    proptest! {
        // P -> cP with S -> S/c leaves tr(PS) fixed; the density picks up c^{-d(d+1)/2}.
        #[test]
        fn log_pdf_scaling_jacobian(seed in any::<u64>(), d in 1usize..=4, extra in 0.01f64..6.0, c in 0.1f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nu = d as f64 - 1.0 + extra;
            let s = rand_pd(d, &mut rng);
            let p = rand_pd(d, &mut rng);
            let w = WishartParams::new(s.clone(), nu).unwrap();
            let wc = WishartParams::new(s.scaled(1.0 / c).unwrap(), nu).unwrap();
            let jac = (d * (d + 1)) as f64 / 2.0 * c.ln();
            let lhs = wc.log_pdf(&p.scaled(c).unwrap()).unwrap();
            prop_assert!((lhs - (w.log_pdf(&p).unwrap() - jac)).abs() < 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn draws_are_positive_definite(seed in any::<u64>(), d in 1usize..=5, extra in 0.01f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = WishartParams::from_scale(rand_pd(d, &mut rng), d as f64 - 1.0 + extra).unwrap();
            let draw = w.sample(&mut rng);
            prop_assert!(draw.logdet().is_finite());
            prop_assert!((draw.matrix() - draw.matrix().transpose()).norm() == 0.0);
        }
    }
}
