//! The alpha -> 0 limit: the MAP becomes the maximum-likelihood estimate.

use klwishart::{
    ml_estimate, noninformative_posterior, posterior_unknown, suff_stats, Error, Gaussian, KlNormalWishartPrior,
    MeanMode, PdMatrix,
};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let source = Gaussian::new(DVector::from_vec(vec![1.0, 0.0, -1.0]), PdMatrix::from_diagonal(&[1.0, 2.0, 0.5])?)?;
    let data: Vec<_> = (0..50).map(|_| source.sample(&mut rng)).collect();
    let stats = suff_stats(&data)?;

    let (ml_mean, ml_cov) = ml_estimate(&stats, None)?;
    let limit = noninformative_posterior(&stats, MeanMode::Unknown, &PdMatrix::identity(3))?;
    let (map_mean, map_cov) = limit.map()?;
    println!("alpha = 0 MAP equals ML exactly: {}", map_mean == ml_mean && map_cov == ml_cov);

    let sigma = PdMatrix::new(DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0]))?;
    for k in 1..=6 {
        let alpha = 10f64.powi(-k);
        let prior = KlNormalWishartPrior::new(DVector::zeros(3), sigma.clone(), alpha)?;
        let post = posterior_unknown(&prior, &stats)?;
        let err = (post.mode_cov().matrix() - ml_cov.matrix()).norm() / ml_cov.matrix().norm();
        println!("alpha = 1e-{k}: relative distance to ML {err:.3e}");
    }

    // Too few rows for the centered scatter to be full rank.
    let few = suff_stats(&data[..3])?;
    println!("n = 3, d = 3: {}", ml_estimate(&few, None).unwrap_err());
    Ok(())
}
