//! Known-mean conjugate update and the MAP precision.

use klwishart::{map_known_mean, posterior_known_mean, Error, Gaussian, KlWishartPrior, PdMatrix};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mu = DVector::from_vec(vec![0.0, 2.0]);
    let truth = PdMatrix::new(DMatrix::from_row_slice(2, 2, &[1.5, -0.4, -0.4, 0.7]))?;
    let source = Gaussian::new(mu.clone(), truth.clone())?;

    let prior = KlWishartPrior::new(mu, PdMatrix::identity(2), 5.0)?;
    for n in [0usize, 10, 100, 1000] {
        let data: Vec<_> = (0..n).map(|_| source.sample(&mut rng)).collect();
        let post = posterior_known_mean(&prior, &data)?;
        let cov = post.map_cov()?;
        println!(
            "n = {n:4}: pseudocount {:6}, shape {:6}, MAP covariance [{:.3} {:.3}; {:.3}]",
            post.pseudocount(),
            post.wishart().shape(),
            cov.matrix()[(0, 0)],
            cov.matrix()[(0, 1)],
            cov.matrix()[(1, 1)]
        );
    }

    let data: Vec<_> = (0..30).map(|_| source.sample(&mut rng)).collect();
    let post = posterior_known_mean(&prior, &data)?;
    println!("MAP precision =\n{}", map_known_mean(&post)?.matrix());
    // The covariance mode is smaller by (n + alpha + 2d + 2) / (n + alpha).
    println!("covariance mode =\n{}", post.covariance_mode().matrix());
    println!("posterior as a prior: alpha = {}", post.as_prior()?.pseudocount());
    Ok(())
}
