//! Unknown-mean update in both the mode-and-pseudocount and the classical views,
//! plus batch merging.

use klwishart::{map_unknown, posterior_unknown, suff_stats, Error, Gaussian, KlNormalWishartPrior, PdMatrix};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let source = Gaussian::new(
        DVector::from_vec(vec![3.0, -1.0]),
        PdMatrix::new(DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.2, 0.5]))?,
    )?;
    let data: Vec<_> = (0..200).map(|_| source.sample(&mut rng)).collect();

    let prior = KlNormalWishartPrior::new(DVector::zeros(2), PdMatrix::identity(2), 4.0)?;
    let stats = suff_stats(&data)?;
    let post = posterior_unknown(&prior, &stats)?;
    println!("alpha* = {}", post.pseudocount());
    println!("m* = {}", post.mean().transpose());
    println!("sigma* =\n{}", post.mode_cov().matrix());

    let nw = post.to_normal_wishart();
    println!(
        "classical: W(shape {}, scatter\n{}) x N(mean, ({} P)^-1)",
        nw.wishart.shape(),
        nw.wishart.scatter().matrix(),
        nw.mean_precision_scale
    );

    let (mu_hat, cov_hat) = map_unknown(&post);
    println!("MAP mean {} covariance\n{}", mu_hat.transpose(), cov_hat.matrix());

    // Updating on two halves in sequence gives the same posterior.
    let first = posterior_unknown(&prior, &suff_stats(&data[..80])?)?;
    let second = posterior_unknown(&first.as_prior(), &suff_stats(&data[80..])?)?;
    let diff = (second.mode_cov().matrix() - post.mode_cov().matrix()).norm();
    println!(
        "sequential vs batch: alpha* {} vs {}, sigma* difference {diff:.2e}",
        second.pseudocount(),
        post.pseudocount()
    );
    Ok(())
}
