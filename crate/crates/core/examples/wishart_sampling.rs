//! Wishart densities and Bartlett sampling with a real-valued shape.
//!
//! `cargo run --release --example wishart_sampling`

use klwishart::{Error, PdMatrix, WishartParams};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Error> {
    let scale = PdMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.8]))?;
    let w = WishartParams::from_scale(scale, 5.5)?;
    println!("E[P] = nu V =\n{}", w.mean().matrix());
    println!("E[P^-1] = S / (nu - d - 1) =\n{}", w.mean_inverse()?.matrix());
    println!("mode = (nu - d - 1) V =\n{}", w.mode()?.matrix());
    println!("log W(mode) = {:.6}", w.log_pdf(&w.mode()?)?);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 20_000;
    let mut sum = DMatrix::zeros(2, 2);
    for _ in 0..n {
        sum += w.sample(&mut rng).matrix();
    }
    println!("Monte Carlo mean over {n} draws =\n{}", sum / n as f64);

    // Shapes must exceed d - 1; fractional shapes above that are fine.
    println!("nu = 1.2 at d = 2: {}", WishartParams::new(PdMatrix::identity(2), 1.2).is_ok());
    println!("nu = 1.0 at d = 2: {}", WishartParams::new(PdMatrix::identity(2), 1.0).unwrap_err());
    Ok(())
}
