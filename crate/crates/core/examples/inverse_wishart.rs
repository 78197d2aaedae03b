//! The inverse-Wishart law of a covariance and its relation to the precision law.

use klwishart::{Error, InverseWishartParams, PdMatrix};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Error> {
    let s = PdMatrix::new(DMatrix::from_row_slice(2, 2, &[3.0, 0.5, 0.5, 2.0]))?;
    let iw = InverseWishartParams::new(s, 7.0)?;
    let w = iw.precision_law();

    let c = PdMatrix::new(DMatrix::from_row_slice(2, 2, &[0.6, 0.1, 0.1, 0.4]))?;
    let lhs = iw.log_pdf(&c)?;
    let rhs = w.log_pdf(&c.inverse()?)? - 3.0 * c.logdet();
    println!("log IW(C) = {lhs:.12}");
    println!("log W(C^-1) - (d+1) log|C| = {rhs:.12}");

    println!("IW mode S / (nu + d + 1) =\n{}", iw.mode().matrix());
    println!("inverse of the precision mode =\n{}", w.mode()?.inverse()?.matrix());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    println!("one draw =\n{}", iw.sample(&mut rng)?.matrix());
    Ok(())
}
