//! Priors specified by a mode covariance and a pseudocount.

use klwishart::{Error, KlNormalWishartPrior, KlWishartPrior, PdMatrix};
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Error> {
    let sigma = PdMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]))?;
    let m = DVector::from_vec(vec![1.0, -1.0]);

    for alpha in [0.1, 1.0, 10.0] {
        let known = KlWishartPrior::new(m.clone(), sigma.clone(), alpha)?;
        let w = known.to_wishart();
        println!("alpha = {alpha}: W((alpha Sigma)^-1, {}) with mode\n{}", w.shape(), known.mode()?.matrix());
    }

    let joint = KlNormalWishartPrior::new(m, sigma, 2.0)?;
    let nw = joint.to_normal_wishart();
    let (mu0, p0) = joint.mode()?;
    println!("normal-Wishart: shape {}, mean scale {}", nw.wishart.shape(), nw.mean_precision_scale);
    println!("joint mode mean {} precision\n{}", mu0.transpose(), p0.matrix());
    // The Wishart factor alone peaks at (alpha - 1)/alpha times the joint mode precision.
    println!("marginal Wishart mode\n{}", nw.wishart.mode()?.matrix());
    println!("log density at the mode = {:.6}", joint.log_density(&mu0, &p0)?);
    Ok(())
}
