//! Closed-form Gaussian KL divergence and the identity tying it to expected log-likelihood.

use klwishart::{expected_loglik, kl, Error, Gaussian, PdMatrix};
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Error> {
    let p = Gaussian::new(
        DVector::from_vec(vec![0.0, 1.0]),
        PdMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]))?,
    )?;
    let q = Gaussian::new(DVector::from_vec(vec![0.5, 0.0]), PdMatrix::from_diagonal(&[2.0, 1.0])?)?;

    println!("KL(p || q) = {:.12}", kl(&p, &q)?);
    println!("KL(q || p) = {:.12}", kl(&q, &p)?);
    println!("KL(p || p) = {:.12}", kl(&p, &p)?);

    // E_p[log q] = -KL(p || q) - H(p).
    let ell = expected_loglik(&p, q.mean(), &q.cov().inverse()?)?;
    println!("E_p[log q] = {ell:.12}, -KL - H = {:.12}", -kl(&p, &q)? - p.entropy());

    let one = Gaussian::new(DVector::zeros(1), PdMatrix::identity(1))?;
    let two = Gaussian::new(DVector::zeros(1), PdMatrix::from_diagonal(&[2.0])?)?;
    println!("KL(N(0,1) || N(0,2)) = {:.10}", kl(&one, &two)?);
    Ok(())
}
