//! Building positive-definite matrices, and what gets rejected.

use klwishart::{Error, PdMatrix};
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Error> {
    let a = PdMatrix::new(DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]))?;
    println!("A =\n{}", a.matrix());
    println!("L (lower Cholesky factor) =\n{}", a.cholesky_factor());
    println!("log|A| = {:.12}", a.logdet());

    let v = DVector::from_vec(vec![1.0, -1.0, 2.0]);
    println!("v'Av = {:.6}, v'A^-1 v = {:.6}", a.quad_form(&v)?, a.inv_quad_form(&v)?);
    println!("A^-1 v = {}", a.solve_vec(&v).transpose());
    println!("tr(A A^-1) = {:.12}", a.trace_product(&a.inverse()?)?);

    // Asymmetry at rounding level is symmetrized away.
    let nearly = DMatrix::from_row_slice(2, 2, &[2.0, 0.5 + 1e-15, 0.5, 1.0]);
    println!("nearly symmetric accepted: {}", PdMatrix::new(nearly).is_ok());

    for (label, m) in [
        ("indefinite", DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])),
        ("singular", DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])),
        ("non-square", DMatrix::zeros(2, 3)),
    ] {
        println!("{label}: {}", PdMatrix::new(m).unwrap_err());
    }
    Ok(())
}
