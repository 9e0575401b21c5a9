use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

const TAYLOR_ORDER: usize = 18;
const SCALED_NORM: f64 = 0.5;
const MAX_SQUARINGS: u32 = 1000;

/// Dense matrix exponential by scaling and squaring with a fixed-order
/// Taylor polynomial.
///
/// The matrix is scaled by `2^-s` until its 1-norm is at most 1/2, where an
/// order-18 Taylor sum is accurate well past double precision, then squared
/// back `s` times.
pub fn matrix_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "matrix_exp needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numeric("matrix_exp", "non-finite input entry"));
    }
    let norm = one_norm(m);
    let mut squarings = 0u32;
    if norm > SCALED_NORM {
        squarings = (norm / SCALED_NORM).log2().ceil() as u32;
    }
    if squarings > MAX_SQUARINGS {
        return Err(Error::numeric(
            "matrix_exp",
            format!("1-norm {norm:e} too large to exponentiate"),
        ));
    }
    let scaled = m * Complex64::new(0.5f64.powi(squarings as i32), 0.0);

    let mut result = ComplexMatrix::identity(n, n);
    let mut term = ComplexMatrix::identity(n, n);
    for k in 1..=TAYLOR_ORDER {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numeric("matrix_exp", "overflow in result"));
    }
    Ok(result)
}

fn one_norm(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_gives_identity() {
        let e = matrix_exp(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(2, 2));
    }

    #[test]
    fn planar_rotation() {
        let a = PI / 2.0;
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-a, 0.0), c(a, 0.0), c(0.0, 0.0)]);
        let e = matrix_exp(&m).unwrap();
        let expect =
            ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(max_abs_diff(&e, &expect) < 1e-12);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(matches!(
            matrix_exp(&ComplexMatrix::zeros(2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(f64::INFINITY, 0.0);
        assert!(matches!(matrix_exp(&m), Err(Error::NumericFailure { .. })));
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = c(1e6, 0.0);
        assert!(matches!(matrix_exp(&m), Err(Error::NumericFailure { .. })));
    }

    #[test]
    fn scalar_diagonal_matches_exp() {
        let m = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.5, 0.3),
            c(-7.0, 2.0),
            c(0.0, 12.0),
        ]));
        let e = matrix_exp(&m).unwrap();
        for i in 0..3 {
            let want = m[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }
}
