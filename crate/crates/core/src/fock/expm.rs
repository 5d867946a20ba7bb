use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::FockOperator;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;

/// `exp(scale * H)` through the eigendecomposition of the Hermitian `H`.
/// With a purely imaginary scale the result is unitary to rounding.
pub fn exp_hermitian(h: &FockOperator, scale: Complex64) -> Result<FockOperator> {
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let m = h.matrix();
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let w = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| (scale * l).exp()),
    );
    let v = &eig.eigenvectors;
    let mut vw = v.clone();
    for (mut col, wk) in vw.column_iter_mut().zip(w.iter()) {
        col *= *wk;
    }
    FockOperator::new(vw * v.adjoint()).map_err(|e| match e {
        Error::NonFinite => Error::Range,
        other => other,
    })
}

/// General matrix exponential (scaling and squaring with a Pade approximant).
pub fn exp_general(g: &FockOperator) -> Result<FockOperator> {
    let e: DMatrix<Complex64> = g.matrix().exp();
    FockOperator::new(e).map_err(|_| Error::Range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{
        block_residual, exp_adag_squared, ladder_matrices, max_abs, quadrature_matrices,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_scale_is_identity() {
        let (x, _) = quadrature_matrices(10).unwrap();
        let u = exp_hermitian(&x, c(0.0, 0.0)).unwrap();
        assert!(
            block_residual(u.matrix(), FockOperator::identity(10).unwrap().matrix(), 10) < 1e-14
        );
        let z = FockOperator::new(DMatrix::zeros(6, 6)).unwrap();
        assert_eq!(exp_general(&z).unwrap(), FockOperator::identity(6).unwrap());
    }

    #[test]
    fn parity_operator() {
        let (a, adag) = ladder_matrices(12).unwrap();
        let num = &adag * &a;
        let par = exp_hermitian(&num, c(0.0, std::f64::consts::PI)).unwrap();
        for n in 0..12 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((par.get(n, n) - c(sign, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_pairs() {
        let (x, _) = quadrature_matrices(64).unwrap();
        let x2 = &x * &x;
        let u = exp_hermitian(&x2, c(0.0, 0.4)).unwrap();
        let v = exp_hermitian(&x2, c(0.0, -0.4)).unwrap();
        let id = FockOperator::identity(64).unwrap();
        assert!(block_residual((&u * &v).matrix(), id.matrix(), 64) < 1e-10);
        assert!(u.unitarity_residual() < 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let (a, _) = ladder_matrices(4).unwrap();
        assert!(matches!(
            exp_hermitian(&a, c(0.0, 1.0)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn general_matches_terminating_series() {
        let n = 40;
        let f = c(0.35, -0.2);
        let (_, adag) = ladder_matrices(n).unwrap();
        let gen = (&adag * &adag).scale(f);
        let e = exp_general(&gen).unwrap();
        let (series, _) = exp_adag_squared(f, n);
        let diff = max_abs(&(e.matrix() - &series));
        assert!(diff < 1e-10 * max_abs(&series).max(1.0), "{diff}");
    }

    #[test]
    fn general_inverse_pair() {
        let n = 16;
        let m = DMatrix::from_fn(n, n, |i, j| {
            c(
                ((i * 7 + j * 3) % 5) as f64 * 0.05 - 0.1,
                ((i + 2 * j) % 3) as f64 * 0.04,
            )
        });
        let a = FockOperator::new(m).unwrap();
        let p = exp_general(&a)
            .unwrap()
            .compose(&exp_general(&a.scale(c(-1.0, 0.0))).unwrap())
            .unwrap();
        assert!(block_residual(p.matrix(), FockOperator::identity(n).unwrap().matrix(), n) < 1e-10);
    }

    #[test]
    fn overflow_is_a_range_error() {
        let m = DMatrix::from_element(4, 4, c(1e3, 0.0));
        assert_eq!(
            exp_general(&FockOperator::new(m).unwrap()),
            Err(Error::Range)
        );
    }
}
