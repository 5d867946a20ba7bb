//! Oscillator eigenfunctions and functions of the truncated quadratures.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::FockOperator;
use crate::error::{Error, Result};

const RESCALE: f64 = 1e150;

/// `psi_n(x) = pi^(-1/4) (2^n n!)^(-1/2) H_n(x) exp(-x^2/2)`.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    hermite_functions(n + 1, x)[n]
}

/// `psi_0(x), ..., psi_{count-1}(x)`.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    log_hermite(count, x)
        .into_iter()
        .map(|(ln, sign)| sign * ln.exp())
        .collect()
}

/// `(ln |psi_n(x)|, sign psi_n(x))`, immune to underflow at large `|x|`.
fn log_hermite(count: usize, x: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    // Values are carried as y * e^offset with y kept near 1
    let mut offset = -0.25 * std::f64::consts::PI.ln() - 0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = 1.0f64;
    out.push((offset, 1.0));
    for n in 0..count - 1 {
        let next =
            (2.0 / (n + 1) as f64).sqrt() * x * cur - (n as f64 / (n + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        let a = cur.abs().max(prev.abs());
        if a > RESCALE || (a < 1.0 / RESCALE && a > 0.0) {
            let s = a.ln();
            offset += s;
            let k = (-s).exp();
            cur *= k;
            prev *= k;
        }
        out.push(if cur == 0.0 {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (cur.abs().ln() + offset, cur.signum())
        });
    }
    out
}

/// `exp(phi(X))` for the truncated position quadrature, through the exact
/// spectral decomposition of `X_N`: its eigenvalues are the zeros of
/// `psi_N` and its eigenvectors are `psi_j` sampled there. Products are
/// formed in log space so growing exponents such as `exp(l x^2)` with
/// `Re l > 0` stay accurate.
pub fn position_exp<F>(dim: usize, phi: F) -> Result<FockOperator>
where
    F: Fn(f64) -> Complex64,
{
    if dim < 2 {
        return Err(Error::Dimension(dim));
    }
    let jacobi = DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            (j as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            (i as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let nodes = SymmetricEigen::new(jacobi).eigenvalues;

    let vecs: Vec<(Complex64, Vec<(f64, f64)>)> = nodes
        .iter()
        .map(|&x| {
            let mut lv = log_hermite(dim, x);
            let top = lv.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let ln_norm = top
                + 0.5
                    * lv.iter()
                        .map(|p| (2.0 * (p.0 - top)).exp())
                        .sum::<f64>()
                        .ln();
            lv.iter_mut().for_each(|p| p.0 -= ln_norm);
            (phi(x), lv)
        })
        .collect();

    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for (ph, lv) in &vecs {
        for j in 0..dim {
            let (lj, sj) = lv[j];
            if sj == 0.0 {
                continue;
            }
            for i in j..dim {
                let (li, si) = lv[i];
                if si == 0.0 {
                    continue;
                }
                let w = (ph + li + lj).exp() * (si * sj);
                out[(i, j)] += w;
            }
        }
    }
    for j in 0..dim {
        for i in 0..j {
            out[(i, j)] = out[(j, i)];
        }
    }
    FockOperator::new(out).map_err(|e| match e {
        Error::NonFinite => Error::Range,
        other => other,
    })
}

/// `exp(phi(P))`, using `P = U X U^dag` with `U = diag(i^n)`.
pub fn momentum_exp<F>(dim: usize, phi: F) -> Result<FockOperator>
where
    F: Fn(f64) -> Complex64,
{
    let x = position_exp(dim, phi)?;
    let pow_i = |k: usize| match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let m = DMatrix::from_fn(dim, dim, |i, j| x.get(i, j) * pow_i((i + 4 * dim - j) % 4));
    FockOperator::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{block_residual, exp_hermitian, quadrature_matrices};

    #[test]
    fn closed_forms() {
        assert!((hermite_function(0, 0.0) - 0.751_125_544_464_942_5).abs() < 1e-15);
        assert_eq!(hermite_function(1, 0.0), 0.0);
        let x: f64 = 0.7;
        let psi2 = std::f64::consts::PI.powf(-0.25) / 8f64.sqrt()
            * (4.0 * x * x - 2.0)
            * (-x * x / 2.0).exp();
        assert!((hermite_function(2, x) - psi2).abs() < 1e-15);
    }

    #[test]
    fn normalized_by_quadrature() {
        let dx = 0.01;
        let xs: Vec<f64> = (-1500..=1500).map(|k| k as f64 * dx).collect();
        let table: Vec<Vec<f64>> = xs.iter().map(|&x| hermite_functions(65, x)).collect();
        for n in 0..=64 {
            let norm: f64 = table.iter().map(|v| v[n] * v[n]).sum::<f64>() * dx;
            assert!((norm - 1.0).abs() < 1e-8, "n={n}: {norm}");
        }
        let overlap: f64 = table.iter().map(|v| v[3] * v[7]).sum::<f64>() * dx;
        assert!(overlap.abs() < 1e-10);
    }

    #[test]
    fn no_underflow_far_out() {
        let v = log_hermite(4097, 45.0);
        assert!(v.iter().all(|p| p.0.is_finite()));
        let near = hermite_functions(4097, 20.0);
        assert!(near.iter().all(|v| v.is_finite()));
        assert!(near[4096].abs() < 1.0);
    }

    #[test]
    fn functional_calculus_matches_eigendecomposition() {
        let n = 48;
        let (x, p) = quadrature_matrices(n).unwrap();
        let theta = 0.37;
        let a = position_exp(n, |t| Complex64::new(0.0, theta * t * t)).unwrap();
        let b = exp_hermitian(&(&x * &x), Complex64::new(0.0, theta)).unwrap();
        assert!(block_residual(a.matrix(), b.matrix(), n) < 1e-11);
        let a = momentum_exp(n, |t| Complex64::new(0.0, -theta * t)).unwrap();
        let b = exp_hermitian(&p, Complex64::new(0.0, -theta)).unwrap();
        assert!(block_residual(a.matrix(), b.matrix(), n) < 1e-11);
    }
}
