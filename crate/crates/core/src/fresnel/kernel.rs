//! Coordinate-space kernel of the Fresnel operator.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::{hermite_functions, unit, FockOperator};
use crate::optics::RayMatrix;
use crate::report::csv_number;

const DELTA_TOL: f64 = 1e-12;

/// `(2 pi i B)^(-1/2) exp{ i/(2B) (A x1^2 - 2 x1 x2 + D x2^2) }`.
pub fn kernel_analytic(m: &RayMatrix, x2: f64, x1: f64) -> Result<Complex64> {
    let [a, b, _, d] = m.entries();
    if b.abs() < DELTA_TOL {
        return Err(Error::DeltaKernel { b });
    }
    let amp = Complex64::new(0.0, 2.0 * PI * b).sqrt().inv();
    let phase = (a * x1 * x1 - 2.0 * x1 * x2 + d * x2 * x2) / (2.0 * b);
    Ok(amp * Complex64::from_polar(1.0, phase))
}

/// `sum_{m,n < n_max} psi_m(x2) op[m,n] psi_n(x1)`.
pub fn kernel_from_fock(op: &FockOperator, x2: f64, x1: f64, n_max: usize) -> Result<Complex64> {
    if n_max > op.dim() {
        return Err(Error::DimensionMismatch {
            left: n_max,
            right: op.dim(),
        });
    }
    let p2 = hermite_functions(n_max, x2);
    let p1 = hermite_functions(n_max, x1);
    let m = op.matrix();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &w1) in p1.iter().enumerate() {
        let col: Complex64 = p2.iter().enumerate().map(|(i, &w2)| m[(i, j)] * w2).sum();
        acc += col * w1;
    }
    Ok(acc)
}

/// `count` uniform points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || hi.is_nan() || lo.is_nan() || hi <= lo {
            return Err(Error::Domain(format!(
                "grid needs hi > lo and at least 2 points (got [{lo}, {hi}], {count})"
            )));
        }
        Ok(Grid { lo, hi, count })
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.lo + step * i as f64).collect()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            lo: -2.0,
            hi: 2.0,
            count: 41,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPoint {
    pub x1: f64,
    pub x2: f64,
    pub analytic: Complex64,
    pub fock: Complex64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelComparison {
    pub points: Vec<KernelPoint>,
    pub phase: Complex64,
    pub max_abs_err: f64,
}

impl KernelComparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,re_analytic,im_analytic,re_fock,im_fock,abs_err\n");
        for p in &self.points {
            let cells = [
                p.x1,
                p.x2,
                p.analytic.re,
                p.analytic.im,
                p.fock.re,
                p.fock.im,
                p.abs_err,
            ];
            let row: Vec<String> = cells.iter().map(|&v| csv_number(v)).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Compares the Hermite-sum kernel of `op` with the closed form on a square
/// grid. The analytic values are multiplied by the single phase that best
/// aligns them, and `abs_err` is measured after that alignment.
pub fn kernel_comparison(
    m: &RayMatrix,
    op: &FockOperator,
    grid: &Grid,
    exec: Execution,
) -> Result<KernelComparison> {
    let n = op.dim();
    let xs = grid.points();
    // Psi[j, p] = psi_j(x_p)
    let cols: Vec<Vec<f64>> = exec.map(&xs, |&x| hermite_functions(n, x));
    let psi = DMatrix::from_fn(n, xs.len(), |j, p| Complex64::new(cols[p][j], 0.0));
    // K[q, p] = sum psi_i(x_q) op[i, j] psi_j(x_p), with x2 = x_q, x1 = x_p
    let fock = psi.transpose() * op.matrix() * &psi;

    let mut pairs = Vec::with_capacity(xs.len() * xs.len());
    for (q, &x2) in xs.iter().enumerate() {
        for (p, &x1) in xs.iter().enumerate() {
            pairs.push((x1, x2, kernel_analytic(m, x2, x1)?, fock[(q, p)]));
        }
    }
    let overlap: Complex64 = pairs.iter().map(|&(_, _, a, f)| a.conj() * f).sum();
    let phase = unit(overlap);
    let points: Vec<KernelPoint> = pairs
        .into_iter()
        .map(|(x1, x2, a, f)| KernelPoint {
            x1,
            x2,
            analytic: a,
            fock: f,
            abs_err: (f - phase * a).norm(),
        })
        .collect();
    let max_abs_err = points.iter().fold(0.0f64, |m, p| m.max(p.abs_err));
    Ok(KernelComparison {
        points,
        phase,
        max_abs_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fresnel::fresnel_normal_order;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_space_kernel() {
        let d = 0.8;
        let m = RayMatrix::free_space(d);
        for &(x2, x1) in &[(0.3, -1.1), (1.7, 0.2), (0.0, 0.0)] {
            let k = kernel_analytic(&m, x2, x1).unwrap();
            let want = c(0.0, 2.0 * PI * d).sqrt().inv()
                * Complex64::from_polar(1.0, (x2 - x1) * (x2 - x1) / (2.0 * d));
            assert!((k - want).norm() < 1e-15);
            assert!((k.norm() - (2.0 * PI * d).powf(-0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_symmetry_and_errors() {
        let m = RayMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let swapped = RayMatrix::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let a = kernel_analytic(&m, 0.4, -1.3).unwrap();
        let b = kernel_analytic(&swapped, -1.3, 0.4).unwrap();
        assert!((a - b).norm() < 1e-15);
        let neg = RayMatrix::new(1.0, -0.5, 0.0, 1.0).unwrap();
        assert!((kernel_analytic(&neg, 0.1, 0.2).unwrap().norm() - (PI).powf(-0.5)).abs() < 1e-15);
        assert!(matches!(
            kernel_analytic(&RayMatrix::IDENTITY, 0.0, 0.0),
            Err(Error::DeltaKernel { .. })
        ));
    }

    #[test]
    fn identity_kernel_is_symmetric() {
        let id = FockOperator::identity(128).unwrap();
        let a = kernel_from_fock(&id, 0.3, -0.9, 128).unwrap();
        let b = kernel_from_fock(&id, -0.9, 0.3, 128).unwrap();
        assert!((a - b).norm() < 1e-14);
        assert!(kernel_from_fock(&id, 0.0, 0.0, 128).unwrap().re > 1.0);
        assert!(kernel_from_fock(&id, 0.0, 0.0, 129).is_err());
    }

    #[test]
    fn grid_comparison_matches_pointwise_sum() {
        let m = RayMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let op = fresnel_normal_order(&m, 48).unwrap();
        let grid = Grid::new(-1.0, 1.0, 3).unwrap();
        let cmp = kernel_comparison(&m, &op, &grid, Execution::Sequential).unwrap();
        assert_eq!(cmp.points.len(), 9);
        for p in &cmp.points {
            let direct = kernel_from_fock(&op, p.x2, p.x1, 48).unwrap();
            assert!((direct - p.fock).norm() < 1e-10);
        }
        let csv = cmp.to_csv();
        assert!(csv.starts_with("x1,x2,re_analytic,im_analytic,re_fock,im_fock,abs_err\n"));
        assert_eq!(csv.lines().count(), 10);
    }
}
