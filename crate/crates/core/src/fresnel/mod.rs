//! The Fresnel operator `F(A, B, C)` on the truncated Fock space.
//!
//! Two constructions are provided. The normally ordered route evaluates the
//! Gaussian form directly and works for every unimodular matrix. The canonical
//! route multiplies a quadratic phase, a squeeze and a free propagator, which
//! needs `A > 0`.

mod kernel;
mod transform;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::{
    self, dilation_generator, exp_hermitian, interior_dim, normal_ordered_block_with,
    normal_ordered_gaussian, phase_aligned_residual, quadrature_matrices, FockOperator,
    GaussianExponents,
};
use crate::optics::RayMatrix;

pub use kernel::{
    kernel_analytic, kernel_comparison, kernel_from_fock, Grid, KernelComparison, KernelPoint,
};
pub use transform::{fresnel_transform_numeric, SampledField};

/// Negligible tail weight when sizing contraction guards.
const TAIL: f64 = 1e-18;
/// Upper bound on a guard, as a multiple of the truncation.
const MAX_GUARD_FACTOR: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    NormalOrder,
    Canonical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FresnelBuild {
    pub matrix: RayMatrix,
    pub dim: usize,
    pub route: Route,
    pub op: FockOperator,
}

impl FresnelBuild {
    pub fn new(matrix: RayMatrix, dim: usize, route: Route) -> Result<Self> {
        let op = match route {
            Route::NormalOrder => fresnel_normal_order(&matrix, dim)?,
            Route::Canonical => fresnel_canonical(&matrix, dim)?,
        };
        Ok(FresnelBuild {
            matrix,
            dim,
            route,
            op,
        })
    }

    /// Interior unitarity residual of the stored `dim x dim` matrix. Strongly
    /// squeezing matrices leak weight past `dim`, which shows up here.
    pub fn truncated_unitarity_residual(&self) -> f64 {
        self.op.unitarity_residual()
    }

    /// Interior unitarity residual of `F(matrix)` itself, independent of the
    /// route and of truncation.
    pub fn unitarity_residual(&self) -> Result<f64> {
        unitarity_residual(&self.matrix, self.dim)
    }
}

/// Exponents of the normally ordered form of `F(A, B, C)`.
pub fn fresnel_exponents(m: &RayMatrix) -> GaussianExponents {
    let [a, b, c, d] = m.entries();
    let den = Complex64::new(a + d, b - c);
    let two = Complex64::new(2.0, 0.0);
    let e = two / den;
    GaussianExponents {
        prefactor: e.sqrt(),
        f: Complex64::new(a - d, b + c) / (den * 2.0),
        g: e - 1.0,
        h: -Complex64::new(a - d, -(b + c)) / (den * 2.0),
    }
}

pub fn fresnel_normal_order(m: &RayMatrix, dim: usize) -> Result<FockOperator> {
    normal_ordered_gaussian(&fresnel_exponents(m), dim)
}

/// Rows `0..rows`, columns `0..cols` of the untruncated operator.
pub fn fresnel_block(
    m: &RayMatrix,
    rows: usize,
    cols: usize,
    exec: Execution,
) -> Result<DMatrix<Complex64>> {
    normal_ordered_block_with(&fresnel_exponents(m), rows, cols, exec)
}

/// `exp(i C/(2A) X^2) exp(-i ln A (XP+PX)/2) exp(-i B/(2A) P^2)`.
///
/// The factors are built at twice the requested dimension and the product is
/// truncated afterwards.
pub fn fresnel_canonical(m: &RayMatrix, dim: usize) -> Result<FockOperator> {
    let [a, b, c, _] = m.entries();
    if a <= 0.0 {
        return Err(Error::Domain(format!(
            "the canonical route needs A > 0 (got A = {a}); use the normally ordered route"
        )));
    }
    let guard = 2 * dim;
    let lens = quadratic_phase(c / a, guard)?;
    let squeeze = squeeze_operator(a, guard)?;
    let prop = free_propagator(b / a, guard)?;
    lens.compose(&squeeze)?.compose(&prop)?.truncate(dim)
}

/// `exp(i (c/2) X^2)`.
pub fn quadratic_phase(c: f64, dim: usize) -> Result<FockOperator> {
    let (x, _) = quadrature_matrices(dim)?;
    exp_hermitian(&(&x * &x), Complex64::new(0.0, 0.5 * c))
}

/// `exp(-i (b/2) P^2)`.
pub fn free_propagator(b: f64, dim: usize) -> Result<FockOperator> {
    let (_, p) = quadrature_matrices(dim)?;
    exp_hermitian(&(&p * &p), Complex64::new(0.0, -0.5 * b))
}

/// `exp(-i ln A (XP+PX)/2)`, which maps `X` to `X / A`.
pub fn squeeze_operator(a: f64, dim: usize) -> Result<FockOperator> {
    if a <= 0.0 || !a.is_finite() {
        return Err(Error::Domain(format!(
            "squeeze parameter must be positive, got {a}"
        )));
    }
    exp_hermitian(&dilation_generator(dim)?, Complex64::new(0.0, -a.ln()))
}

/// Squeeze ratio `|r|/|s|`; column `n` of `F` decays like its `n/2`-th power.
pub fn decay_ratio(m: &RayMatrix) -> f64 {
    m.to_sr().ratio()
}

/// Intermediate dimension large enough that contracting `F2 F1` over it
/// reproduces the infinite product on the leading `k x k` block.
pub fn guard_dim(k: usize, rho: f64, dim: usize) -> usize {
    let cap = MAX_GUARD_FACTOR * dim;
    if rho.is_nan() || rho >= 1.0 {
        return cap;
    }
    let spread = (2 * k + 1) as f64 * (1.0 + rho) / (1.0 - rho);
    let tail = if rho > 0.0 {
        2.0 * (1.0 / TAIL).ln() / -rho.ln()
    } else {
        0.0
    };
    ((spread + tail).ceil() as usize).clamp(dim, cap)
}

/// Interior unitarity residual of `F(m)` with columns evaluated to a guard.
pub fn unitarity_residual(m: &RayMatrix, dim: usize) -> Result<f64> {
    let k = interior_dim(dim);
    let g = guard_dim(k, decay_ratio(m), dim);
    let cols = fresnel_block(m, g, k, Execution::default())?;
    let gram = cols.adjoint() * &cols;
    Ok(fock::max_abs(
        &(gram - DMatrix::<Complex64>::identity(k, k)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplicationCheck {
    pub residual: f64,
    pub phase: Complex64,
    pub guard: usize,
}

impl MultiplicationCheck {
    /// `|phase^2 - 1|`; zero when the product differs by a metaplectic sign.
    pub fn sign_defect(&self) -> f64 {
        (self.phase * self.phase - 1.0).norm()
    }
}

/// Compares `F(m2) F(m1)` with `F(m2 m1)` on the interior block of a
/// `dim`-level truncation. The product is contracted over a guard dimension
/// sized from the squeeze of both factors.
pub fn multiplication_check(
    m2: &RayMatrix,
    m1: &RayMatrix,
    dim: usize,
) -> Result<MultiplicationCheck> {
    multiplication_check_with(m2, m1, dim, Execution::default())
}

pub fn multiplication_check_with(
    m2: &RayMatrix,
    m1: &RayMatrix,
    dim: usize,
    exec: Execution,
) -> Result<MultiplicationCheck> {
    let k = interior_dim(dim);
    let m12 = RayMatrix::compose(m2, m1)?;
    let rho = decay_ratio(m2).max(decay_ratio(m1));
    let guard = guard_dim(k, rho, dim);
    let left = fresnel_block(m2, k, guard, exec)?;
    let right = fresnel_block(m1, guard, k, exec)?;
    let product = left * right;
    let reference = fresnel_block(&m12, k, k, exec)?;
    let (residual, phase) = phase_aligned_residual(&product, &reference, k);
    Ok(MultiplicationCheck {
        residual,
        phase,
        guard,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::block_residual;
    use crate::random::UnimodularSampler;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const N: usize = 128;
    const K: usize = N / 4;

    #[test]
    fn identity_matrix_gives_identity_operator() {
        let op = fresnel_normal_order(&RayMatrix::IDENTITY, 32).unwrap();
        assert!(
            block_residual(
                op.matrix(),
                FockOperator::identity(32).unwrap().matrix(),
                32
            ) < 1e-15
        );
        let op = fresnel_canonical(&RayMatrix::IDENTITY, 32).unwrap();
        assert!(
            block_residual(
                op.matrix(),
                FockOperator::identity(32).unwrap().matrix(),
                32
            ) < 1e-12
        );
    }

    #[test]
    fn magnifier_is_the_squeezer() {
        let sigma: f64 = 0.5;
        let m = RayMatrix::magnifier(sigma.exp()).unwrap();
        let ge = fresnel_exponents(&m);
        assert!((ge.prefactor - c(1.0 / sigma.cosh().sqrt(), 0.0)).norm() < 1e-15);
        assert!((ge.f - c(0.5 * sigma.tanh(), 0.0)).norm() < 1e-15);
        assert!((ge.h + c(0.5 * sigma.tanh(), 0.0)).norm() < 1e-15);
        assert!((ge.g + 1.0 - c(1.0 / sigma.cosh(), 0.0)).norm() < 1e-15);
        let no = fresnel_normal_order(&m, N).unwrap();
        let sq = squeeze_operator(sigma.exp(), N).unwrap();
        let (res, ph) = phase_aligned_residual(sq.matrix(), no.matrix(), K);
        assert!(res < 1e-8, "{res}");
        assert!((ph - 1.0).norm() < 1e-8);
        assert!((sq.get(0, 0) - c(1.0 / sigma.cosh().sqrt(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn squeeze_group_property() {
        assert!(matches!(squeeze_operator(0.0, 8), Err(Error::Domain(_))));
        let one = squeeze_operator(1.0, 16).unwrap();
        assert!(
            block_residual(
                one.matrix(),
                FockOperator::identity(16).unwrap().matrix(),
                16
            ) < 1e-14
        );
        let (a1, a2) = (1.3, 0.6);
        let s1 = squeeze_operator(a1, N).unwrap();
        let s2 = squeeze_operator(a2, N).unwrap();
        let s12 = squeeze_operator(a1 * a2, N).unwrap();
        assert!(block_residual((&s1 * &s2).matrix(), s12.matrix(), K) < 1e-8);
    }

    #[test]
    fn special_cases_collapse() {
        for cval in [-0.3, 0.8] {
            let lens = fresnel_normal_order(&RayMatrix::lens_power(cval), N).unwrap();
            let q = quadratic_phase(cval, N).unwrap();
            let (res, _) = phase_aligned_residual(q.matrix(), lens.matrix(), K);
            assert!(res < 1e-8, "lens {cval}: {res}");
            assert!(q.unitarity_residual() < 1e-10);

            let free = fresnel_normal_order(&RayMatrix::free_space(cval), N).unwrap();
            let p = free_propagator(cval, N).unwrap();
            let (res, _) = phase_aligned_residual(p.matrix(), free.matrix(), K);
            assert!(res < 1e-8, "free {cval}: {res}");
        }
        let zero = quadratic_phase(0.0, 8).unwrap();
        assert!(
            block_residual(
                zero.matrix(),
                FockOperator::identity(8).unwrap().matrix(),
                8
            ) < 1e-15
        );
    }

    #[test]
    fn canonical_matches_normal_order() {
        let m = RayMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let can = fresnel_canonical(&m, N).unwrap();
        let no = fresnel_normal_order(&m, N).unwrap();
        let (res, ph) = phase_aligned_residual(can.matrix(), no.matrix(), K);
        assert!(res < 1e-6, "{res}");
        assert!((ph * ph - 1.0).norm() < 1e-6);

        let free = fresnel_canonical(&RayMatrix::free_space(1.0), N).unwrap();
        let p = free_propagator(1.0, N).unwrap();
        assert!(block_residual(free.matrix(), p.matrix(), K) < 1e-8);

        let rot = RayMatrix::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!(matches!(fresnel_canonical(&rot, 8), Err(Error::Domain(_))));
    }

    #[test]
    fn random_operators_are_unitary() {
        let mut s = UnimodularSampler::new(21).with_max_entry(3.0);
        for _ in 0..5 {
            let m = s.sample();
            let r = unitarity_residual(&m, N).unwrap();
            assert!(r < 1e-7, "{m}: {r}");
        }
    }

    #[test]
    fn multiplication_rule() {
        let id = multiplication_check(&RayMatrix::IDENTITY, &RayMatrix::IDENTITY, N).unwrap();
        assert!(id.residual < 1e-15);
        assert!((id.phase - 1.0).norm() < 1e-15);

        let free =
            multiplication_check(&RayMatrix::free_space(0.7), &RayMatrix::free_space(-1.3), N)
                .unwrap();
        assert!(free.residual < 1e-8, "{}", free.residual);
        assert!((free.phase - 1.0).norm() < 1e-8);

        let mut s = UnimodularSampler::new(5);
        for (m2, m1) in s.pairs(4) {
            let chk = multiplication_check(&m2, &m1, N).unwrap();
            assert!(chk.residual < 1e-6, "{m2} {m1}: {}", chk.residual);
            assert!(chk.sign_defect() < 1e-6);
        }
    }

    #[test]
    fn guard_grows_with_squeeze() {
        assert_eq!(guard_dim(32, 0.0, 128), 128);
        assert!(guard_dim(32, 0.9, 128) > guard_dim(32, 0.5, 128));
        assert_eq!(guard_dim(32, 1.0, 128), 32 * 128);
    }
}
