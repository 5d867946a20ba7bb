//! Truncated Fock-space numerics.
//!
//! Operators are dense `N x N` complex matrices indexed by occupation number.
//! Entries near the truncation edge are unreliable, so comparisons are made on
//! the interior block of the first `N / 4` indices.

mod expm;
mod hermite;
mod io;
mod normal;

use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use expm::{exp_general, exp_hermitian};
pub use hermite::{hermite_function, hermite_functions, momentum_exp, position_exp};
pub use normal::{
    exp_adag_squared, normal_ordered_block, normal_ordered_block_with, normal_ordered_gaussian,
    normal_ordered_gaussian_series, GaussianExponents,
};

/// Size of the comparison block for a truncation `dim`.
pub fn interior_dim(dim: usize) -> usize {
    (dim / 4).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    m: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    v: DVector<Complex64>,
}

impl FockOperator {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        if m.nrows() < 2 {
            return Err(Error::Dimension(m.nrows()));
        }
        if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(FockOperator { m })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(FockOperator {
            m: DMatrix::identity(dim, dim),
        })
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        check_dim(diag.len())?;
        Ok(FockOperator {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        FockOperator {
            m: self.m.adjoint(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        FockOperator { m: &self.m * z }
    }

    pub fn compose(&self, rhs: &FockOperator) -> Result<Self> {
        check_same(self.dim(), rhs.dim())?;
        Ok(FockOperator {
            m: &self.m * &rhs.m,
        })
    }

    pub fn add(&self, rhs: &FockOperator) -> Result<Self> {
        check_same(self.dim(), rhs.dim())?;
        Ok(FockOperator {
            m: &self.m + &rhs.m,
        })
    }

    pub fn sub(&self, rhs: &FockOperator) -> Result<Self> {
        check_same(self.dim(), rhs.dim())?;
        Ok(FockOperator {
            m: &self.m - &rhs.m,
        })
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        check_same(self.dim(), state.dim())?;
        Ok(FockState {
            v: &self.m * &state.v,
        })
    }

    /// The leading `k x k` block as an operator.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        check_dim(k)?;
        if k > self.dim() {
            return Err(Error::DimensionMismatch {
                left: k,
                right: self.dim(),
            });
        }
        Ok(FockOperator {
            m: self.m.view((0, 0), (k, k)).into_owned(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.m - self.m.adjoint()))
    }

    /// `max |(U^dag U - I)_{ij}|` over the interior block.
    pub fn unitarity_residual(&self) -> f64 {
        let k = interior_dim(self.dim());
        let cols = self.m.columns(0, k);
        let gram = cols.adjoint() * cols;
        max_abs(&(gram - DMatrix::<Complex64>::identity(k, k)))
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    /// Panics on mismatched dimensions; use [`FockOperator::compose`] for a
    /// fallible product.
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        self.compose(rhs).expect("operator dimensions differ")
    }
}

impl FockState {
    pub fn new(v: DVector<Complex64>) -> Result<Self> {
        check_dim(v.len())?;
        if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(FockState { v })
    }

    pub fn from_amplitudes(amps: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amps))
    }

    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::Domain(format!(
                "|{n}> is outside a {dim}-level truncation"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[n] = Complex64::new(1.0, 0.0);
        Ok(FockState { v })
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::basis(dim, 0)
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.v
    }

    pub fn amplitude(&self, n: usize) -> Complex64 {
        self.v[n]
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        check_same(self.dim(), other.dim())?;
        Ok(self.v.dotc(&other.v))
    }

    /// The first `k` amplitudes.
    pub fn head(&self, k: usize) -> Result<Self> {
        Self::new(self.v.rows(0, k.min(self.dim())).into_owned())
    }

    /// `|<a|b>| / (|a| |b|)` and the unit phase of `<a|b>`, over the
    /// interior components `0..k`.
    pub fn fidelity(&self, other: &FockState, k: usize) -> Result<(f64, Complex64)> {
        check_same(self.dim(), other.dim())?;
        let k = k.min(self.dim());
        let a = self.v.rows(0, k);
        let b = other.v.rows(0, k);
        let ip = a.dotc(&b);
        let denom = a.norm() * b.norm();
        if denom == 0.0 {
            return Err(Error::Domain("fidelity of a zero vector".into()));
        }
        Ok((ip.norm() / denom, unit(ip)))
    }

    /// Largest `|amplitude|` at odd occupation numbers.
    pub fn odd_weight(&self) -> f64 {
        self.v
            .iter()
            .skip(1)
            .step_by(2)
            .fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Truncated `a` and `a^dag`.
pub fn ladder_matrices(dim: usize) -> Result<(FockOperator, FockOperator)> {
    check_dim(dim)?;
    let a = DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let adag = a.adjoint();
    Ok((FockOperator { m: a }, FockOperator { m: adag }))
}

/// Truncated `X = (a + a^dag)/sqrt 2` and `P = (a - a^dag)/(sqrt 2 i)`.
pub fn quadrature_matrices(dim: usize) -> Result<(FockOperator, FockOperator)> {
    let (a, adag) = ladder_matrices(dim)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a.m + &adag.m) * Complex64::new(s, 0.0);
    let p = (&a.m - &adag.m) * Complex64::new(0.0, -s);
    Ok((FockOperator { m: x }, FockOperator { m: p }))
}

/// The Hermitian generator `(XP + PX)/2 = i(a^dag^2 - a^2)/2`, exact on the
/// truncated space.
pub fn dilation_generator(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let v = if i == j + 2 {
            0.5 * ((j + 1) as f64 * (j + 2) as f64).sqrt()
        } else if j == i + 2 {
            -0.5 * ((i + 1) as f64 * (i + 2) as f64).sqrt()
        } else {
            0.0
        };
        Complex64::new(0.0, v)
    });
    Ok(FockOperator { m })
}

/// `e^{-|z|^2/2} z^n / sqrt(n!)`.
pub fn coherent_state(z: Complex64, dim: usize) -> Result<FockState> {
    check_dim(dim)?;
    if z.norm_sqr() > dim as f64 / 4.0 {
        log::warn!(
            "coherent state with |z|^2 = {:.3} is poorly resolved in {dim} levels",
            z.norm_sqr()
        );
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for n in 1..dim {
        c = c * z / (n as f64).sqrt();
        amps.push(c);
    }
    FockState::from_amplitudes(&amps)
}

/// Unit-modulus phase of `z` (1 for zero).
pub fn unit(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

pub(crate) fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S>(
    m: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64
where
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |a - b| / max(1, max |b|)` over the leading `k x k` block.
pub fn block_residual(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, k: usize) -> f64 {
    let k = k
        .min(a.nrows())
        .min(b.nrows())
        .min(a.ncols())
        .min(b.ncols());
    let av = a.view((0, 0), (k, k));
    let bv = b.view((0, 0), (k, k));
    max_abs(&(av - bv)) / max_abs(&bv).max(1.0)
}

/// The unit phase `w` that best aligns `a` with `w * reference`. Uses the
/// vacuum element when it is significant and otherwise the largest entry of
/// the reference's leading block.
pub fn relative_phase(
    a: &DMatrix<Complex64>,
    reference: &DMatrix<Complex64>,
    k: usize,
) -> Complex64 {
    let k = k.min(reference.nrows()).min(reference.ncols());
    let scale = max_abs(&reference.view((0, 0), (k, k)));
    let (i, j) = if reference[(0, 0)].norm() > 1e-8 * scale {
        (0, 0)
    } else {
        let mut best = (0, 0);
        let mut top = -1.0;
        for c in 0..k {
            for r in 0..k {
                let v = reference[(r, c)].norm();
                if v > top {
                    top = v;
                    best = (r, c);
                }
            }
        }
        best
    };
    if reference[(i, j)].norm() == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    unit(a[(i, j)] / reference[(i, j)])
}

/// Residual of `a` against `phase * reference` on the leading `k x k` block,
/// with the phase chosen by [`relative_phase`].
pub fn phase_aligned_residual(
    a: &DMatrix<Complex64>,
    reference: &DMatrix<Complex64>,
    k: usize,
) -> (f64, Complex64) {
    let w = relative_phase(a, reference, k);
    (block_residual(a, &(reference * w), k), w)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::Dimension(dim))
    } else {
        Ok(())
    }
}

fn check_same(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}
