//! Direct quadrature of the Fresnel integral.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel_analytic;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::optics::RayMatrix;

/// Samples `values[k]` of a field at `x0 + k * dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn from_fn<F>(x0: f64, dx: f64, count: usize, f: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let values = (0..count).map(|k| f(x0 + dx * k as f64)).collect();
        SampledField { x0, dx, values }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|k| self.x0 + self.dx * k as f64)
            .collect()
    }

    /// Trapezoidal `integral |f|^2 dx`.
    pub fn energy(&self) -> f64 {
        trapezoid(
            self.dx,
            self.values
                .iter()
                .map(|z| Complex64::new(z.norm_sqr(), 0.0)),
        )
        .re
    }
}

fn trapezoid<I: ExactSizeIterator<Item = Complex64>>(dx: f64, vals: I) -> Complex64 {
    let n = vals.len();
    vals.enumerate()
        .map(|(k, v)| if k == 0 || k + 1 == n { v * 0.5 } else { v })
        .sum::<Complex64>()
        * dx
}

/// `g(x2) = integral K(x2, x1) f(x1) dx1` by the trapezoidal rule on the input
/// grid, evaluated at each of `outputs`.
///
/// The kernel phase changes at rate `|A x1 - x2| / |B|` in `x1`; the grid must
/// resolve that with less than `pi` per sample over every input and output.
pub fn fresnel_transform_numeric(
    m: &RayMatrix,
    field: &SampledField,
    outputs: &[f64],
    exec: Execution,
) -> Result<Vec<Complex64>> {
    let b = m.b();
    if b.abs() < 1e-12 {
        return Err(Error::DeltaKernel { b });
    }
    if field.values.len() < 2 || field.dx.is_nan() || field.dx <= 0.0 {
        return Err(Error::Domain(
            "field needs at least two samples and dx > 0".into(),
        ));
    }
    let xs = field.points();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let rate = outputs
        .iter()
        .flat_map(|&x2| [lo, hi].map(|x1| (m.a() * x1 - x2).abs() / b.abs()))
        .fold(0.0, f64::max);
    let advance = field.dx * rate;
    if advance >= PI {
        let required = ((hi - lo) * rate / PI).ceil() as usize + 2;
        return Err(Error::Aliasing { advance, required });
    }
    let out = exec.map(outputs, |&x2| -> Result<Complex64> {
        let vals = xs
            .iter()
            .zip(&field.values)
            .map(|(&x1, &f)| kernel_analytic(m, x2, x1).map(|k| k * f))
            .collect::<Result<Vec<_>>>()?;
        Ok(trapezoid(field.dx, vals.into_iter()))
    });
    out.into_iter().collect()
}
