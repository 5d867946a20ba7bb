//! Normally ordered Gaussian operators
//! `prefactor * exp(f a^dag^2) (1+g)^N exp(h a^2)`.
//!
//! `exp(f a^dag^2)` is lower triangular and `exp(h a^2)` upper triangular in
//! the Fock basis, so any finite block of the product only involves finitely
//! many terms and can be evaluated exactly:
//!
//! ```text
//! <m|G|n> = prefactor sqrt(m! n!) sum_l f^j/j! e^l/l! h^k/k!,
//!           e = 1+g, m = l+2j, n = l+2k.
//! ```
//!
//! The sum alternates wildly for large `m, n` and loses every digit in f64,
//! so each entry carries a cancellation estimate and is recomputed with
//! MPFR at the precision that estimate asks for.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rug::{Assign, Complex, Float};

use super::FockOperator;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Relative accuracy target per entry, measured against `max(|entry|, 1)`.
const ENTRY_TOL: f64 = 1e-14;
/// Extra bits so table recurrences of a few thousand steps stay exact.
const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianExponents {
    pub prefactor: Complex64,
    pub f: Complex64,
    pub g: Complex64,
    pub h: Complex64,
}

impl GaussianExponents {
    pub fn new(prefactor: Complex64, f: Complex64, g: Complex64, h: Complex64) -> Result<Self> {
        let ge = GaussianExponents { prefactor, f, g, h };
        ge.check()?;
        Ok(ge)
    }

    pub fn identity() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        GaussianExponents {
            prefactor: Complex64::new(1.0, 0.0),
            f: zero,
            g: zero,
            h: zero,
        }
    }

    fn check(&self) -> Result<()> {
        let vals = [self.prefactor, self.f, self.g, self.h];
        if !vals.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if (Complex64::new(1.0, 0.0) + self.g).norm() == 0.0 {
            return Err(Error::SingularExponent);
        }
        Ok(())
    }

    fn e(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.g
    }
}

/// The `N x N` truncation of the operator, exact entry by entry.
pub fn normal_ordered_gaussian(ge: &GaussianExponents, dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::Dimension(dim));
    }
    FockOperator::new(normal_ordered_block(ge, dim, dim)?)
}

/// Rows `0..rows` and columns `0..cols` of the untruncated operator.
pub fn normal_ordered_block(
    ge: &GaussianExponents,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<Complex64>> {
    normal_ordered_block_with(ge, rows, cols, Execution::default())
}

pub fn normal_ordered_block_with(
    ge: &GaussianExponents,
    rows: usize,
    cols: usize,
    exec: Execution,
) -> Result<DMatrix<Complex64>> {
    ge.check()?;
    let ev = Evaluator::new(ge, rows.max(cols));
    let row_vals: Vec<Vec<Entry>> =
        exec.map_range(0..rows, |m| (0..cols).map(|n| ev.entry_f64(m, n)).collect());

    let mut out = DMatrix::zeros(rows, cols);
    let mut pending: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for (m, row) in row_vals.into_iter().enumerate() {
        for (n, e) in row.into_iter().enumerate() {
            match e {
                Entry::Done(z) => out[(m, n)] = z,
                Entry::NeedsBits(bits) => pending.entry(bits).or_default().push((m, n)),
            }
        }
    }
    for (bits, cells) in pending {
        let max_m = cells.iter().map(|c| c.0).max().unwrap_or(0);
        let max_n = cells.iter().map(|c| c.1).max().unwrap_or(0);
        let tables = HpTables::new(ge, bits + GUARD_BITS, max_m, max_n);
        let vals = exec.map(&cells, |&(m, n)| tables.entry(m, n));
        for (&(m, n), z) in cells.iter().zip(vals) {
            out[(m, n)] = ge.prefactor * z;
        }
    }
    if !out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// `exp(f a^dag^2)` on the truncated space via its terminating series.
/// Returns the matrix and the number of nonzero powers of `a^dag^2`.
pub fn exp_adag_squared(f: Complex64, dim: usize) -> (DMatrix<Complex64>, usize) {
    // Build the powers explicitly: (a^dag^2)^k / k!, stopping when the power vanishes.
    let mut out = DMatrix::<Complex64>::identity(dim, dim);
    let mut power = DMatrix::<Complex64>::identity(dim, dim);
    let step = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j + 2 {
            Complex64::new(((j + 1) as f64 * (j + 2) as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut terms = 1;
    for k in 1.. {
        power = &step * &power * (f / k as f64);
        if power.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            break;
        }
        out += &power;
        terms += 1;
    }
    (out, terms)
}

/// The factorized form evaluated in plain f64: two terminating series and a
/// diagonal. Accurate only where the normally ordered sum does not cancel.
/// Returns the operator and the series term count.
pub fn normal_ordered_gaussian_series(
    ge: &GaussianExponents,
    dim: usize,
) -> Result<(FockOperator, usize)> {
    ge.check()?;
    if dim < 2 {
        return Err(Error::Dimension(dim));
    }
    let (ef, tf) = exp_adag_squared(ge.f, dim);
    let (eh, th) = exp_adag_squared(ge.h, dim);
    let e = ge.e();
    let mut left = ef;
    let mut pw = Complex64::new(1.0, 0.0);
    for mut col in left.column_iter_mut() {
        col *= pw;
        pw *= e;
    }
    let op = left * eh.transpose() * ge.prefactor;
    Ok((FockOperator::new(op)?, tf.max(th)))
}

enum Entry {
    Done(Complex64),
    NeedsBits(u32),
}

struct Evaluator {
    ln_fact: Vec<f64>,
    ln_f: f64,
    ln_e: f64,
    ln_h: f64,
    arg_f: f64,
    arg_e: f64,
    arg_h: f64,
    f_zero: bool,
    h_zero: bool,
    ln_ratio: f64,
    phase_ratio: Complex64,
    prefactor: Complex64,
}

impl Evaluator {
    fn new(ge: &GaussianExponents, size: usize) -> Self {
        let e = ge.e();
        let ratio = ge.f * ge.h / (e * e);
        Evaluator {
            ln_fact: ln_factorials(size),
            ln_f: ge.f.norm().ln(),
            ln_e: e.norm().ln(),
            ln_h: ge.h.norm().ln(),
            arg_f: ge.f.arg(),
            arg_e: e.arg(),
            arg_h: ge.h.arg(),
            f_zero: ge.f.norm() == 0.0,
            h_zero: ge.h.norm() == 0.0,
            ln_ratio: ratio.norm().ln(),
            phase_ratio: super::unit(ratio),
            prefactor: ge.prefactor,
        }
    }

    fn entry_f64(&self, m: usize, n: usize) -> Entry {
        let zero = Complex64::new(0.0, 0.0);
        if (m + n) % 2 == 1 {
            return Entry::Done(zero);
        }
        let lo = m.min(n);
        let j0 = (m - lo) / 2;
        let k0 = (n - lo) / 2;
        if (j0 > 0 && self.f_zero) || (k0 > 0 && self.h_zero) {
            return Entry::Done(zero);
        }
        let lf = &self.ln_fact;
        let pw = |k: usize, ln: f64| if k == 0 { 0.0 } else { k as f64 * ln };
        let mut lt = 0.5 * (lf[m] + lf[n]) - lf[j0] - lf[lo] - lf[k0]
            + pw(j0, self.ln_f)
            + pw(lo, self.ln_e)
            + pw(k0, self.ln_h);
        let mut phase = Complex64::from_polar(
            1.0,
            j0 as f64 * self.arg_f + lo as f64 * self.arg_e + k0 as f64 * self.arg_h,
        );
        let nterms = if self.f_zero || self.h_zero {
            1
        } else {
            lo / 2 + 1
        };
        let mut logs = Vec::with_capacity(nterms);
        let mut phases = Vec::with_capacity(nterms);
        logs.push(lt);
        phases.push(phase);
        let (mut l, mut j, mut k) = (lo, j0, k0);
        for _ in 1..nterms {
            lt += self.ln_ratio + ((l * (l - 1)) as f64).ln() - (((j + 1) * (k + 1)) as f64).ln();
            phase *= self.phase_ratio;
            l -= 2;
            j += 1;
            k += 1;
            logs.push(lt);
            phases.push(phase);
        }
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut sum, mut abs_sum) = (zero, 0.0);
        for (lg, ph) in logs.iter().zip(&phases) {
            let w = (lg - top).exp();
            sum += ph * w;
            abs_sum += w;
        }
        let scale = top.exp() * self.prefactor.norm();
        let value = sum * top.exp() * self.prefactor;
        let err = f64::EPSILON * nterms as f64 * abs_sum * scale;
        if err <= ENTRY_TOL * value.norm().max(1.0) {
            return Entry::Done(value);
        }
        // Digits lost to cancellation, relative to an O(1) target.
        let lost = (abs_sum * scale * nterms as f64).log2().max(0.0);
        let bits = 64 * ((64.0 + lost) / 64.0).ceil() as u32;
        Entry::NeedsBits(bits)
    }
}

/// `ln k!` for `k = 0..=size`, rounded once from an MPFR sum.
fn ln_factorials(size: usize) -> Vec<f64> {
    let mut acc = Float::with_val(128, 0);
    let mut t = Float::new(128);
    let mut out = Vec::with_capacity(size + 1);
    out.push(0.0);
    for k in 1..=size {
        t.assign(k);
        t.ln_mut();
        acc += &t;
        out.push(acc.to_f64());
    }
    out
}

struct HpTables {
    prec: u32,
    f: Vec<Complex>,
    e: Vec<Complex>,
    h: Vec<Complex>,
    sqrt_fact: Vec<Float>,
}

impl HpTables {
    fn new(ge: &GaussianExponents, prec: u32, max_m: usize, max_n: usize) -> Self {
        let cplx = |z: Complex64| Complex::with_val(prec, (z.re, z.im));
        // t_k = z^k / k!
        let series = |z: Complex64, len: usize| {
            let z = cplx(z);
            let mut v = Vec::with_capacity(len + 1);
            let mut cur = Complex::with_val(prec, 1);
            v.push(cur.clone());
            for k in 1..=len {
                cur *= &z;
                cur /= k as u32;
                v.push(cur.clone());
            }
            v
        };
        let mut sqrt_fact = Vec::with_capacity(max_m.max(max_n) + 1);
        let mut fact = Float::with_val(prec, 1);
        sqrt_fact.push(fact.clone());
        for k in 1..=max_m.max(max_n) {
            fact *= k as u32;
            sqrt_fact.push(Float::with_val(prec, fact.sqrt_ref()));
        }
        HpTables {
            prec,
            f: series(ge.f, max_m / 2),
            e: series(ge.e(), max_m.min(max_n)),
            h: series(ge.h, max_n / 2),
            sqrt_fact,
        }
    }

    /// The entry without the prefactor.
    fn entry(&self, m: usize, n: usize) -> Complex64 {
        let lo = m.min(n);
        let mut acc = Complex::new(self.prec);
        let mut t = Complex::new(self.prec);
        let mut l = lo as isize;
        while l >= 0 {
            let lu = l as usize;
            let (j, k) = ((m - lu) / 2, (n - lu) / 2);
            t.assign(&self.f[j] * &self.e[lu]);
            t *= &self.h[k];
            acc += &t;
            l -= 2;
        }
        acc *= &self.sqrt_fact[m];
        acc *= &self.sqrt_fact[n];
        Complex64::new(acc.real().to_f64(), acc.imag().to_f64())
    }
}
