//! Squeezed vacua generated by Fresnel operators, the ABCD law they obey, and
//! the time-dependent-mass (damped) oscillator that realizes it.

use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::{
    block_residual, dilation_generator, exp_hermitian, interior_dim, quadrature_matrices,
    FockOperator, FockState,
};
use crate::fresnel::{decay_ratio, fresnel_block, guard_dim, quadratic_phase};
use crate::optics::{QParam, RayMatrix, POLE_TOL};
use crate::report::csv_number;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `q = -(A + iB) / (C + iD)`; always `Im q = 1/(C^2 + D^2) > 0`.
pub fn q_parameter(m: &RayMatrix) -> QParam {
    let num = Complex64::new(m.a(), m.b());
    let den = Complex64::new(m.c(), m.d());
    QParam(-num / den)
}

/// `prefactor * exp(mu a^dag^2) |0>` with `mu = (q - i) / (2 (q + i))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedVacuumDescriptor {
    q: QParam,
    prefactor: Complex64,
    dim: usize,
}

impl SqueezedVacuumDescriptor {
    pub fn new(q: QParam, prefactor: Complex64, dim: usize) -> Result<Self> {
        if q.0.im.is_nan() || q.0.im <= 0.0 {
            return Err(Error::NonNormalizable { im: q.0.im });
        }
        if dim < 2 {
            return Err(Error::Dimension(dim));
        }
        Ok(SqueezedVacuumDescriptor { q, prefactor, dim })
    }

    /// The state `F(m)|0>` in closed form.
    pub fn from_matrix(m: &RayMatrix, dim: usize) -> Result<Self> {
        let q = q_parameter(m);
        let cd = Complex64::new(m.c(), m.d());
        Self::new(q, prefactor_from(cd, q.0), dim)
    }

    pub fn q(&self) -> QParam {
        self.q
    }

    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> Complex64 {
        mu_of(self.q.0)
    }

    /// `C + iD` of a matrix that produces this state, recovered from the
    /// prefactor.
    pub fn c_plus_id(&self) -> Complex64 {
        -2.0 / (self.prefactor * self.prefactor * (self.q.0 + I))
    }

    pub fn state(&self) -> Result<FockState> {
        squeezed_amplitudes(self.prefactor, self.mu(), self.dim)
    }
}

fn mu_of(q: Complex64) -> Complex64 {
    (q - I) / ((q + I) * 2.0)
}

fn prefactor_from(c_plus_id: Complex64, q: Complex64) -> Complex64 {
    (-2.0 / (c_plus_id * (q + I))).sqrt()
}

/// `c_{2n} = prefactor mu^n sqrt((2n)!) / n!`, odd amplitudes zero.
fn squeezed_amplitudes(prefactor: Complex64, mu: Complex64, dim: usize) -> Result<FockState> {
    let mut v = DVector::zeros(dim);
    let mut c = prefactor;
    for n in 0..dim.div_ceil(2) {
        v[2 * n] = c;
        let k = n as f64;
        c *= mu * ((2.0 * k + 1.0) * (2.0 * k + 2.0)).sqrt() / (k + 1.0);
    }
    FockState::new(v)
}

/// `F(m)|0>`, the exact first column of the operator.
pub fn vacuum_output(m: &RayMatrix, dim: usize) -> Result<FockState> {
    let col = fresnel_block(m, dim, 1, Execution::default())?;
    FockState::new(col.column(0).into_owned())
}

/// Propagates a squeezed vacuum through `m2`:
/// `q2 = (A' q1 - B') / (-C' q1 + D')` and
/// `C'' + iD'' = -(C + iD)(C' q1 - D')`.
pub fn abcd_law_apply(
    m2: &RayMatrix,
    input: &SqueezedVacuumDescriptor,
) -> Result<SqueezedVacuumDescriptor> {
    let q1 = input.q.0;
    let den = q1 * m2.c() - m2.d();
    if den.norm() < POLE_TOL {
        return Err(Error::Pole {
            denominator: den.norm(),
        });
    }
    let q2 = (q1 * m2.a() - m2.b()) / -den;
    let cd2 = -input.c_plus_id() * den;
    SqueezedVacuumDescriptor::new(QParam(q2), prefactor_from(cd2, q2), input.dim)
}

/// `|qbar2 - (A' qbar1 + B') / (C' qbar1 + D')|` with `qbar = -q`, where `q2`
/// comes from [`abcd_law_apply`].
pub fn conjugate_law_residual(m2: &RayMatrix, q1: QParam) -> Result<f64> {
    let d = SqueezedVacuumDescriptor::new(q1, Complex64::new(1.0, 0.0), 2)?;
    let q2 = abcd_law_apply(m2, &d)?.q.0;
    let bar = m2.propagate_q(QParam(-q1.0))?.0;
    Ok((-q2 - bar).norm())
}

/// Pairwise fidelities between the three ways of computing `F(m2) F(m1) |0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawRoutes {
    /// Direct operator product against the propagated closed form.
    pub product_vs_law: f64,
    /// Direct operator product against the vacuum image of `m2 m1`.
    pub product_vs_composed: f64,
    /// Propagated closed form against the vacuum image of `m2 m1`.
    pub law_vs_composed: f64,
    pub phase_product_law: Complex64,
    pub phase_product_composed: Complex64,
    pub phase_law_composed: Complex64,
}

impl LawRoutes {
    pub fn worst_infidelity(&self) -> f64 {
        1.0 - self
            .product_vs_law
            .min(self.product_vs_composed)
            .min(self.law_vs_composed)
    }
}

/// Evaluates all three routes on the interior amplitudes of a `dim`-level
/// truncation.
pub fn law_routes(
    m2: &RayMatrix,
    m1: &RayMatrix,
    dim: usize,
    exec: Execution,
) -> Result<LawRoutes> {
    let k = interior_dim(dim).max(2);
    let guard = guard_dim(k, decay_ratio(m2).max(decay_ratio(m1)), dim);
    let first = fresnel_block(m1, guard, 1, exec)?;
    let second = fresnel_block(m2, k, guard, exec)?;
    let product = FockState::new((second * first).column(0).into_owned())?;

    let law = abcd_law_apply(m2, &SqueezedVacuumDescriptor::from_matrix(m1, dim)?)?
        .state()?
        .head(k)?;
    let composed = vacuum_output(&RayMatrix::compose(m2, m1)?, k)?;

    let (f_pl, p_pl) = product.fidelity(&law, k)?;
    let (f_pc, p_pc) = product.fidelity(&composed, k)?;
    let (f_lc, p_lc) = law.fidelity(&composed, k)?;
    Ok(LawRoutes {
        product_vs_law: f_pl,
        product_vs_composed: f_pc,
        law_vs_composed: f_lc,
        phase_product_law: p_pl,
        phase_product_composed: p_pc,
        phase_law_composed: p_lc,
    })
}

/// Time-dependent-mass oscillator `H = e^{-2gt} P^2/2 + w0^2 e^{2gt} X^2/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampedOscillatorParams {
    gamma: f64,
    omega0: f64,
    t: f64,
}

impl DampedOscillatorParams {
    pub fn new(gamma: f64, omega0: f64, t: f64) -> Result<Self> {
        if ![gamma, omega0, t].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if gamma < 0.0 || t < 0.0 {
            return Err(Error::Domain(format!(
                "need gamma >= 0 and t >= 0 (got {gamma}, {t})"
            )));
        }
        if omega0 <= gamma {
            return Err(Error::Domain(format!(
                "only the underdamped regime omega0 > gamma is supported (got omega0 = {omega0}, gamma = {gamma})"
            )));
        }
        Ok(DampedOscillatorParams { gamma, omega0, t })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn at(&self, t: f64) -> Result<Self> {
        Self::new(self.gamma, self.omega0, t)
    }

    /// `omega^2 = omega0^2 - gamma^2`.
    pub fn omega_sq(&self) -> f64 {
        self.omega0 * self.omega0 - self.gamma * self.gamma
    }

    /// The lens `(1, 0; -gamma, 1)` that prepares the initial state.
    pub fn initial_matrix(&self) -> RayMatrix {
        RayMatrix::lens_power(-self.gamma)
    }

    /// `diag(e^{-gt}, e^{gt})`, the evolution in matrix form.
    pub fn evolution_matrix(&self) -> RayMatrix {
        RayMatrix::magnifier((-self.gamma * self.t).exp()).expect("exponential is positive")
    }
}

/// Closed-form state at time `t`:
/// `sqrt(2e^{-gt}/(e^{-2gt}+1+ig)) exp[(e^{-2gt}-1-ig)/(2(e^{-2gt}+1+ig)) a^dag^2] |0>`.
pub fn damped_state_closed_form(p: &DampedOscillatorParams, dim: usize) -> Result<FockState> {
    let (g, t) = (p.gamma, p.t);
    let e2 = (-2.0 * g * t).exp();
    let den = Complex64::new(e2 + 1.0, g);
    let pref = (Complex64::new(2.0 * (-g * t).exp(), 0.0) / den).sqrt();
    let mu = Complex64::new(e2 - 1.0, -g) / (den * 2.0);
    squeezed_amplitudes(pref, mu, dim)
}

fn guarded(dim: usize) -> usize {
    2 * dim
}

/// `u^{-1}(t) = exp(i g t (XP+PX)/2) exp(-i g X^2/2)`.
pub fn u_inverse(p: &DampedOscillatorParams, dim: usize) -> Result<FockOperator> {
    u_inverse_raw(p, guarded(dim))?.truncate(dim)
}

/// `u(t) = exp(i g X^2/2) exp(-i g t (XP+PX)/2)`.
pub fn u(p: &DampedOscillatorParams, dim: usize) -> Result<FockOperator> {
    u_raw(p, guarded(dim))?.truncate(dim)
}

fn u_inverse_raw(p: &DampedOscillatorParams, dim: usize) -> Result<FockOperator> {
    let sq = exp_hermitian(
        &dilation_generator(dim)?,
        Complex64::new(0.0, p.gamma * p.t),
    )?;
    sq.compose(&quadratic_phase(-p.gamma, dim)?)
}

fn u_raw(p: &DampedOscillatorParams, dim: usize) -> Result<FockOperator> {
    let sq = exp_hermitian(
        &dilation_generator(dim)?,
        Complex64::new(0.0, -p.gamma * p.t),
    )?;
    quadratic_phase(p.gamma, dim)?.compose(&sq)
}

/// Interior residuals of `u X u^{-1} = e^{-gt} X` and
/// `u P u^{-1} = e^{gt} (P - g X)`.
pub fn heisenberg_transform_check(p: &DampedOscillatorParams, dim: usize) -> Result<(f64, f64)> {
    let g = guarded(dim);
    let k = interior_dim(dim);
    let (uu, ui) = (u_raw(p, g)?, u_inverse_raw(p, g)?);
    let (x, pp) = quadrature_matrices(g)?;
    let decay = (-p.gamma * p.t).exp();
    let x_t = uu.compose(&x)?.compose(&ui)?;
    let p_t = uu.compose(&pp)?.compose(&ui)?;
    let rx = block_residual(x_t.matrix(), &(x.matrix() * Complex64::new(decay, 0.0)), k);
    let want_p = (pp.matrix() - x.matrix() * Complex64::new(p.gamma, 0.0))
        * Complex64::new(1.0 / decay, 0.0);
    let rp = block_residual(p_t.matrix(), &want_p, k);
    Ok((rx, rp))
}

/// Interior residual of `u H u^{-1} - i u d(u^{-1})/dt` against
/// `P^2/2 + (omega0^2 - gamma^2) X^2/2`.
pub fn effective_hamiltonian_residual(p: &DampedOscillatorParams, dim: usize) -> Result<f64> {
    let g = guarded(dim);
    let k = interior_dim(dim);
    let (uu, ui) = (u_raw(p, g)?, u_inverse_raw(p, g)?);
    let (x, pp) = quadrature_matrices(g)?;
    let (x2, p2) = (&x * &x, &pp * &pp);
    let e = (2.0 * p.gamma * p.t).exp();
    let c = |v: f64| Complex64::new(v, 0.0);
    let h = p2
        .scale(c(0.5 / e))
        .add(&x2.scale(c(0.5 * p.omega0 * p.omega0 * e)))?;
    // -i u (i g G u^{-1}) = g u G u^{-1}
    let dil = dilation_generator(g)?.scale(c(p.gamma));
    let heff = uu.compose(&h.add(&dil)?)?.compose(&ui)?;
    let want = p2.scale(c(0.5)).add(&x2.scale(c(0.5 * p.omega_sq())))?;
    Ok(block_residual(heff.matrix(), want.matrix(), k))
}

/// One sample of the damped evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampedSample {
    pub t: f64,
    pub q2: Complex64,
    pub squeeze_magnitude: f64,
    pub fidelity_vs_operator_route: f64,
}

/// Samples the evolution at `steps` evenly spaced times in `[0, t_max]`.
/// The state follows the ABCD law from the initial lens; the fidelity
/// compares the closed form with `u^{-1}(t)|0>` on interior amplitudes.
pub fn damped_evolution(
    gamma: f64,
    omega0: f64,
    t_max: f64,
    steps: usize,
    dim: usize,
    exec: Execution,
) -> Result<Vec<DampedSample>> {
    let base = DampedOscillatorParams::new(gamma, omega0, t_max)?;
    if steps < 1 {
        return Err(Error::Domain("need at least one time step".into()));
    }
    let times: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                t_max
            } else {
                t_max * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let k = interior_dim(dim);
    exec.map(&times, |&t| {
        let p = base.at(t)?;
        let start = SqueezedVacuumDescriptor::from_matrix(&p.initial_matrix(), dim)?;
        let out = abcd_law_apply(&p.evolution_matrix(), &start)?;
        let closed = damped_state_closed_form(&p, dim)?;
        let op_state = u_inverse(&p, dim)?.apply(&FockState::vacuum(dim)?)?;
        let (fid, _) = closed.fidelity(&op_state, k)?;
        Ok(DampedSample {
            t,
            q2: out.q().0,
            squeeze_magnitude: out.mu().norm(),
            fidelity_vs_operator_route: fid,
        })
    })
    .into_iter()
    .collect()
}

pub fn damped_csv(samples: &[DampedSample]) -> String {
    let mut out = String::from("t,re_q2,im_q2,squeeze_magnitude,fidelity_vs_operator_route\n");
    for s in samples {
        let row = [
            s.t,
            s.q2.re,
            s.q2.im,
            s.squeeze_magnitude,
            s.fidelity_vs_operator_route,
        ]
        .map(csv_number);
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
