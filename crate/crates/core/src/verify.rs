//! Seeded verification suites over every identity the library implements.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::{
    hermite_functions, interior_dim, momentum_exp, normal_ordered_gaussian, phase_aligned_residual,
    position_exp, FockState, GaussianExponents,
};
use crate::fresnel::{
    free_propagator, fresnel_normal_order, kernel_comparison, multiplication_check_with,
    quadratic_phase, squeeze_operator, Grid,
};
use crate::optics::{QParam, RayMatrix};
use crate::quantum::{
    abcd_law_apply, conjugate_law_residual, damped_state_closed_form,
    effective_hamiltonian_residual, heisenberg_transform_check, law_routes, q_parameter, u_inverse,
    DampedOscillatorParams, SqueezedVacuumDescriptor,
};
use crate::random::UnimodularSampler;
use crate::report::{VerificationCase, VerificationReport};

pub const GROUP_TOL: f64 = 1e-6;
pub const SIGN_TOL: f64 = 1e-6;
pub const KERNEL_TOL: f64 = 1e-3;
pub const LAW_INFIDELITY_TOL: f64 = 1e-7;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const COLLAPSE_TOL: f64 = 1e-8;
pub const Q_TOL: f64 = 1e-12;
pub const HEISENBERG_TOL: f64 = 1e-7;
pub const HAMILTONIAN_TOL: f64 = 1e-6;
pub const CLASSICAL_TOL: f64 = 1e-9;

pub const IDENTITY_LAMBDAS: [f64; 2] = [0.1, 0.3];
pub const COMPLEX_LAMBDA: Complex64 = Complex64::new(0.5, 0.2);
pub const DAMPED_GAMMAS: [f64; 2] = [0.1, 0.3];
pub const DAMPED_TIMES: [f64; 2] = [0.25, 1.0];
pub const KERNEL_MATRICES: usize = 5;
pub const CLASSICAL_TRIALS: usize = 1000;

// The integrand decays like exp(-Re(1 - l) x^2); the trapezoid rule converges
// geometrically for it.
const QUAD_HALF_WIDTH: f64 = 18.0;
const QUAD_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Group,
    Abcd,
    Kernel,
    Damped,
    Identities,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "group" => Suite::Group,
            "abcd" => Suite::Abcd,
            "kernel" => Suite::Kernel,
            "damped" => Suite::Damped,
            "identities" => Suite::Identities,
            other => {
                return Err(Error::Parse(format!(
                "unknown suite {other:?} (expected all, group, abcd, kernel, damped or identities)"
            )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::All => "all",
            Suite::Group => "group",
            Suite::Abcd => "abcd",
            Suite::Kernel => "kernel",
            Suite::Damped => "damped",
            Suite::Identities => "identities",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub dim: usize,
    pub seed: u64,
    /// Random pairs in the group and ABCD-law suites.
    pub trials: usize,
    /// Dimension of the kernel suite, which needs more levels to resolve
    /// position space.
    pub kernel_dim: usize,
    pub omega0: f64,
    pub exec: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dim: 128,
            seed: 1,
            trials: 100,
            kernel_dim: 256,
            omega0: 1.0,
            exec: Execution::default(),
        }
    }
}

pub fn run(suite: Suite, cfg: &SuiteConfig) -> VerificationReport {
    match suite {
        Suite::All => VerificationReport::merge(
            "all",
            vec![
                identities(cfg),
                group_law(cfg),
                abcd_law(cfg),
                kernel(cfg),
                damped(cfg),
            ],
        ),
        Suite::Group => group_law(cfg),
        Suite::Abcd => abcd_law(cfg),
        Suite::Kernel => kernel(cfg),
        Suite::Damped => damped(cfg),
        Suite::Identities => identities(cfg),
    }
}

fn case_or_fail(name: String, tol: f64, r: Result<f64>) -> VerificationCase {
    match r {
        Ok(v) => VerificationCase::new(name, v, tol),
        Err(e) => {
            log::error!("{name}: {e}");
            VerificationCase::failed(name, tol)
        }
    }
}

/// `exp(l X^2)` against its normally ordered form, and the same for `P^2`.
pub fn quadratic_identity_residual(lambda: Complex64, momentum: bool, dim: usize) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let mu = lambda / (one - lambda);
    let sign = if momentum { -1.0 } else { 1.0 };
    let ge = GaussianExponents::new(
        (one - lambda).sqrt().inv(),
        mu * 0.5 * sign,
        mu,
        mu * 0.5 * sign,
    )?;
    let rhs = normal_ordered_gaussian(&ge, dim)?;
    let phi = |x: f64| lambda * x * x;
    let lhs = if momentum {
        momentum_exp(dim, phi)?
    } else {
        position_exp(dim, phi)?
    };
    Ok(crate::fock::block_residual(
        lhs.matrix(),
        rhs.matrix(),
        interior_dim(dim),
    ))
}

/// `<m| exp(l X^2) |n>` by direct quadrature in position space, against the
/// normally ordered form. Valid whenever `Re(1 - l) > 0`, including
/// growing exponentials that a truncated `X` cannot represent.
pub fn quadrature_identity_residual(lambda: Complex64, dim: usize) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    if (one - lambda).re <= 0.0 {
        return Err(Error::Domain(format!(
            "need Re(1 - l) > 0 (got l = {lambda})"
        )));
    }
    let mu = lambda / (one - lambda);
    let ge = GaussianExponents::new((one - lambda).sqrt().inv(), mu * 0.5, mu, mu * 0.5)?;
    let rhs = normal_ordered_gaussian(&ge, dim)?;
    let k = interior_dim(dim);
    let (lo, dx, count) = (
        -QUAD_HALF_WIDTH,
        QUAD_STEP,
        (2.0 * QUAD_HALF_WIDTH / QUAD_STEP).round() as usize + 1,
    );
    let mut lhs = DMatrix::<Complex64>::zeros(k, k);
    for p in 0..count {
        let x = lo + dx * p as f64;
        let w = (lambda * x * x).exp() * dx;
        let psi = hermite_functions(k, x);
        for m in 0..k {
            for n in 0..k {
                lhs[(m, n)] += w * (psi[m] * psi[n]);
            }
        }
    }
    Ok(crate::fock::block_residual(&lhs, rhs.matrix(), k))
}

pub fn identities(cfg: &SuiteConfig) -> VerificationReport {
    let n = cfg.dim;
    let k = interior_dim(n);
    let mut cases = Vec::new();
    for lam in IDENTITY_LAMBDAS {
        for (label, mom) in [("X^2", false), ("P^2", true)] {
            let r = quadratic_identity_residual(Complex64::new(lam, 0.0), mom, n);
            cases.push(case_or_fail(
                format!("identity exp(l {label}) l={lam}"),
                IDENTITY_TOL,
                r,
            ));
        }
    }
    cases.push(case_or_fail(
        format!("identity exp(l X^2) l={COMPLEX_LAMBDA} by quadrature"),
        IDENTITY_TOL,
        quadrature_identity_residual(COMPLEX_LAMBDA, n),
    ));
    let collapse =
        |name: &str, m: RayMatrix, op: Result<crate::fock::FockOperator>| -> VerificationCase {
            let r = op.and_then(|op| {
                let no = fresnel_normal_order(&m, n)?;
                Ok(phase_aligned_residual(op.matrix(), no.matrix(), k))
            });
            match r {
                Ok((res, ph)) => VerificationCase::new(name, res, COLLAPSE_TOL).with_phase(ph),
                Err(_) => VerificationCase::failed(name, COLLAPSE_TOL),
            }
        };
    cases.push(collapse(
        "collapse quadratic phase c=-0.3",
        RayMatrix::lens_power(-0.3),
        quadratic_phase(-0.3, n),
    ));
    cases.push(collapse(
        "collapse free propagator b=0.7",
        RayMatrix::free_space(0.7),
        free_propagator(0.7, n),
    ));
    let a = 0.5f64.exp();
    cases.push(collapse(
        "collapse squeeze A=e^0.5",
        RayMatrix::magnifier(a).expect("positive"),
        squeeze_operator(a, n),
    ));
    VerificationReport::new("identities", cases)
}

pub fn group_law(cfg: &SuiteConfig) -> VerificationReport {
    let pairs = UnimodularSampler::new(cfg.seed).pairs(cfg.trials);
    let results = cfg.exec.map(&pairs, |(m2, m1)| {
        multiplication_check_with(m2, m1, cfg.dim, Execution::Sequential)
    });
    let mut cases = Vec::with_capacity(2 * pairs.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(chk) => {
                cases.push(
                    VerificationCase::new(format!("group[{i}] product"), chk.residual, GROUP_TOL)
                        .with_phase(chk.phase),
                );
                cases.push(VerificationCase::new(
                    format!("group[{i}] sign"),
                    chk.sign_defect(),
                    SIGN_TOL,
                ));
            }
            Err(e) => {
                log::error!("group trial {i}: {e}");
                cases.push(VerificationCase::failed(
                    format!("group[{i}] product"),
                    GROUP_TOL,
                ));
            }
        }
    }
    VerificationReport::new("group", cases)
}

/// Worst-case residuals of the classical layer over seeded trials:
/// curvature and beam-parameter composition, and the `(s, r)` homomorphism.
pub fn classical_layer(seed: u64, trials: usize) -> Vec<VerificationCase> {
    let mut s = UnimodularSampler::new(seed).with_max_entry(3.0);
    let (mut curv, mut beam, mut hom, mut half) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut skipped = 0usize;
    for _ in 0..trials {
        let (m2, m1) = (s.sample(), s.sample());
        let m12 = match RayMatrix::compose(&m2, &m1) {
            Ok(m) => m,
            Err(_) => {
                hom = f64::INFINITY;
                continue;
            }
        };
        let radius = s.uniform(-5.0, 5.0);
        let q = QParam::new(s.uniform(-3.0, 3.0), s.uniform(0.1, 3.0));

        match (
            m1.propagate_curvature(radius),
            m12.propagate_curvature(radius),
        ) {
            (Ok(r1), Ok(direct)) => match m2.propagate_curvature(r1) {
                Ok(two) => curv = curv.max((two - direct).abs() / direct.abs().max(1.0)),
                Err(_) => skipped += 1,
            },
            _ => skipped += 1,
        }
        if let (Ok(q1), Ok(direct)) = (m1.propagate_q(q), m12.propagate_q(q)) {
            if let Ok(two) = m2.propagate_q(q1) {
                beam = beam.max((two.0 - direct.0).norm() / direct.0.norm().max(1.0));
                let want = q.0.im / (q.0 * m12.c() + m12.d()).norm_sqr();
                half = half.max((direct.0.im - want).abs().max(if direct.0.im > 0.0 {
                    0.0
                } else {
                    1.0
                }));
            }
        }
        let lhs = m12.to_sr();
        let rhs = m2.to_sr().compose(&m1.to_sr());
        hom = hom.max((lhs.s() - rhs.s()).norm().max((lhs.r() - rhs.r()).norm()));
    }
    if skipped > 0 {
        log::debug!("{skipped} curvature trials hit a pole and were skipped");
    }
    vec![
        VerificationCase::new("classical curvature composition", curv, CLASSICAL_TOL),
        VerificationCase::new("classical beam composition", beam, CLASSICAL_TOL),
        VerificationCase::new("classical upper half-plane", half, CLASSICAL_TOL),
        VerificationCase::new("classical (s,r) homomorphism", hom, CLASSICAL_TOL),
    ]
}

pub fn abcd_law(cfg: &SuiteConfig) -> VerificationReport {
    let mut cases = classical_layer(cfg.seed, CLASSICAL_TRIALS);
    let pairs = UnimodularSampler::new(cfg.seed.wrapping_add(1)).pairs(cfg.trials);
    let results = cfg.exec.map(&pairs, |(m2, m1)| {
        let routes = law_routes(m2, m1, cfg.dim, Execution::Sequential)?;
        let q1 = q_parameter(m1);
        let im_err = (q1.0.im - 1.0 / (m1.c() * m1.c() + m1.d() * m1.d())).abs();
        let conj = conjugate_law_residual(m2, q1)?;
        Ok::<_, Error>((routes, im_err, conj))
    });
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((routes, im_err, conj)) => {
                cases.push(
                    VerificationCase::new(
                        format!("law[{i}] three routes"),
                        routes.worst_infidelity(),
                        LAW_INFIDELITY_TOL,
                    )
                    .with_phase(routes.phase_product_composed),
                );
                cases.push(VerificationCase::new(
                    format!("law[{i}] Im q"),
                    im_err,
                    Q_TOL,
                ));
                cases.push(VerificationCase::new(
                    format!("law[{i}] conjugate form"),
                    conj,
                    Q_TOL,
                ));
            }
            Err(e) => {
                log::error!("law trial {i}: {e}");
                cases.push(VerificationCase::failed(
                    format!("law[{i}] three routes"),
                    LAW_INFIDELITY_TOL,
                ));
            }
        }
    }
    VerificationReport::new("abcd", cases)
}

pub fn kernel(cfg: &SuiteConfig) -> VerificationReport {
    let mut s = UnimodularSampler::new(cfg.seed.wrapping_add(2));
    let mats: Vec<RayMatrix> = (0..KERNEL_MATRICES)
        .map(|_| s.sample_with_b(0.5, 2.0))
        .collect();
    let grid = Grid::default();
    let results = cfg.exec.map(&mats, |m| {
        let op = fresnel_normal_order(m, cfg.kernel_dim)?;
        kernel_comparison(m, &op, &grid, Execution::Sequential)
    });
    let cases = results
        .into_iter()
        .zip(&mats)
        .enumerate()
        .map(|(i, (r, m))| {
            let name = format!("kernel[{i}] {m}");
            match r {
                Ok(cmp) => {
                    VerificationCase::new(name, cmp.max_abs_err, KERNEL_TOL).with_phase(cmp.phase)
                }
                Err(_) => VerificationCase::failed(name, KERNEL_TOL),
            }
        })
        .collect();
    VerificationReport::new("kernel", cases)
}

pub fn damped(cfg: &SuiteConfig) -> VerificationReport {
    let n = cfg.dim;
    let k = interior_dim(n);
    let i = Complex64::new(0.0, 1.0);
    let grid: Vec<(f64, f64)> = DAMPED_GAMMAS
        .iter()
        .flat_map(|&g| DAMPED_TIMES.iter().map(move |&t| (g, t)))
        .collect();
    let per_point = cfg
        .exec
        .map(&grid, |&(g, t)| -> Result<Vec<VerificationCase>> {
            let p = DampedOscillatorParams::new(g, cfg.omega0, t)?;
            let tag = format!("g={g} t={t}");
            let lens = p.initial_matrix();
            let q1 = q_parameter(&lens).0;
            let start = SqueezedVacuumDescriptor::from_matrix(&lens, n)?;
            let out = abcd_law_apply(&p.evolution_matrix(), &start)?;
            let want_q1 = 1.0 / (g - i);
            let want_q2 = (-2.0 * g * t).exp() / (g - i);

            let closed = damped_state_closed_form(&p, n)?;
            let op_state = u_inverse(&p, n)?.apply(&FockState::vacuum(n)?)?;
            let (fid_op, ph) = closed.fidelity(&op_state, k)?;
            let (fid_law, _) = closed.fidelity(&out.state()?, k)?;
            let (rx, rp) = heisenberg_transform_check(&p, n)?;
            let h = effective_hamiltonian_residual(&p, n)?;
            Ok(vec![
                VerificationCase::new(format!("damped {tag} q1"), (q1 - want_q1).norm(), Q_TOL),
                VerificationCase::new(
                    format!("damped {tag} q2"),
                    (out.q().0 - want_q2).norm(),
                    Q_TOL,
                ),
                VerificationCase::new(
                    format!("damped {tag} closed vs u^-1|0>"),
                    1.0 - fid_op,
                    LAW_INFIDELITY_TOL,
                )
                .with_phase(ph),
                VerificationCase::new(
                    format!("damped {tag} closed vs law"),
                    1.0 - fid_law,
                    LAW_INFIDELITY_TOL,
                ),
                VerificationCase::new(format!("damped {tag} uXu^-1"), rx, HEISENBERG_TOL),
                VerificationCase::new(format!("damped {tag} uPu^-1"), rp, HEISENBERG_TOL),
                VerificationCase::new(format!("damped {tag} effective H"), h, HAMILTONIAN_TOL),
            ])
        });
    let mut cases = Vec::new();
    for (r, (g, t)) in per_point.into_iter().zip(&grid) {
        match r {
            Ok(v) => cases.extend(v),
            Err(e) => {
                log::error!("damped g={g} t={t}: {e}");
                cases.push(VerificationCase::failed(
                    format!("damped g={g} t={t}"),
                    LAW_INFIDELITY_TOL,
                ));
            }
        }
    }
    // The effective Hamiltonian must not depend on t.
    for g in DAMPED_GAMMAS {
        let name = format!("damped g={g} effective H t-spread");
        let vals: Result<Vec<f64>> = [0.0, 0.25, 0.5, 1.0]
            .iter()
            .map(|&t| {
                effective_hamiltonian_residual(&DampedOscillatorParams::new(g, cfg.omega0, t)?, n)
            })
            .collect();
        cases.push(case_or_fail(
            name,
            HAMILTONIAN_TOL,
            vals.map(|v| {
                let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                hi - lo
            }),
        ));
    }
    VerificationReport::new("damped", cases)
}
