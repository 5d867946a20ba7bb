//! Classical ABCD matrix optics.
//!
//! Ray-transfer matrices act on `(height, direction)` column vectors. All
//! lengths are dimensionless. Composition follows operator order: in
//! `compose(m2, m1)` the system `m1` is traversed first.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `ad - bc = 1` when a matrix is constructed.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance on the determinant after a product.
pub const COMPOSITION_TOL: f64 = 1e-9;
/// Tolerance on `|s|^2 - |r|^2 = 1`.
pub const PAIR_TOL: f64 = 1e-10;
/// Denominators smaller than this are treated as poles.
pub const POLE_TOL: f64 = 1e-14;

/// A real unimodular 2x2 ray-transfer matrix `(A B; C D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayMatrix {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

/// A paraxial ray: height above the axis and optical direction cosine.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Ray {
    pub height: f64,
    pub direction: f64,
}

impl Ray {
    pub fn new(height: f64, direction: f64) -> Self {
        Ray { height, direction }
    }
}

/// Complex beam parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParam(pub Complex64);

impl QParam {
    pub fn new(re: f64, im: f64) -> Self {
        QParam(Complex64::new(re, im))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

impl From<Complex64> for QParam {
    fn from(q: Complex64) -> Self {
        QParam(q)
    }
}

/// The complex parametrization `(s, r)` of a symplectic map, with
/// `|s|^2 - |r|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SRPair {
    s: Complex64,
    r: Complex64,
}

/// Factors of `lens(C/A) * magnifier(A) * propagator(B/A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub lens: f64,
    pub magnification: f64,
    pub propagator: f64,
}

impl RayMatrix {
    pub const IDENTITY: RayMatrix = RayMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::with_tolerance(a, b, c, d, CONSTRUCTION_TOL)
    }

    pub fn with_tolerance(a: f64, b: f64, c: f64, d: f64, tol: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let det = a * d - b * c;
        if (det - 1.0).abs() > tol {
            return Err(Error::NotUnimodular { det, tol });
        }
        Ok(RayMatrix { a, b, c, d })
    }

    /// Builds `(A B; C D)` with `D = (1 + BC) / A`.
    pub fn completing_d(a: f64, b: f64, c: f64) -> Result<Self> {
        if a == 0.0 {
            return Err(Error::Domain("cannot solve for D when A = 0".into()));
        }
        Self::new(a, b, c, (1.0 + b * c) / a)
    }

    /// Free-space propagation over distance `d`.
    pub fn free_space(d: f64) -> Self {
        RayMatrix {
            a: 1.0,
            b: d,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Thin lens of focal length `f`.
    pub fn thin_lens(f: f64) -> Result<Self> {
        if f == 0.0 || !f.is_finite() {
            return Err(Error::Domain(format!(
                "thin lens needs a finite nonzero focal length, got {f}"
            )));
        }
        Ok(Self::lens_power(-1.0 / f))
    }

    /// The lower-triangular `(1 0; c 1)`. A thin lens has `c = -1/f`.
    pub fn lens_power(c: f64) -> Self {
        RayMatrix {
            a: 1.0,
            b: 0.0,
            c,
            d: 1.0,
        }
    }

    pub fn magnifier(a: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::Domain(format!(
                "magnification must be finite and nonzero, got {a}"
            )));
        }
        Ok(RayMatrix {
            a,
            b: 0.0,
            c: 0.0,
            d: 1.0 / a,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn inverse(&self) -> Self {
        RayMatrix {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `m2 * m1`: `m1` acts first.
    pub fn compose(m2: &RayMatrix, m1: &RayMatrix) -> Result<RayMatrix> {
        let p = RayMatrix {
            a: m2.a * m1.a + m2.b * m1.c,
            b: m2.a * m1.b + m2.b * m1.d,
            c: m2.c * m1.a + m2.d * m1.c,
            d: m2.c * m1.b + m2.d * m1.d,
        };
        let det = p.det();
        if !det.is_finite() || (det - 1.0).abs() > COMPOSITION_TOL {
            return Err(Error::DeterminantDrift { det });
        }
        Ok(p)
    }

    /// Composes a list of elements given in traversal order.
    pub fn chain<'a, I>(elements: I) -> Result<RayMatrix>
    where
        I: IntoIterator<Item = &'a RayMatrix>,
    {
        elements
            .into_iter()
            .try_fold(RayMatrix::IDENTITY, |acc, m| RayMatrix::compose(m, &acc))
    }

    pub fn trace_ray(&self, ray: Ray) -> Ray {
        Ray {
            height: self.a * ray.height + self.b * ray.direction,
            direction: self.c * ray.height + self.d * ray.direction,
        }
    }

    /// Radius of curvature after the system: `(A R + B) / (C R + D)`.
    pub fn propagate_curvature(&self, radius: f64) -> Result<f64> {
        let den = self.c * radius + self.d;
        if den.abs() < POLE_TOL {
            return Err(Error::Pole {
                denominator: den.abs(),
            });
        }
        Ok((self.a * radius + self.b) / den)
    }

    /// Gaussian-beam law `q2 = (A q1 + B) / (C q1 + D)`.
    pub fn propagate_q(&self, q: QParam) -> Result<QParam> {
        let q = q.0;
        let den = q * self.c + self.d;
        if den.norm() < POLE_TOL {
            return Err(Error::Pole {
                denominator: den.norm(),
            });
        }
        Ok(QParam((q * self.a + self.b) / den))
    }

    pub fn to_sr(&self) -> SRPair {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        SRPair {
            s: Complex64::new(0.5 * (a + d), -0.5 * (b - c)),
            r: Complex64::new(-0.5 * (a - d), -0.5 * (b + c)),
        }
    }

    /// Splits the matrix as `lens(C/A) * magnifier(A) * propagator(B/A)`.
    pub fn decompose(&self) -> Result<Decomposition> {
        if self.a <= 0.0 {
            return Err(Error::Domain(format!(
                "decomposition needs A > 0 (got A = {}); use the normal-ordered route",
                self.a
            )));
        }
        Ok(Decomposition {
            lens: self.c / self.a,
            magnification: self.a,
            propagator: self.b / self.a,
        })
    }

    pub fn approx_eq(&self, other: &RayMatrix, tol: f64) -> bool {
        self.entries()
            .iter()
            .zip(other.entries())
            .all(|(x, y)| (x - y).abs() <= tol)
    }
}

impl Mul for RayMatrix {
    type Output = Result<RayMatrix>;

    fn mul(self, rhs: RayMatrix) -> Result<RayMatrix> {
        RayMatrix::compose(&self, &rhs)
    }
}

impl fmt::Display for RayMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}; {}, {})", self.a, self.b, self.c, self.d)
    }
}

impl Decomposition {
    pub fn recompose(&self) -> Result<RayMatrix> {
        let lens = RayMatrix::lens_power(self.lens);
        let mag = RayMatrix::magnifier(self.magnification)?;
        let prop = RayMatrix::free_space(self.propagator);
        RayMatrix::chain([&prop, &mag, &lens])
    }
}

impl SRPair {
    pub fn new(s: Complex64, r: Complex64) -> Result<Self> {
        let value = s.norm_sqr() - r.norm_sqr();
        if (value - 1.0).abs() > PAIR_TOL {
            return Err(Error::NotUnimodularPair { value });
        }
        Ok(SRPair { s, r })
    }

    pub const IDENTITY: SRPair = SRPair {
        s: Complex64::new(1.0, 0.0),
        r: Complex64::new(0.0, 0.0),
    };

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn r(&self) -> Complex64 {
        self.r
    }

    /// `|s|^2 - |r|^2`, which should be 1.
    pub fn unimodularity(&self) -> f64 {
        self.s.norm_sqr() - self.r.norm_sqr()
    }

    /// Squeeze ratio `|r| / |s|`, always below 1.
    pub fn ratio(&self) -> f64 {
        self.r.norm() / self.s.norm()
    }

    pub fn to_ray_matrix(&self) -> Result<RayMatrix> {
        // s + s* = A + D, s - s* = -i(B - C), r + r* = -(A - D), r - r* = -i(B + C)
        let (s, r) = (self.s, self.r);
        let a_plus_d = s + s.conj();
        let b_minus_c = (s - s.conj()) * Complex64::i();
        let a_minus_d = -(r + r.conj());
        let b_plus_c = (r - r.conj()) * Complex64::i();
        let a = 0.5 * (a_plus_d + a_minus_d);
        let d = 0.5 * (a_plus_d - a_minus_d);
        let b = 0.5 * (b_plus_c + b_minus_c);
        let c = 0.5 * (b_plus_c - b_minus_c);
        let residue = [a, b, c, d].iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        if residue > PAIR_TOL {
            return Err(Error::InconsistentPair { residue });
        }
        RayMatrix::with_tolerance(a.re, b.re, c.re, d.re, PAIR_TOL)
    }

    /// The pair of the product `M(self) * M(other)`.
    pub fn compose(&self, other: &SRPair) -> SRPair {
        let (s, r) = (self.s, self.r);
        let (s2, r2) = (other.s, other.r);
        SRPair {
            s: s * s2 + r * r2.conj(),
            r: r * s2.conj() + r2 * s,
        }
    }

    pub fn approx_eq(&self, other: &SRPair, tol: f64) -> bool {
        (self.s - other.s).norm() <= tol && (self.r - other.r).norm() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn construction_checks_determinant() {
        assert!(RayMatrix::new(2.0, 1.0, 1.0, 1.0).is_ok());
        assert!(matches!(
            RayMatrix::new(1.0, 1.0, 1.0, 1.0),
            Err(Error::NotUnimodular { .. })
        ));
        assert!(RayMatrix::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn compose_identity_and_free_space() {
        let i = RayMatrix::IDENTITY;
        assert_eq!(RayMatrix::compose(&i, &i).unwrap(), i);
        let m =
            RayMatrix::compose(&RayMatrix::free_space(0.7), &RayMatrix::free_space(1.9)).unwrap();
        assert!(m.approx_eq(&RayMatrix::free_space(2.6), 1e-15));
    }

    #[test]
    fn compose_reports_drift() {
        let near = RayMatrix::with_tolerance(1.0, 0.0, 0.0, 1.0 + 5e-9, 1e-8).unwrap();
        assert!(matches!(
            RayMatrix::compose(&near, &near),
            Err(Error::DeterminantDrift { .. })
        ));
    }

    #[test]
    fn decomposition_product_reproduces_matrix() {
        let m = RayMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let lens = RayMatrix::lens_power(m.c() / m.a());
        let mag = RayMatrix::magnifier(m.a()).unwrap();
        let prop = RayMatrix::free_space(m.b() / m.a());
        let p = RayMatrix::compose(&RayMatrix::compose(&lens, &mag).unwrap(), &prop).unwrap();
        assert!(p.approx_eq(&m, 1e-15));
    }

    #[test]
    fn trace_ray_examples() {
        let ray = Ray::new(0.3, -1.2);
        assert_eq!(RayMatrix::IDENTITY.trace_ray(ray), ray);
        let out = RayMatrix::free_space(2.0).trace_ray(ray);
        assert!((out.height - (0.3 + 2.0 * -1.2)).abs() < 1e-15);
        assert_eq!(out.direction, -1.2);
        let out = RayMatrix::thin_lens(4.0)
            .unwrap()
            .trace_ray(Ray::new(2.0, 0.0));
        assert_eq!(out, Ray::new(2.0, -0.5));
    }

    #[test]
    fn curvature_examples() {
        assert_eq!(RayMatrix::IDENTITY.propagate_curvature(3.5).unwrap(), 3.5);
        assert!(
            (RayMatrix::free_space(1.25)
                .propagate_curvature(3.5)
                .unwrap()
                - 4.75)
                .abs()
                < 1e-15
        );
        let rot = RayMatrix::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!((rot.propagate_curvature(4.0).unwrap() + 0.25).abs() < 1e-15);
        // lens of focal length R focuses a wavefront of radius R to a point
        let lens = RayMatrix::thin_lens(2.0).unwrap();
        assert!(matches!(
            lens.propagate_curvature(2.0),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn q_examples() {
        let q = QParam::new(0.4, 1.3);
        assert_eq!(RayMatrix::IDENTITY.propagate_q(q).unwrap(), q);
        let out = RayMatrix::free_space(2.0)
            .propagate_q(QParam::new(0.0, 1.0))
            .unwrap();
        assert!((out.0 - c(2.0, 1.0)).norm() < 1e-15);
        let rot = RayMatrix::new(0.0, 1.0, -1.0, 0.0).unwrap();
        let out = rot.propagate_q(QParam::new(0.0, 1.0)).unwrap();
        assert!((out.0 - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn sr_examples() {
        let p = RayMatrix::IDENTITY.to_sr();
        assert!(p.approx_eq(&SRPair::IDENTITY, 0.0));

        let p = RayMatrix::free_space(1.0).to_sr();
        assert!((p.s() - c(1.0, -0.5)).norm() < 1e-15);
        assert!((p.r() - c(0.0, -0.5)).norm() < 1e-15);
        assert!((p.unimodularity() - 1.0).abs() < 1e-15);

        let sigma: f64 = 0.8;
        let p = RayMatrix::magnifier(sigma.exp()).unwrap().to_sr();
        assert!((p.s() - c(sigma.cosh(), 0.0)).norm() < 1e-14);
        assert!((p.r() - c(-sigma.sinh(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn sr_inverse_examples() {
        assert_eq!(
            SRPair::IDENTITY.to_ray_matrix().unwrap(),
            RayMatrix::IDENTITY
        );
        let sigma: f64 = -0.35;
        let p = SRPair::new(c(sigma.cosh(), 0.0), c(-sigma.sinh(), 0.0)).unwrap();
        let m = p.to_ray_matrix().unwrap();
        assert!(m.approx_eq(&RayMatrix::magnifier(sigma.exp()).unwrap(), 1e-14));
    }

    #[test]
    fn sr_round_trip_and_bad_pairs() {
        let m = RayMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let back = m.to_sr().to_ray_matrix().unwrap();
        assert!(back.approx_eq(&m, 1e-14));
        // a global phase on (s, r) still maps back to a real matrix
        let w = Complex64::from_polar(1.0, 0.3);
        let p = SRPair::new(w * 1.25, c(0.0, 0.75)).unwrap();
        assert!(p.to_ray_matrix().is_ok());
        assert!(matches!(
            SRPair::new(c(2.0, 0.0), c(0.0, 0.0)),
            Err(Error::NotUnimodularPair { .. })
        ));
    }

    #[test]
    fn sr_composition_hyperbolic_addition() {
        let (a, b): (f64, f64) = (0.4, -1.1);
        let p = SRPair::new(c(a.cosh(), 0.0), c(-a.sinh(), 0.0)).unwrap();
        let q = SRPair::new(c(b.cosh(), 0.0), c(-b.sinh(), 0.0)).unwrap();
        let pq = p.compose(&q);
        assert!((pq.s() - c((a + b).cosh(), 0.0)).norm() < 1e-14);
        assert!((pq.r() - c(-(a + b).sinh(), 0.0)).norm() < 1e-14);
        assert!(SRPair::IDENTITY
            .compose(&SRPair::IDENTITY)
            .approx_eq(&SRPair::IDENTITY, 0.0));
    }

    #[test]
    fn decompose_examples() {
        let d = RayMatrix::IDENTITY.decompose().unwrap();
        assert_eq!(
            d,
            Decomposition {
                lens: 0.0,
                magnification: 1.0,
                propagator: 0.0
            }
        );
        let m = RayMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let d = m.decompose().unwrap();
        assert_eq!(
            d,
            Decomposition {
                lens: 0.5,
                magnification: 2.0,
                propagator: 0.5
            }
        );
        assert!(d.recompose().unwrap().approx_eq(&m, 1e-12));
        let rot = RayMatrix::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!(matches!(rot.decompose(), Err(Error::Domain(_))));
    }

    #[test]
    fn element_constructors() {
        assert_eq!(RayMatrix::free_space(0.0), RayMatrix::IDENTITY);
        assert!(RayMatrix::thin_lens(0.0).is_err());
        assert!(RayMatrix::magnifier(0.0).is_err());
        assert_eq!(RayMatrix::magnifier(2.0).unwrap().det(), 1.0);
        let f = 1.5;
        let alpha = 0.2;
        let sys = RayMatrix::compose(&RayMatrix::thin_lens(f).unwrap(), &RayMatrix::free_space(f))
            .unwrap();
        let out = sys.trace_ray(Ray::new(0.0, alpha));
        assert!((out.height - f * alpha).abs() < 1e-15);
        assert!(out.direction.abs() < 1e-15);
    }
}
