use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Pole,
    Domain,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("determinant {det} differs from 1 by more than {tol:e}")]
    NotUnimodular { det: f64, tol: f64 },

    #[error("determinant drifted to {det} during composition")]
    DeterminantDrift { det: f64 },

    #[error("|s|^2 - |r|^2 = {value}, expected 1")]
    NotUnimodularPair { value: f64 },

    #[error("(s, r) does not map to a real ray matrix (imaginary residue {residue:e})")]
    InconsistentPair { residue: f64 },

    #[error("Moebius map hits a pole (|denominator| = {denominator:e})")]
    Pole { denominator: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("1 + g vanishes, so (1 + g)^n is singular")]
    SingularExponent,

    #[error("operator dimension must be at least 2, got {0}")]
    Dimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix exponential overflowed")]
    Range,

    #[error("|B| = {b:e} is too small: the Fresnel kernel degenerates to a delta function")]
    DeltaKernel { b: f64 },

    #[error(
        "grid undersamples the chirp: phase advances {advance:.3} rad per sample, \
         need at least {required} samples over the same span"
    )]
    Aliasing { advance: f64, required: usize },

    #[error("Im q = {im} is not positive, the squeezed vacuum is not normalizable")]
    NonNormalizable { im: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_) => ErrorKind::Parse,
            Error::Pole { .. } => ErrorKind::Pole,
            Error::DeterminantDrift { .. } | Error::NonFinite | Error::Range => {
                ErrorKind::Numerical
            }
            _ => ErrorKind::Domain,
        }
    }
}
