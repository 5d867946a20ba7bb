//! Classical ABCD optics and its representation as Fresnel operators on a
//! truncated boson Fock space.

pub mod error;
pub mod exec;
pub mod fock;
pub mod fresnel;
pub mod optics;
pub mod quantum;
pub mod random;
pub mod report;
pub mod system;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
pub use exec::Execution;
pub use fock::{FockOperator, FockState, GaussianExponents};
pub use optics::{QParam, Ray, RayMatrix, SRPair};
pub use report::{VerificationCase, VerificationReport};
