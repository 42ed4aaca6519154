//! Certified computations for expansive algebraic actions of `Z^d`.
//!
//! The crate works with finitely presented modules over the integral group
//! ring `Z[Z^d]` (Laurent polynomials with integer coefficients) and the
//! compact groups `X_A` dual to `(Z[Z^d])^k / (Z[Z^d])^n A`. Every numerical
//! verdict is backed by a certificate: torus grids with Lipschitz margins,
//! exact residuals of truncated `l^1` inverses, explicit kernel witnesses.
//!
//! Module map:
//! - [`groupring`]: exact arithmetic in `Z[Z^d]` and its matrix algebra.
//! - [`torus`]: Fourier evaluation, nonvanishing certificates, `l^1` inverses.
//! - [`expansive`]: expansiveness and finite-entropy decisions.
//! - [`entropy`]: Mahler measure, Peters counting, packing lower bounds.
//! - [`homoclinic`]: homoclinic points, the character functions `Psi`.
//! - [`independence`]: independence-set witnesses and specification shadows.
//! - [`freegroup`]: truncated group-ring arithmetic on free groups.

pub mod caps;
pub mod entropy;
pub mod error;
pub mod expansive;
pub mod freegroup;
pub mod groupring;
pub mod homoclinic;
pub mod independence;
pub mod par;
pub mod torus;
pub mod window;

mod exact;

pub use error::{Error, Result};
pub use exact::ExactResidual;
pub use groupring::{Exponent, GroupRingElement, GroupRingMatrix, TorusPoint};
pub use par::Exec;
pub use torus::{L1Approximant, TorusCertificate, Verdict};
