//! Exact and numerical tools for separable potentials built from the Appell
//! F4 function.
//!
//! [`poly`] holds exact Laurent polynomials over the rationals, [`hypergeom`]
//! the F4 series, and [`potentials`] the families and their closed forms.
//! [`residuals`] checks the separability systems exactly or by finite
//! differences, [`mechanics`] works with the associated first integrals, and
//! [`billiard`] integrates the elliptic billiard.

pub mod billiard;
pub mod calibrate;
pub mod error;
pub mod fd;
pub mod hypergeom;
pub mod mechanics;
pub mod poly;
pub mod potentials;
pub mod residuals;
pub mod scalar;

pub use error::{Error, Result};
pub use poly::LaurentPoly;
pub use scalar::Rational;
