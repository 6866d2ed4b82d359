//! Scalar special functions backing the exact and asymptotic layers:
//! Gamma, Riemann zeta, polylogarithms, and the contour-integral kernel
//! of the critical limit laws.
//!
//! Everything here is hand-rolled on purpose: these functions sit on the
//! load-bearing numerical paths and each one ships with frozen reference
//! values plus at least one independent evaluation route.

mod gamma;
mod jintegral;
mod polylog;
mod zeta;

pub use gamma::{gamma, ln_gamma, recip_gamma};
pub use jintegral::{gamma_sqrt_mgf, j_integral, j_integral_quadrature, j_tilde_zero};
pub use polylog::{
    polylog, polylog_expansion, polylog_inverse, polylog_series, polylog_singular_expansion,
    SingularExpansion,
};
pub use zeta::zeta;
