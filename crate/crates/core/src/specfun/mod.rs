//! Special-function kernel used by the rest of the crate.
//!
//! Everything here is a pure function of its arguments and evaluated in
//! double precision.

mod bessel;
mod clebsch;
mod hyp1f1;
mod legendre;
mod quadrature;

pub use bessel::{sph_bessel_j, sph_bessel_j_all};
pub use clebsch::{clebsch_gordan, CGKey};
pub use hyp1f1::{hyp1f1_imag, HYP1F1_MAX_ARG, HYP1F1_MAX_TERMS};
pub use legendre::{
    legendre_p, legendre_p_all, normalized_legendre_all, sph_harm_m, sph_harm_m_all,
};
pub use quadrature::{gauss_legendre, QuadratureRule, DEFAULT_QUADRATURE_ORDER, MAX_QUADRATURE_ORDER};

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln n!
pub fn ln_factorial(n: u32) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}
