//! Hankel functions, Gauss–Legendre rules and closed-form panel integrals.

mod bessel;
mod panel;
mod quadrature;

pub use bessel::{
    bessel_j, bessel_y, green, green_pair, green_prime, hankel2, hankel2_complex, hankel2_n, hankel2_small,
    EULER_GAMMA_EXP,
};
pub use panel::{
    identities_i, integrate_g_halfrooftop, integrate_gradg_halfrooftop, small_kernel_integrals,
    Identities, SegmentGeometry, SmallKernelIntegrals,
};
pub use quadrature::{gauss_legendre, gauss_legendre_unit};
