//! Elliptic special functions on the lattice generated by a real modulus.
//!
//! The Weierstrass lattice is normalised so that `e1 - e3 = 1` and
//! `e1 + e2 + e3 = 0`; with that choice the half-periods are `K` and `iK'`
//! and `wp(z) = e3 + 1/sn^2(z, k)`.

mod carlson;
mod complete;
pub(crate) mod jacobi;
mod weierstrass;

pub use carlson::{carlson_rf, inverse_wp};
pub use complete::{agm, complete_elliptic_e, complete_elliptic_integrals, ModulusParams};
pub use jacobi::{jacobi_complex, jacobi_reciprocals, jacobi_sn_cn_dn, JacobiReciprocals};
pub use weierstrass::{
    lattice_from_modulus, weier_sigma, weier_zeta, wp, wp_prime, WeierstrassLattice,
    DEFAULT_POLE_GUARD,
};

/// Complex number used for points of the z-plane.
pub type ComplexValue = num_complex::Complex64;
