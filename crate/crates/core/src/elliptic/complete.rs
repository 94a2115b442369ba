use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 64;

/// Arithmetic–geometric mean of two positive numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integrals of the first kind `(K(k), K(k'))` for the
/// squared modulus `k2`.
pub fn complete_elliptic_integrals(k2: f64) -> Result<(f64, f64)> {
    if !(k2 > 0.0 && k2 < 1.0) {
        return Err(Error::Domain(k2));
    }
    let k2c = 1.0 - k2;
    Ok((FRAC_PI_2 / agm(1.0, k2c.sqrt()), FRAC_PI_2 / agm(1.0, k2.sqrt())))
}

/// Complete elliptic integral of the second kind `E(k)`.
pub fn complete_elliptic_e(k2: f64) -> Result<f64> {
    if !(k2 > 0.0 && k2 < 1.0) {
        return Err(Error::Domain(k2));
    }
    let mut a = 1.0;
    let mut b = (1.0 - k2).sqrt();
    let mut sum = 0.5 * k2;
    let mut pow = 0.5;
    for _ in 0..AGM_MAX_ITER {
        let c = 0.5 * (a - b);
        pow *= 2.0;
        sum += pow * c * c;
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
        // the next correction is O(c^2) and already below rounding
        if c.abs() < 1e-10 {
            break;
        }
    }
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

/// Squared modulus with its complement and both quarter periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusParams {
    pub k2: f64,
    pub k2c: f64,
    /// Quarter period `K`.
    pub big_k: f64,
    /// Quarter period `K'`.
    pub big_kc: f64,
}

impl ModulusParams {
    pub fn new(k2: f64) -> Result<Self> {
        let (big_k, big_kc) = complete_elliptic_integrals(k2)?;
        Ok(Self { k2, k2c: 1.0 - k2, big_k, big_kc })
    }

    pub fn k(&self) -> f64 {
        self.k2.sqrt()
    }

    pub fn kc(&self) -> f64 {
        self.k2c.sqrt()
    }

    /// Parameters of the complementary modulus `k'`.
    pub fn complementary(&self) -> Self {
        Self { k2: self.k2c, k2c: self.k2, big_k: self.big_kc, big_kc: self.big_k }
    }

    /// Real period `2K` of `sn^2`, `cn^2/dn^2` and therefore of the potentials.
    pub fn period(&self) -> f64 {
        2.0 * self.big_k
    }
}
