use num_complex::Complex64;

use super::complete::ModulusParams;
use crate::error::{Error, Result};

/// `(sn, cn, dn)` of a real argument by the descending Landen (AGM) ladder.
///
/// The argument is first reduced to `[-K, K]` with `sn(u + 2K) = -sn(u)`,
/// `cn(u + 2K) = -cn(u)`, `dn(u + 2K) = dn(u)`.
pub(crate) fn sncndn(u: f64, modulus: &ModulusParams) -> (f64, f64, f64) {
    let period = 2.0 * modulus.big_k;
    let turns = (u / period).round();
    let r = u - turns * period;
    let (mut sn, mut cn, dn) = sncndn_agm(r, modulus.k2, modulus.k2c);
    if (turns as i64).rem_euclid(2) == 1 {
        sn = -sn;
        cn = -cn;
    }
    (sn, cn, dn)
}

fn sncndn_agm(u: f64, k2: f64, k2c: f64) -> (f64, f64, f64) {
    const MAX: usize = 32;
    let mut a = [0.0f64; MAX + 1];
    let mut c = [0.0f64; MAX + 1];
    a[0] = 1.0;
    c[0] = k2.sqrt();
    let mut b = k2c.sqrt();
    let mut n = 0;
    while n < MAX {
        let (an, bn) = (a[n], b);
        a[n + 1] = 0.5 * (an + bn);
        c[n + 1] = 0.5 * (an - bn);
        b = (an * bn).sqrt();
        n += 1;
        if c[n].abs() <= 1e-16 * a[n] {
            break;
        }
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (k2c + k2 * cn * cn).sqrt();
    (sn, cn, dn)
}

/// Real-argument Jacobi functions `sn`, `cn`, `dn` for squared modulus `k2`.
pub fn jacobi_sn_cn_dn(x: f64, k2: f64) -> Result<(f64, f64, f64)> {
    let modulus = ModulusParams::new(k2)?;
    Ok(sncndn(x, &modulus))
}

/// Building blocks of the addition theorem for `z = u + iv`: real-modulus
/// functions at `u` and complementary-modulus functions at `v`.
struct AdditionParts {
    s: f64,
    c: f64,
    d: f64,
    s1: f64,
    c1: f64,
    d1: f64,
    k2: f64,
}

impl AdditionParts {
    fn new(z: Complex64, modulus: &ModulusParams) -> Self {
        let (s, c, d) = sncndn(z.re, modulus);
        let (s1, c1, d1) = sncndn(z.im, &modulus.complementary());
        Self { s, c, d, s1, c1, d1, k2: modulus.k2 }
    }

    fn delta(&self) -> f64 {
        self.c1 * self.c1 + self.k2 * self.s * self.s * self.s1 * self.s1
    }

    fn sn_num(&self) -> Complex64 {
        Complex64::new(self.s * self.d1, self.c * self.d * self.s1 * self.c1)
    }

    fn cn_num(&self) -> Complex64 {
        Complex64::new(self.c * self.c1, -self.s * self.d * self.s1 * self.d1)
    }

    fn dn_num(&self) -> Complex64 {
        Complex64::new(self.d * self.c1 * self.d1, -self.k2 * self.s * self.c * self.s1)
    }
}

/// Distance from `z` to the nearest point of `centre + 2a Z + 2ib Z`.
pub(crate) fn distance_to_grid(z: Complex64, centre: Complex64, a: f64, b: f64) -> f64 {
    let w = z - centre;
    let re = w.re - 2.0 * a * (w.re / (2.0 * a)).round();
    let im = w.im - 2.0 * b * (w.im / (2.0 * b)).round();
    re.hypot(im)
}

/// Complex-argument `(sn, cn, dn)` via the addition theorem in `u + iv`.
///
/// All three functions have poles at `iK' + 2mK + 2niK'`; arguments closer
/// than `guard` to one of them are rejected.
pub fn jacobi_complex(
    z: Complex64,
    modulus: &ModulusParams,
    guard: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    let distance =
        distance_to_grid(z, Complex64::new(0.0, modulus.big_kc), modulus.big_k, modulus.big_kc);
    if distance < guard {
        return Err(Error::PoleProximity { re: z.re, im: z.im, distance });
    }
    let p = AdditionParts::new(z, modulus);
    let delta = p.delta();
    Ok((p.sn_num() / delta, p.cn_num() / delta, p.dn_num() / delta))
}

/// `ns = 1/sn`, `cs = cn/sn` and `ds = dn/sn`, finite at the poles of `sn`.
#[derive(Debug, Clone, Copy)]
pub struct JacobiReciprocals {
    pub ns: Complex64,
    pub cs: Complex64,
    pub ds: Complex64,
}

/// Reciprocal Jacobi functions; singular only at the zeros of `sn`
/// (`2mK + 2niK'`).
pub fn jacobi_reciprocals(
    z: Complex64,
    modulus: &ModulusParams,
    guard: f64,
) -> Result<JacobiReciprocals> {
    let distance = distance_to_grid(z, Complex64::new(0.0, 0.0), modulus.big_k, modulus.big_kc);
    if distance < guard {
        return Err(Error::PoleProximity { re: z.re, im: z.im, distance });
    }
    let p = AdditionParts::new(z, modulus);
    let den = p.sn_num();
    Ok(JacobiReciprocals {
        ns: Complex64::new(p.delta(), 0.0) / den,
        cs: p.cn_num() / den,
        ds: p.dn_num() / den,
    })
}
