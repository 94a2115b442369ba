use num_complex::Complex64;

use super::weierstrass::WeierstrassLattice;
use crate::error::{Error, Result};

const RF_MAX_ITER: usize = 100;

/// Carlson's symmetric integral
/// `R_F(x, y, z) = 1/2 int_0^inf dt / sqrt((t+x)(t+y)(t+z))` for complex
/// arguments, by duplication with the fifth-order series tail.
pub fn carlson_rf(x: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
    let (mut x, mut y, mut z) = (x, y, z);
    let zeros = [x, y, z].iter().filter(|v| v.norm() == 0.0).count();
    if zeros > 1 {
        return Err(Error::Invalid("R_F needs at least two nonzero arguments".into()));
    }
    let a0 = (x + y + z) / 3.0;
    // (3 * 1e-16)^(1/6): series tail below double precision
    let r = 2.6e-3;
    let mut q = [x, y, z].iter().map(|v| (a0 - v).norm()).fold(0.0, f64::max) / r;
    let mut a = a0;
    for _ in 0..RF_MAX_ITER {
        if q < a.norm() {
            let dx = (a - x) / a;
            let dy = (a - y) / a;
            let dz = -(dx + dy);
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let series = Complex64::new(1.0, 0.0) - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0
                - e2 * e3 * (3.0 / 44.0);
            return Ok(series / a.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        x = (x + lambda) / 4.0;
        y = (y + lambda) / 4.0;
        z = (z + lambda) / 4.0;
        a = (a + lambda) / 4.0;
        q /= 4.0;
    }
    Err(Error::NonConvergence { what: "Carlson R_F", iterations: RF_MAX_ITER })
}

/// Solve `wp(t) = c` on `lattice`.
///
/// The starting value is the incomplete-integral representation
/// `t = R_F(c - e1, c - e2, c - e3)`, followed by complex Newton polishing.
/// The result is reduced into `re t in [0, 2 omega)`, `im t in [0, 2|omega'|)`.
pub fn inverse_wp(c: Complex64, lattice: &WeierstrassLattice) -> Result<Complex64> {
    if !c.is_finite() {
        return Err(Error::Invalid("inverse_wp of a non-finite value".into()));
    }
    let scale = 1.0 + c.norm();
    let target = 1e-13 * scale;
    let residual = |t: Complex64| -> f64 {
        lattice.wp(t).map(|w| (w - c).norm()).unwrap_or(f64::INFINITY)
    };

    let mut candidates = Vec::with_capacity(4);
    let direct = [c - lattice.e1, c - lattice.e2, c - lattice.e3];
    if direct.iter().filter(|v| v.norm() == 0.0).count() <= 1 {
        candidates.push(carlson_rf(direct[0], direct[1], direct[2])?);
    }
    // Same integral through the rotated lattice, useful when the direct
    // arguments sit on the branch cut.
    let rotated = [lattice.e1 - c, lattice.e2 - c, lattice.e3 - c];
    if rotated.iter().filter(|v| v.norm() == 0.0).count() <= 1 {
        if let Ok(t) = carlson_rf(rotated[0], rotated[1], rotated[2]) {
            candidates.push(t * Complex64::new(0.0, 1.0));
        }
    }

    let mut best: Option<(Complex64, f64)> = None;
    for start in candidates {
        let t = newton_polish(start, c, lattice);
        let r = residual(t);
        if best.is_none_or(|(_, rb)| r < rb) {
            best = Some((t, r));
        }
        if r <= target {
            break;
        }
    }
    match best {
        Some((t, r)) if r <= 1e-11 * scale => Ok(reduce_to_cell(t, lattice)),
        _ => Err(Error::NonConvergence { what: "inverse_wp", iterations: 8 }),
    }
}

fn newton_polish(mut t: Complex64, c: Complex64, lattice: &WeierstrassLattice) -> Complex64 {
    for _ in 0..8 {
        let Ok((w, dw)) = lattice.wp_and_prime(t) else { break };
        let f = w - c;
        if f.norm() <= 1e-15 * (1.0 + c.norm()) || dw.norm() == 0.0 {
            break;
        }
        let next = t - f / dw;
        let improved = lattice.wp(next).map(|wn| (wn - c).norm() < f.norm()).unwrap_or(false);
        if !improved {
            break;
        }
        t = next;
    }
    t
}

fn reduce_to_cell(t: Complex64, lattice: &WeierstrassLattice) -> Complex64 {
    let p = 2.0 * lattice.omega;
    let q = 2.0 * lattice.omegap_im;
    let mut re = t.re.rem_euclid(p);
    let mut im = t.im.rem_euclid(q);
    // snap representatives that rounded to the far edge
    if (p - re) < 1e-13 * p {
        re = 0.0;
    }
    if (q - im) < 1e-13 * q {
        im = 0.0;
    }
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::lattice_from_modulus;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rf_gives_complete_integral() {
        // R_F(0, k'^2, 1) = K(k)
        let lat = lattice_from_modulus(0.64).unwrap();
        let v = carlson_rf(c(0.0, 0.0), c(0.36, 0.0), c(1.0, 0.0)).unwrap();
        assert!((v.re - lat.omega).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn half_periods_recovered() {
        for &k2 in &[0.3, 0.5, 0.95] {
            let lat = lattice_from_modulus(k2).unwrap();
            let [w1, w2, w3] = lat.half_periods();
            let t1 = inverse_wp(c(lat.e1, 0.0), &lat).unwrap();
            assert!((t1 - w1).norm() < 1e-7, "k2={k2}: {t1}");
            let t2 = inverse_wp(c(lat.e2, 0.0), &lat).unwrap();
            assert!((t2 - w2).norm() < 1e-7, "k2={k2}: {t2}");
            let t3 = inverse_wp(c(lat.e3, 0.0), &lat).unwrap();
            assert!((t3 - w3).norm() < 1e-7, "k2={k2}: {t3}");
        }
    }

    #[test]
    fn roundtrip_on_assorted_values() {
        let lat = lattice_from_modulus(0.95).unwrap();
        for &v in &[c(3.0, 0.0), c(0.2, 0.0), c(-0.1, 0.0), c(-4.0, 0.0), c(0.5, 0.7), c(-2.0, -3.0)] {
            let t = inverse_wp(v, &lat).unwrap();
            assert!((lat.wp(t).unwrap() - v).norm() < 1e-11 * (1.0 + v.norm()), "c={v}");
            assert!(t.re >= 0.0 && t.re < 2.0 * lat.omega);
            assert!(t.im >= 0.0 && t.im < 2.0 * lat.omegap_im);
        }
    }
}
