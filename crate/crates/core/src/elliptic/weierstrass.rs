use std::f64::consts::PI;

use num_complex::Complex64;

use super::complete::ModulusParams;
use super::jacobi::{distance_to_grid, jacobi_reciprocals};
use crate::error::{Error, Result};

/// Default radius around poles inside which evaluations are refused.
pub const DEFAULT_POLE_GUARD: f64 = 1e-8;

/// Coefficients `q^{(n+1/2)^2}` of the theta series in the nome
/// `q = exp(-pi K'/K)`, truncated for arguments reduced to the fundamental
/// cell.
#[derive(Debug, Clone, PartialEq)]
struct ThetaSeries {
    weights: Vec<f64>,
    theta1_prime0: f64,
    theta1_triple0: f64,
    theta2_0: f64,
}

impl ThetaSeries {
    fn new(nome: f64, max_imag: f64) -> Self {
        let mut weights = Vec::new();
        let lead = nome.powf(0.25) * max_imag.exp();
        for n in 0.. {
            let nf = n as f64 + 0.5;
            let w = nome.powf(nf * nf);
            weights.push(w);
            if w * ((2 * n + 1) as f64 * max_imag).exp() < 1e-18 * lead || n > 200 {
                break;
            }
        }
        let mut t1p = 0.0;
        let mut t1ppp = 0.0;
        let mut t2 = 0.0;
        for (n, w) in weights.iter().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let odd = (2 * n + 1) as f64;
            t1p += 2.0 * sign * w * odd;
            t1ppp -= 2.0 * sign * w * odd * odd * odd;
            t2 += 2.0 * w;
        }
        Self { weights, theta1_prime0: t1p, theta1_triple0: t1ppp, theta2_0: t2 }
    }

    /// `(theta1(v), theta1'(v), theta2(v))`.
    fn eval(&self, v: Complex64) -> (Complex64, Complex64, Complex64) {
        let mut t1 = Complex64::new(0.0, 0.0);
        let mut t1p = Complex64::new(0.0, 0.0);
        let mut t2 = Complex64::new(0.0, 0.0);
        for (n, w) in self.weights.iter().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let odd = (2 * n + 1) as f64;
            let arg = v * odd;
            let (s, c) = (arg.sin(), arg.cos());
            t1 += s * (2.0 * sign * w);
            t1p += c * (2.0 * sign * w * odd);
            t2 += c * (2.0 * w);
        }
        (t1, t1p, t2)
    }
}

/// Weierstrass lattice with half-periods `omega = K`, `omega' = iK'` and
/// branch values normalised by `e1 - e3 = 1`, `e1 + e2 + e3 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeierstrassLattice {
    pub modulus: ModulusParams,
    /// Real half-period.
    pub omega: f64,
    /// Imaginary part of the imaginary half-period `omega'`.
    pub omegap_im: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub g2: f64,
    pub g3: f64,
    /// `zeta(omega)`.
    pub eta: f64,
    /// `zeta(omega')`, purely imaginary for this rectangular lattice.
    pub eta_p: Complex64,
    pub ebar2: f64,
    pub ebar3: f64,
    pub pole_guard: f64,
    theta: ThetaSeries,
}

/// Lattice for squared modulus `k2` under the `e1 - e3 = 1` normalisation.
pub fn lattice_from_modulus(k2: f64) -> Result<WeierstrassLattice> {
    WeierstrassLattice::new(ModulusParams::new(k2)?)
}

impl WeierstrassLattice {
    pub fn new(modulus: ModulusParams) -> Result<Self> {
        let k2 = modulus.k2;
        if !(k2 > 0.0 && k2 < 1.0) {
            return Err(Error::Domain(k2));
        }
        let e1 = (2.0 - k2) / 3.0;
        let e2 = (2.0 * k2 - 1.0) / 3.0;
        let e3 = -(1.0 + k2) / 3.0;
        let omega = modulus.big_k;
        let omegap_im = modulus.big_kc;
        let nome = (-PI * omegap_im / omega).exp();
        let theta = ThetaSeries::new(nome, PI * omegap_im / (2.0 * omega));
        let eta = -PI * PI * theta.theta1_triple0 / (12.0 * omega * theta.theta1_prime0);
        let mut lattice = Self {
            modulus,
            omega,
            omegap_im,
            e1,
            e2,
            e3,
            g2: 2.0 * (e1 * e1 + e2 * e2 + e3 * e3),
            g3: 4.0 * e1 * e2 * e3,
            eta,
            eta_p: Complex64::new(0.0, 0.0),
            ebar2: modulus.k2c,
            ebar3: 1.0,
            pole_guard: DEFAULT_POLE_GUARD,
            theta,
        };
        lattice.eta_p = lattice.zeta_reduced(lattice.omegap());
        Ok(lattice)
    }

    pub fn with_pole_guard(mut self, guard: f64) -> Self {
        self.pole_guard = guard;
        self
    }

    pub fn omegap(&self) -> Complex64 {
        Complex64::new(0.0, self.omegap_im)
    }

    /// Half-periods `omega_1 = omega`, `omega_2 = omega + omega'`, `omega_3 = omega'`.
    pub fn half_periods(&self) -> [Complex64; 3] {
        let w = Complex64::new(self.omega, 0.0);
        [w, w + self.omegap(), self.omegap()]
    }

    /// `e1 - e2` times `e1 - e3`; equals `k'^2` under this normalisation.
    pub fn ebar_product(&self) -> f64 {
        self.ebar2 * self.ebar3
    }

    /// Nome `q = exp(-pi K'/K)`.
    pub fn nome(&self) -> f64 {
        (-PI * self.omegap_im / self.omega).exp()
    }

    /// Distance from `z` to the nearest lattice point `2m omega + 2n omega'`.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        distance_to_grid(z, Complex64::new(0.0, 0.0), self.omega, self.omegap_im)
    }

    fn guard(&self, z: Complex64) -> Result<()> {
        let distance = self.distance_to_lattice(z);
        if distance < self.pole_guard {
            return Err(Error::PoleProximity { re: z.re, im: z.im, distance });
        }
        Ok(())
    }

    /// Split `z = z0 + 2m omega + 2n omega'` with `z0` in the centred cell.
    fn reduce(&self, z: Complex64) -> (Complex64, f64, f64) {
        let m = ((z.re + self.omega) / (2.0 * self.omega)).floor();
        let n = ((z.im + self.omegap_im) / (2.0 * self.omegap_im)).floor();
        let z0 = Complex64::new(z.re - 2.0 * m * self.omega, z.im - 2.0 * n * self.omegap_im);
        (z0, m, n)
    }

    fn v_of(&self, z: Complex64) -> Complex64 {
        z * (PI / (2.0 * self.omega))
    }

    /// `wp(z)` via `e3 + ns^2(z, k)`.
    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        self.guard(z)?;
        let r = jacobi_reciprocals(z, &self.modulus, 0.0)?;
        Ok(self.e3 + r.ns * r.ns)
    }

    /// `wp'(z) = -2 cs ds ns`.
    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64> {
        self.guard(z)?;
        let r = jacobi_reciprocals(z, &self.modulus, 0.0)?;
        Ok(r.cs * r.ds * r.ns * -2.0)
    }

    /// `(wp(z), wp'(z))` sharing one Jacobi evaluation.
    pub fn wp_and_prime(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        self.guard(z)?;
        let r = jacobi_reciprocals(z, &self.modulus, 0.0)?;
        Ok((self.e3 + r.ns * r.ns, r.cs * r.ds * r.ns * -2.0))
    }

    /// `wp(z)` through the theta quotient
    /// `e1 + (pi/2w)^2 (theta1'(0) theta2(v) / (theta2(0) theta1(v)))^2`.
    pub fn wp_theta(&self, z: Complex64) -> Result<Complex64> {
        self.guard(z)?;
        let (z0, _, _) = self.reduce(z);
        let (t1, _, t2) = self.theta.eval(self.v_of(z0));
        let scale = PI / (2.0 * self.omega);
        let q = t2 * self.theta.theta1_prime0 / (t1 * self.theta.theta2_0);
        Ok(self.e1 + q * q * (scale * scale))
    }

    fn zeta_reduced(&self, z0: Complex64) -> Complex64 {
        let (t1, t1p, _) = self.theta.eval(self.v_of(z0));
        z0 * (self.eta / self.omega) + t1p / t1 * (PI / (2.0 * self.omega))
    }

    /// Weierstrass zeta; quasi-periodic with `zeta(z + 2 omega) = zeta(z) + 2 eta`.
    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        self.guard(z)?;
        let (z0, m, n) = self.reduce(z);
        Ok(self.zeta_reduced(z0) + 2.0 * m * self.eta + self.eta_p * (2.0 * n))
    }

    /// Principal-branch-free logarithm of sigma: any branch of `ln sigma(z)`,
    /// consistent in the sense that `exp` of it is `sigma(z)`.
    pub fn ln_sigma(&self, z: Complex64) -> Complex64 {
        let (z0, m, n) = self.reduce(z);
        let (t1, _, _) = self.theta.eval(self.v_of(z0));
        let base = (2.0 * self.omega / PI / self.theta.theta1_prime0).ln()
            + z0 * z0 * (self.eta / (2.0 * self.omega))
            + t1.ln();
        if m == 0.0 && n == 0.0 {
            return base;
        }
        // sigma(z0 + 2W) = (-1)^{m+n+mn} exp(2 zeta(W) (z0 + W)), W = m omega + n omega'
        let w = Complex64::new(m * self.omega, n * self.omegap_im);
        let zeta_w = self.eta * m + self.eta_p * n;
        let parity = (m + n + m * n).rem_euclid(2.0);
        base + zeta_w * 2.0 * (z0 + w) + Complex64::new(0.0, PI * parity)
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        if self.distance_to_lattice(z) == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.ln_sigma(z).exp()
    }
}

/// `wp(z)` on `lattice` (Jacobi route).
pub fn wp(z: Complex64, lattice: &WeierstrassLattice) -> Result<Complex64> {
    lattice.wp(z)
}

/// `wp'(z)` on `lattice`.
pub fn wp_prime(z: Complex64, lattice: &WeierstrassLattice) -> Result<Complex64> {
    lattice.wp_prime(z)
}

/// Weierstrass `zeta(z)` on `lattice`.
pub fn weier_zeta(z: Complex64, lattice: &WeierstrassLattice) -> Result<Complex64> {
    lattice.zeta(z)
}

/// Weierstrass `sigma(z)` on `lattice` (entire; never errors).
pub fn weier_sigma(z: Complex64, lattice: &WeierstrassLattice) -> Complex64 {
    lattice.sigma(z)
}
