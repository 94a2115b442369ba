//! Bloch solutions as ratios of sigma products.
//!
//! With `z = x - iK'` and points `a_r` satisfying `wp(a_r) = ` numerator root,
//!
//! ```text
//! psi(z) = prod_r sigma(z + a_r) / (sigma(z + omega)^l sigma(z)^m) * exp(c z),
//! c      = -sum_r zeta(a_r) - l zeta(anchor),   anchor = +-omega
//! ```
//!
//! The second solution flips every `a_r`. Which signs and which anchor give
//! an actual solution is decided by the Riccati residual of `psi'/psi`.

use num_complex::Complex64;

use super::ansatz::{ansatz_coefficients, numerator_roots, AnsatzCoefficients};
use super::model::LameModel;
use crate::elliptic::{inverse_wp, WeierstrassLattice};
use crate::error::{Error, Result};

/// Sign of the anchor half-period in the exponential factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPairing {
    /// `anchor = +omega`.
    Plus,
    /// `anchor = -omega`.
    Minus,
}

impl SignPairing {
    fn sign(self) -> f64 {
        match self {
            SignPairing::Plus => 1.0,
            SignPairing::Minus => -1.0,
        }
    }
}

/// Selects one of the two Bloch functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    First,
    Second,
}

/// Points entering the first Bloch function, in the centred cell
/// `(-omega, omega] x (-K', K']`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryPoints {
    pub points: Vec<Complex64>,
    /// `wp` values matching `points` one to one.
    pub wp_values: Vec<Complex64>,
    pub anchor: Complex64,
    pub sign_pairing: SignPairing,
    /// Anchor chosen for the second solution.
    pub second_pairing: SignPairing,
    /// Common value of `Psi'(a_r)`; vanishes at band edges.
    pub orientation: Complex64,
    /// Riccati residual of the selected first solution.
    pub residual: f64,
}

/// One Bloch function with its normalisation at `x_ref`.
#[derive(Debug, Clone)]
pub struct BlochSolution {
    lattice: WeierstrassLattice,
    m: u32,
    ell: u32,
    pub energy: f64,
    pub etilde: f64,
    pub points: Vec<Complex64>,
    pub exponent: Complex64,
    pub x_ref: f64,
    ln_ref: Complex64,
}

/// Values of both solutions and their logarithmic derivatives at one `x`.
///
/// The entries are complex: inside allowed bands the two functions are
/// complex conjugates. In gaps they are real up to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPair {
    pub x: f64,
    pub psi1: Complex64,
    pub psi2: Complex64,
    pub dlog1: Complex64,
    pub dlog2: Complex64,
    pub wronskian: Complex64,
    pub degenerate: bool,
}

/// Both Bloch functions for a model at fixed energy.
#[derive(Debug, Clone)]
pub struct BlochBasis {
    pub model: LameModel,
    pub energy: f64,
    pub coefficients: AnsatzCoefficients,
    pub auxiliary: AuxiliaryPoints,
    pub first: BlochSolution,
    pub second: BlochSolution,
    pub degenerate: bool,
}

fn sample_points(lat: &WeierstrassLattice) -> [Complex64; 4] {
    let w = lat.omega;
    let k = lat.omegap_im;
    [
        Complex64::new(0.213 * w, 0.377 * k),
        Complex64::new(0.611 * w, -0.291 * k),
        Complex64::new(-0.437 * w, 0.733 * k),
        Complex64::new(1.171 * w, -0.853 * k),
    ]
}

/// Map `t` into `(-omega, omega] x (-K', K']`.
fn centre(t: Complex64, lat: &WeierstrassLattice) -> Complex64 {
    let p = 2.0 * lat.omega;
    let q = 2.0 * lat.omegap_im;
    let mut re = t.re - p * ((t.re + lat.omega) / p).floor();
    let mut im = t.im - q * ((t.im + lat.omegap_im) / q).floor();
    if re <= -lat.omega + 1e-13 * p {
        re += p;
    }
    if im <= -lat.omegap_im + 1e-13 * q {
        im += q;
    }
    Complex64::new(re, im)
}

fn exponent_for(points: &[Complex64], ell: u32, pairing: SignPairing, lat: &WeierstrassLattice) -> Result<Complex64> {
    let mut c = Complex64::new(0.0, 0.0);
    for &a in points {
        c -= lat.zeta(a)?;
    }
    // zeta(+-omega) = +-eta
    c -= f64::from(ell) * pairing.sign() * lat.eta;
    Ok(c)
}

struct Candidate {
    points: Vec<Complex64>,
    exponent: Complex64,
    pairing: SignPairing,
    residual: f64,
}

fn riccati_residual(
    model: &LameModel,
    etilde: f64,
    points: &[Complex64],
    exponent: Complex64,
) -> f64 {
    let lat = &model.lattice;
    let omega = Complex64::new(lat.omega, 0.0);
    let lw = f64::from(model.ell);
    let mut worst: f64 = 0.0;
    for z in sample_points(lat) {
        let eval = || -> Result<f64> {
            let mut f = exponent - lat.zeta(z)? * f64::from(model.m);
            let mut fp = lat.wp(z)? * f64::from(model.m);
            if model.ell > 0 {
                f -= lat.zeta(z + omega)? * lw;
                fp += lat.wp(z + omega)? * lw;
            }
            for &a in points {
                f += lat.zeta(z + a)?;
                fp -= lat.wp(z + a)?;
            }
            let rhs = model.weierstrass_potential(z)? - etilde;
            let r = fp + f * f - rhs;
            Ok(r.norm() / (fp.norm() + f.norm_sqr() + rhs.norm() + 1.0))
        };
        match eval() {
            Ok(r) => worst = worst.max(r),
            Err(_) => continue,
        }
    }
    worst
}

fn best_anchor(model: &LameModel, etilde: f64, points: Vec<Complex64>) -> Result<Candidate> {
    let lat = &model.lattice;
    let pairings: &[SignPairing] =
        if model.ell == 0 { &[SignPairing::Minus] } else { &[SignPairing::Minus, SignPairing::Plus] };
    let mut best: Option<Candidate> = None;
    for &pairing in pairings {
        let exponent = exponent_for(&points, model.ell, pairing, lat)?;
        let residual = riccati_residual(model, etilde, &points, exponent);
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(Candidate { points: points.clone(), exponent, pairing, residual });
        }
    }
    Ok(best.unwrap())
}

fn sort_points(points: &mut [(Complex64, Complex64)]) {
    points.sort_by(|(a, _), (b, _)| {
        let ra = a.im == 0.0;
        let rb = b.im == 0.0;
        rb.cmp(&ra).then(a.re.total_cmp(&b.re)).then(b.im.total_cmp(&a.im))
    });
}

fn snap(t: Complex64, lat: &WeierstrassLattice) -> Complex64 {
    let im = if t.im.abs() < 1e-12 * lat.omegap_im { 0.0 } else { t.im };
    Complex64::new(t.re, im)
}

/// Collapse roots closer than `1e-7` relative onto their mean. A root gap of
/// that size corresponds to an energy offset near `1e-14` from a band edge,
/// where rounding alone would otherwise split a double root into a complex
/// pair.
fn merge_close_roots(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let (a, b) = (roots[i], roots[j]);
            if (a - b).norm() < 1e-7 * (1.0 + a.norm()) {
                let mean = (a + b) * 0.5;
                let mean = if a.im * b.im <= 0.0 { Complex64::new(mean.re, 0.0) } else { mean };
                roots[i] = mean;
                roots[j] = mean;
            }
        }
    }
    roots
}

struct Selection {
    coefficients: AnsatzCoefficients,
    aux: AuxiliaryPoints,
    first: Candidate,
    second: Candidate,
    degenerate: bool,
}

fn select(model: &LameModel, energy: f64) -> Result<Selection> {
    let lat = &model.lattice;
    let etilde = model.energy_transform(energy).etilde;
    let coefficients = ansatz_coefficients(model, etilde)?;
    let roots = merge_close_roots(numerator_roots(&coefficients, lat)?);
    let base: Vec<Complex64> = roots
        .iter()
        .map(|&c| inverse_wp(c, lat).map(|t| snap(centre(t, lat), lat)))
        .collect::<Result<_>>()?;
    let n = base.len();

    let mut best: Option<(u32, Candidate)> = None;
    for mask in 0..(1u32 << n) {
        let signed: Vec<Complex64> = base
            .iter()
            .enumerate()
            .map(|(r, &t)| if mask & (1 << r) != 0 { -t } else { t })
            .collect();
        let cand = best_anchor(model, etilde, signed)?;
        if best.as_ref().is_none_or(|(_, b)| cand.residual < b.residual) {
            best = Some((mask, cand));
        }
    }
    let (_, chosen) = best.unwrap();
    let flipped: Vec<Complex64> = chosen.points.iter().map(|&t| -t).collect();
    let other = best_anchor(model, etilde, flipped)?;

    // Psi'(a_r) = G'(p_r) wp'(a_r), common to all r for a valid set
    let g_prime = |p: Complex64| coefficients.eval_dp(p);
    let mut w_sum = Complex64::new(0.0, 0.0);
    for (&t, &root) in chosen.points.iter().zip(&roots) {
        w_sum += g_prime(root - lat.e1) * lat.wp_prime(t).unwrap_or_default();
    }
    let w = w_sum / n as f64;
    let scale = coefficients.coeffs.iter().map(|c| c.abs()).fold(1.0, f64::max);
    let degenerate = w.norm() < 1e-6 * scale;
    let positive = if w.re.abs() > 1e-9 * w.norm() { w.re > 0.0 } else { w.im > 0.0 };
    let (first, second, orientation) =
        if positive || degenerate { (chosen, other, w) } else { (other, chosen, -w) };

    let mut paired: Vec<(Complex64, Complex64)> =
        first.points.iter().map(|&t| centre(t, lat)).map(|t| snap(t, lat)).zip(roots.iter().copied()).collect();
    sort_points(&mut paired);
    let aux = AuxiliaryPoints {
        points: paired.iter().map(|p| p.0).collect(),
        wp_values: paired.iter().map(|p| p.1).collect(),
        anchor: Complex64::new(first.pairing.sign() * lat.omega, 0.0),
        sign_pairing: first.pairing,
        second_pairing: second.pairing,
        orientation,
        residual: first.residual,
    };
    Ok(Selection { coefficients, aux, first, second, degenerate })
}

/// Auxiliary points of the first Bloch function at energy `energy`.
pub fn auxiliary_points(model: &LameModel, energy: f64) -> Result<AuxiliaryPoints> {
    Ok(select(model, energy)?.aux)
}

impl BlochSolution {
    fn from_candidate(model: &LameModel, energy: f64, cand: &Candidate) -> Result<Self> {
        let lat = &model.lattice;
        let mut sol = Self {
            lattice: lat.clone(),
            m: model.m,
            ell: model.ell,
            energy,
            etilde: model.energy_transform(energy).etilde,
            points: cand.points.clone(),
            exponent: cand.exponent,
            x_ref: lat.omega,
            ln_ref: Complex64::new(0.0, 0.0),
        };
        for shift in 0..10 {
            let x = lat.omega * (1.0 + 0.1 * f64::from(shift));
            let z = sol.z_of(x);
            let near_zero = sol.points.iter().any(|&a| lat.distance_to_lattice(z + a) < 1e-3);
            if !near_zero {
                sol.x_ref = x;
                sol.ln_ref = sol.ln_raw(z);
                if sol.ln_ref.is_finite() {
                    return Ok(sol);
                }
            }
        }
        Err(Error::Normalization(sol.x_ref))
    }

    fn z_of(&self, x: f64) -> Complex64 {
        Complex64::new(x, -self.lattice.omegap_im)
    }

    /// Unnormalised logarithm at complex `z` (some branch).
    pub fn ln_raw(&self, z: Complex64) -> Complex64 {
        let lat = &self.lattice;
        let mut v = self.exponent * z - lat.ln_sigma(z) * f64::from(self.m);
        if self.ell > 0 {
            v -= lat.ln_sigma(z + lat.omega) * f64::from(self.ell);
        }
        for &a in &self.points {
            v += lat.ln_sigma(z + a);
        }
        v
    }

    /// `ln psi(x)` with `psi(x_ref) = 1`, on some branch.
    pub fn ln_value(&self, x: f64) -> Complex64 {
        self.ln_raw(self.z_of(x)) - self.ln_ref
    }

    /// `psi(x)` normalised to one at `x_ref`.
    pub fn value(&self, x: f64) -> Complex64 {
        self.ln_value(x).exp()
    }

    /// `psi(x)` as a real number; fails if the imaginary part is not
    /// negligible, as happens inside allowed bands.
    pub fn real_value(&self, x: f64) -> Result<f64> {
        let v = self.value(x);
        if v.im.abs() > 1e-9 * v.norm().max(1e-300) {
            return Err(Error::Normalization(x));
        }
        Ok(v.re)
    }

    /// `psi'/psi` at real `x`.
    pub fn log_derivative(&self, x: f64) -> Result<Complex64> {
        self.log_derivative_at(self.z_of(x))
    }

    pub fn log_derivative_at(&self, z: Complex64) -> Result<Complex64> {
        let lat = &self.lattice;
        let mut f = self.exponent - lat.zeta(z)? * f64::from(self.m);
        if self.ell > 0 {
            f -= lat.zeta(z + lat.omega)? * f64::from(self.ell);
        }
        for &a in &self.points {
            f += lat.zeta(z + a)?;
        }
        Ok(f)
    }

    /// `ln rho` for `psi(x + 2K) = rho psi(x)`, on the branch given by the
    /// quasi-periodicity of sigma.
    pub fn log_multiplier(&self) -> Complex64 {
        let lat = &self.lattice;
        let w = lat.omega;
        let sum: Complex64 = self.points.iter().sum();
        (sum - f64::from(self.ell) * w) * (2.0 * lat.eta) + self.exponent * (2.0 * w)
    }

    pub fn multiplier(&self) -> Complex64 {
        self.log_multiplier().exp()
    }
}

impl BlochBasis {
    pub fn new(model: &LameModel, energy: f64) -> Result<Self> {
        let sel = select(model, energy)?;
        let first = BlochSolution::from_candidate(model, energy, &sel.first)?;
        let second = if sel.degenerate {
            first.clone()
        } else {
            BlochSolution::from_candidate(model, energy, &sel.second)?
        };
        Ok(Self {
            model: model.clone(),
            energy,
            coefficients: sel.coefficients,
            auxiliary: sel.aux,
            first,
            second,
            degenerate: sel.degenerate,
        })
    }

    pub fn solution(&self, which: Which) -> &BlochSolution {
        match which {
            Which::First => &self.first,
            Which::Second => &self.second,
        }
    }

    pub fn pair(&self, x: f64) -> Result<BlochPair> {
        let psi1 = self.first.value(x);
        let psi2 = self.second.value(x);
        let dlog1 = self.first.log_derivative(x)?;
        let dlog2 = self.second.log_derivative(x)?;
        Ok(BlochPair {
            x,
            psi1,
            psi2,
            dlog1,
            dlog2,
            wronskian: psi1 * psi2 * (dlog2 - dlog1),
            degenerate: self.degenerate,
        })
    }

    /// `rho + 1/rho` from the first solution's multiplier.
    pub fn discriminant(&self) -> f64 {
        let rho = self.first.multiplier();
        (rho + rho.inv()).re
    }

    /// `psi1 psi2` against the ansatz `Psi` evaluated at `z = x - iK'`.
    pub fn product_ratio(&self, x: f64) -> Result<Complex64> {
        let lat = &self.model.lattice;
        let z = Complex64::new(x, -lat.omegap_im);
        let big_psi = self.coefficients.eval(lat.wp(z)? - lat.e1);
        Ok(self.first.value(x) * self.second.value(x) / big_psi)
    }
}

/// Both Bloch solutions at `x`.
pub fn bloch_pair(x: f64, model: &LameModel, energy: f64) -> Result<BlochPair> {
    BlochBasis::new(model, energy)?.pair(x)
}

/// `psi'/psi` of the selected solution at `x`.
pub fn bloch_log_derivative(x: f64, model: &LameModel, energy: f64, which: Which) -> Result<Complex64> {
    BlochBasis::new(model, energy)?.solution(which).log_derivative(x)
}
