//! Laurent-polynomial ansatz for the product of two solutions.
//!
//! With `p = wp(z) - e1` the product `Psi = psi1 psi2` is sought as
//! `sum_{r = r_min}^{r_max} C_r p^r`. Substituting into the third-order
//! equation satisfied by products of solutions and using
//! `(wp')^2 = 4 p (p + ebar2)(p + ebar3)` leaves a three-term recurrence
//! between neighbouring coefficients, which is what [`fit_ansatz`] solves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::model::LameModel;
use crate::elliptic::WeierstrassLattice;
use crate::error::{Error, Result};
use crate::numerics::{cauchy_derivative, polynomial_roots};

/// Which closed-form coefficient set produced the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzBranch {
    /// `(1,1)`: `A1 = Et + e1`, `A2 = ebar2 ebar3`.
    A,
    /// `(1,0)`: `A1 = Et + e1`, `A2 = 0`.
    B,
    /// `(2,1)`: `B1 = 2 e1 + Et/3`, `B2 = (Et/3 - e1) B1`, `B3 = ebar2 ebar3 B1 / 3`.
    C,
    /// `(2,0)`: as `C` with `B3 = 0` and `B2` shifted by `ebar2 ebar3`.
    D,
    /// Obtained numerically by [`fit_ansatz`].
    Fitted,
}

/// Coefficients `C_r` of `Psi = sum C_r p^r`, stored in ascending `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzCoefficients {
    pub branch: AnsatzBranch,
    pub coeffs: Vec<f64>,
    pub r_min: i32,
    pub r_max: i32,
}

impl AnsatzCoefficients {
    pub fn coefficient(&self, r: i32) -> f64 {
        if r < self.r_min || r > self.r_max {
            return 0.0;
        }
        self.coeffs[(r - self.r_min) as usize]
    }

    /// Coefficients below the monic leading term, highest power first:
    /// `(A1, A2)` or `(B1, B2, B3)` for the closed-form branches.
    pub fn subleading(&self) -> Vec<f64> {
        self.coeffs.iter().rev().skip(1).copied().collect()
    }

    /// `Psi` as a function of `p`.
    pub fn eval(&self, p: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| p.powi(self.r_min + i as i32) * *c)
            .sum()
    }

    /// `dPsi/dp`.
    pub fn eval_dp(&self, p: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let r = self.r_min + i as i32;
                p.powi(r - 1) * (*c * f64::from(r))
            })
            .sum()
    }
}

/// Closed-form coefficients of the model's branch at transformed energy `etilde`.
pub fn ansatz_coefficients(model: &LameModel, etilde: f64) -> Result<AnsatzCoefficients> {
    let e1 = model.lattice.e1;
    let eb = model.lattice.ebar_product();
    let out = match (model.m, model.ell) {
        (1, 1) => AnsatzCoefficients {
            branch: AnsatzBranch::A,
            coeffs: vec![eb, etilde + e1, 1.0],
            r_min: -1,
            r_max: 1,
        },
        (1, 0) => AnsatzCoefficients {
            branch: AnsatzBranch::B,
            coeffs: vec![0.0, etilde + e1, 1.0],
            r_min: -1,
            r_max: 1,
        },
        (2, 1) => {
            let b1 = 2.0 * e1 + etilde / 3.0;
            let b2 = (etilde / 3.0 - e1) * b1;
            let b3 = eb * b1 / 3.0;
            AnsatzCoefficients { branch: AnsatzBranch::C, coeffs: vec![b3, b2, b1, 1.0], r_min: -1, r_max: 2 }
        }
        (2, 0) => {
            let b1 = 2.0 * e1 + etilde / 3.0;
            let b2 = (etilde / 3.0 - e1) * b1 + eb;
            AnsatzCoefficients { branch: AnsatzBranch::D, coeffs: vec![0.0, b2, b1, 1.0], r_min: -1, r_max: 2 }
        }
        (m, ell) => {
            return Err(Error::UnsupportedModel { m, ell, supported: super::SUPPORTED_MODELS })
        }
    };
    Ok(out)
}

/// Zeros of the ansatz numerator, returned as `wp` values `e1 + p`.
///
/// Vanishing trailing coefficients (branches `b`, `d`) cancel against the
/// `1/p` prefactor and contribute no root.
pub fn numerator_roots(coeffs: &AnsatzCoefficients, lattice: &WeierstrassLattice) -> Result<Vec<Complex64>> {
    let first_nonzero = coeffs.coeffs.iter().position(|c| *c != 0.0).unwrap_or(0);
    let roots = polynomial_roots(&coeffs.coeffs[first_nonzero..])?;
    Ok(roots.into_iter().map(|p| p + lattice.e1).collect())
}

/// Third-order equation for products of solutions, for any integer pair
/// `(m, l)`.
#[derive(Debug, Clone)]
pub struct ProductEquation<'a> {
    pub m: u32,
    pub ell: u32,
    pub lattice: &'a WeierstrassLattice,
    pub etilde: f64,
}

impl<'a> ProductEquation<'a> {
    pub fn new(m: u32, ell: u32, lattice: &'a WeierstrassLattice, etilde: f64) -> Self {
        Self { m, ell, lattice, etilde }
    }

    pub fn for_model(model: &'a LameModel, etilde: f64) -> Self {
        Self::new(model.m, model.ell, &model.lattice, etilde)
    }

    fn weights(&self) -> (f64, f64) {
        let mw = f64::from(self.m * (self.m + 1));
        let lw = f64::from(self.ell * (self.ell + 1)) * self.lattice.ebar_product();
        (mw, lw)
    }

    /// Matrix of the collected-power system: rows are powers
    /// `r_min - 2 ..= r_max` of `p`, columns the unknowns `C_r`.
    pub fn collected_system(&self, r_min: i32, r_max: i32) -> DMatrix<f64> {
        let (mw, _) = self.weights();
        let ell_w = f64::from(self.ell * (self.ell + 1));
        let e1 = self.lattice.e1;
        let eb = self.lattice.ebar_product();
        let rows = (r_max - r_min + 3) as usize;
        let cols = (r_max - r_min + 1) as usize;
        let mut a = DMatrix::zeros(rows, cols);
        for (j, r) in (r_min..=r_max).enumerate() {
            let rf = f64::from(r);
            // p^r
            let row = (r - (r_min - 2)) as usize;
            a[(row, j)] += 2.0 * (2.0 * rf + 1.0) * (rf * (rf + 1.0) - mw);
            // p^{r-1}
            a[(row - 1, j)] += 12.0 * e1 * rf.powi(3) - 4.0 * rf * (mw * e1 - self.etilde);
            // p^{r-2}
            a[(row - 2, j)] += 2.0 * eb * (2.0 * rf - 1.0) * (rf * (rf - 1.0) - ell_w);
        }
        a
    }

    /// Relative residual of the third-order equation at `z` for `Psi` built
    /// from `coeffs`. `Psi'''` is taken from a Cauchy contour integral.
    pub fn residual_at(&self, coeffs: &AnsatzCoefficients, z: Complex64) -> Result<f64> {
        let lat = self.lattice;
        let (mw, lw) = self.weights();
        let psi = |w: Complex64| -> Complex64 {
            match lat.wp(w) {
                Ok(v) => coeffs.eval(v - lat.e1),
                Err(_) => Complex64::new(f64::NAN, f64::NAN),
            }
        };
        let (wp, wpp) = lat.wp_and_prime(z)?;
        let p = wp - lat.e1;
        let psi0 = coeffs.eval(p);
        let psi1 = coeffs.eval_dp(p) * wpp;

        let singular = lat
            .distance_to_lattice(z)
            .min(lat.distance_to_lattice(z - lat.omega));
        let radius = (singular / 3.0).min(0.2);
        let psi3 = cauchy_derivative(psi, z, 3, radius, 64);

        let t1 = (wp * mw + lw / p - self.etilde) * psi1 * 4.0;
        let t2 = (Complex64::new(mw, 0.0) - lw / (p * p)) * wpp * psi0 * 2.0;
        let residual = psi3 - t1 - t2;
        let scale = psi3.norm() + t1.norm() + t2.norm();
        Ok(residual.norm() / scale.max(f64::MIN_POSITIVE))
    }

    /// Generic sample points inside the period cell, away from the poles at
    /// the lattice and at `omega_1`.
    pub fn default_samples(&self) -> Vec<Complex64> {
        let w = self.lattice.omega;
        let wp = self.lattice.omegap_im;
        [(0.37, 0.21), (0.61, -0.44), (1.27, 0.73), (0.83, 0.55), (1.58, -0.31), (0.52, -1.0)]
            .iter()
            .map(|&(a, b)| Complex64::new(a * w, b * wp))
            .collect()
    }
}

/// Sup over `samples` of the relative residual of the product equation.
pub fn product_ode_residual(
    equation: &ProductEquation<'_>,
    coeffs: &AnsatzCoefficients,
    samples: &[Complex64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in samples {
        worst = worst.max(equation.residual_at(coeffs, z)?);
    }
    Ok(worst)
}

/// Result of [`fit_ansatz`]; an inconsistent system is a legitimate outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum FitOutcome {
    Solved(AnsatzCoefficients),
    Infeasible { singular_ratio: f64 },
}

const NULLSPACE_TOL: f64 = 1e-10;

/// Fit `Psi = sum_{r_min}^{r_max} C_r p^r` to the product equation of the
/// pair `(m, l)`, with the leading coefficient fixed to one.
pub fn fit_ansatz(
    m: u32,
    ell: u32,
    lattice: &WeierstrassLattice,
    etilde: f64,
    r_min: i32,
    r_max: i32,
) -> Result<FitOutcome> {
    if r_min > 0 || r_max < 0 || r_min < -4 || r_max > 4 {
        return Err(Error::Invalid(format!("power range [{r_min}, {r_max}] not supported")));
    }
    let eq = ProductEquation::new(m, ell, lattice, etilde);
    let a = eq.collected_system(r_min, r_max);
    let cols = a.ncols();

    // column scaling keeps the singular values comparable across powers
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm().max(1e-300)).collect();
    let mut scaled = a.clone();
    for (j, n) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / n);
    }
    let svd = scaled.clone().svd(false, true);
    let v_t = svd.v_t.ok_or(Error::NonConvergence { what: "SVD", iterations: 0 })?;
    let (imin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, s)| (i, *s))
        .unwrap();
    let smax = svd.singular_values.max();
    let ratio = smin / smax;
    if ratio > NULLSPACE_TOL {
        return Ok(FitOutcome::Infeasible { singular_ratio: ratio });
    }
    let null: Vec<f64> = (0..cols).map(|j| v_t[(imin, j)] / norms[j]).collect();
    let lead = null[cols - 1];
    if lead.abs() < 1e-12 * null.iter().map(|v| v.abs()).fold(0.0, f64::max) {
        return Ok(FitOutcome::Infeasible { singular_ratio: ratio });
    }

    // Refine with C_{r_max} = 1 by least squares on the remaining columns.
    let coeffs = if cols == 1 {
        vec![1.0]
    } else {
        let reduced = a.columns(0, cols - 1).into_owned();
        let rhs: DVector<f64> = -a.column(cols - 1);
        let sol = reduced
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|_| Error::NonConvergence { what: "least squares", iterations: 0 })?;
        let mut c: Vec<f64> = sol.iter().copied().collect();
        c.push(1.0);
        c
    };
    let fitted = AnsatzCoefficients { branch: AnsatzBranch::Fitted, coeffs, r_min, r_max };
    let residual = product_ode_residual(&eq, &fitted, &eq.default_samples())?;
    if residual < 1e-8 {
        Ok(FitOutcome::Solved(fitted))
    } else {
        Ok(FitOutcome::Infeasible { singular_ratio: ratio })
    }
}
