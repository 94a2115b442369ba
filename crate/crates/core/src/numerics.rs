//! Small numerical kernels shared by the solver layers: Richardson-extrapolated
//! finite differences, contour derivatives, adaptive quadrature and polynomial
//! roots.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Second derivative by central differences with two Richardson levels.
///
/// Uses the stencils at `h`, `h/2` and `h/4`; the truncation error is
/// O(h^6).
pub fn second_derivative<F>(f: F, x: f64, h: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let f0 = f(x);
    let d = |s: f64| (f(x + s) - f0 * 2.0 + f(x - s)) / (s * s);
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (d2 * 4.0 - d1) / 3.0;
    let r2 = (d3 * 4.0 - d2) / 3.0;
    (r2 * 16.0 - r1) / 15.0
}

/// First derivative by central differences with two Richardson levels.
pub fn first_derivative<F>(f: F, x: f64, h: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let d = |s: f64| (f(x + s) - f(x - s)) / (2.0 * s);
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (d2 * 4.0 - d1) / 3.0;
    let r2 = (d3 * 4.0 - d2) / 3.0;
    (r2 * 16.0 - r1) / 15.0
}

/// `n`-th derivative of an analytic function via the Cauchy integral,
/// discretised by the trapezoidal rule on a circle of radius `radius`.
///
/// The trapezoidal rule converges geometrically here, so `nodes = 64` gives
/// full double precision as long as the function has no singularity within
/// roughly twice the radius.
pub fn cauchy_derivative<F>(f: F, z: Complex64, n: u32, radius: f64, nodes: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
        let w = Complex64::from_polar(1.0, theta);
        // f(z + r w) / (r w)^n, averaged, times n!
        acc += f(z + w * radius) * w.powi(-(n as i32));
    }
    let factorial: f64 = (1..=n).map(f64::from).product();
    acc * factorial / (nodes as f64 * radius.powi(n as i32))
}

/// Adaptive Simpson quadrature on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Roots of `sum_j coeffs[j] x^j` (ascending order, real coefficients).
///
/// Aberth–Ehrlich simultaneous iteration followed by Newton polishing on the
/// original polynomial. Imaginary parts below `1e-14` relative are snapped
/// to zero so that real roots come back exactly real.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let degree = c.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = c[degree];
    let monic: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v / lead, 0.0)).collect();

    if degree == 1 {
        return Ok(vec![-monic[0]]);
    }
    if degree == 2 {
        return Ok(quadratic_roots(monic[1], monic[0]).to_vec());
    }

    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for a in monic.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };

    // Cauchy bound for the initial circle.
    let bound = 1.0 + monic[..degree].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.25) / degree as f64 + 0.4;
            Complex64::from_polar(0.5 * bound, theta)
        })
        .collect();

    let max_iter = 500;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut max_step: f64 = 0.0;
        for i in 0..degree {
            let (p, dp) = eval(roots[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..degree {
                if i != j {
                    repulsion += (roots[i] - roots[j]).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                roots[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + roots[i].norm()));
            }
        }
        if max_step < 1e-16 {
            converged = true;
            break;
        }
    }
    if !converged && roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonConvergence { what: "polynomial roots", iterations: max_iter });
    }

    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*r);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *r - p / dp;
            if eval(next).0.norm() < p.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    Ok(roots.into_iter().map(snap_real).collect())
}

fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    // x^2 + b x + c with the cancellation-free pairing.
    let disc = (b * b - c * 4.0).sqrt();
    let plus = b + disc;
    let minus = b - disc;
    let q = if plus.norm() >= minus.norm() { plus * -0.5 } else { minus * -0.5 };
    if q.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [snap_real(q), snap_real(c / q)]
}

fn snap_real(z: Complex64) -> Complex64 {
    if z.im.abs() <= 1e-14 * (1.0 + z.re.abs()) {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}
