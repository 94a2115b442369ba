//! Dormand–Prince 5(4) for the fundamental matrix of `psi'' = (V - E) psi`.

use crate::error::{Error, Result};

/// Step-size control for [`integrate_fundamental`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-11, max_steps: 2_000_000 }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, ..Self::default() }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order solution minus embedded fourth-order one
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 4];

fn rhs(q: f64, y: &State) -> State {
    [y[1], q * y[0], y[3], q * y[2]]
}

/// Integrate both canonical solutions from `x0` to `x1`.
///
/// Returns the final state `[psi_a, psi_a', psi_b, psi_b']` (with
/// `(psi_a, psi_a') = (1, 0)` and `(psi_b, psi_b') = (0, 1)` at `x0`) and
/// the number of accepted steps.
pub fn integrate_fundamental<V>(v: &V, energy: f64, x0: f64, x1: f64, cfg: &IntegratorConfig) -> Result<(State, usize)>
where
    V: Fn(f64) -> f64 + ?Sized,
{
    let span = x1 - x0;
    if !(span > 0.0) {
        return Err(Error::Integrator("empty integration interval".into()));
    }
    let mut x = x0;
    let mut y: State = [1.0, 0.0, 0.0, 1.0];
    let mut h = span / 200.0;
    let h_min = span * 1e-14;
    let mut k = [[0.0; 4]; 7];
    k[0] = rhs(v(x) - energy, &y);
    let mut accepted = 0;
    for _ in 0..cfg.max_steps {
        if x >= x1 {
            return Ok((y, accepted));
        }
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        // row 6 of A holds the fifth-order weights, so the last stage state
        // is the new solution and its slope is reused next step
        let mut y_new = y;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..4 {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            let xs = if s >= 5 && last { x1 } else { x + C[s] * h };
            k[s] = rhs(v(xs) - energy, &ys);
            y_new = ys;
        }
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / 4.0).sqrt();
        if !err.is_finite() {
            return Err(Error::Integrator(format!("non-finite state at x = {x}")));
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + h };
            y = y_new;
            k[0] = k[6];
            accepted += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { factor } else { factor.min(1.0) };
        if h < h_min {
            return Err(Error::Integrator(format!("step size underflow at x = {x}")));
        }
    }
    Err(Error::Integrator(format!("more than {} steps", cfg.max_steps)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_rotation() {
        // psi'' = -psi: fundamental matrix is a rotation
        let (y, _) = integrate_fundamental(&|_| 0.0, 1.0, 0.0, 2.0, &IntegratorConfig::default()).unwrap();
        assert!((y[0] - 2f64.cos()).abs() < 1e-10);
        assert!((y[1] + 2f64.sin()).abs() < 1e-10);
        assert!((y[2] - 2f64.sin()).abs() < 1e-10);
        assert!((y[3] - 2f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn growing_solution_relative_accuracy() {
        let (y, _) = integrate_fundamental(&|_| 4.0, 0.0, 0.0, 10.0, &IntegratorConfig::default()).unwrap();
        let expect = (20f64).cosh();
        assert!((y[0] - expect).abs() < 1e-9 * expect);
    }
}
