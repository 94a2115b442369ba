//! First-order Darboux (SUSY) partners of the associated Lamé potentials.
//!
//! For a nodeless seed `u` with `-u'' + V u = eps u` the partner is
//! `V - 2 (ln u)'' = 2 (u'/u)^2 - V + 2 eps`. Bloch seeds give periodic,
//! isospectral partners with a closed form in Jacobi functions; positive
//! combinations of the two Bloch functions give a single periodicity defect
//! carrying a bound state `1/u` at `eps`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::elliptic::{jacobi_reciprocals, jacobi_sn_cn_dn};
use crate::error::{Error, Result};
use crate::lame::{BlochBasis, LameModel, Which};
use crate::numerics::{adaptive_simpson, first_derivative, second_derivative};

/// Factorization energy and mixing of `u = psi1 + lambda psi2`.
#[derive(Debug, Clone)]
pub struct SeedSpec {
    pub model: LameModel,
    pub epsilon: f64,
    /// `lambda >= 0`, `f64::INFINITY` selecting `psi2` alone.
    pub lambda: f64,
    /// `atan(lambda)` in `[0, pi/2]`.
    pub theta: f64,
    /// Set when `epsilon > E0` was accepted on request; nodelessness is then
    /// only as good as the scan.
    pub unchecked: bool,
    pub basis: BlochBasis,
}

/// Periodic partner from a single Bloch function, or a defect partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartnerKind {
    PeriodicBloch(Which),
    Defect,
}

/// Result of scanning a seed for sign changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeCheck {
    Nodeless,
    FirstNode(f64),
}

/// Partner potential built from a seed.
#[derive(Debug, Clone)]
pub struct PartnerPotential {
    pub kind: PartnerKind,
    pub seed: SeedSpec,
    /// `(alpha^2, beta)` at each signed point, periodic kind only.
    pub closed_form_params: Vec<(Complex64, Complex64)>,
    /// `2 {k^2 [n + sum alpha^2] + n}`, periodic kind only.
    pub constant_term: f64,
}

/// Normalisable eigenfunction `1/u` of the defect partner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectState {
    pub epsilon: f64,
    pub norm_squared: f64,
    /// Smaller of the two fitted tail decay rates.
    pub decay_rate: f64,
    pub decay_rate_left: f64,
    pub decay_rate_right: f64,
    /// `|Re ln rho| / T` from the Bloch multiplier at `epsilon`.
    pub floquet_rate: f64,
    /// Periods added on each side of the requested range.
    pub periods_used: (usize, usize),
}

const MAX_TAIL_PERIODS: usize = 50;

impl SeedSpec {
    /// Seed with `lambda` in `[0, inf]`. Negative `lambda` is rejected with
    /// the location of the node; `epsilon > E0` is rejected unless
    /// `allow_unsafe`.
    pub fn new(model: &LameModel, epsilon: f64, lambda: f64, allow_unsafe: bool) -> Result<Self> {
        if lambda.is_nan() {
            return Err(Error::InvalidSeed("lambda is NaN".into()));
        }
        let e0 = model.ground_energy()?;
        if epsilon > e0 && !allow_unsafe {
            return Err(Error::AboveGroundState { epsilon, e0 });
        }
        let basis = BlochBasis::new(model, epsilon)?;
        let theta = if lambda == f64::INFINITY { FRAC_PI_2 } else { lambda.atan() };
        let seed = Self {
            model: model.clone(),
            epsilon,
            lambda,
            theta,
            unchecked: epsilon > e0,
            basis,
        };
        if lambda < 0.0 {
            let k = model.period();
            return match seed.find_node(-2.0 * k, 2.0 * k, MAX_TAIL_PERIODS)? {
                Some(x) => Err(Error::NodalSeed(x)),
                None => Err(Error::InvalidSeed(format!("lambda = {lambda} < 0"))),
            };
        }
        Ok(seed)
    }

    /// Seed parametrised by the angle `theta = atan(lambda)` in `[0, pi/2]`.
    pub fn with_angle(model: &LameModel, epsilon: f64, theta: f64, allow_unsafe: bool) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidSeed(format!("angle {theta} outside [0, pi/2]")));
        }
        let lambda = if theta == FRAC_PI_2 { f64::INFINITY } else { theta.tan() };
        Self::new(model, epsilon, lambda, allow_unsafe)
    }

    fn weights(&self) -> (f64, f64) {
        if self.lambda == f64::INFINITY {
            (0.0, 1.0)
        } else {
            (1.0, self.lambda)
        }
    }

    pub fn kind(&self) -> PartnerKind {
        match self.weights() {
            (_, 0.0) => PartnerKind::PeriodicBloch(Which::First),
            (0.0, _) => PartnerKind::PeriodicBloch(Which::Second),
            _ if self.basis.degenerate => PartnerKind::PeriodicBloch(Which::First),
            _ => PartnerKind::Defect,
        }
    }

    /// `(ln u, u'/u)` in complex form, computed as a log-sum-exp so that
    /// neither overflows far from the origin.
    fn log_and_dlog(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let (w1, w2) = self.weights();
        let mut terms: Vec<(Complex64, Complex64)> = Vec::with_capacity(2);
        for (w, sol) in [(w1, &self.basis.first), (w2, &self.basis.second)] {
            if w != 0.0 {
                let ln = sol.ln_value(x) + w.abs().ln();
                let ln = if w < 0.0 { ln + Complex64::new(0.0, std::f64::consts::PI) } else { ln };
                terms.push((ln, sol.log_derivative(x)?));
            }
        }
        let lmax = terms.iter().map(|t| t.0.re).fold(f64::NEG_INFINITY, f64::max);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut dsum = Complex64::new(0.0, 0.0);
        for (ln, f) in &terms {
            let e = (ln - lmax).exp();
            sum += e;
            dsum += e * f;
        }
        if sum.norm() < 1e-14 {
            return Err(Error::SingularTransformation(x));
        }
        Ok((sum.ln() + lmax, dsum / sum))
    }

    fn sign_at(&self, x: f64) -> f64 {
        match self.log_and_dlog(x) {
            Ok((ln, _)) => ln.im.cos().signum(),
            Err(_) => 0.0,
        }
    }

    fn find_node(&self, lo: f64, hi: f64, extra_periods: usize) -> Result<Option<f64>> {
        let t = self.model.period();
        for k in 0..=extra_periods {
            let a = lo - k as f64 * t;
            let b = hi + k as f64 * t;
            if let NodeCheck::FirstNode(x) = nodeless_check(self, (a, b), 64 * (k + 1))? {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }
}

/// `u(x)` and `u'(x)/u(x)` for the seed; both are real for energies in a gap.
pub fn seed_combination(x: f64, seed: &SeedSpec) -> Result<(f64, f64)> {
    let (ln, dlog) = seed.log_and_dlog(x)?;
    let u = ln.exp();
    let residue = u.im.abs() / u.norm().max(f64::MIN_POSITIVE);
    if residue > 1e-9 {
        return Err(Error::ComplexValued { x, residue });
    }
    Ok((u.re, dlog.re))
}

/// Scan `samples` points of `range` for a sign change of `u`; the first one
/// is refined by bisection to `1e-10`.
pub fn nodeless_check(seed: &SeedSpec, range: (f64, f64), samples: usize) -> Result<NodeCheck> {
    let (a, b) = range;
    if !(a < b) || samples < 2 {
        return Err(Error::Invalid("empty scan range".into()));
    }
    let step = (b - a) / (samples - 1) as f64;
    let mut x_prev = a;
    let mut s_prev = seed.sign_at(a);
    if s_prev == 0.0 {
        return Ok(NodeCheck::FirstNode(a));
    }
    for i in 1..samples {
        let x = a + step * i as f64;
        let s = seed.sign_at(x);
        if s == 0.0 {
            return Ok(NodeCheck::FirstNode(x));
        }
        if s != s_prev {
            let (mut lo, mut hi) = (x_prev, x);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                let sm = seed.sign_at(mid);
                if sm == 0.0 {
                    return Ok(NodeCheck::FirstNode(mid));
                }
                if sm == s_prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(NodeCheck::FirstNode(0.5 * (lo + hi)));
        }
        x_prev = x;
        s_prev = s;
    }
    Ok(NodeCheck::Nodeless)
}

/// Partner potential through `2 (u'/u)^2 - V + 2 eps`.
pub fn partner_from_seed(x: f64, seed: &SeedSpec) -> Result<f64> {
    let (_, dlog) = seed.log_and_dlog(x)?;
    let v = 2.0 * dlog * dlog - seed.model.potential(x) + 2.0 * seed.epsilon;
    let residue = v.im.abs() / v.norm().max(1.0);
    if residue > 1e-9 {
        return Err(Error::ComplexValued { x, residue });
    }
    Ok(v.re)
}

fn closed_form_params(basis: &BlochBasis, which: Which) -> Result<Vec<(Complex64, Complex64)>> {
    let model = &basis.model;
    let k2 = model.k2();
    basis
        .solution(which)
        .points
        .iter()
        .map(|&t| {
            let r = jacobi_reciprocals(t, &model.modulus, model.lattice.pole_guard)?;
            let alpha2 = -(r.ns * r.ns) / k2;
            let beta = -(r.cs * r.ds * r.ns) / k2;
            Ok((alpha2, beta))
        })
        .collect()
}

fn closed_form_constant(model: &LameModel, params: &[(Complex64, Complex64)]) -> Complex64 {
    let n = f64::from(model.m + model.ell);
    let sum: Complex64 = params.iter().map(|p| p.0).sum();
    ((sum + n) * model.k2() + n) * 2.0
}

fn closed_form_value(model: &LameModel, params: &[(Complex64, Complex64)], constant: Complex64, x: f64) -> Result<Complex64> {
    let k2 = model.k2();
    let (sn, cn, dn) = jacobi_sn_cn_dn(x, k2)?;
    let mut v = constant - 4.0 * k2 * sn * sn;
    for &(alpha2, beta) in params {
        let den = alpha2 + sn * sn;
        if den.norm() < 1e-12 {
            return Err(Error::SingularTransformation(x));
        }
        let t = (sn * cn * dn - beta) / den;
        v += t * t * 2.0;
    }
    Ok(v)
}

impl PartnerPotential {
    /// Partner for `seed`, after checking `u` has no node in `range`.
    pub fn new(seed: SeedSpec, range: (f64, f64)) -> Result<Self> {
        let samples = (((range.1 - range.0) / seed.model.period()) * 64.0).ceil().max(64.0) as usize;
        if let NodeCheck::FirstNode(x) = nodeless_check(&seed, range, samples)? {
            return Err(Error::SingularTransformation(x));
        }
        let kind = seed.kind();
        let (params, constant_term) = match kind {
            PartnerKind::PeriodicBloch(which) if matches!((seed.model.m, seed.model.ell), (1, 1) | (2, 1)) => {
                let params = closed_form_params(&seed.basis, which)?;
                let c = closed_form_constant(&seed.model, &params);
                (params, c.re)
            }
            _ => (Vec::new(), f64::NAN),
        };
        Ok(Self { kind, seed, closed_form_params: params, constant_term })
    }

    /// `V~(x)` through the seed identity.
    pub fn value(&self, x: f64) -> Result<f64> {
        partner_from_seed(x, &self.seed)
    }

    /// `V~(x)` from the Jacobi closed form; `None` for defect partners and
    /// for the pure Lamé pairs.
    pub fn closed_form(&self, x: f64) -> Option<Result<f64>> {
        if self.closed_form_params.is_empty() {
            return None;
        }
        let constant = closed_form_constant(&self.seed.model, &self.closed_form_params);
        Some(closed_form_value(&self.seed.model, &self.closed_form_params, constant, x).and_then(|v| {
            let residue = v.im.abs() / v.norm().max(1.0);
            if residue > 1e-9 {
                Err(Error::ComplexValued { x, residue })
            } else {
                Ok(v.re)
            }
        }))
    }

    /// Mean of closed form minus identity route over `xs`; zero when the
    /// additive constant is right.
    pub fn constant_offset(&self, xs: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for &x in xs {
            let closed = self.closed_form(x).ok_or(Error::Invalid("no closed form".into()))??;
            acc += closed - self.value(x)?;
        }
        Ok(acc / xs.len() as f64)
    }

    /// Bound state `1/u` at `x`, normalised to one at the seed's reference point.
    pub fn bound_state(&self, x: f64) -> Result<f64> {
        let (ln, _) = self.seed.log_and_dlog(x)?;
        Ok((-ln).exp().re)
    }

    /// Bloch function whose partner `V~` approaches at `-inf` and `+inf`.
    ///
    /// The seed is dominated by the growing solution on each side; which one
    /// grows is read off the multiplier.
    pub fn asymptotic_branches(&self) -> (Which, Which) {
        let grows_right = self.seed.basis.first.log_multiplier().re > 0.0;
        if grows_right {
            (Which::Second, Which::First)
        } else {
            (Which::First, Which::Second)
        }
    }

    /// `V~(x) - 2 (ln(1/u))''` with the derivative taken numerically from
    /// `u'/u`; recovers `V`.
    pub fn involution(&self, x: f64) -> Result<f64> {
        let h = 2e-3 * self.seed.model.period();
        let d = first_derivative(
            |t| self.seed.log_and_dlog(t).map(|p| p.1).unwrap_or(Complex64::new(f64::NAN, 0.0)),
            x,
            h,
        );
        Ok(self.value(x)? + 2.0 * d.re)
    }

    /// `sup |-phi'' + (V~ - eps) phi| / sup |phi| over `xs`, with
    /// `phi = 1/u`.
    pub fn bound_state_residual(&self, xs: &[f64]) -> Result<f64> {
        let h = 5e-3 * self.seed.model.period();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &x in xs {
            let phi = self.bound_state(x)?;
            let d2 = second_derivative(|t| Complex64::new(self.bound_state(t).unwrap_or(f64::NAN), 0.0), x, h).re;
            let r = -d2 + (self.value(x)? - self.seed.epsilon) * phi;
            worst = worst.max(r.abs());
            scale = scale.max(phi.abs() * self.seed.epsilon.abs().max(1.0));
        }
        Ok(worst / scale)
    }
}

/// Closed-form periodic partner from Bloch function `which` at `epsilon`.
pub fn partner_bloch_closed_form(x: f64, model: &LameModel, epsilon: f64, which: Which) -> Result<f64> {
    if !matches!((model.m, model.ell), (1, 1) | (2, 1)) {
        return Err(Error::UnsupportedModel { m: model.m, ell: model.ell, supported: "(1,1), (2,1)" });
    }
    let basis = BlochBasis::new(model, epsilon)?;
    let params = closed_form_params(&basis, which)?;
    let constant = closed_form_constant(model, &params);
    let v = closed_form_value(model, &params, constant, x)?;
    let residue = v.im.abs() / v.norm().max(1.0);
    if residue > 1e-9 {
        return Err(Error::ComplexValued { x, residue });
    }
    Ok(v.re)
}

/// Norm, tail decay and Floquet comparison for the defect bound state.
pub fn defect_bound_state(seed: &SeedSpec, range: (f64, f64)) -> Result<DefectState> {
    if seed.kind() != PartnerKind::Defect {
        return Err(Error::InvalidSeed("bound state needs 0 < lambda < inf".into()));
    }
    let t = seed.model.period();
    // inside a band |rho| = 1 and nothing decays
    if seed.basis.first.log_multiplier().re.abs() < 1e-9 {
        return Err(Error::NonNormalizable(0));
    }
    if let NodeCheck::FirstNode(x) = nodeless_check(seed, range, 64 * ((range.1 - range.0) / t).ceil().max(1.0) as usize)? {
        return Err(Error::SingularTransformation(x));
    }
    let phi2 = |x: f64| -> f64 {
        match seed.log_and_dlog(x) {
            Ok((ln, _)) => (-2.0 * ln.re).exp(),
            Err(_) => f64::NAN,
        }
    };
    let (a, b) = range;
    let mut total = adaptive_simpson(&phi2, a, b, 1e-14);

    let mut extend = |dir: f64, start: f64| -> Result<(usize, f64)> {
        let mut edge = start;
        for k in 1..=MAX_TAIL_PERIODS {
            let next = edge + dir * t;
            let piece = adaptive_simpson(&phi2, edge.min(next), edge.max(next), 1e-15).abs();
            total += piece;
            edge = next;
            if piece < 1e-10 * total {
                return Ok((k, edge));
            }
        }
        Err(Error::NonNormalizable(MAX_TAIL_PERIODS))
    };
    let (n_left, x_left) = extend(-1.0, a)?;
    let (n_right, x_right) = extend(1.0, b)?;

    let ln_u = |x: f64| seed.log_and_dlog(x).map(|p| p.0.re);
    let rate_right = (ln_u(x_right + t)? - ln_u(x_right)?) / t;
    let rate_left = (ln_u(x_left - t)? - ln_u(x_left)?) / t;
    let floquet_rate = seed.basis.first.log_multiplier().re.abs() / t;
    Ok(DefectState {
        epsilon: seed.epsilon,
        norm_squared: total,
        decay_rate: rate_left.min(rate_right),
        decay_rate_left: rate_left,
        decay_rate_right: rate_right,
        floquet_rate,
        periods_used: (n_left, n_right),
    })
}
