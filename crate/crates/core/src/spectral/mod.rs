//! Floquet analysis of `-psi'' + V psi = E psi` for arbitrary periodic `V`,
//! independent of any closed-form solution.

mod ode;

pub use ode::{integrate_fundamental, IntegratorConfig};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::second_derivative;
use crate::parallel;

/// `|D| - 2` within this distance of zero counts as a band edge.
pub const EDGE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralClass {
    Band,
    Gap,
    Edge,
}

/// Transfer matrix over one period starting at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyResult {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub discriminant: f64,
    pub classification: SpectralClass,
    pub steps: usize,
}

impl MonodromyResult {
    pub fn determinant(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Floquet multipliers, roots of `rho^2 - D rho + 1`.
    pub fn multipliers(&self) -> (Complex64, Complex64) {
        let d = Complex64::new(self.discriminant, 0.0);
        let s = (d * d - 4.0).sqrt();
        ((d + s) * 0.5, (d - s) * 0.5)
    }
}

/// Edges and intervals of a band structure. The last band may be
/// semi-infinite (`hi = inf`).
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub edges: Vec<f64>,
    pub bands: Vec<(f64, f64)>,
    pub gaps: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl BandStructure {
    pub fn finite_bands(&self) -> usize {
        self.bands.iter().filter(|b| b.1.is_finite()).count()
    }

    pub fn finite_gaps(&self) -> usize {
        self.gaps.len()
    }
}

pub fn classify(discriminant: f64) -> SpectralClass {
    let g = discriminant.abs() - 2.0;
    if g.abs() <= EDGE_TOL {
        SpectralClass::Edge
    } else if g < 0.0 {
        SpectralClass::Band
    } else {
        SpectralClass::Gap
    }
}

/// Reject samplers that are not periodic with `period`.
pub fn check_periodic<V>(v: &V, period: f64) -> Result<()>
where
    V: Fn(f64) -> f64 + ?Sized,
{
    let mut worst: f64 = 0.0;
    for i in 0..16 {
        let x = period * (0.0371 + i as f64 / 16.0);
        let (a, b) = (v(x), v(x + period));
        worst = worst.max((a - b).abs() / (1.0 + a.abs()));
    }
    if !(worst <= 1e-9) {
        return Err(Error::NotPeriodic { period, deviation: worst });
    }
    Ok(())
}

/// Transfer matrix of one period `[x0, x0 + period]`.
pub fn integrate_monodromy_from<V>(v: &V, period: f64, energy: f64, x0: f64, cfg: &IntegratorConfig) -> Result<MonodromyResult>
where
    V: Fn(f64) -> f64 + ?Sized,
{
    let (y, steps) = integrate_fundamental(v, energy, x0, x0 + period, cfg)?;
    let discriminant = y[0] + y[3];
    Ok(MonodromyResult {
        m11: y[0],
        m12: y[2],
        m21: y[1],
        m22: y[3],
        discriminant,
        classification: classify(discriminant),
        steps,
    })
}

/// Transfer matrix over `[0, period]` after checking periodicity.
pub fn integrate_monodromy<V>(v: &V, period: f64, energy: f64) -> Result<MonodromyResult>
where
    V: Fn(f64) -> f64 + ?Sized,
{
    check_periodic(v, period)?;
    integrate_monodromy_from(v, period, energy, 0.0, &IntegratorConfig::default())
}

/// Hill discriminant `D(E) = tr M(E)`.
pub fn hill_discriminant<V>(v: &V, period: f64, energy: f64) -> Result<f64>
where
    V: Fn(f64) -> f64 + ?Sized,
{
    Ok(integrate_monodromy(v, period, energy)?.discriminant)
}

fn discriminants<V>(v: &V, period: f64, energies: &[f64], cfg: &IntegratorConfig) -> Result<Vec<f64>>
where
    V: Fn(f64) -> f64 + Sync + ?Sized,
{
    parallel::map(energies, |&e| integrate_monodromy_from(v, period, e, 0.0, cfg).map(|m| m.discriminant))
        .into_iter()
        .collect()
}

/// Bisect `|D| - 2` on a bracket with a sign change to width `1e-8`.
fn bisect_edge<G: Fn(f64) -> Result<f64>>(g: &G, mut lo: f64, mut hi: f64, mut g_lo: f64) -> Result<f64> {
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    // linear interpolation inside the final bracket
    let (ga, gb) = (g(lo)?, g(hi)?);
    if ga != gb && ga * gb <= 0.0 {
        Ok(lo - ga * (hi - lo) / (gb - ga))
    } else {
        Ok(0.5 * (lo + hi))
    }
}

/// Golden-section search for the extremum of `s * g` on `[a, b]`
/// (`s = 1` minimum, `s = -1` maximum).
fn golden_extremum<G: Fn(f64) -> Result<f64>>(g: &G, mut a: f64, mut b: f64, s: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (s * g(c)?, s * g(d)?);
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = s * g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = s * g(d)?;
        }
        if fc.min(fd) < 0.0 || b - a < 1e-10 {
            break;
        }
    }
    Ok(if fc < fd { (c, s * fc) } else { (d, s * fd) })
}

/// Band structure from sign changes of `|D(E)| - 2` over `energies`.
///
/// Local extrema of `|D| - 2` that do not change sign are searched further,
/// so a band or gap narrower than the grid spacing is still found; this is
/// reported in `warnings`.
pub fn band_structure<V>(v: &V, period: f64, energies: &[f64]) -> Result<BandStructure>
where
    V: Fn(f64) -> f64 + Sync + ?Sized,
{
    band_structure_with(v, period, energies, &IntegratorConfig::default())
}

pub fn band_structure_with<V>(v: &V, period: f64, energies: &[f64], cfg: &IntegratorConfig) -> Result<BandStructure>
where
    V: Fn(f64) -> f64 + Sync + ?Sized,
{
    if energies.len() < 3 || energies.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Invalid("energy grid must be increasing with at least 3 points".into()));
    }
    check_periodic(v, period)?;
    let g = |e: f64| -> Result<f64> {
        Ok(integrate_monodromy_from(v, period, e, 0.0, cfg)?.discriminant.abs() - 2.0)
    };
    let gs: Vec<f64> = discriminants(v, period, energies, cfg)?.iter().map(|d| d.abs() - 2.0).collect();

    let mut brackets: Vec<(f64, f64, f64)> = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..energies.len() - 1 {
        if (gs[i] > 0.0) != (gs[i + 1] > 0.0) {
            brackets.push((energies[i], energies[i + 1], gs[i]));
        }
    }
    for i in 1..energies.len() - 1 {
        let (a, b, c) = (gs[i - 1], gs[i], gs[i + 1]);
        let same_sign = (a > 0.0) == (b > 0.0) && (b > 0.0) == (c > 0.0);
        if !same_sign {
            continue;
        }
        let s = if b > 0.0 { 1.0 } else { -1.0 };
        // only dips towards zero are interesting
        if !(s * b <= s * a && s * b <= s * c) {
            continue;
        }
        let (e_ext, g_ext) = golden_extremum(&g, energies[i - 1], energies[i + 1], s)?;
        if g_ext.abs() <= EDGE_TOL {
            warnings.push(format!("|D| touches 2 near E = {e_ext:.8} (closed gap), not counted as edges"));
            continue;
        }
        if (g_ext > 0.0) != (b > 0.0) {
            warnings.push(format!(
                "two edges between {:.6} and {:.6} resolved by local refinement",
                energies[i - 1],
                energies[i + 1]
            ));
            brackets.push((energies[i - 1], e_ext, a));
            brackets.push((e_ext, energies[i + 1], g_ext));
        }
    }
    brackets.sort_by(|x, y| x.0.total_cmp(&y.0));

    let raw: Vec<f64> = parallel::map(&brackets, |&(lo, hi, g_lo)| bisect_edge(&g, lo, hi, g_lo))
        .into_iter()
        .collect::<Result<_>>()?;
    // a pair of grid crossings around a tangency is not a real gap or band
    let mut edges = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        if i + 1 < raw.len() && raw[i + 1] - raw[i] < 1e-4 {
            let mid = g(0.5 * (raw[i] + raw[i + 1]))?;
            if mid.abs() <= EDGE_TOL {
                warnings.push(format!("|D| touches 2 near E = {:.8} (closed gap), not counted as edges", raw[i]));
                i += 2;
                continue;
            }
        }
        edges.push(raw[i]);
        i += 1;
    }

    let mut bands = Vec::new();
    let mut gaps = Vec::new();
    let mut bounds = vec![f64::NEG_INFINITY];
    bounds.extend(edges.iter().copied());
    bounds.push(f64::INFINITY);
    let first_gap = gs[0] > 0.0;
    for (j, w) in bounds.windows(2).enumerate() {
        let in_band = (j % 2 == 0) != first_gap;
        if in_band {
            bands.push((w[0], w[1]));
        } else if w[0].is_finite() && w[1].is_finite() {
            gaps.push((w[0], w[1]));
        }
    }
    Ok(BandStructure { edges, bands, gaps, warnings })
}

/// `max |D_A(E) - D_B(E)|` over `energies`.
pub fn isospectral_compare<A, B>(a: &A, b: &B, period: f64, energies: &[f64]) -> Result<f64>
where
    A: Fn(f64) -> f64 + Sync + ?Sized,
    B: Fn(f64) -> f64 + Sync + ?Sized,
{
    check_periodic(a, period)?;
    check_periodic(b, period)?;
    let cfg = IntegratorConfig::default();
    let da = discriminants(a, period, energies, &cfg)?;
    let db = discriminants(b, period, energies, &cfg)?;
    Ok(da.iter().zip(&db).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// `sup |-psi'' + (V - E) psi| / (sup |psi| max(|E|, 1))` over `xs`, with
/// `psi''` from Richardson-extrapolated central differences of step `h`.
pub fn schrodinger_residual<P, V>(psi: &P, v: &V, energy: f64, xs: &[f64], h: f64) -> f64
where
    P: Fn(f64) -> Complex64 + ?Sized,
    V: Fn(f64) -> f64 + ?Sized,
{
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in xs {
        let p = psi(x);
        let d2 = second_derivative(psi, x, h);
        let r = -d2 + p * (v(x) - energy);
        worst = worst.max(r.norm());
        scale = scale.max(p.norm());
    }
    worst / (scale * energy.abs().max(1.0))
}
