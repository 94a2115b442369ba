use num_complex::Complex64;

use crate::elliptic::{ModulusParams, WeierstrassLattice};
use crate::error::{Error, Result};

/// Parameter pairs for which closed-form solutions are built.
pub const SUPPORTED_MODELS: &str = "(1,1), (2,1), (1,0), (2,0)";

/// Associated Lamé potential `m(m+1) k^2 sn^2 x + l(l+1) k^2 cn^2 x / dn^2 x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LameModel {
    pub m: u32,
    pub ell: u32,
    pub modulus: ModulusParams,
    pub lattice: WeierstrassLattice,
}

/// Jacobi-form energy together with its Weierstrass-form image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPair {
    pub energy: f64,
    pub etilde: f64,
}

impl LameModel {
    pub fn new(m: u32, ell: u32, k2: f64) -> Result<Self> {
        if !matches!((m, ell), (1, 1) | (2, 1) | (1, 0) | (2, 0)) {
            return Err(Error::UnsupportedModel { m, ell, supported: SUPPORTED_MODELS });
        }
        let modulus = ModulusParams::new(k2)?;
        let lattice = WeierstrassLattice::new(modulus)?;
        Ok(Self { m, ell, modulus, lattice })
    }

    pub fn k2(&self) -> f64 {
        self.modulus.k2
    }

    /// `m(m+1)`.
    pub fn m_weight(&self) -> f64 {
        f64::from(self.m * (self.m + 1))
    }

    /// `l(l+1)`.
    pub fn ell_weight(&self) -> f64 {
        f64::from(self.ell * (self.ell + 1))
    }

    /// Real period `2K` of the potential.
    pub fn period(&self) -> f64 {
        self.modulus.period()
    }

    /// Number of sigma factors in the numerator of a Bloch function.
    pub fn point_count(&self) -> usize {
        (self.m + self.ell) as usize
    }

    /// Potential in Jacobi form at real `x`.
    pub fn potential(&self, x: f64) -> f64 {
        let (sn, cn, dn) = crate::elliptic::jacobi::sncndn(x, &self.modulus);
        let k2 = self.modulus.k2;
        self.m_weight() * k2 * sn * sn + self.ell_weight() * k2 * cn * cn / (dn * dn)
    }

    /// Weierstrass-form potential `m(m+1) wp(z) + l(l+1) ebar2 ebar3 / (wp(z) - e1)`.
    pub fn weierstrass_potential(&self, z: Complex64) -> Result<Complex64> {
        let wp = self.lattice.wp(z)?;
        let mut v = wp * self.m_weight();
        if self.ell > 0 {
            v += self.ell_weight() * self.lattice.ebar_product() / (wp - self.lattice.e1);
        }
        Ok(v)
    }

    pub fn energy_transform(&self, energy: f64) -> EnergyPair {
        let lat = &self.lattice;
        let etilde = (energy - self.ell_weight()) * lat.ebar3 + lat.e3 * self.m_weight();
        EnergyPair { energy, etilde }
    }

    pub fn energy_from_etilde(&self, etilde: f64) -> f64 {
        let lat = &self.lattice;
        (etilde - lat.e3 * self.m_weight()) / lat.ebar3 + self.ell_weight()
    }

    /// Band edges in ascending order: three for `(1,1)` and `(1,0)`, five for
    /// `(2,1)` and `(2,0)`.
    pub fn band_edges(&self) -> Result<Vec<f64>> {
        let k2 = self.modulus.k2;
        let kc = self.modulus.kc();
        let mut edges = match (self.m, self.ell) {
            (1, 1) => vec![2.0 + k2 - 2.0 * kc, 2.0 + k2 + 2.0 * kc, 4.0],
            (2, 1) => {
                let outer = (4.0 - 3.0 * k2).sqrt();
                let inner = (k2 * k2 - 5.0 * k2 + 4.0).sqrt();
                vec![
                    4.0 * k2,
                    5.0 + k2 - 2.0 * outer,
                    5.0 + 2.0 * k2 - 2.0 * inner,
                    5.0 + 2.0 * k2 + 2.0 * inner,
                    5.0 + k2 + 2.0 * outer,
                ]
            }
            (1, 0) => vec![k2, 1.0, 1.0 + k2],
            (2, 0) => {
                let r = (1.0 - k2 + k2 * k2).sqrt();
                vec![2.0 + 2.0 * k2 - 2.0 * r, 1.0 + k2, 1.0 + 4.0 * k2, 4.0 + k2, 2.0 + 2.0 * k2 + 2.0 * r]
            }
            (m, ell) => {
                return Err(Error::UnsupportedModel { m, ell, supported: SUPPORTED_MODELS });
            }
        };
        edges.sort_by(f64::total_cmp);
        Ok(edges)
    }

    /// Lowest band edge `E0`.
    pub fn ground_energy(&self) -> Result<f64> {
        Ok(self.band_edges()?[0])
    }
}

/// Potential at `x` for `model`.
pub fn potential(x: f64, model: &LameModel) -> f64 {
    model.potential(x)
}

/// Energy map to the Weierstrass form.
pub fn energy_transform(energy: f64, model: &LameModel) -> EnergyPair {
    model.energy_transform(energy)
}

/// Band edges of the supported finite-gap models.
pub fn band_edges(model: &LameModel) -> Result<Vec<f64>> {
    model.band_edges()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_special_points() {
        let k2 = 0.7;
        let m11 = LameModel::new(1, 1, k2).unwrap();
        let big_k = m11.modulus.big_k;
        assert!((m11.potential(0.0) - 2.0 * k2).abs() < 1e-15);
        assert!((m11.potential(big_k) - 2.0 * k2).abs() < 1e-14);
        let m21 = LameModel::new(2, 1, k2).unwrap();
        assert!((m21.potential(big_k) - 6.0 * k2).abs() < 1e-14);
        for &x in &[0.3, 1.1, 2.9] {
            assert!((m21.potential(x) - m21.potential(x + 2.0 * big_k)).abs() < 1e-13);
        }
    }

    #[test]
    fn weierstrass_and_jacobi_forms_agree() {
        // V(x) = V_w(x - iK') - m(m+1) e3 + l(l+1)
        for &(m, ell) in &[(1, 1), (2, 1), (1, 0), (2, 0)] {
            let model = LameModel::new(m, ell, 0.9).unwrap();
            for &x in &[0.2, 1.4, 3.3] {
                let z = Complex64::new(x, -model.modulus.big_kc);
                let vw = model.weierstrass_potential(z).unwrap();
                let shift = model.m_weight() * model.lattice.e3 - model.ell_weight();
                assert!(vw.im.abs() < 1e-12);
                assert!((vw.re - shift - model.potential(x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_transform_examples() {
        let model = LameModel::new(1, 1, 0.5).unwrap();
        assert!((model.energy_transform(4.0).etilde - 1.0).abs() < 1e-15);
        let lame = LameModel::new(1, 0, 0.3).unwrap();
        let et = lame.energy_transform(1.7).etilde;
        assert!((et - (1.7 + 2.0 * lame.lattice.e3)).abs() < 1e-15);
        for &e in &[-3.0, 0.0, 2.5, 11.0] {
            assert!((model.energy_from_etilde(model.energy_transform(e).etilde) - e).abs() < 1e-14);
        }
    }

    #[test]
    fn band_edge_formulas() {
        let m11 = LameModel::new(1, 1, 0.99).unwrap();
        let edges = m11.band_edges().unwrap();
        let expect = [2.79, 3.19, 4.0];
        for (a, b) in edges.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let m21 = LameModel::new(2, 1, 0.95).unwrap();
        let edges = m21.band_edges().unwrap();
        assert_eq!(edges.len(), 5);
        assert!((edges[0] - 3.8).abs() < 1e-14);
        assert_eq!(LameModel::new(1, 0, 0.5).unwrap().band_edges().unwrap(), vec![0.5, 1.0, 1.5]);
        let m20 = LameModel::new(2, 0, 0.5).unwrap().band_edges().unwrap();
        assert_eq!(m20.len(), 5);
        assert!((m20[0] - (3.0 - 3.0f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn unsupported_pairs_rejected() {
        assert!(matches!(LameModel::new(3, 2, 0.5), Err(Error::UnsupportedModel { .. })));
        assert!(matches!(LameModel::new(1, 1, 1.5), Err(Error::Domain(_))));
    }
}
