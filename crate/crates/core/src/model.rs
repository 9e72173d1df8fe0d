//! Chain parameters and Hamiltonians.
//!
//! Sites are ordered `(A1, B1, A2, B2, …, AN, BN)` everywhere: site `A_n` is
//! index `2(n−1)` and `B_n` is `2(n−1)+1`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OnSiteKind {
    #[default]
    None,
    /// `−iγ_on` on every site.
    UniformLoss,
    /// `+iγ_on` on A sites, `−iγ_on` on B sites.
    StaggeredGainLoss,
    /// `−iγ_on` on the first site, `+iγ_on` on the last.
    EndpointsOnly,
}

/// Optional diagonal complex potential.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct OnSitePotential {
    pub kind: OnSiteKind,
    pub strength: f64,
}

impl OnSitePotential {
    pub const NONE: Self = Self { kind: OnSiteKind::None, strength: 0.0 };

    pub fn uniform(strength: f64) -> Self {
        Self { kind: OnSiteKind::UniformLoss, strength }
    }

    pub fn staggered(strength: f64) -> Self {
        Self { kind: OnSiteKind::StaggeredGainLoss, strength }
    }

    pub fn endpoints(strength: f64) -> Self {
        Self { kind: OnSiteKind::EndpointsOnly, strength }
    }

    pub fn is_none(&self) -> bool {
        self.kind == OnSiteKind::None
    }

    /// Diagonal term added to `site` of a chain with `dim` sites.
    pub fn diagonal_term(&self, site: usize, dim: usize) -> C64 {
        let g = self.strength;
        match self.kind {
            OnSiteKind::None => C64::new(0.0, 0.0),
            OnSiteKind::UniformLoss => C64::new(0.0, -g),
            OnSiteKind::StaggeredGainLoss => C64::new(0.0, if site % 2 == 0 { g } else { -g }),
            OnSiteKind::EndpointsOnly => {
                if site == 0 {
                    C64::new(0.0, -g)
                } else if site == dim - 1 {
                    C64::new(0.0, g)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }
}

impl fmt::Display for OnSitePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OnSiteKind::None => write!(f, "none"),
            OnSiteKind::UniformLoss => write!(f, "uniform:{}", self.strength),
            OnSiteKind::StaggeredGainLoss => write!(f, "staggered:{}", self.strength),
            OnSiteKind::EndpointsOnly => write!(f, "endpoints:{}", self.strength),
        }
    }
}

impl FromStr for OnSitePotential {
    type Err = Error;

    /// Parses `none`, `uniform:<g>`, `staggered:<g>` or `endpoints:<g>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(Self::NONE);
        }
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("on-site potential `{s}`: expected none or <kind>:<strength>")))?;
        let strength: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("on-site strength `{value}` is not a number")))?;
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidInput(format!("on-site strength must be finite and >= 0, got {strength}")));
        }
        let kind = match kind.trim() {
            "uniform" => OnSiteKind::UniformLoss,
            "staggered" => OnSiteKind::StaggeredGainLoss,
            "endpoints" => OnSiteKind::EndpointsOnly,
            other => return Err(Error::InvalidInput(format!("unknown on-site kind `{other}`"))),
        };
        Ok(Self { kind, strength })
    }
}

/// Physical parameters of one chain configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    pub n_cells: usize,
    pub t0: f64,
    pub phi: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub tau: f64,
    pub omega: f64,
    pub onsite: OnSitePotential,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            n_cells: 20,
            t0: 1.0,
            phi: 0.4 * std::f64::consts::PI,
            gamma1: 0.0,
            gamma2: 0.0,
            tau: 0.0,
            omega: 0.0,
            onsite: OnSitePotential::NONE,
        }
    }
}

impl ChainParams {
    /// Parameters with `t0 = 1`, no bath, no on-site terms.
    pub fn new(n_cells: usize, phi: f64, gamma1: f64, gamma2: f64) -> Self {
        Self { n_cells, phi, gamma1, gamma2, ..Self::default() }
    }

    pub fn with_n(mut self, n_cells: usize) -> Self {
        self.n_cells = n_cells;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_gamma(mut self, gamma1: f64, gamma2: f64) -> Self {
        self.gamma1 = gamma1;
        self.gamma2 = gamma2;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_onsite(mut self, onsite: OnSitePotential) -> Self {
        self.onsite = onsite;
        self
    }

    pub fn dim(&self) -> usize {
        2 * self.n_cells
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_cells < 1 {
            return bad("n_cells must be >= 1".into());
        }
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return bad(format!("t0 must be finite and > 0, got {}", self.t0));
        }
        for (name, v) in [("gamma1", self.gamma1), ("gamma2", self.gamma2), ("tau", self.tau)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !self.phi.is_finite() || !self.omega.is_finite() {
            return bad("phi and omega must be finite".into());
        }
        if !(self.onsite.strength.is_finite() && self.onsite.strength >= 0.0) {
            return bad(format!("on-site strength must be finite and >= 0, got {}", self.onsite.strength));
        }
        Ok(())
    }
}

/// Complex intra- (`t_A`) and intercell (`t_B`) couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings {
    pub t_a: C64,
    pub t_b: C64,
    pub t_a_real: f64,
    pub t_b_real: f64,
}

pub fn couplings(p: &ChainParams) -> Couplings {
    let c = p.phi.cos();
    let t_a_real = p.t0 * (1.0 - c);
    let t_b_real = p.t0 * (1.0 + c);
    Couplings {
        t_a: C64::new(t_a_real, -p.gamma1),
        t_b: C64::new(t_b_real, -p.gamma2),
        t_a_real,
        t_b_real,
    }
}

/// Open-chain single-excitation Hamiltonian, `2N × 2N`.
pub fn build_open_chain(p: &ChainParams) -> ComplexMatrix {
    let c = couplings(p);
    let dim = p.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for s in 0..dim {
        h[(s, s)] = C64::new(p.omega, 0.0) + p.onsite.diagonal_term(s, dim);
    }
    for n in 0..p.n_cells {
        let (a, b) = (2 * n, 2 * n + 1);
        h[(a, b)] = c.t_a;
        h[(b, a)] = c.t_a;
        if n + 1 < p.n_cells {
            h[(b, a + 2)] = c.t_b;
            h[(a + 2, b)] = c.t_b;
        }
    }
    h
}

/// Bloch Hamiltonian `(t_A + t_B cos k) σx + i t_B sin k σy`.
pub fn bloch_hamiltonian(p: &ChainParams, k: f64) -> Result<ComplexMatrix> {
    if !p.onsite.is_none() {
        return Err(Error::UnsupportedOnsite);
    }
    let c = couplings(p);
    let upper = c.t_a + c.t_b * C64::from_polar(1.0, -k);
    let lower = c.t_a + c.t_b * C64::from_polar(1.0, k);
    let zero = C64::new(0.0, 0.0);
    ComplexMatrix::from_rows(&[vec![zero, upper], vec![lower, zero]])
}

/// Site-reversal `j ↦ dim−1−j`, which maps `A_n ↔ B_{N+1−n}`.
pub fn mirror(v: &[C64]) -> Vec<C64> {
    v.iter().rev().copied().collect()
}

/// Whether `H` commutes with the site-reversal operator to `tol`.
pub fn is_mirror_symmetric(h: &ComplexMatrix, tol: f64) -> bool {
    let n = h.rows();
    (0..n).all(|i| (0..n).all(|j| (h[(i, j)] - h[(n - 1 - i, n - 1 - j)]).norm() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, spectral_distance};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn coupling_values() {
        let c = couplings(&ChainParams::new(1, 0.0, 0.0, 0.0));
        assert_eq!((c.t_a_real, c.t_b_real), (0.0, 2.0));
        let c = couplings(&ChainParams::new(1, PI / 2.0, 0.0, 0.0));
        assert!((c.t_a_real - 1.0).abs() < 1e-15 && (c.t_b_real - 1.0).abs() < 1e-15);
        let c = couplings(&ChainParams::new(1, 0.4 * PI, 0.3, 0.7));
        assert!((c.t_a_real - 0.690_983_005_625_052_6).abs() < 1e-12);
        assert!((c.t_b_real - 1.309_016_994_374_947_5).abs() < 1e-12);
        assert_eq!(c.t_a.im, -0.3);
        assert_eq!(c.t_b.im, -0.7);
    }

    #[test]
    fn single_cell() {
        let p = ChainParams::new(1, 0.3, 0.2, 0.5);
        let h = build_open_chain(&p);
        let t_a = couplings(&p).t_a;
        assert_eq!(h.rows(), 2);
        assert_eq!(h[(0, 1)], t_a);
        assert_eq!(h[(1, 0)], t_a);
        assert_eq!(h[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn hermitian_four_site_chain() {
        let h = build_open_chain(&ChainParams::new(2, PI / 2.0, 0.0, 0.0));
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i as i32 - j as i32).abs() == 1 { 1.0 } else { 0.0 };
                assert!((h[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn onsite_layouts() {
        let base = ChainParams::new(2, 0.4 * PI, 0.0, 0.0);
        let g = 0.25;
        let diag = |o: OnSitePotential| build_open_chain(&base.with_onsite(o)).diagonal();
        let i = |x: f64| C64::new(0.0, x);
        assert_eq!(diag(OnSitePotential::uniform(g)), vec![i(-g); 4]);
        assert_eq!(diag(OnSitePotential::staggered(g)), vec![i(g), i(-g), i(g), i(-g)]);
        assert_eq!(diag(OnSitePotential::endpoints(g)), vec![i(-g), i(0.0), i(0.0), i(g)]);
    }

    #[test]
    fn onsite_parsing_round_trips() {
        for s in ["none", "uniform:0.5", "staggered:1", "endpoints:0.25"] {
            let o: OnSitePotential = s.parse().unwrap();
            assert_eq!(o.to_string().parse::<OnSitePotential>().unwrap(), o);
        }
        assert!("uniform".parse::<OnSitePotential>().is_err());
        assert!("sideways:1".parse::<OnSitePotential>().is_err());
        assert!("uniform:-1".parse::<OnSitePotential>().is_err());
    }

    #[test]
    fn bloch_special_points() {
        let p = ChainParams::new(1, 0.3 * PI, 0.4, 0.9);
        let c = couplings(&p);
        let h0 = bloch_hamiltonian(&p, 0.0).unwrap();
        assert!((h0[(0, 1)] - (c.t_a + c.t_b)).norm() < 1e-15);
        assert!((h0[(1, 0)] - (c.t_a + c.t_b)).norm() < 1e-15);
        let hpi = bloch_hamiltonian(&p, PI).unwrap();
        assert!((hpi[(0, 1)] - (c.t_a - c.t_b)).norm() < 1e-15);
        assert!((hpi[(1, 0)] - (c.t_a - c.t_b)).norm() < 1e-15);
        let with_loss = p.with_onsite(OnSitePotential::uniform(0.1));
        assert_eq!(bloch_hamiltonian(&with_loss, 0.0).unwrap_err(), Error::UnsupportedOnsite);
    }

    #[test]
    fn validation() {
        assert!(ChainParams::default().validate().is_ok());
        assert!(ChainParams::default().with_n(0).validate().is_err());
        assert!(ChainParams::default().with_gamma(-1.0, 0.0).validate().is_err());
        assert!(ChainParams { t0: 0.0, ..ChainParams::default() }.validate().is_err());
    }

    proptest! {
        #[test]
        fn bloch_is_chiral(phi in 0.0..PI, g1 in 0.0..3.0f64, g2 in 0.0..3.0f64, k in -PI..PI) {
            let h = bloch_hamiltonian(&ChainParams::new(1, phi, g1, g2), k).unwrap();
            // σz H σz flips the sign of the off-diagonal entries.
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let sign = if i == j { 1.0 } else { -1.0 };
                prop_assert!((h[(i, j)] * sign + h[(i, j)]).norm() < 1e-15);
            }
        }

        #[test]
        fn open_chain_is_complex_symmetric(n in 1usize..12, phi in 0.0..PI, g1 in 0.0..3.0f64, g2 in 0.0..3.0f64) {
            let h = build_open_chain(&ChainParams::new(n, phi, g1, g2));
            prop_assert_eq!(h.transpose(), h.clone());
            prop_assert!(is_mirror_symmetric(&h, 0.0));
        }

        #[test]
        fn hermitian_limit_is_real_symmetric(n in 1usize..12, phi in 0.0..PI) {
            let h = build_open_chain(&ChainParams::new(n, phi, 0.0, 0.0));
            prop_assert!(h.as_slice().iter().all(|z| z.im == 0.0));
            prop_assert_eq!(h.adjoint(), h);
        }

        #[test]
        fn uniform_loss_shifts_spectrum(n in 2usize..10, phi in 0.0..PI, g in 0.0..2.0f64, gon in 0.0..2.0f64) {
            let p = ChainParams::new(n, phi, g, g);
            let mut base = eigenvalues(&build_open_chain(&p)).unwrap();
            let lossy = eigenvalues(&build_open_chain(&p.with_onsite(OnSitePotential::uniform(gon)))).unwrap();
            base.iter_mut().for_each(|z| *z += C64::new(0.0, -gon));
            let d = spectral_distance(&base, &lossy);
            prop_assert!(d < 1e-9, "spectra differ by {}", d);
        }
    }
}
