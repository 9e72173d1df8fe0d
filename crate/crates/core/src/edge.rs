//! Hybridized edge states of the finite chain.
//!
//! The two eigenvalues nearest the band centre are taken as the edge pair
//! when their common eigenspace contains one state concentrated on each end
//! of the chain. Their biorthogonal cell profiles are compared with the
//! geometric ansatz `(t_A/t_B)^{2n}`, and their splitting with the closed form
//! `E_± = ±𝒩 t_A^{N+2}/t_B^{N+1}`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig_with, inner, ComplexMatrix, EigenDecomposition, EigenOptions};
use crate::model::{build_open_chain, couplings, is_mirror_symmetric, mirror, ChainParams};
use crate::topology::{classify_phase, Phase};

/// Mirror parities below this magnitude are considered mixed.
const PARITY_CLEAR: f64 = 0.9;

/// Localization test used by [`find_edge_pair`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSelection {
    /// Minimum share of the norm that must sit in each outer region.
    pub weight_threshold: f64,
    /// Fraction of the cells, at each end, that counts as "outer".
    pub outer_fraction: f64,
}

impl Default for EdgeSelection {
    fn default() -> Self {
        Self { weight_threshold: 0.6, outer_fraction: 0.25 }
    }
}

/// How the `+`/`−` labels were assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Labelling {
    /// `E_+` carries mirror parity `(−1)^(N−1)`.
    MirrorParity,
    /// `Re E_+ ≥ Re E_−`, ties by `Im`.
    RealPart,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgePair {
    pub plus: usize,
    pub minus: usize,
    pub e_plus: C64,
    pub e_minus: C64,
    /// Best achievable weight on the left / right outer region within the pair's span.
    pub left_weight: f64,
    pub right_weight: f64,
    pub labelling: Labelling,
}

impl EdgePair {
    pub fn delta_e(&self) -> C64 {
        self.e_plus - self.e_minus
    }
}

/// `A_T = |t_B/t_A|`, `θ_T = Arg(t_B/t_A)`, `ξ_T = 1/(ln A_T + iθ_T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeConstants {
    pub a_t: f64,
    pub theta_t: f64,
    pub xi_t: C64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticSplitting {
    pub e_plus: C64,
    pub e_minus: C64,
    pub delta_e: C64,
    /// Prefactor `ζ = E_+ exp((N−1)/ξ_T)`.
    pub zeta: C64,
    /// `𝒩_L*𝒩_R = 1 / Σ_{n=1}^{N} q^n`, `q = (t_A/t_B)²`.
    pub normalization: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeStateAnalysis {
    pub e_plus: C64,
    pub e_minus: C64,
    pub delta_e: C64,
    /// `⟨Ψ_L|Π_n|Ψ_R⟩` of the `E_+` eigenstate, n = 1..N.
    pub profile_plus: Vec<C64>,
    /// Profile of the state localized on the left edge.
    pub profile_left: Vec<C64>,
    /// Analytic comparators; absent with on-site potentials.
    pub constants: Option<EdgeConstants>,
    pub analytic: Option<AnalyticSplitting>,
    pub n_t: usize,
    pub pair: EdgePair,
}

fn outer_sites(n_cells: usize, fraction: f64) -> usize {
    let cells = ((n_cells as f64 * fraction).ceil() as usize).clamp(1, n_cells);
    2 * cells
}

/// Largest eigenvalue of the 2×2 Hermitian matrix `[[a, b], [b*, d]]`.
fn max_eig_2x2(a: f64, b: C64, d: f64) -> f64 {
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
}

/// Largest weight any unit vector in span{x, y} can put on `sites`.
fn best_weight(x: &[C64], y: &[C64], sites: std::ops::Range<usize>) -> f64 {
    // Orthonormal basis of the span.
    let nx = crate::linalg::norm2(x);
    let e1: Vec<C64> = x.iter().map(|z| z / nx).collect();
    let proj = inner(&e1, y);
    let mut e2: Vec<C64> = y.iter().zip(&e1).map(|(b, a)| b - a * proj).collect();
    let n2 = crate::linalg::norm2(&e2);
    if n2 <= 1e-12 * crate::linalg::norm2(y) {
        let w: f64 = e1[sites].iter().map(|z| z.norm_sqr()).sum();
        return w;
    }
    e2.iter_mut().for_each(|z| *z /= n2);
    let a: f64 = e1[sites.clone()].iter().map(|z| z.norm_sqr()).sum();
    let d: f64 = e2[sites.clone()].iter().map(|z| z.norm_sqr()).sum();
    let b: C64 = e1[sites.clone()].iter().zip(&e2[sites]).map(|(p, q)| p.conj() * q).sum();
    max_eig_2x2(a, b, d)
}

/// Mirror parity `Re⟨Pv|v⟩ / ‖v‖²` of a right eigenvector.
fn mirror_parity(v: &[C64]) -> f64 {
    inner(&mirror(v), v).re / inner(v, v).re
}

pub fn find_edge_pair(h: &ComplexMatrix, decomp: &EigenDecomposition) -> Result<EdgePair> {
    find_edge_pair_with(h, decomp, &EdgeSelection::default())
}

/// Picks the two eigenvalues closest to the band centre (the mean diagonal
/// entry, which removes ω and a uniform on-site shift) and checks that their
/// span holds a state on each edge.
pub fn find_edge_pair_with(h: &ComplexMatrix, decomp: &EigenDecomposition, sel: &EdgeSelection) -> Result<EdgePair> {
    let dim = h.rows();
    if dim < 4 || dim % 2 != 0 || decomp.dim() != dim {
        return Err(Error::InvalidInput(format!("edge pair needs an even chain of at least 4 sites, got {dim}")));
    }
    let n_cells = dim / 2;
    let centre: C64 = h.diagonal().iter().sum::<C64>() / dim as f64;
    let order = decomp.sorted_by_distance(centre);
    let (i, j) = (order[0], order[1]);
    let (vi, vj) = (decomp.right(i), decomp.right(j));

    let m = outer_sites(n_cells, sel.outer_fraction);
    let left_weight = best_weight(&vi, &vj, 0..m);
    let right_weight = best_weight(&vi, &vj, dim - m..dim);
    if left_weight < sel.weight_threshold || right_weight < sel.weight_threshold {
        return Err(Error::NoEdgePair { left_weight, right_weight });
    }

    let (ei, ej) = (decomp.eigenvalues[i], decomp.eigenvalues[j]);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let mut labelling = Labelling::RealPart;
    let (mut plus, mut minus) = if (ei.re, ei.im) >= (ej.re, ej.im) { (i, j) } else { (j, i) };
    if is_mirror_symmetric(h, 1e-14 * scale) {
        let (pi, pj) = (mirror_parity(&vi), mirror_parity(&vj));
        if pi.abs() >= PARITY_CLEAR && pj.abs() >= PARITY_CLEAR && pi.signum() != pj.signum() {
            let wanted = if n_cells % 2 == 1 { 1.0 } else { -1.0 };
            (plus, minus) = if pi.signum() == wanted { (i, j) } else { (j, i) };
            labelling = Labelling::MirrorParity;
        }
    }
    Ok(EdgePair {
        plus,
        minus,
        e_plus: decomp.eigenvalues[plus],
        e_minus: decomp.eigenvalues[minus],
        left_weight,
        right_weight,
        labelling,
    })
}

fn cell_profile(w: &[C64], v: &[C64]) -> Vec<C64> {
    w.chunks(2).zip(v.chunks(2)).map(|(wc, vc)| wc[0].conj() * vc[0] + wc[1].conj() * vc[1]).collect()
}

/// `p_n = ⟨Ψ_L|Π_n|Ψ_R⟩` for cells n = 1..N, with `⟨Ψ_L|Ψ_R⟩ = 1`.
pub fn localization_profile(decomp: &EigenDecomposition, state_index: usize, n_cells: usize) -> Result<Vec<C64>> {
    if decomp.dim() != 2 * n_cells || state_index >= decomp.dim() {
        return Err(Error::InvalidInput(format!(
            "profile of state {state_index} for {n_cells} cells, decomposition has dimension {}",
            decomp.dim()
        )));
    }
    let (w, v) = (decomp.left(state_index), decomp.right(state_index));
    let overlap = inner(&w, &v);
    if overlap.norm() < crate::linalg::eigen::DEFECTIVE_OVERLAP {
        return Err(Error::DefectivePairing { index: state_index, overlap: overlap.norm() });
    }
    Ok(cell_profile(&w, &v).into_iter().map(|p| p / overlap).collect())
}

/// Biorthogonal profiles of the left- and right-localized combinations of
/// the edge pair.
///
/// With `v_±, w_±` the biorthonormal pair, the left state is
/// `v_+ + c v_−` where `c` cancels its overlap with the right-edge part of
/// `v_−`; its partner is `w_+ + w_−/c̄`. The right state flips both signs.
pub fn edge_state_profiles(decomp: &EigenDecomposition, pair: &EdgePair, n_cells: usize) -> Result<(Vec<C64>, Vec<C64>)> {
    let dim = 2 * n_cells;
    if decomp.dim() != dim {
        return Err(Error::InvalidInput("decomposition does not match the chain length".into()));
    }
    let (vp, vm) = (decomp.right(pair.plus), decomp.right(pair.minus));
    let (wp, wm) = (decomp.left(pair.plus), decomp.left(pair.minus));
    let half = dim / 2;
    let right_part = |v: &[C64]| -> Vec<C64> { v.iter().enumerate().map(|(s, z)| if s >= half { *z } else { C64::new(0.0, 0.0) }).collect() };
    let rvm = right_part(&vm);
    let den = inner(&rvm, &vm);
    if den.norm() < 1e-300 {
        return Err(Error::NoEdgePair { left_weight: pair.left_weight, right_weight: pair.right_weight });
    }
    let c = -inner(&rvm, &vp) / den;
    let ic = C64::new(1.0, 0.0) / c.conj();
    let combine = |a: &[C64], b: &[C64], s: C64| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    let profile = |l: Vec<C64>, r: Vec<C64>| {
        let norm = inner(&l, &r);
        cell_profile(&l, &r).into_iter().map(|p| p / norm).collect::<Vec<C64>>()
    };
    let left = profile(combine(&wp, &wm, ic), combine(&vp, &vm, c));
    let right = profile(combine(&wp, &wm, -ic), combine(&vp, &vm, -c));
    Ok((left, right))
}

pub fn analytic_edge_constants(p: &ChainParams) -> Result<EdgeConstants> {
    if !p.onsite.is_none() {
        return Err(Error::UnsupportedOnsite);
    }
    let c = couplings(p);
    if c.t_a.norm() == 0.0 || c.t_b.norm() == 0.0 {
        return Err(Error::DegenerateCoupling);
    }
    let ratio = c.t_b / c.t_a;
    let a_t = ((c.t_b_real.powi(2) + p.gamma2.powi(2)) / (c.t_a_real.powi(2) + p.gamma1.powi(2))).sqrt();
    let theta_t = ratio.arg();
    let xi_t = C64::new(1.0, 0.0) / C64::new(a_t.ln(), theta_t);
    Ok(EdgeConstants { a_t, theta_t, xi_t })
}

/// Closed-form edge splitting, valid deep enough in the topological phase.
pub fn analytic_splitting(p: &ChainParams) -> Result<AnalyticSplitting> {
    let k = analytic_edge_constants(p)?;
    if p.n_cells < 2 {
        return Err(Error::InvalidParams("analytic splitting needs N >= 2".into()));
    }
    if classify_phase(p).phase != Phase::Topological {
        return Err(Error::NotTopological);
    }
    let c = couplings(p);
    let n = p.n_cells;
    let r = c.t_a / c.t_b;
    let q = r * r;
    let mut series = C64::new(0.0, 0.0);
    let mut qn = C64::new(1.0, 0.0);
    for _ in 0..n {
        qn *= q;
        series += qn;
    }
    let normalization = C64::new(1.0, 0.0) / series;
    let e_plus = normalization * c.t_a * r.powu(n as u32 + 1);
    let zeta = e_plus * ((n as f64 - 1.0) / k.xi_t).exp();
    Ok(AnalyticSplitting { e_plus, e_minus: -e_plus, delta_e: 2.0 * e_plus, zeta, normalization })
}

/// Eigendecomposition of the open chain, using the complex-symmetric
/// shortcut for left vectors whenever `H = Hᵀ`.
pub fn diagonalize_chain(p: &ChainParams) -> Result<(ComplexMatrix, EigenDecomposition)> {
    p.validate()?;
    let h = build_open_chain(p);
    let opts = if p.onsite.is_none() { EigenOptions::complex_symmetric() } else { EigenOptions::default() };
    let d = eig_with(&h, &opts)?;
    Ok((h, d))
}

pub fn analyze_edges(p: &ChainParams) -> Result<EdgeStateAnalysis> {
    analyze_edges_with(p, &EdgeSelection::default())
}

pub fn analyze_edges_with(p: &ChainParams, sel: &EdgeSelection) -> Result<EdgeStateAnalysis> {
    let (h, d) = diagonalize_chain(p)?;
    let pair = find_edge_pair_with(&h, &d, sel)?;
    let profile_plus = localization_profile(&d, pair.plus, p.n_cells)?;
    let (profile_left, _) = edge_state_profiles(&d, &pair, p.n_cells)?;
    let constants = analytic_edge_constants(p).ok();
    let analytic = analytic_splitting(p).ok();
    Ok(EdgeStateAnalysis {
        e_plus: pair.e_plus,
        e_minus: pair.e_minus,
        delta_e: pair.delta_e(),
        profile_plus,
        profile_left,
        constants,
        analytic,
        n_t: p.n_cells.saturating_sub(1),
        pair,
    })
}

/// Parameter axis of an oscillation sweep.
#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    Phi(Vec<f64>),
    N(Vec<usize>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::Phi(v) => v.len(),
            Sweep::N(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn point(&self, base: &ChainParams, i: usize) -> ChainParams {
        match self {
            Sweep::Phi(v) => base.with_phi(v[i]),
            Sweep::N(v) => base.with_n(v[i]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscillationRow {
    pub phi: f64,
    pub n_cells: usize,
    /// Numerical edge pair, or why none was found.
    pub numeric: std::result::Result<EdgePair, Error>,
    pub analytic: Option<AnalyticSplitting>,
    pub constants: Option<EdgeConstants>,
}

/// One row per grid point, computed in parallel, returned in grid order.
/// Failures are recorded per row.
pub fn oscillation_sweep(p: &ChainParams, sweep: &Sweep) -> Result<Vec<OscillationRow>> {
    oscillation_sweep_with(p, sweep, &EdgeSelection::default())
}

pub fn oscillation_sweep_with(p: &ChainParams, sweep: &Sweep, sel: &EdgeSelection) -> Result<Vec<OscillationRow>> {
    if sweep.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    Ok((0..sweep.len())
        .into_par_iter()
        .map(|i| {
            let q = sweep.point(p, i);
            let numeric = diagonalize_chain(&q).and_then(|(h, d)| find_edge_pair_with(&h, &d, sel));
            OscillationRow {
                phi: q.phi,
                n_cells: q.n_cells,
                numeric,
                analytic: analytic_splitting(&q).ok(),
                constants: analytic_edge_constants(&q).ok(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OnSitePotential;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn hermitian_doublet_is_symmetric() {
        let p = ChainParams::new(20, 0.25 * PI, 0.0, 0.0);
        let a = analyze_edges(&p).unwrap();
        assert!((a.e_plus + a.e_minus).norm() < 1e-12);
        assert!(a.e_plus.norm() < 1e-6);
        assert!(a.e_plus.im.abs() < 1e-12);
    }

    #[test]
    fn dissipative_pair_is_chiral() {
        let a = analyze_edges(&ChainParams::new(20, 0.4 * PI, 1.0, 1.0)).unwrap();
        assert!((a.e_plus + a.e_minus).norm() < 1e-9);
        assert!(a.e_plus.im.abs() > 0.0);
        assert_eq!(a.pair.labelling, Labelling::MirrorParity);
        assert_eq!(a.delta_e, a.e_plus - a.e_minus);
    }

    #[test]
    fn trivial_phase_has_no_pair() {
        let r = analyze_edges(&ChainParams::new(20, 0.75 * PI, 0.0, 0.0));
        assert!(matches!(r, Err(Error::NoEdgePair { .. })), "{r:?}");
    }

    #[test]
    fn left_profile_decays_geometrically() {
        let p = ChainParams::new(20, 0.1 * PI, 0.0, 0.0);
        let a = analyze_edges(&p).unwrap();
        let c = couplings(&p);
        let ratio = (c.t_a / c.t_b).norm_sqr();
        for n in 0..5 {
            let got = a.profile_left[n + 1].norm() / a.profile_left[n].norm();
            assert!((got / ratio - 1.0).abs() < 1e-6, "cell {n}: {got} vs {ratio}");
        }
    }

    #[test]
    fn right_profile_mirrors_left() {
        let p = ChainParams::new(16, 0.2 * PI, 0.5, 0.5);
        let (_, d) = diagonalize_chain(&p).unwrap();
        let h = build_open_chain(&p);
        let pair = find_edge_pair(&h, &d).unwrap();
        let (left, right) = edge_state_profiles(&d, &pair, p.n_cells).unwrap();
        for n in 0..p.n_cells {
            assert!((left[n] - right[p.n_cells - 1 - n]).norm() < 1e-10);
        }
    }

    #[test]
    fn complex_profile_ratio_matches_constants() {
        // Deep in the topological phase the left-state profile follows
        // (t_A/t_B)^{2n}: modulus A_T^{-2}, phase −2θ_T per cell.
        let p = ChainParams::new(20, 0.25 * PI, 1.0, 1.0);
        let a = analyze_edges(&p).unwrap();
        let k = a.constants.unwrap();
        for n in 0..4 {
            let r = a.profile_left[n + 1] / a.profile_left[n];
            assert!((r.norm() * k.a_t * k.a_t - 1.0).abs() < 0.02);
            let dphase = (r * C64::from_polar(1.0, 2.0 * k.theta_t)).arg();
            assert!(dphase.abs() < 0.02, "{dphase}");
        }
    }

    #[test]
    fn constants_examples() {
        let k = analytic_edge_constants(&ChainParams::new(10, 0.3 * PI, 0.0, 0.0)).unwrap();
        let c = couplings(&ChainParams::new(10, 0.3 * PI, 0.0, 0.0));
        assert_eq!(k.theta_t, 0.0);
        assert!((k.a_t - c.t_b_real / c.t_a_real).abs() < 1e-12);
        let k = analytic_edge_constants(&ChainParams::new(10, 0.5 * PI, 1.0, 1.0)).unwrap();
        assert!((k.a_t - 1.0).abs() < 1e-12 && k.theta_t.abs() < 1e-12);
        let degenerate = analytic_edge_constants(&ChainParams::new(10, 0.0, 0.0, 1.0));
        assert_eq!(degenerate.unwrap_err(), Error::DegenerateCoupling);
        let lossy = ChainParams::new(10, 0.3, 1.0, 1.0).with_onsite(OnSitePotential::uniform(0.2));
        assert_eq!(analytic_edge_constants(&lossy).unwrap_err(), Error::UnsupportedOnsite);
    }

    #[test]
    fn zeta_is_the_stripped_prefactor() {
        let p = ChainParams::new(17, 0.35 * PI, 1.0, 1.0);
        let s = analytic_splitting(&p).unwrap();
        let c = couplings(&p);
        let expect = s.normalization * c.t_a.powu(3) / c.t_b.powu(2);
        assert!((s.zeta - expect).norm() < 1e-12 * expect.norm());
        assert_eq!(s.e_minus, -s.e_plus);
        assert_eq!(analytic_splitting(&p.with_phi(0.8 * PI)).unwrap_err(), Error::NotTopological);
    }

    #[test]
    fn analytic_matches_diagonalization_for_long_chains() {
        for n in [15, 20, 25] {
            let p = ChainParams::new(n, 0.4 * PI, 1.0, 1.0);
            let num = analyze_edges(&p).unwrap().delta_e;
            let ana = analytic_splitting(&p).unwrap().delta_e;
            assert!((num - ana).norm() / num.norm() < 0.1, "N={n}: {num} vs {ana}");
        }
    }

    #[test]
    fn sweep_keeps_grid_order_and_flags_rows() {
        let phis = vec![0.2 * PI, 0.8 * PI, 0.3 * PI];
        let rows = oscillation_sweep(&ChainParams::new(12, 0.0, 0.0, 0.0), &Sweep::Phi(phis.clone())).unwrap();
        assert_eq!(rows.iter().map(|r| r.phi).collect::<Vec<_>>(), phis);
        assert!(rows[0].numeric.is_ok() && rows[2].numeric.is_ok());
        assert!(matches!(rows[1].numeric, Err(Error::NoEdgePair { .. })));
        assert!(rows[1].analytic.is_none());
        assert!(oscillation_sweep(&ChainParams::default(), &Sweep::N(vec![])).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn profiles_sum_to_one(n in 4usize..24, phi in 0.05..0.4f64, g in 0.0..2.0f64) {
            let p = ChainParams::new(n, phi * PI, g, g);
            let (_, d) = diagonalize_chain(&p).unwrap();
            for i in 0..d.dim() {
                let prof = localization_profile(&d, i, n).unwrap();
                let s: C64 = prof.iter().sum();
                prop_assert!((s - C64::new(1.0, 0.0)).norm() < 1e-8);
            }
        }

        #[test]
        fn theta_decreases_toward_boundary(phi1 in 0.01..0.49f64, dphi in 0.001..0.01f64) {
            let th = |phi: f64| analytic_edge_constants(&ChainParams::new(10, phi * PI, 1.0, 1.0)).unwrap().theta_t;
            prop_assert!(th(phi1 + dphi) < th(phi1));
            prop_assert!(th(0.5).abs() < 1e-12);
        }
    }
}
