//! Phase classification, band dispersion and the winding number.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{couplings, ChainParams};

pub const DEFAULT_K_POINTS: usize = 4001;
/// Width of the boundary band, in units of t0².
pub const BOUNDARY_EPS: f64 = 1e-12;
/// Winding is refused when min |E| on the grid falls below this (units of t0).
pub const GAP_CLOSURE_EPS: f64 = 1e-8;
const QUANTIZATION_TOL: f64 = 1e-3;
const MAX_PHASE_STEP: f64 = PI / 4.0;
const MAX_BISECTION_DEPTH: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Topological,
    Trivial,
    Boundary,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Topological => "topological",
            Phase::Trivial => "trivial",
            Phase::Boundary => "boundary",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseReport {
    pub phase: Phase,
    /// `t̃_A² + γ₁²`
    pub lhs: f64,
    /// `t̃_B² + γ₂²`
    pub rhs: f64,
    pub winding: Option<i32>,
    pub min_abs_e_on_grid: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersionCurve {
    pub k_grid: Vec<f64>,
    pub e_plus: Vec<C64>,
    pub e_minus: Vec<C64>,
}

fn require_no_onsite(p: &ChainParams) -> Result<()> {
    if p.onsite.is_none() {
        Ok(())
    } else {
        Err(Error::UnsupportedOnsite)
    }
}

/// Closed grid on `[−π, π]` that is exactly symmetric: `k[n−1−j] = −k[j]`.
pub fn k_grid(n_k: usize) -> Vec<f64> {
    let m = (n_k - 1) as f64;
    (0..n_k).map(|j| PI * (2.0 * j as f64 - m) / m).collect()
}

pub fn classify_phase(p: &ChainParams) -> PhaseReport {
    let c = couplings(p);
    let lhs = c.t_a_real * c.t_a_real + p.gamma1 * p.gamma1;
    let rhs = c.t_b_real * c.t_b_real + p.gamma2 * p.gamma2;
    let eps = BOUNDARY_EPS * p.t0 * p.t0;
    let phase = if lhs < rhs - eps {
        Phase::Topological
    } else if lhs > rhs + eps {
        Phase::Trivial
    } else {
        Phase::Boundary
    };
    PhaseReport { phase, lhs, rhs, winding: None, min_abs_e_on_grid: None }
}

/// `E_+(k)² = t_A² + t_B² + 2 t_A t_B cos k`.
pub fn energy_squared(p: &ChainParams, k: f64) -> C64 {
    let c = couplings(p);
    c.t_a * c.t_a + c.t_b * c.t_b + 2.0 * c.t_a * c.t_b * k.cos()
}

/// Bands on a uniform closed k-grid. The square-root branch is the
/// principal one at `k = −π` and is then continued along the grid by picking
/// whichever of `±√E²` lies closer to the previous value.
pub fn dispersion(p: &ChainParams, n_k: usize) -> Result<DispersionCurve> {
    require_no_onsite(p)?;
    if n_k < 2 {
        return Err(Error::InvalidInput(format!("dispersion needs at least 2 k-points, got {n_k}")));
    }
    let k = k_grid(n_k);
    let mut e_plus: Vec<C64> = Vec::with_capacity(n_k);
    for &kj in &k {
        let r = energy_squared(p, kj).sqrt();
        let e = match e_plus.last() {
            None => r,
            Some(&prev) => {
                if (r - prev).norm() <= (r + prev).norm() {
                    r
                } else {
                    -r
                }
            }
        };
        e_plus.push(e);
    }
    let e_minus = e_plus.iter().map(|e| -e).collect();
    Ok(DispersionCurve { k_grid: k, e_plus, e_minus })
}

/// Phase step `arg f(b) − arg f(a)` wrapped into `(−π, π]`.
fn wrapped_step(a: C64, b: C64) -> f64 {
    let d = (b / a).arg();
    if d <= -PI {
        d + 2.0 * PI
    } else {
        d
    }
}

/// Accumulated phase of `f` over `[ka, kb]`, bisecting wherever a single
/// step turns by more than π/4 so that fast windings are not aliased.
fn phase_increment(f: &impl Fn(f64) -> C64, ka: f64, kb: f64, fa: C64, fb: C64, depth: u32) -> Option<f64> {
    let d = wrapped_step(fa, fb);
    if d.abs() <= MAX_PHASE_STEP {
        return Some(d);
    }
    if depth == 0 {
        return None;
    }
    let km = 0.5 * (ka + kb);
    let fm = f(km);
    Some(phase_increment(f, ka, km, fa, fm, depth - 1)? + phase_increment(f, km, kb, fm, fb, depth - 1)?)
}

/// Winding of `f` around the origin over the closed grid, in units of 2π.
/// `None` when the adaptive refinement runs out of depth.
fn closed_winding(f: impl Fn(f64) -> C64, k: &[f64]) -> Option<f64> {
    let values: Vec<C64> = k.iter().map(|&kj| f(kj)).collect();
    let mut total = 0.0;
    for j in 0..k.len() - 1 {
        total += phase_increment(&f, k[j], k[j + 1], values[j], values[j + 1], MAX_BISECTION_DEPTH)?;
    }
    Some(total / (2.0 * PI))
}

/// Energy winding number.
///
/// Counted on the chiral off-diagonal block `h(k) = t_A + t_B e^{ik}` of the
/// Bloch Hamiltonian, whose product with `h(−k)` is `E_+(k)²`. The phase of
/// `E_+` itself cannot wind for this reciprocal model (see
/// [`energy_phase_winding`]), while `h(k)` winds exactly once in the
/// topological phase.
pub fn winding_number(p: &ChainParams, n_k: usize) -> Result<i32> {
    require_no_onsite(p)?;
    if n_k < 1001 {
        return Err(Error::InvalidInput(format!("winding needs at least 1001 k-points, got {n_k}")));
    }
    let k = k_grid(n_k);
    let min_abs_e = min_abs_energy(p, &k);
    if min_abs_e < GAP_CLOSURE_EPS * p.t0 || classify_phase(p).phase == Phase::Boundary {
        return Err(Error::GapClosure { min_abs_e });
    }
    let c = couplings(p);
    let raw = closed_winding(|kk| c.t_a + c.t_b * C64::from_polar(1.0, kk), &k).ok_or(Error::NonQuantized { raw: f64::NAN })?;
    let nearest = raw.round();
    if (raw - nearest).abs() > QUANTIZATION_TOL {
        return Err(Error::NonQuantized { raw });
    }
    Ok(nearest as i32)
}

/// Winding of `Arg E_+(k)` along the continuous branch, in units of 2π.
/// Zero throughout for this model; kept as a diagnostic.
pub fn energy_phase_winding(p: &ChainParams, n_k: usize) -> Result<f64> {
    let curve = dispersion(p, n_k)?;
    let mut total = 0.0;
    for w in curve.e_plus.windows(2) {
        if w[0].norm() == 0.0 || w[1].norm() == 0.0 {
            return Err(Error::GapClosure { min_abs_e: 0.0 });
        }
        total += wrapped_step(w[0], w[1]);
    }
    Ok(total / (2.0 * PI))
}

fn min_abs_energy(p: &ChainParams, k: &[f64]) -> f64 {
    k.iter().map(|&kj| energy_squared(p, kj).norm().sqrt()).fold(f64::INFINITY, f64::min)
}

/// Classification plus winding and the gap diagnostic on an `n_k` grid.
/// A closed gap or an unresolved winding leaves `winding` empty.
pub fn phase_report(p: &ChainParams, n_k: usize) -> Result<PhaseReport> {
    require_no_onsite(p)?;
    let mut report = classify_phase(p);
    report.min_abs_e_on_grid = Some(min_abs_energy(p, &k_grid(n_k.max(2))));
    report.winding = match winding_number(p, n_k) {
        Ok(w) => Some(w),
        Err(Error::GapClosure { .. }) | Err(Error::NonQuantized { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(report)
}
