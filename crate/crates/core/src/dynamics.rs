//! Open-system dynamics of the chain coupled to shared baths.
//!
//! Neighbouring qubits share a bath of rate τ, giving the collective jump
//! operators `√τ (a_i + b_i)` and `√τ (a_{i+1} + b_i)`. All jumps lower the
//! excitation number, so the one-excitation block evolves on its own under
//! the conditional Hamiltonian `H_nh = H_T − (i/2) Σ L†L` and the jumps only
//! feed the ground state.
//!
//! The middle sites `(b_1, a_2, b_2, …, a_N)` can be eliminated to leave an
//! effective coupling between the end sites `a_1` and `b_N`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{evolve, norm2, ComplexMatrix, Lu};
use crate::model::{build_open_chain, ChainParams};

/// A collective jump operator `√rate · Σ_{s ∈ sites} c_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpOperator {
    pub sites: Vec<usize>,
    pub rate: f64,
}

impl JumpOperator {
    /// Amplitude vector of `L†|0⟩` in the one-excitation basis.
    pub fn amplitudes(&self, dim: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for &s in &self.sites {
            v[s] += C64::new(self.rate.sqrt(), 0.0);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct LiouvillianModel {
    pub params: ChainParams,
    /// Coherent one-excitation Hamiltonian (real couplings t̃_A, t̃_B).
    pub h_t_block: ComplexMatrix,
    pub jump_ops: Vec<JumpOperator>,
    /// Conditional Hamiltonian restricted to the middle sites.
    pub m: ComplexMatrix,
    /// Half the jump matrix `Σ L†L` restricted to the middle sites.
    pub m_prime: Vec<Vec<f64>>,
    pub g: Vec<C64>,
    pub v: Vec<C64>,
}

impl LiouvillianModel {
    pub fn dim(&self) -> usize {
        self.h_t_block.rows()
    }
}

/// Effective edge–edge coupling after eliminating the middle sites.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeCoupling {
    pub delta_g: f64,
    pub delta_gamma: f64,
    pub e_prime_plus: C64,
    pub e_prime_minus: C64,
    /// `Gᵀ M⁻¹ V` with the middle block exactly as stored (no reference shift).
    pub unshifted_overlap: C64,
}

pub fn build_liouvillian(p: &ChainParams) -> Result<LiouvillianModel> {
    p.validate()?;
    let n = p.n_cells;
    if n < 2 {
        return Err(Error::InvalidParams("the bath model needs N >= 2".into()));
    }
    let dim = 2 * n;
    let h_t_block = build_open_chain(&p.with_gamma(0.0, 0.0));

    let mut jump_ops = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        jump_ops.push(JumpOperator { sites: vec![2 * i, 2 * i + 1], rate: p.tau });
        if i + 1 < n {
            jump_ops.push(JumpOperator { sites: vec![2 * i + 2, 2 * i + 1], rate: p.tau });
        }
    }

    let model = LiouvillianModel {
        params: *p,
        h_t_block,
        jump_ops,
        m: ComplexMatrix::zeros(1, 1),
        m_prime: Vec::new(),
        g: Vec::new(),
        v: Vec::new(),
    };
    let h_nh = conditional_hamiltonian(&model);
    let middle = 1..dim - 1;
    let k = dim - 2;
    let m = ComplexMatrix::from_fn(k, k, |i, j| h_nh[(i + 1, j + 1)]);
    let jump = jump_matrix(&model);
    let m_prime = (0..k).map(|i| (0..k).map(|j| 0.5 * jump[(i + 1, j + 1)].re).collect()).collect();
    let g = middle.clone().map(|j| h_nh[(0, j)]).collect();
    let v = middle.map(|j| h_nh[(dim - 1, j)]).collect();
    Ok(LiouvillianModel { m, m_prime, g, v, ..model })
}

/// `Σ_k L_k† L_k` in the one-excitation sector.
pub fn jump_matrix(model: &LiouvillianModel) -> ComplexMatrix {
    let dim = model.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for op in &model.jump_ops {
        let a = op.amplitudes(dim);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += a[i] * a[j].conj();
            }
        }
    }
    out
}

/// `H_nh = H_T − (i/2) Σ L†L` on the one-excitation sector.
pub fn conditional_hamiltonian(model: &LiouvillianModel) -> ComplexMatrix {
    model.h_t_block.sub(&jump_matrix(model).scale(C64::new(0.0, 0.5)))
}

/// Eliminates the middle sites at the reference energy `−iτ`, their common
/// bath-induced shift: `κ = −Gᵀ (M + iτ)⁻¹ V`, `E′_± = ±κ`.
pub fn adiabatic_edge_coupling(model: &LiouvillianModel) -> Result<EdgeCoupling> {
    let tau = model.params.tau;
    let singular = |e: Error| match e {
        Error::SingularMatrix { pivot } => Error::SingularMiddleBlock { pivot },
        other => other,
    };
    let shifted = model.m.shift_diagonal(C64::new(0.0, tau));
    let x = Lu::factor(&shifted).map_err(singular)?.solve(&model.v);
    let kappa = -model.g.iter().zip(&x).map(|(g, x)| g * x).sum::<C64>();
    let unshifted_overlap = match Lu::factor(&model.m) {
        Ok(lu) => model.g.iter().zip(lu.solve(&model.v)).map(|(g, x)| g * x).sum(),
        Err(_) => C64::new(f64::NAN, f64::NAN),
    };
    let delta_g = kappa.re;
    let delta_gamma = -kappa.im;
    let e = C64::new(delta_g, -delta_gamma);
    Ok(EdgeCoupling { delta_g, delta_gamma, e_prime_plus: e, e_prime_minus: -e, unshifted_overlap })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<C64>>,
    pub populations: Vec<Vec<f64>>,
    /// Total excited population `‖ψ(t)‖²`.
    pub excited: Vec<f64>,
    pub ground: Vec<f64>,
}

/// Evolves a one-excitation state under the conditional Hamiltonian.
pub fn evolve_single_excitation(model: &LiouvillianModel, psi0: &[C64], t_grid: &[f64]) -> Result<Trajectory> {
    if psi0.len() != model.dim() {
        return Err(Error::InvalidInput(format!("state has length {}, chain has {} sites", psi0.len(), model.dim())));
    }
    if (norm2(psi0) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("initial state must be normalized, norm = {}", norm2(psi0))));
    }
    let h = conditional_hamiltonian(model);
    let amplitudes = evolve(&h, psi0, t_grid)?;
    let populations: Vec<Vec<f64>> = amplitudes.iter().map(|a| a.iter().map(|z| z.norm_sqr()).collect()).collect();
    let excited: Vec<f64> = populations.iter().map(|p| p.iter().sum()).collect();
    let ground = excited.iter().map(|e| 1.0 - e).collect();
    Ok(Trajectory { times: t_grid.to_vec(), amplitudes, populations, excited, ground })
}

/// State with the excitation on a single site.
pub fn site_state(dim: usize, site: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[site] = C64::new(1.0, 0.0);
    v
}

/// Edge-to-edge beat period estimated as twice the time at which the
/// population of `site` peaks. The grid should cover less than one period.
pub fn transfer_period(traj: &Trajectory, site: usize) -> Option<f64> {
    let pop: Vec<f64> = traj.populations.iter().map(|p| p[site]).collect();
    let (imax, _) = pop.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if imax == 0 {
        return None;
    }
    let t = &traj.times;
    let peak = if imax + 1 < pop.len() {
        // Parabola through the three samples around the peak.
        let (t0, t1, t2) = (t[imax - 1], t[imax], t[imax + 1]);
        let (y0, y1, y2) = (pop[imax - 1], pop[imax], pop[imax + 1]);
        let den = (t0 - t1) * (t0 - t2) * (t1 - t2);
        let a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / den;
        let b = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / den;
        if a < 0.0 {
            -b / (2.0 * a)
        } else {
            t1
        }
    } else {
        t[imax]
    };
    Some(2.0 * peak)
}
