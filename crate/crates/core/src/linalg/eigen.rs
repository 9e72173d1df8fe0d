//! Dense non-Hermitian eigensolver.
//!
//! Pipeline: diagonal balancing, Householder reduction to Hessenberg form,
//! single-shift complex QR with deflation (complex Schur form), then
//! eigenvectors by back-substitution on the triangular factor. Left vectors
//! come either from a second, independent solve of the adjoint problem or,
//! for complex-symmetric input, from `w = conj(v)`. Both routes finish with a
//! biorthonormalization so that `<w_i|v_j> = δ_ij`.
//!
//! Eigenvalues that coincide to working precision (the hybridized edge pair
//! of a long chain, for instance) are moved to the top of the Schur form and
//! their Schur vectors are used as the eigenbasis, so nearly parallel vectors
//! from back-substitution never reach the biorthonormalization step.

use num_complex::Complex64 as C64;

use super::matrix::{inner, norm2, ComplexMatrix};
use super::solve::Lu;
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Largest dimension accepted by [`eig`].
pub const MAX_DIM: usize = 1024;
/// Eigenvalue distance (relative to max(1, ‖H‖_F)) within which adjoint and
/// right eigenvalues may be paired.
pub const PAIRING_RTOL: f64 = 1e-6;
/// Unit-vector overlaps `|<w|v>|` below this signal an exceptional point.
pub const DEFECTIVE_OVERLAP: f64 = 1e-8;

/// How left eigenvectors are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LeftVectors {
    /// Solve `H† w = λ* w` independently and pair by eigenvalue proximity.
    #[default]
    Adjoint,
    /// Use `w = conj(v)`; valid only when `H = Hᵀ`.
    ComplexSymmetric,
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub left: LeftVectors,
    pub balance: bool,
    /// QR sweeps allowed per eigenvalue before giving up.
    pub sweeps_per_eigenvalue: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { left: LeftVectors::Adjoint, balance: true, sweeps_per_eigenvalue: 30 }
    }
}

impl EigenOptions {
    pub fn complex_symmetric() -> Self {
        Self { left: LeftVectors::ComplexSymmetric, ..Self::default() }
    }
}

/// Right and left eigenpairs of a square matrix.
///
/// Columns of `right_vectors` have unit 2-norm. Columns of `left_vectors` are
/// scaled so that `<w_i|v_j> = δ_ij`. `residual_max` is the largest of
/// `‖H v̂ − λ v̂‖` and `‖H† ŵ − λ* ŵ‖` over all pairs, with `v̂, ŵ` the
/// unit-normalized vectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    pub right_vectors: ComplexMatrix,
    pub left_vectors: ComplexMatrix,
    pub residual_max: f64,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right(&self, i: usize) -> Vec<C64> {
        self.right_vectors.column(i)
    }

    pub fn left(&self, i: usize) -> Vec<C64> {
        self.left_vectors.column(i)
    }

    /// Largest `|<w_i|v_j> − δ_ij|`.
    pub fn biorthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let w = self.left(i);
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((inner(&w, &self.right(j)) - target).norm());
            }
        }
        worst
    }

    /// Indices sorted by |λ − reference|, closest first.
    pub fn sorted_by_distance(&self, reference: C64) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&a, &b| {
            (self.eigenvalues[a] - reference).norm().total_cmp(&(self.eigenvalues[b] - reference).norm())
        });
        idx
    }
}

/// Full eigendecomposition with adjoint-problem left vectors.
pub fn eig(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    eig_with(h, &EigenOptions::default())
}

/// Eigenvalues only (Schur form, no vectors).
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<C64>> {
    check_input(h)?;
    let n = h.rows();
    let mut a = h.as_slice().to_vec();
    balance(&mut a, n);
    let mut q = identity(n);
    hessenberg(&mut a, &mut q, n);
    schur(&mut a, &mut q, n, 30)?;
    Ok((0..n).map(|i| a[i * n + i]).collect())
}

pub fn eig_with(h: &ComplexMatrix, opts: &EigenOptions) -> Result<EigenDecomposition> {
    check_input(h)?;
    let n = h.rows();
    let hnorm = h.frobenius_norm();
    let scale = hnorm.max(1.0);

    let (values, right) = right_eigensystem(h, opts)?;

    let (left_raw, pairing) = match opts.left {
        LeftVectors::Adjoint => {
            let (mu, left) = right_eigensystem(&h.adjoint(), opts)?;
            let pairing = pair_by_eigenvalue(&values, &mu, &right, &left, PAIRING_RTOL * scale)?;
            (left, pairing)
        }
        LeftVectors::ComplexSymmetric => {
            let asym = h.max_abs_diff(&h.transpose());
            if asym > 1e-14 * scale {
                return Err(Error::InvalidInput(format!(
                    "complex-symmetric left vectors requested but ‖H − Hᵀ‖_max = {asym:.3e}"
                )));
            }
            let left: Vec<Vec<C64>> = right.iter().map(|v| v.iter().map(|z| z.conj()).collect()).collect();
            (left, (0..n).collect())
        }
    };

    // left_raw[pairing[i]] is the adjoint vector belonging to eigenvalue i.
    let paired: Vec<Vec<C64>> = pairing.iter().map(|&j| left_raw[j].clone()).collect();
    let left = biorthonormalize(&values, &right, paired, PAIRING_RTOL * scale)?;

    let mut residual_max: f64 = 0.0;
    let hadj = h.adjoint();
    for i in 0..n {
        residual_max = residual_max.max(residual(h, values[i], &right[i]));
        let mut w = left[i].clone();
        let wn = norm2(&w);
        w.iter_mut().for_each(|z| *z /= wn);
        residual_max = residual_max.max(residual(&hadj, values[i].conj(), &w));
    }

    Ok(EigenDecomposition {
        eigenvalues: values,
        right_vectors: ComplexMatrix::from_columns(&right),
        left_vectors: ComplexMatrix::from_columns(&left),
        residual_max,
    })
}

/// Distance between two spectra as multisets: the largest gap left after
/// greedily matching each value of `a` to its nearest unused value in `b`.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut ua, mut ub) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

fn check_input(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::InvalidInput(format!("eig needs a square matrix, got {}x{}", h.rows(), h.cols())));
    }
    if h.rows() > MAX_DIM {
        return Err(Error::InvalidInput(format!("dimension {} exceeds {MAX_DIM}", h.rows())));
    }
    if !h.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

fn residual(h: &ComplexMatrix, lambda: C64, v: &[C64]) -> f64 {
    let hv = h.matvec(v);
    hv.iter().zip(v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt()
}

fn identity(n: usize) -> Vec<C64> {
    let mut q = vec![ZERO; n * n];
    for i in 0..n {
        q[i * n + i] = ONE;
    }
    q
}

fn l1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity `A ← D⁻¹ A D` with power-of-two entries; returns `D`.
fn balance(a: &mut [C64], n: usize) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let mut d = vec![1.0; n];
    loop {
        let mut converged = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += l1(a[j * n + i]);
                    r += l1(a[i * n + j]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[i * n + j] /= f;
                    a[j * n + i] *= f;
                }
            }
        }
        if converged {
            return d;
        }
    }
}

/// Householder reduction to upper Hessenberg form, accumulating into `q`.
fn hessenberg(a: &mut [C64], q: &mut [C64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let alpha = (k + 1..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>();
        if alpha == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        v.iter_mut().for_each(|z| *z = ZERO);
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] += phase * alpha;
        let vn = norm2(&v[k + 1..]);
        for z in &mut v[k + 1..] {
            *z /= vn;
        }
        // A ← (I − 2vv†) A
        for j in k..n {
            let s: C64 = (k + 1..n).map(|i| v[i].conj() * a[i * n + j]).sum();
            for i in k + 1..n {
                a[i * n + j] -= 2.0 * v[i] * s;
            }
        }
        // A ← A (I − 2vv†), Q ← Q (I − 2vv†)
        for m in [&mut *a, &mut *q] {
            for i in 0..n {
                let s: C64 = (k + 1..n).map(|j| m[i * n + j] * v[j]).sum();
                for j in k + 1..n {
                    m[i * n + j] -= 2.0 * s * v[j].conj();
                }
            }
        }
        for i in k + 2..n {
            a[i * n + k] = ZERO;
        }
    }
}

/// Rotation `G = [[c, s], [−s̄, c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, ONE);
    }
    let an = a.norm();
    let rho = an.hypot(b.norm());
    (an / rho, (a / an) * b.conj() / rho)
}

/// Rows `k, k+1` ← G · rows, for columns in `cols`.
fn rotate_rows(m: &mut [C64], n: usize, k: usize, c: f64, s: C64, cols: std::ops::Range<usize>) {
    for j in cols {
        let x = m[k * n + j];
        let y = m[(k + 1) * n + j];
        m[k * n + j] = c * x + s * y;
        m[(k + 1) * n + j] = -s.conj() * x + c * y;
    }
}

/// Columns `k, k+1` ← columns · G†, for rows in `rows`.
fn rotate_cols(m: &mut [C64], n: usize, k: usize, c: f64, s: C64, rows: std::ops::Range<usize>) {
    for i in rows {
        let x = m[i * n + k];
        let y = m[i * n + k + 1];
        m[i * n + k] = c * x + s.conj() * y;
        m[i * n + k + 1] = -s * x + c * y;
    }
}

/// Reduces Hessenberg `h` to upper-triangular Schur form `T = Q† H Q`.
fn schur(h: &mut [C64], q: &mut [C64], n: usize, sweeps_per_eigenvalue: usize) -> Result<()> {
    if n <= 1 {
        return Ok(());
    }
    let hnorm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let budget = sweeps_per_eigenvalue * n;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(n);

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1) * n + l - 1].norm() + h[l * n + l].norm();
            if s == 0.0 {
                s = hnorm;
            }
            if h[l * n + l - 1].norm() <= EPS * s {
                h[l * n + l - 1] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        if total >= budget {
            return Err(Error::NonConvergence { iterations: total, dim: n });
        }
        its += 1;
        total += 1;

        let a = h[(hi - 1) * n + hi - 1];
        let b = h[(hi - 1) * n + hi];
        let c = h[hi * n + hi - 1];
        let d = h[hi * n + hi];
        let shift = if its % 10 == 0 {
            // Exceptional shift to break cycles.
            let below = if hi >= 2 { h[(hi - 1) * n + hi - 2].re.abs() } else { 0.0 };
            d + C64::new(c.re.abs() + below, 0.0)
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };

        for i in l..=hi {
            h[i * n + i] -= shift;
        }
        rots.clear();
        for k in l..hi {
            let (cr, sr) = givens(h[k * n + k], h[(k + 1) * n + k]);
            rotate_rows(h, n, k, cr, sr, k..n);
            h[(k + 1) * n + k] = ZERO;
            rots.push((cr, sr));
        }
        for (k, &(cr, sr)) in (l..hi).zip(&rots) {
            rotate_cols(h, n, k, cr, sr, 0..(k + 2).min(hi + 1));
            rotate_cols(q, n, k, cr, sr, 0..n);
        }
        for i in l..=hi {
            h[i * n + i] += shift;
        }
    }
    // Below-diagonal entries are zero by construction; clear roundoff.
    for i in 1..n {
        for j in 0..i {
            h[i * n + j] = ZERO;
        }
    }
    Ok(())
}

/// Swaps diagonal entries `p` and `p+1` of triangular `t`, updating `q`.
fn swap_adjacent(t: &mut [C64], q: &mut [C64], n: usize, p: usize) {
    let a = t[p * n + p];
    let b = t[p * n + p + 1];
    let d = t[(p + 1) * n + p + 1];
    let (c, s) = givens(b, d - a);
    if c == 1.0 && s == ZERO {
        return;
    }
    rotate_rows(t, n, p, c, s, p..n);
    rotate_cols(t, n, p, c, s, 0..p + 2);
    rotate_cols(q, n, p, c, s, 0..n);
    t[(p + 1) * n + p] = ZERO;
    t[p * n + p] = d;
    t[(p + 1) * n + p + 1] = a;
}

/// Eigenvector of triangular `t` for diagonal position `k`, in the Schur basis.
fn triangular_eigenvector(t: &[C64], n: usize, k: usize, smin: f64) -> Vec<C64> {
    const BIG: f64 = 1e150;
    let mut y = vec![ZERO; n];
    y[k] = ONE;
    let lambda = t[k * n + k];
    for i in (0..k).rev() {
        let s: C64 = (i + 1..=k).map(|j| t[i * n + j] * y[j]).sum();
        let mut den = t[i * n + i] - lambda;
        if den.norm() < smin {
            den = C64::new(smin, 0.0);
        }
        y[i] = -s / den;
        if y[i].norm() > BIG {
            let f = 1.0 / y[i].norm();
            y[i..=k].iter_mut().for_each(|z| *z *= f);
        }
    }
    y
}

fn apply_q(q: &[C64], n: usize, y: &[C64], upto: usize) -> Vec<C64> {
    (0..n).map(|i| (0..=upto).map(|j| q[i * n + j] * y[j]).sum()).collect()
}

/// Groups indices whose values lie within `tol` of each other (transitively).
fn clusters(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Eigenvalues and unit right eigenvectors of `h`.
fn right_eigensystem(h: &ComplexMatrix, opts: &EigenOptions) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let n = h.rows();
    let mut t = h.as_slice().to_vec();
    let d = if opts.balance { balance(&mut t, n) } else { vec![1.0; n] };
    let mut q = identity(n);
    hessenberg(&mut t, &mut q, n);
    schur(&mut t, &mut q, n, opts.sweeps_per_eigenvalue)?;

    let tnorm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let smin = (EPS * tnorm).max(f64::MIN_POSITIVE);
    let mut values: Vec<C64> = (0..n).map(|i| t[i * n + i]).collect();
    let mut vecs: Vec<Vec<C64>> = vec![Vec::new(); n];

    let groups = clusters(&values, 1e4 * EPS * tnorm.max(f64::MIN_POSITIVE));
    for g in groups.iter().filter(|g| g.len() == 1) {
        let k = g[0];
        let y = triangular_eigenvector(&t, n, k, smin);
        vecs[k] = apply_q(&q, n, &y, k);
    }

    // Numerically coincident eigenvalues: bring each cluster to the top of
    // the Schur form, where its leading Schur vectors span the eigenspace.
    let mut pos: Vec<usize> = (0..n).collect(); // pos[original] = current diagonal slot
    let mut at: Vec<usize> = (0..n).collect(); // at[slot] = original index
    for g in groups.iter().filter(|g| g.len() > 1) {
        let mut members = g.clone();
        members.sort_by_key(|&m| pos[m]);
        for (target, &m) in members.iter().enumerate() {
            let mut p = pos[m];
            while p > target {
                swap_adjacent(&mut t, &mut q, n, p - 1);
                let (u, w) = (at[p - 1], at[p]);
                at.swap(p - 1, p);
                pos[u] = p;
                pos[w] = p - 1;
                p -= 1;
            }
        }
        let k = members.len();
        let off: f64 = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).map(|(i, j)| t[i * n + j].norm_sqr()).sum::<f64>().sqrt();
        let semisimple = off <= 1e-8 * tnorm;
        for slot in 0..k {
            let m = at[slot];
            values[m] = t[slot * n + slot];
            vecs[m] = if semisimple {
                (0..n).map(|i| q[i * n + slot]).collect()
            } else {
                let y = triangular_eigenvector(&t, n, slot, smin);
                apply_q(&q, n, &y, slot)
            };
        }
    }

    for v in &mut vecs {
        for (z, &di) in v.iter_mut().zip(&d) {
            *z *= di;
        }
        let nv = norm2(v);
        v.iter_mut().for_each(|z| *z /= nv);
    }
    Ok((values, vecs))
}

/// Greedy pairing of right eigenvalues `lambda` with adjoint eigenvalues
/// `mu` (compared as `conj(mu)`); ties broken by vector overlap.
fn pair_by_eigenvalue(
    lambda: &[C64],
    mu: &[C64],
    right: &[Vec<C64>],
    left: &[Vec<C64>],
    tol: f64,
) -> Result<Vec<usize>> {
    let n = lambda.len();
    let tie = 1e-12 * tol / PAIRING_RTOL;
    let mut candidates: Vec<(f64, f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let dist = (mu[j].conj() - lambda[i]).norm();
            if dist <= tol {
                let overlap = inner(&left[j], &right[i]).norm();
                candidates.push((dist, overlap, i, j));
            }
        }
    }
    // Bucket distances at the tie resolution so near-equal distances fall
    // through to the overlap comparison.
    candidates.sort_by(|a, b| {
        let (ba, bb) = ((a.0 / tie).floor(), (b.0 / tie).floor());
        ba.total_cmp(&bb).then(b.1.total_cmp(&a.1))
    });
    let mut assigned = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for &(_, _, i, j) in &candidates {
        if assigned[i] == usize::MAX && !used[j] {
            assigned[i] = j;
            used[j] = true;
        }
    }
    for i in 0..n {
        if assigned[i] == usize::MAX {
            let distance = mu.iter().map(|m| (m.conj() - lambda[i]).norm()).fold(f64::INFINITY, f64::min);
            return Err(Error::PairingMismatch { index: i, distance });
        }
    }
    Ok(assigned)
}

/// Rescales/mixes left vectors so that `<w_i|v_j> = δ_ij`. Eigenvalues
/// closer than `cluster_tol` are treated as one block and given the dual
/// basis of their right vectors.
fn biorthonormalize(values: &[C64], right: &[Vec<C64>], left: Vec<Vec<C64>>, cluster_tol: f64) -> Result<Vec<Vec<C64>>> {
    let mut out = left.clone();
    for g in clusters(values, cluster_tol) {
        if g.len() == 1 {
            let i = g[0];
            let mut u = left[i].clone();
            let un = norm2(&u);
            u.iter_mut().for_each(|z| *z /= un);
            let s = inner(&u, &right[i]);
            if s.norm() < DEFECTIVE_OVERLAP {
                return Err(Error::DefectivePairing { index: i, overlap: s.norm() });
            }
            let f = s.conj();
            out[i] = u.iter().map(|z| z / f).collect();
            continue;
        }
        let k = g.len();
        let units: Vec<Vec<C64>> = g
            .iter()
            .map(|&a| {
                let un = norm2(&left[a]);
                left[a].iter().map(|z| z / un).collect()
            })
            .collect();
        let s = ComplexMatrix::from_fn(k, k, |a, b| inner(&units[a], &right[g[b]]));
        let smax = s.max_abs();
        let lu = Lu::factor(&s).map_err(|_| Error::DefectivePairing { index: g[0], overlap: 0.0 })?;
        if lu.min_pivot() < DEFECTIVE_OVERLAP * smax.max(1.0) {
            return Err(Error::DefectivePairing { index: g[0], overlap: lu.min_pivot() });
        }
        let sinv = lu.inverse();
        for (b, &gb) in g.iter().enumerate() {
            let dim = right[gb].len();
            let mut w = vec![ZERO; dim];
            for (a, ua) in units.iter().enumerate() {
                let x = sinv[(b, a)].conj();
                for (wi, ui) in w.iter_mut().zip(ua) {
                    *wi += ui * x;
                }
            }
            out[gb] = w;
        }
    }
    Ok(out)
}
