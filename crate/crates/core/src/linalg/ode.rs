//! Adaptive Dormand–Prince 5(4) integration of complex linear and nonlinear
//! systems `y' = f(t, y)`.

use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Debug)]
pub struct OdeOptions {
    /// Allowed local error per unit time, relative to the solution scale.
    pub tol_per_unit_time: f64,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol_per_unit_time: 1e-9, max_steps: 50_000_000 }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("time grid is empty".into()));
    }
    if t_grid[0] != 0.0 {
        return Err(Error::InvalidInput(format!("time grid must start at 0, got {}", t_grid[0])));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Integrates `y' = f(t, y)` and returns `y` at every grid time.
///
/// `f(t, y, dy)` writes the derivative into `dy`. Steps are clipped so that
/// every grid time is hit exactly.
pub fn integrate<F>(mut f: F, y0: &[C64], t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    check_grid(t_grid)?;
    let dim = y0.len();
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y0.to_vec());
    if t_grid.len() == 1 {
        return Ok(out);
    }
    let span = t_grid[t_grid.len() - 1];
    let h_min = 1e-12 * span;
    let floor = 1e-12 * max_abs(y0).max(f64::MIN_POSITIVE);

    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); dim]; 7];
    let mut stage = vec![C64::new(0.0, 0.0); dim];
    let mut y_new = vec![C64::new(0.0, 0.0); dim];
    f(t, &y, &mut k[0]);

    let dnorm = max_abs(&k[0]);
    let mut h = if dnorm > 0.0 { (0.01 * max_abs(&y).max(floor) / dnorm).min(span) } else { span };
    h = h.max(h_min);

    let mut steps = 0usize;
    for &target in &t_grid[1..] {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepUnderflow { time: t, step: h });
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };

            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += kj[i] * A[s][j];
                    }
                    stage[i] = y[i] + acc * step;
                }
                f(t + C[s] * step, &stage, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }

            let mut err: f64 = 0.0;
            for i in 0..dim {
                let mut e = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    e += kj[i] * E[j];
                }
                err = err.max((e * step).norm());
            }
            let scale = max_abs(&y).max(max_abs(&y_new)).max(floor);
            let allowed = opts.tol_per_unit_time * step * scale;
            let ratio = if allowed > 0.0 { err / allowed } else { 0.0 };

            if ratio <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                // First-same-as-last: the final stage is f(t_new, y_new).
                k.swap(0, 6);
                let grow = if ratio > 0.0 { (0.9 * ratio.powf(-0.25)).min(5.0) } else { 5.0 };
                // A step clipped to a grid time says little about the
                // natural step size, so only let it shrink h.
                if !last || grow < 1.0 {
                    h = step * grow;
                }
            } else {
                let shrink = (0.9 * ratio.powf(-0.25)).max(0.2);
                h = step * shrink;
                if h < h_min {
                    return Err(Error::StepUnderflow { time: t, step: h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// `ψ(t) = exp(−iHt) ψ(0)` at each grid time.
pub fn evolve(h: &ComplexMatrix, psi0: &[C64], t_grid: &[f64]) -> Result<Vec<Vec<C64>>> {
    evolve_with(h, psi0, t_grid, &OdeOptions::default())
}

pub fn evolve_with(h: &ComplexMatrix, psi0: &[C64], t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<C64>>> {
    if !h.is_square() || h.rows() != psi0.len() {
        return Err(Error::InvalidInput(format!(
            "evolve: matrix is {}x{}, state has length {}",
            h.rows(),
            h.cols(),
            psi0.len()
        )));
    }
    let minus_i = C64::new(0.0, -1.0);
    integrate(
        |_, y, dy| {
            h.matvec_into(y, dy);
            dy.iter_mut().for_each(|z| *z *= minus_i);
        },
        psi0,
        t_grid,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::norm2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = ComplexMatrix::zeros(3, 3);
        let psi = vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)];
        let out = evolve(&h, &psi, &[0.0, 1.0, 10.0]).unwrap();
        assert!(out.iter().all(|v| v == &psi));
    }

    #[test]
    fn pure_decay() {
        let g = 0.3;
        let h = ComplexMatrix::from_diagonal(&[c(0.0, -g), c(0.0, -g)]);
        let psi = vec![c(1.0 / 2f64.sqrt(), 0.0), c(0.0, 1.0 / 2f64.sqrt())];
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let out = evolve(&h, &psi, &grid).unwrap();
        for (t, v) in grid.iter().zip(&out) {
            assert!((norm2(v) - (-g * t).exp()).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn rabi_oscillation_matches_closed_form() {
        let t0 = 0.7;
        let h = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(t0, 0.0)], vec![c(t0, 0.0), c(0.0, 0.0)]]).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.37).collect();
        let out = evolve(&h, &[c(1.0, 0.0), c(0.0, 0.0)], &grid).unwrap();
        for (t, v) in grid.iter().zip(&out) {
            // exp(-i t0 σx t)|0> = cos(t0 t)|0> − i sin(t0 t)|1>
            assert!((v[0] - c((t0 * t).cos(), 0.0)).norm() < 1e-8);
            assert!((v[1] - c(0.0, -(t0 * t).sin())).norm() < 1e-8);
        }
    }

    #[test]
    fn grid_validation() {
        let h = ComplexMatrix::identity(1);
        let psi = [c(1.0, 0.0)];
        assert!(evolve(&h, &psi, &[]).is_err());
        assert!(evolve(&h, &psi, &[0.5, 1.0]).is_err());
        assert!(evolve(&h, &psi, &[0.0, 1.0, 1.0]).is_err());
        assert_eq!(evolve(&h, &psi, &[0.0]).unwrap().len(), 1);
    }

    #[test]
    fn stiff_problem_underflows() {
        // A step cap of a handful forces the guard to trip.
        let opts = OdeOptions { max_steps: 3, ..OdeOptions::default() };
        let h = ComplexMatrix::from_diagonal(&[c(1e6, 0.0)]);
        let r = evolve_with(&h, &[c(1.0, 0.0)], &[0.0, 100.0], &opts);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }
}
