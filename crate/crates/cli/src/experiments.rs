//! Subcommands, each an [`Experiment`] looked up by name in an
//! [`ExperimentRegistry`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use dssh_core::dynamics::{adiabatic_edge_coupling, build_liouvillian, evolve_single_excitation, site_state, transfer_period};
use dssh_core::edge::{analyze_edges, diagonalize_chain, find_edge_pair, localization_profile, oscillation_sweep, Sweep};
use dssh_core::linalg::{eigenvalues, spectral_distance};
use dssh_core::model::{build_open_chain, ChainParams, OnSitePotential};
use dssh_core::topology::{classify_phase, dispersion, winding_number, Phase};
use dssh_core::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{linspace, Axes, RunConfig, SweepAxis};
use crate::output::{Cell, Table};
use crate::CliError;

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError>;
}

#[derive(Default)]
pub struct ExperimentRegistry {
    entries: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl ExperimentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every built-in subcommand.
    pub fn builtin() -> Self {
        let mut r = Self::new();
        r.register(Box::new(PhaseDiagram));
        r.register(Box::new(Dispersion));
        r.register(Box::new(Spectrum));
        r.register(Box::new(Oscillation));
        r.register(Box::new(EdgeCoupling));
        r.register(Box::new(Dynamics));
        r.register(Box::new(SelfTest));
        r
    }

    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.entries.insert(e.name(), e);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.values().map(|b| b.as_ref())
    }
}

fn re_im(z: C64) -> [Cell; 2] {
    [Cell::Float(z.re), Cell::Float(z.im)]
}

fn opt_re_im(z: Option<C64>) -> [Cell; 2] {
    z.map_or([Cell::Empty, Cell::Empty], re_im)
}

fn require_plain_chain(p: &ChainParams) -> Result<(), CliError> {
    if p.onsite.is_none() {
        Ok(())
    } else {
        Err(CliError::Numerical(Error::UnsupportedOnsite))
    }
}

struct PhaseDiagram;

impl Experiment for PhaseDiagram {
    fn name(&self) -> &'static str {
        "phase-diagram"
    }

    fn summary(&self) -> &'static str {
        "phase and winding number over a (phi, gamma2) or (gamma1, gamma2) grid"
    }

    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        require_plain_chain(&cfg.params)?;
        if cfg.k_points < 1001 {
            return Err(CliError::Usage("phase-diagram needs --kpoints >= 1001".into()));
        }
        let xs = match cfg.axes {
            Axes::PhiGamma2 => &cfg.phi_grid,
            Axes::Gamma1Gamma2 => &cfg.gamma1_grid,
        };
        let points: Vec<ChainParams> = xs
            .iter()
            .flat_map(|&x| {
                cfg.gamma_grid.iter().map(move |&g2| {
                    let base = cfg.params;
                    match cfg.axes {
                        Axes::PhiGamma2 => ChainParams { phi: x, gamma2: g2, ..base },
                        Axes::Gamma1Gamma2 => ChainParams { gamma1: x, gamma2: g2, ..base },
                    }
                })
            })
            .collect();
        let rows: Vec<Vec<Cell>> = points
            .par_iter()
            .map(|q| {
                let r = classify_phase(q);
                let (winding, flag) = match winding_number(q, cfg.k_points) {
                    Ok(w) => (Cell::from(w), Cell::Empty),
                    Err(e) => (Cell::Empty, Cell::from(e.kind())),
                };
                vec![
                    q.phi.into(),
                    q.gamma1.into(),
                    q.gamma2.into(),
                    r.lhs.into(),
                    r.rhs.into(),
                    r.phase.to_string().into(),
                    winding,
                    flag,
                ]
            })
            .collect();
        let mut t = Table::new(&["phi", "gamma1", "gamma2", "lhs", "rhs", "phase", "winding", "flag"]);
        rows.into_iter().for_each(|r| t.push(r));
        Ok(t)
    }
}

struct Dispersion;

impl Experiment for Dispersion {
    fn name(&self) -> &'static str {
        "dispersion"
    }

    fn summary(&self) -> &'static str {
        "complex bands E_+(k), E_-(k) on a closed k-grid"
    }

    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        let d = dispersion(&cfg.params, cfg.k_points)?;
        let mut t = Table::new(&["k", "re_e_plus", "im_e_plus", "re_e_minus", "im_e_minus"]);
        for j in 0..d.k_grid.len() {
            let [a, b] = re_im(d.e_plus[j]);
            let [c, e] = re_im(d.e_minus[j]);
            t.push(vec![d.k_grid[j].into(), a, b, c, e]);
        }
        Ok(t)
    }
}

struct Spectrum;

impl Experiment for Spectrum {
    fn name(&self) -> &'static str {
        "spectrum"
    }

    fn summary(&self) -> &'static str {
        "all open-chain eigenvalues along the phi grid, edge pair flagged"
    }

    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        let blocks: Vec<Result<Vec<Vec<Cell>>, Error>> = cfg
            .phi_grid
            .par_iter()
            .map(|&phi| {
                let q = cfg.params.with_phi(phi);
                let (h, d) = diagonalize_chain(&q)?;
                let pair = find_edge_pair(&h, &d).ok();
                let mut idx: Vec<usize> = (0..d.dim()).collect();
                idx.sort_by(|&a, &b| {
                    let (x, y) = (d.eigenvalues[a], d.eigenvalues[b]);
                    x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
                });
                Ok(idx
                    .iter()
                    .enumerate()
                    .map(|(rank, &i)| {
                        let edge = match pair {
                            Some(p) if p.plus == i => "plus",
                            Some(p) if p.minus == i => "minus",
                            _ => "",
                        };
                        let [re, im] = re_im(d.eigenvalues[i]);
                        vec![phi.into(), rank.into(), re, im, edge.into()]
                    })
                    .collect())
            })
            .collect();
        let mut t = Table::new(&["phi", "index", "re_e", "im_e", "edge"]);
        for b in blocks {
            b?.into_iter().for_each(|r| t.push(r));
        }
        Ok(t)
    }
}

struct Oscillation;

impl Experiment for Oscillation {
    fn name(&self) -> &'static str {
        "oscillation"
    }

    fn summary(&self) -> &'static str {
        "numerical and analytic edge splitting along phi or N"
    }

    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        let sweep = match cfg.sweep {
            SweepAxis::Phi => Sweep::Phi(cfg.phi_grid.clone()),
            SweepAxis::N => Sweep::N(cfg.n_grid.clone()),
        };
        let rows = oscillation_sweep(&cfg.params, &sweep)?;
        let mut t = Table::new(&[
            "phi",
            "n",
            "re_e_plus",
            "im_e_plus",
            "re_e_minus",
            "im_e_minus",
            "re_delta_e",
            "im_delta_e",
            "re_e_plus_analytic",
            "im_e_plus_analytic",
            "re_delta_e_analytic",
            "im_delta_e_analytic",
            "a_t",
            "theta_t",
            "re_xi_t",
            "im_xi_t",
            "flag",
        ]);
        for r in rows {
            let pair = r.numeric.as_ref().ok();
            let mut row = vec![r.phi.into(), r.n_cells.into()];
            row.extend(opt_re_im(pair.map(|p| p.e_plus)));
            row.extend(opt_re_im(pair.map(|p| p.e_minus)));
            row.extend(opt_re_im(pair.map(|p| p.delta_e())));
            row.extend(opt_re_im(r.analytic.map(|a| a.e_plus)));
            row.extend(opt_re_im(r.analytic.map(|a| a.delta_e)));
            row.push(r.constants.map(|k| k.a_t).into());
            row.push(r.constants.map(|k| k.theta_t).into());
            row.extend(opt_re_im(r.constants.map(|k| k.xi_t)));
            row.push(r.numeric.as_ref().err().map(|e| e.kind()).into());
            t.push(row);
        }
        Ok(t)
    }
}

struct EdgeCoupling;

impl Experiment for EdgeCoupling {
    fn name(&self) -> &'static str {
        "edge-coupling"
    }

    fn summary(&self) -> &'static str {
        "eliminated edge coupling E'_+ against the exact edge eigenvalue E_+ along phi"
    }

    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        require_plain_chain(&cfg.params)?;
        if cfg.params.n_cells < 2 {
            return Err(CliError::Usage("edge-coupling needs --n >= 2".into()));
        }
        let rows: Vec<Vec<Cell>> = cfg
            .phi_grid
            .par_iter()
            .map(|&phi| {
                let q = cfg.params.with_phi(phi);
                let coupling = build_liouvillian(&q).and_then(|m| adiabatic_edge_coupling(&m));
                let exact = analyze_edges(&q).map(|a| a.e_plus);
                let mut row: Vec<Cell> = vec![phi.into()];
                match &coupling {
                    Ok(c) => {
                        row.push(c.delta_g.into());
                        row.push(c.delta_gamma.into());
                        row.extend(re_im(c.e_prime_plus));
                    }
                    Err(_) => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
                }
                row.extend(opt_re_im(exact.as_ref().ok().copied()));
                match (&coupling, &exact) {
                    (Ok(c), Ok(e)) => {
                        let diff = (c.e_prime_plus - e).norm();
                        row.push(diff.into());
                        row.push((diff / e.norm()).into());
                        row.push(Cell::Empty);
                    }
                    (Err(err), _) | (_, Err(err)) => {
                        row.extend([Cell::Empty, Cell::Empty]);
                        row.push(err.kind().into());
                    }
                }
                row
            })
            .collect();
        let mut t = Table::new(&[
            "phi",
            "delta_g",
            "delta_gamma",
            "re_e_prime_plus",
            "im_e_prime_plus",
            "re_e_plus",
            "im_e_plus",
            "abs_diff",
            "rel_diff",
            "flag",
        ]);
        rows.into_iter().for_each(|r| t.push(r));
        Ok(t)
    }
}

struct Dynamics;

impl Experiment for Dynamics {
    fn name(&self) -> &'static str {
        "dynamics"
    }

    fn summary(&self) -> &'static str {
        "one-excitation populations under the bath model, with the edge beat period"
    }

    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        if cfg.params.n_cells < 2 {
            return Err(CliError::Usage("dynamics needs --n >= 2".into()));
        }
        let model = build_liouvillian(&cfg.params)?;
        let dim = model.dim();
        let grid = linspace(0.0, cfg.t_max, cfg.t_count);
        let start = cfg.init_site - 1;
        let traj = evolve_single_excitation(&model, &site_state(dim, start), &grid)?;

        let mut columns: Vec<String> = vec!["t".into()];
        columns.extend((1..=dim).map(|s| format!("p_{s}")));
        columns.extend(["p_excited".to_string(), "p_ground".to_string()]);
        let mut t = Table { columns, ..Table::default() };
        for (k, &time) in grid.iter().enumerate() {
            let mut row: Vec<Cell> = vec![time.into()];
            row.extend(traj.populations[k].iter().map(|&p| Cell::Float(p)));
            row.push(traj.excited[k].into());
            row.push(traj.ground[k].into());
            t.push(row);
        }

        let mirror_site = dim - 1 - start;
        t.note("target_site", (mirror_site + 1).to_string());
        match adiabatic_edge_coupling(&model) {
            Ok(c) => {
                t.note("delta_g", crate::output::format_float(c.delta_g));
                t.note("delta_gamma", crate::output::format_float(c.delta_gamma));
                t.note("predicted_period", crate::output::format_float(PI / c.delta_g.abs()));
            }
            Err(e) => t.note("delta_g", format!("unavailable ({})", e.kind())),
        }
        let fitted = transfer_period(&traj, mirror_site);
        t.note("fitted_period", fitted.map_or("unavailable".into(), crate::output::format_float));
        Ok(t)
    }
}

struct SelfTest;

struct Check {
    name: &'static str,
    tolerance: f64,
    errors: Vec<f64>,
}

impl SelfTest {
    fn random_params(rng: &mut ChaCha8Rng) -> ChainParams {
        ChainParams::new(rng.gen_range(2..=64), rng.gen_range(0.0..PI), rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0))
    }
}

impl Experiment for SelfTest {
    fn name(&self) -> &'static str {
        "selftest"
    }

    fn summary(&self) -> &'static str {
        "randomized property checks of the numerical core"
    }

    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        if cfg.samples == 0 {
            return Err(CliError::Usage("selftest needs --samples >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let draws: Vec<(ChainParams, f64)> =
            (0..cfg.samples).map(|_| (Self::random_params(&mut rng), rng.gen_range(0.0..2.0))).collect();

        let results: Vec<Result<[f64; 4], Error>> = draws
            .par_iter()
            .map(|(p, gon)| {
                let (h, d) = diagonalize_chain(p)?;
                let residual = d.residual_max / h.frobenius_norm();
                let neg: Vec<C64> = d.eigenvalues.iter().map(|z| -z).collect();
                let chiral = spectral_distance(&d.eigenvalues, &neg);
                let mut profile: f64 = 0.0;
                for i in 0..d.dim() {
                    let s: C64 = localization_profile(&d, i, p.n_cells)?.iter().sum();
                    profile = profile.max((s - C64::new(1.0, 0.0)).norm());
                }
                let lossy = eigenvalues(&build_open_chain(&p.with_onsite(OnSitePotential::uniform(*gon))))?;
                let shifted: Vec<C64> = d.eigenvalues.iter().map(|z| z - C64::new(0.0, *gon)).collect();
                let shift = spectral_distance(&shifted, &lossy);
                Ok([residual, chiral, profile, shift])
            })
            .collect();
        let winding: Vec<f64> = draws
            .par_iter()
            .filter_map(|(p, _)| {
                let r = classify_phase(p);
                if (r.lhs - r.rhs).abs() <= 1e-3 {
                    return None;
                }
                let ok = winding_number(p, dssh_core::topology::DEFAULT_K_POINTS)
                    .map(|w| (w == 1) == (r.phase == Phase::Topological))
                    .unwrap_or(false);
                Some(if ok { 0.0 } else { 1.0 })
            })
            .collect();

        let mut checks = vec![
            Check { name: "eigen_residual", tolerance: 1e-10, errors: Vec::new() },
            Check { name: "chiral_symmetry", tolerance: 1e-9, errors: Vec::new() },
            Check { name: "profile_normalization", tolerance: 1e-8, errors: Vec::new() },
            Check { name: "uniform_loss_shift", tolerance: 1e-9, errors: Vec::new() },
        ];
        for r in results {
            let errs = r?;
            for (c, e) in checks.iter_mut().zip(errs) {
                c.errors.push(e);
            }
        }
        checks.push(Check { name: "winding_vs_inequality", tolerance: 0.0, errors: winding });

        let mut t = Table::new(&["check", "samples", "max_error", "tolerance", "status"]);
        let mut failed = 0;
        for c in &checks {
            let worst = c.errors.iter().copied().fold(0.0, f64::max);
            let pass = worst <= c.tolerance;
            failed += usize::from(!pass);
            t.push(vec![c.name.into(), c.errors.len().into(), worst.into(), c.tolerance.into(), if pass { "pass" } else { "fail" }.into()]);
        }
        t.note("failed_checks", failed.to_string());
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_all_subcommands() {
        let r = ExperimentRegistry::builtin();
        assert_eq!(
            r.names(),
            vec!["dispersion", "dynamics", "edge-coupling", "oscillation", "phase-diagram", "selftest", "spectrum"]
        );
        assert!(r.get("spectrum").is_some());
        assert!(r.get("nope").is_none());
        assert!(r.iter().all(|e| !e.summary().is_empty()));
    }
}
