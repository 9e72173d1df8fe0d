//! Command-line front end for the dissipatively coupled SSH chain.
//!
//! Every subcommand is an [`experiments::Experiment`] registered by name.
//! Parameters come from built-in defaults, an optional `key = value` config
//! file and command-line flags, in increasing order of precedence.

pub mod config;
pub mod experiments;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

use config::{read_config_file, resolve, RunConfig};
use experiments::ExperimentRegistry;
use output::write_table;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] dssh_core::Error),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{0} self-test check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) | CliError::ChecksFailed(_) => 2,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dssh", version, about = "Tables for dissipatively coupled SSH chains")]
pub struct Cli {
    /// Subcommand: phase-diagram, dispersion, spectrum, oscillation,
    /// edge-coupling, dynamics or selftest.
    pub command: String,
    /// Number of unit cells.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub t0: Option<String>,
    /// Angle, plain radians or with a `pi` suffix (e.g. 0.4pi).
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long)]
    pub gamma1: Option<String>,
    #[arg(long)]
    pub gamma2: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// none, uniform:<g>, staggered:<g> or endpoints:<g>.
    #[arg(long)]
    pub onsite: Option<String>,
    #[arg(long)]
    pub kpoints: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// start:stop:count.
    #[arg(long = "phi-grid", allow_hyphen_values = true)]
    pub phi_grid: Option<String>,
    #[arg(long = "gamma-grid")]
    pub gamma_grid: Option<String>,
    #[arg(long = "gamma1-grid")]
    pub gamma1_grid: Option<String>,
    /// a..b or a comma-separated list.
    #[arg(long = "n-grid")]
    pub n_grid: Option<String>,
    /// phi or n.
    #[arg(long)]
    pub sweep: Option<String>,
    /// phi-gamma2 or gamma1-gamma2.
    #[arg(long)]
    pub axes: Option<String>,
    #[arg(long = "t-max")]
    pub t_max: Option<String>,
    #[arg(long = "t-count")]
    pub t_count: Option<String>,
    /// 1-based site of the initial excitation.
    #[arg(long = "init-site")]
    pub init_site: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Cli {
    fn flag_map(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("n", &self.n),
            ("t0", &self.t0),
            ("phi", &self.phi),
            ("gamma1", &self.gamma1),
            ("gamma2", &self.gamma2),
            ("tau", &self.tau),
            ("omega", &self.omega),
            ("onsite", &self.onsite),
            ("kpoints", &self.kpoints),
            ("format", &self.format),
            ("phi-grid", &self.phi_grid),
            ("gamma-grid", &self.gamma_grid),
            ("gamma1-grid", &self.gamma1_grid),
            ("n-grid", &self.n_grid),
            ("sweep", &self.sweep),
            ("axes", &self.axes),
            ("t-max", &self.t_max),
            ("t-count", &self.t_count),
            ("init-site", &self.init_site),
            ("seed", &self.seed),
            ("samples", &self.samples),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            if let CliError::Numerical(inner) = &e {
                eprintln!("error: {}", inner.kind());
            }
            eprintln!("dssh: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let registry = ExperimentRegistry::builtin();
    let experiment = registry.get(&cli.command).ok_or_else(|| {
        CliError::Usage(format!("unknown command `{}`; expected one of: {}", cli.command, registry.names().join(", ")))
    })?;
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let cfg = RunConfig::from_map(experiment.name(), resolve(&file, &cli.flag_map()), cli.out.clone())?;
    let table = experiment.run(&cfg)?;

    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_table(&mut w, cfg.format, experiment.name(), &cfg.resolved, &table)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_table(&mut w, cfg.format, experiment.name(), &cfg.resolved, &table)?;
            w.flush()?;
        }
    }

    let failed = table
        .notes
        .iter()
        .find(|(k, _)| k == "failed_checks")
        .and_then(|(_, v)| v.parse::<usize>().ok())
        .unwrap_or(0);
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
