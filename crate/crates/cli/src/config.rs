//! Run configuration: defaults, config file, command-line flags.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dssh_core::model::{ChainParams, OnSitePotential};

use crate::CliError;

/// Every recognised key with its default. Config files and flags use the
/// same names.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("axes", "phi-gamma2"),
    ("format", "csv"),
    ("gamma-grid", "0:3:31"),
    ("gamma1", "0"),
    ("gamma1-grid", "0:3:31"),
    ("gamma2", "0"),
    ("init-site", "1"),
    ("kpoints", "4001"),
    ("n", "20"),
    ("n-grid", "10..40"),
    ("omega", "0"),
    ("onsite", "none"),
    ("phi", "0.4pi"),
    ("phi-grid", "0:0.49pi:50"),
    ("samples", "100"),
    ("seed", "0"),
    ("sweep", "phi"),
    ("t-count", "501"),
    ("t-max", "50"),
    ("t0", "1"),
    ("tau", "0"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Phi,
    N,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axes {
    PhiGamma2,
    Gamma1Gamma2,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub params: ChainParams,
    pub phi_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub gamma1_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub k_points: usize,
    pub sweep: SweepAxis,
    pub axes: Axes,
    pub t_max: f64,
    pub t_count: usize,
    /// 1-based site index of the initial excitation.
    pub init_site: usize,
    pub seed: u64,
    pub samples: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Final key/value strings after precedence, as echoed in output headers.
    pub resolved: BTreeMap<String, String>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses an angle: `0.4pi`, `pi`, `-0.25pi` or plain radians.
pub fn parse_angle(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let stripped = t.strip_suffix("pi").or_else(|| t.strip_suffix('π'));
    let value = match stripped {
        Some(head) => {
            let head = head.trim().trim_end_matches('*');
            let factor = match head {
                "" | "+" => 1.0,
                "-" => -1.0,
                h => h.parse::<f64>().map_err(|_| usage(format!("invalid angle `{s}`")))?,
            };
            factor * PI
        }
        None => t.parse::<f64>().map_err(|_| usage(format!("invalid angle `{s}`")))?,
    };
    if !value.is_finite() {
        return Err(usage(format!("angle `{s}` is not finite")));
    }
    Ok(value)
}

fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| usage(format!("--{key}: `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(usage(format!("--{key}: `{s}` is not finite")));
    }
    Ok(v)
}

fn parse_usize(key: &str, s: &str) -> Result<usize, CliError> {
    s.trim().parse().map_err(|_| usage(format!("--{key}: `{s}` is not a non-negative integer")))
}

/// `start:stop:count`, inclusive of both ends.
pub fn parse_grid(key: &str, s: &str, angles: bool) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--{key}: expected start:stop:count, got `{s}`")));
    }
    let num = |x: &str| if angles { parse_angle(x) } else { parse_f64(key, x) };
    let (start, stop) = (num(parts[0])?, num(parts[1])?);
    let count = parse_usize(key, parts[2])?;
    if count < 2 {
        return Err(usage(format!("--{key}: a sweep needs at least 2 points")));
    }
    Ok(linspace(start, stop, count))
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let m = (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { stop } else { start + (stop - start) * i as f64 / m })
        .collect()
}

/// `10,20,30` or the inclusive range `10..40`.
pub fn parse_n_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let s = s.trim();
    let grid: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_usize("n-grid", a)?, parse_usize("n-grid", b)?);
        if b < a {
            return Err(usage(format!("--n-grid: empty range `{s}`")));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|x| parse_usize("n-grid", x)).collect::<Result<_, _>>()?
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(usage("--n-grid: cell counts must be >= 1"));
    }
    Ok(grid)
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = normalize_key(k);
        if !is_known_key(&key) {
            return Err(usage(format!("config line {}: unknown key `{}`", lineno + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('_', "-").to_ascii_lowercase()
}

pub fn is_known_key(k: &str) -> bool {
    DEFAULTS.iter().any(|(d, _)| *d == k)
}

/// Defaults, overlaid by the config file, overlaid by flags.
pub fn resolve(file: &BTreeMap<String, String>, flags: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    let mut map: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    map.extend(file.iter().map(|(k, v)| (k.clone(), v.clone())));
    map.extend(flags.iter().map(|(k, v)| (k.clone(), v.clone())));
    map
}

impl RunConfig {
    pub fn from_map(command: &str, map: BTreeMap<String, String>, out: Option<PathBuf>) -> Result<Self, CliError> {
        let get = |k: &str| map.get(k).map(String::as_str).unwrap_or("");
        let onsite: OnSitePotential = get("onsite").parse().map_err(|e: dssh_core::Error| usage(format!("--onsite: {e}")))?;
        let params = ChainParams {
            n_cells: parse_usize("n", get("n"))?,
            t0: parse_f64("t0", get("t0"))?,
            phi: parse_angle(get("phi"))?,
            gamma1: parse_f64("gamma1", get("gamma1"))?,
            gamma2: parse_f64("gamma2", get("gamma2"))?,
            tau: parse_f64("tau", get("tau"))?,
            omega: parse_f64("omega", get("omega"))?,
            onsite,
        };
        params.validate().map_err(|e| usage(e.to_string()))?;
        let format = match get("format") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            f => return Err(usage(format!("--format: expected csv or json, got `{f}`"))),
        };
        let sweep = match get("sweep") {
            "phi" => SweepAxis::Phi,
            "n" => SweepAxis::N,
            s => return Err(usage(format!("--sweep: expected phi or n, got `{s}`"))),
        };
        let axes = match get("axes") {
            "phi-gamma2" => Axes::PhiGamma2,
            "gamma1-gamma2" => Axes::Gamma1Gamma2,
            a => return Err(usage(format!("--axes: expected phi-gamma2 or gamma1-gamma2, got `{a}`"))),
        };
        let t_max = parse_f64("t-max", get("t-max"))?;
        if t_max <= 0.0 {
            return Err(usage("--t-max must be positive"));
        }
        let t_count = parse_usize("t-count", get("t-count"))?;
        if t_count < 2 {
            return Err(usage("--t-count must be at least 2"));
        }
        let k_points = parse_usize("kpoints", get("kpoints"))?;
        if k_points < 2 {
            return Err(usage("--kpoints must be at least 2"));
        }
        let init_site = parse_usize("init-site", get("init-site"))?;
        if init_site < 1 || init_site > params.dim() {
            return Err(usage(format!("--init-site must lie in 1..={}", params.dim())));
        }
        Ok(Self {
            command: command.to_string(),
            params,
            phi_grid: parse_grid("phi-grid", get("phi-grid"), true)?,
            gamma_grid: parse_grid("gamma-grid", get("gamma-grid"), false)?,
            gamma1_grid: parse_grid("gamma1-grid", get("gamma1-grid"), false)?,
            n_grid: parse_n_grid(get("n-grid"))?,
            k_points,
            sweep,
            axes,
            t_max,
            t_count,
            init_site,
            seed: get("seed").trim().parse().map_err(|_| usage("--seed must be a non-negative integer"))?,
            samples: parse_usize("samples", get("samples"))?,
            format,
            out,
            resolved: map,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert!((parse_angle("0.4pi").unwrap() - 0.4 * PI).abs() < 1e-15);
        assert_eq!(parse_angle("-0.5pi").unwrap(), -0.5 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!((parse_angle("0.25π").unwrap() - 0.25 * PI).abs() < 1e-15);
        assert!(parse_angle("abc").is_err());
        assert!(parse_angle("xpi").is_err());
    }

    #[test]
    fn grids() {
        let g = parse_grid("phi-grid", "0:0.5pi:3", true).unwrap();
        assert_eq!(g, vec![0.0, 0.25 * PI, 0.5 * PI]);
        assert!(parse_grid("g", "0:1:1", false).is_err());
        assert!(parse_grid("g", "0:1", false).is_err());
        assert_eq!(parse_n_grid("10..13").unwrap(), vec![10, 11, 12, 13]);
        assert_eq!(parse_n_grid("10,20, 30").unwrap(), vec![10, 20, 30]);
        assert!(parse_n_grid("5..3").is_err());
        assert!(parse_n_grid("0,4").is_err());
    }

    #[test]
    fn config_text_and_precedence() {
        let file = parse_config_text("# chain\nn = 12\ngamma_1 = 0.5 # comment\n\nphi = 0.3pi\n").unwrap_err();
        assert!(matches!(file, CliError::Usage(_)));
        let file = parse_config_text("# chain\nn = 12\ngamma1 = 0.5 # comment\n\nphi = 0.3pi\n").unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("n".to_string(), "30".to_string());
        let map = resolve(&file, &flags);
        assert_eq!(map["n"], "30");
        assert_eq!(map["gamma1"], "0.5");
        assert_eq!(map["phi"], "0.3pi");
        assert_eq!(map["tau"], "0");
        assert!(parse_config_text("n 12").is_err());
    }

    #[test]
    fn run_config_validation() {
        let map = resolve(&BTreeMap::new(), &BTreeMap::new());
        let cfg = RunConfig::from_map("spectrum", map.clone(), None).unwrap();
        assert_eq!(cfg.params.n_cells, 20);
        let mut bad = map.clone();
        bad.insert("format".into(), "xml".into());
        assert!(RunConfig::from_map("spectrum", bad, None).is_err());
        let mut bad = map;
        bad.insert("gamma1".into(), "-1".into());
        assert!(RunConfig::from_map("spectrum", bad, None).is_err());
    }
}
