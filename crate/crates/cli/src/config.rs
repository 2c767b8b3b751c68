//! Flat key = value experiment configs with `[a, b, c]` lists and # comments.

use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "config line {l}, field '{k}': {}", self.message),
            (Some(l), None) => write!(f, "config line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "config field '{k}': {}", self.message),
            (None, None) => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.map(str::to_owned),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    EchoSeries,
    SaturationScan,
    RevivalScan,
    OracleValidation,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::EchoSeries => "echo_series",
            ExperimentKind::SaturationScan => "saturation_scan",
            ExperimentKind::RevivalScan => "revival_scan",
            ExperimentKind::OracleValidation => "oracle_validation",
        }
    }
}

/// Which series a grid cell computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EchoChoice {
    Survival01,
    Survival10,
    Survival11,
    Exchange,
    Independent,
}

impl EchoChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "L00_01" => Some(EchoChoice::Survival01),
            "L00_10" => Some(EchoChoice::Survival10),
            "L00_11" => Some(EchoChoice::Survival11),
            "L01_10" => Some(EchoChoice::Exchange),
            "independent" => Some(EchoChoice::Independent),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            EchoChoice::Survival01 => "L00_01",
            EchoChoice::Survival10 => "L00_10",
            EchoChoice::Survival11 => "L00_11",
            EchoChoice::Exchange => "L01_10",
            EchoChoice::Independent => "independent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Phi,
    Psi,
}

/// Optional initial-state parameters for purity/negativity series.
#[derive(Debug, Clone, Copy)]
pub struct StateParams {
    pub family: Family,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_sites: usize,
    pub gammas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub couplings: Vec<f64>,
    pub distances: Vec<usize>,
    pub echoes: Vec<EchoChoice>,
    pub t_max: f64,
    pub dt: f64,
    pub state: Option<StateParams>,
    pub smoothing_window: f64,
    pub prominence: f64,
    /// Fast-oscillation hint for envelope extraction; defaults to 2g.
    pub fast_freq: Option<f64>,
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: u64,
    pub cells: usize,
    /// Free-form notes copied into the manifest.
    pub assumptions: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::EchoSeries,
            n_sites: 100,
            gammas: vec![1.0],
            lambdas: vec![],
            couplings: vec![],
            distances: vec![],
            echoes: vec![],
            t_max: 10.0,
            dt: 0.05,
            state: None,
            smoothing_window: 2.0,
            prominence: 0.02,
            fast_freq: None,
            out_dir: PathBuf::from("out"),
            cache_dir: None,
            workers: None,
            seed: 42,
            cells: 20,
            assumptions: Vec::new(),
        }
    }
}

fn parse_scalar<T: std::str::FromStr>(
    raw: &str,
    line: usize,
    key: &str,
) -> Result<T, ConfigError> {
    raw.trim()
        .parse::<T>()
        .map_err(|_| err(Some(line), Some(key), format!("cannot parse '{raw}'")))
}

fn parse_list<T: std::str::FromStr>(
    raw: &str,
    line: usize,
    key: &str,
) -> Result<Vec<T>, ConfigError> {
    let raw = raw.trim();
    let items: Vec<&str> = if raw.starts_with('[') {
        if !raw.ends_with(']') {
            return Err(err(Some(line), Some(key), "unterminated list".to_string()));
        }
        raw[1..raw.len() - 1]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    } else {
        vec![raw]
    };
    if items.is_empty() {
        return Err(err(Some(line), Some(key), "empty list".to_string()));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| err(Some(line), Some(key), format!("cannot parse '{s}'")))
        })
        .collect()
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut kind_seen = false;
    let mut family: Option<Family> = None;
    let mut alpha: Option<f64> = None;
    let mut beta: Option<f64> = None;
    let mut p: Option<f64> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(Some(lineno), None, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "kind" => {
                cfg.kind = match value {
                    "echo_series" => ExperimentKind::EchoSeries,
                    "saturation_scan" => ExperimentKind::SaturationScan,
                    "revival_scan" => ExperimentKind::RevivalScan,
                    "oracle_validation" => ExperimentKind::OracleValidation,
                    other => {
                        return Err(err(
                            Some(lineno),
                            Some(key),
                            format!("unknown experiment kind '{other}'"),
                        ))
                    }
                };
                kind_seen = true;
            }
            "n_sites" => cfg.n_sites = parse_scalar(value, lineno, key)?,
            "gamma" => cfg.gammas = parse_list(value, lineno, key)?,
            "lambda" => cfg.lambdas = parse_list(value, lineno, key)?,
            "coupling" => cfg.couplings = parse_list(value, lineno, key)?,
            "d" => cfg.distances = parse_list(value, lineno, key)?,
            "echoes" => {
                let names: Vec<String> = parse_list(value, lineno, key)?;
                cfg.echoes = names
                    .iter()
                    .map(|n| {
                        EchoChoice::parse(n).ok_or_else(|| {
                            err(Some(lineno), Some(key), format!("unknown echo '{n}'"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
            }
            "t_max" => cfg.t_max = parse_scalar(value, lineno, key)?,
            "dt" => cfg.dt = parse_scalar(value, lineno, key)?,
            "family" => {
                family = Some(match value {
                    "phi" => Family::Phi,
                    "psi" => Family::Psi,
                    other => {
                        return Err(err(
                            Some(lineno),
                            Some(key),
                            format!("unknown family '{other}' (phi or psi)"),
                        ))
                    }
                })
            }
            "alpha" => alpha = Some(parse_scalar(value, lineno, key)?),
            "beta" => beta = Some(parse_scalar(value, lineno, key)?),
            "p" => p = Some(parse_scalar(value, lineno, key)?),
            "smoothing_window" => cfg.smoothing_window = parse_scalar(value, lineno, key)?,
            "prominence" => cfg.prominence = parse_scalar(value, lineno, key)?,
            "fast_freq" => cfg.fast_freq = Some(parse_scalar(value, lineno, key)?),
            "out_dir" => cfg.out_dir = PathBuf::from(value),
            "cache_dir" => cfg.cache_dir = Some(PathBuf::from(value)),
            "workers" => cfg.workers = Some(parse_scalar(value, lineno, key)?),
            "seed" => cfg.seed = parse_scalar(value, lineno, key)?,
            "cells" => cfg.cells = parse_scalar(value, lineno, key)?,
            other => {
                return Err(err(
                    Some(lineno),
                    Some(other),
                    "unknown configuration key".to_string(),
                ))
            }
        }
    }

    if !kind_seen {
        return Err(err(None, Some("kind"), "missing required key"));
    }
    if let Some(fam) = family {
        let (Some(alpha), Some(beta), Some(p)) = (alpha, beta, p) else {
            return Err(err(
                None,
                Some("family"),
                "family given but alpha/beta/p incomplete",
            ));
        };
        cfg.state = Some(StateParams {
            family: fam,
            alpha,
            beta,
            p,
        });
    }

    if cfg.kind != ExperimentKind::OracleValidation {
        if cfg.lambdas.is_empty() {
            return Err(err(None, Some("lambda"), "missing required key"));
        }
        if cfg.couplings.is_empty() {
            return Err(err(None, Some("coupling"), "missing required key"));
        }
        if cfg.distances.is_empty() {
            return Err(err(None, Some("d"), "missing required key"));
        }
        if cfg.echoes.is_empty() {
            cfg.echoes = match cfg.kind {
                ExperimentKind::SaturationScan => vec![EchoChoice::Survival11],
                _ => vec![EchoChoice::Survival11, EchoChoice::Independent],
            };
        }
        if !(cfg.t_max > 0.0) || !(cfg.dt > 0.0) {
            return Err(err(None, Some("t_max"), "t_max and dt must be positive"));
        }
    }
    Ok(cfg)
}
