//! Sweep execution: expands a config into independent grid cells, runs them
//! on a rayon pool, writes CSV artifacts and a manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use xychain::analysis::{
    correlation_length, echo_distance_to_limit, envelope, find_revivals, fit_saturation_curve,
    saturation_length, smooth,
};
use xychain::observables::{negativity, purity, BellFamily, BellFamilyState};
use xychain::validation::run_oracle_suite;
use xychain::{
    echo_exchange_from, echo_survival_from, momentum_modes_from, time_grid, ChainSpec, EchoKind,
    EchoSeries, QubitLabel,
};

use crate::cache::{cache_key, get_or_compute, CacheEvent};
use crate::config::{EchoChoice, ExperimentConfig, ExperimentKind, Family, StateParams};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug)]
struct Artifact {
    filename: String,
    body: String,
}

#[derive(Debug, Default)]
struct CellOutput {
    artifacts: Vec<Artifact>,
    cache_hits: usize,
    cache_misses: usize,
    /// rows destined for shared tables, keyed by table name
    table_rows: Vec<(String, String)>,
    failures: Vec<(String, String)>,
}

fn fmt_series(times: &[f64], values: &[f64], x_name: &str) -> String {
    let mut s = String::with_capacity(times.len() * 24);
    let _ = writeln!(s, "{x_name}, value");
    for (t, v) in times.iter().zip(values) {
        let _ = writeln!(s, "{t}, {v}");
    }
    s
}

/// Effective config after overrides.
pub fn apply_overrides(mut cfg: ExperimentConfig, ov: &Overrides) -> ExperimentConfig {
    if let Some(dt) = ov.dt {
        cfg.dt = dt;
    }
    if let Some(tm) = ov.t_max {
        cfg.t_max = tm;
    }
    if let Some(dir) = &ov.cache_dir {
        cfg.cache_dir = Some(dir.clone());
    } else if cfg.cache_dir.is_none() {
        if let Ok(env_dir) = std::env::var("XYCHAIN_CACHE") {
            if !env_dir.is_empty() {
                cfg.cache_dir = Some(PathBuf::from(env_dir));
            }
        }
    }
    if let Some(dir) = &ov.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(w) = ov.workers {
        cfg.workers = Some(w);
    }
    cfg
}

struct CellCtx<'a> {
    cfg: &'a ExperimentConfig,
    cache: Option<&'a Path>,
    times: Vec<f64>,
}

impl CellCtx<'_> {
    fn basis(&self, spec: &ChainSpec, out: &mut CellOutput) -> xychain::Result<xychain::ModeBasis> {
        let (b, event) = get_or_compute(self.cache, spec)?;
        match event {
            CacheEvent::Hit => out.cache_hits += 1,
            _ => out.cache_misses += 1,
        }
        Ok(b)
    }

    fn compute_echo(
        &self,
        gamma: f64,
        lambda: f64,
        g: f64,
        d: usize,
        echo: EchoChoice,
        out: &mut CellOutput,
    ) -> xychain::Result<EchoSeries> {
        let n = self.cfg.n_sites;
        match echo {
            EchoChoice::Survival01 | EchoChoice::Survival10 | EchoChoice::Survival11 => {
                let label = match echo {
                    EchoChoice::Survival01 => QubitLabel::ZeroOne,
                    EchoChoice::Survival10 => QubitLabel::OneZero,
                    _ => QubitLabel::OneOne,
                };
                let spec = ChainSpec::new(n, gamma, lambda, g, d, label)?;
                let b0 = self.basis(&spec.unperturbed(), out)?;
                let b1 = self.basis(&spec, out)?;
                echo_survival_from(&spec, &b0, &b1, &self.times)
            }
            EchoChoice::Exchange => {
                let spec10 = ChainSpec::new(n, gamma, lambda, g, d, QubitLabel::OneZero)?;
                let b0 = self.basis(&spec10.unperturbed(), out)?;
                let mom = momentum_modes_from(&spec10.unperturbed(), &b0)?;
                let b1 = self.basis(&spec10, out)?;
                echo_exchange_from(&spec10, d, &mom, &b1, &self.times)
            }
            EchoChoice::Independent => {
                let single = ChainSpec::new(n, gamma, lambda, g, 0, QubitLabel::OneZero)?;
                let b0 = self.basis(&single.unperturbed(), out)?;
                let b1 = self.basis(&single, out)?;
                let one = echo_survival_from(&single, &b0, &b1, &self.times)?;
                let squared = one.values.iter().map(|v| v * v).collect();
                EchoSeries::new(
                    self.times.clone(),
                    squared,
                    EchoKind::IndependentProduct,
                    single,
                    0,
                )
            }
        }
    }
}

fn cell_name(n: usize, gamma: f64, lambda: f64, g: f64, d: usize, tag: &str) -> String {
    format!("N{n}_gam{gamma}_lam{lambda}_g{g}_d{d}_{tag}")
}

fn state_for(state: &StateParams) -> xychain::Result<BellFamilyState> {
    let norm = (state.alpha * state.alpha + state.beta * state.beta).sqrt();
    let family = match state.family {
        Family::Phi => BellFamily::Phi,
        Family::Psi => BellFamily::Psi,
    };
    BellFamilyState::new(
        family,
        num_complex::Complex64::new(state.alpha / norm, 0.0),
        num_complex::Complex64::new(state.beta / norm, 0.0),
        state.p,
    )
}

fn state_compatible(family: Family, echo: EchoChoice) -> bool {
    matches!(
        (family, echo),
        (Family::Phi, EchoChoice::Survival11)
            | (Family::Psi, EchoChoice::Exchange)
            | (_, EchoChoice::Independent)
    )
}

fn echo_series_cell(
    ctx: &CellCtx,
    gamma: f64,
    lambda: f64,
    g: f64,
    d: usize,
    echo: EchoChoice,
) -> CellOutput {
    let mut out = CellOutput::default();
    let name = cell_name(ctx.cfg.n_sites, gamma, lambda, g, d, echo.tag());
    match ctx.compute_echo(gamma, lambda, g, d, echo, &mut out) {
        Err(e) => out.failures.push((name, e.to_string())),
        Ok(series) => {
            out.artifacts.push(Artifact {
                filename: format!("{name}.csv"),
                body: fmt_series(&series.times, &series.values, "t"),
            });
            if let Some(sp) = &ctx.cfg.state {
                if state_compatible(sp.family, echo) {
                    match state_for(sp) {
                        Err(e) => out.failures.push((format!("{name} state"), e.to_string())),
                        Ok(state) => {
                            let pur: Vec<f64> =
                                series.values.iter().map(|&l| purity(&state, l)).collect();
                            let neg: Vec<f64> = series
                                .values
                                .iter()
                                .map(|&l| negativity(&state, l))
                                .collect();
                            out.artifacts.push(Artifact {
                                filename: format!("{name}_purity.csv"),
                                body: fmt_series(&series.times, &pur, "t"),
                            });
                            out.artifacts.push(Artifact {
                                filename: format!("{name}_negativity.csv"),
                                body: fmt_series(&series.times, &neg, "t"),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn saturation_cell(ctx: &CellCtx, gamma: f64, lambda: f64, g: f64) -> CellOutput {
    let mut out = CellOutput::default();
    let name = cell_name(ctx.cfg.n_sites, gamma, lambda, g, 0, "sat");
    let window = ctx.cfg.smoothing_window;

    let baseline = match ctx
        .compute_echo(gamma, lambda, g, 0, EchoChoice::Independent, &mut out)
        .and_then(|s| smooth(&s, window))
    {
        Ok(s) => s,
        Err(e) => {
            out.failures.push((name, e.to_string()));
            return out;
        }
    };

    let mut dist = Vec::new();
    let mut norms = Vec::new();
    for &d in &ctx.cfg.distances {
        let r = ctx
            .compute_echo(gamma, lambda, g, d, EchoChoice::Survival11, &mut out)
            .and_then(|s| smooth(&s, window))
            .and_then(|s| echo_distance_to_limit(&s, &baseline));
        match r {
            Ok(norm) => {
                dist.push(d as f64);
                norms.push(norm);
            }
            Err(e) => out.failures.push((format!("{name} d={d}"), e.to_string())),
        }
    }
    out.artifacts.push(Artifact {
        filename: format!("{name}_norms.csv"),
        body: fmt_series(&dist, &norms, "d"),
    });
    match saturation_length(&dist, &norms) {
        Ok(l) => out
            .table_rows
            .push((format!("sat_lengths_gam{gamma}_g{g}"), format!("{lambda}, {l}"))),
        Err(e) => out
            .failures
            .push((format!("{name} length"), e.to_string())),
    }
    out
}

fn revival_cell(
    ctx: &CellCtx,
    gamma: f64,
    lambda: f64,
    g: f64,
    d: usize,
    echo: EchoChoice,
) -> CellOutput {
    let mut out = CellOutput::default();
    let name = cell_name(ctx.cfg.n_sites, gamma, lambda, g, d, echo.tag());
    let hint = ctx.cfg.fast_freq.unwrap_or(2.0 * g);
    let result = ctx
        .compute_echo(gamma, lambda, g, d, echo, &mut out)
        .and_then(|s| envelope(&s, hint));
    match result {
        Err(e) => out.failures.push((name, e.to_string())),
        Ok(env) => {
            out.artifacts.push(Artifact {
                filename: format!("{name}_env.csv"),
                body: fmt_series(&env.times, &env.values, "t"),
            });
            let row = match find_revivals(&env, ctx.cfg.prominence) {
                Some(rec) => format!(
                    "{gamma}, {lambda}, {g}, {d}, {}, {}, {}, {}",
                    echo.tag(),
                    rec.t_r,
                    rec.l_r,
                    rec.peak_times.len()
                ),
                None => format!("{gamma}, {lambda}, {g}, {d}, {}, , , 0", echo.tag()),
            };
            out.table_rows.push(("revivals".to_string(), row));
        }
    }
    out
}

fn validation_output(cfg: &ExperimentConfig) -> CellOutput {
    let mut out = CellOutput::default();
    match run_oracle_suite(cfg.seed, cfg.cells) {
        Err(e) => out.failures.push(("oracle_suite".into(), e.to_string())),
        Ok(cells) => {
            let mut body = String::from("cell, max_err_survival, max_err_exchange\n");
            for (i, c) in cells.iter().enumerate() {
                let _ = writeln!(
                    body,
                    "{}, {}, {}",
                    cache_key(&c.spec),
                    c.max_err_survival,
                    c.max_err_exchange
                );
                if c.max_err() > 1e-8 {
                    out.failures.push((
                        format!("validation cell {i}"),
                        format!("max error {:.3e} exceeds 1e-8", c.max_err()),
                    ));
                }
            }
            out.artifacts.push(Artifact {
                filename: "validation.csv".into(),
                body,
            });
        }
    }
    out
}

fn gnuplot_script(csvs: &[String]) -> String {
    let mut s = String::from("set datafile separator ','\nset key outside\n");
    s.push_str("plot ");
    let parts: Vec<String> = csvs
        .iter()
        .map(|f| format!("'{f}' using 1:2 with lines title '{f}'"))
        .collect();
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}

/// Execute a config. Returns the process exit code: 0 on success, 2 when at
/// least one cell failed numerically.
pub fn run(cfg: &ExperimentConfig, config_text: &str, plots: bool) -> std::io::Result<i32> {
    let started = Instant::now();
    fs::create_dir_all(&cfg.out_dir)?;
    let cache = cfg.cache_dir.as_deref();
    let ctx = CellCtx {
        cfg,
        cache,
        times: time_grid(cfg.t_max, cfg.dt),
    };

    let run_cells = || -> Vec<CellOutput> {
        match cfg.kind {
            ExperimentKind::OracleValidation => vec![validation_output(cfg)],
            ExperimentKind::EchoSeries => {
                let mut cells = Vec::new();
                for &gamma in &cfg.gammas {
                    for &lambda in &cfg.lambdas {
                        for &g in &cfg.couplings {
                            for &d in &cfg.distances {
                                for &echo in &cfg.echoes {
                                    // separation is meaningless for the baseline:
                                    // run it once at d = 0
                                    if echo == EchoChoice::Independent && d != cfg.distances[0] {
                                        continue;
                                    }
                                    cells.push((gamma, lambda, g, d, echo));
                                }
                            }
                        }
                    }
                }
                cells
                    .par_iter()
                    .map(|&(gamma, lambda, g, d, echo)| {
                        let d = if echo == EchoChoice::Independent { 0 } else { d };
                        echo_series_cell(&ctx, gamma, lambda, g, d, echo)
                    })
                    .collect()
            }
            ExperimentKind::SaturationScan => {
                let mut cells = Vec::new();
                for &gamma in &cfg.gammas {
                    for &lambda in &cfg.lambdas {
                        for &g in &cfg.couplings {
                            cells.push((gamma, lambda, g));
                        }
                    }
                }
                cells
                    .par_iter()
                    .map(|&(gamma, lambda, g)| saturation_cell(&ctx, gamma, lambda, g))
                    .collect()
            }
            ExperimentKind::RevivalScan => {
                let mut cells = Vec::new();
                for &gamma in &cfg.gammas {
                    for &lambda in &cfg.lambdas {
                        for &g in &cfg.couplings {
                            for &d in &cfg.distances {
                                for &echo in &cfg.echoes {
                                    if echo == EchoChoice::Independent && d != cfg.distances[0] {
                                        continue;
                                    }
                                    cells.push((gamma, lambda, g, d, echo));
                                }
                            }
                        }
                    }
                }
                cells
                    .par_iter()
                    .map(|&(gamma, lambda, g, d, echo)| {
                        let d = if echo == EchoChoice::Independent { 0 } else { d };
                        revival_cell(&ctx, gamma, lambda, g, d, echo)
                    })
                    .collect()
            }
        }
    };

    let outputs = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("thread pool")
            .install(run_cells),
        None => run_cells(),
    };

    let mut artifacts: Vec<Artifact> = Vec::new();
    let mut tables: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut failures: Vec<(String, String)> = Vec::new();
    let (mut hits, mut misses) = (0usize, 0usize);
    for mut out in outputs {
        artifacts.append(&mut out.artifacts);
        failures.append(&mut out.failures);
        hits += out.cache_hits;
        misses += out.cache_misses;
        for (table, row) in out.table_rows {
            tables.entry(table).or_default().push(row);
        }
    }

    // shared tables become artifacts too, rows sorted for determinism
    for (table, mut rows) in tables {
        rows.sort();
        let (header, is_lengths) = if table == "revivals" {
            ("gamma, lambda, g, d, echo, t_r, l_r, n_later_peaks", false)
        } else {
            ("lambda, value", true)
        };
        let mut body = format!("{header}\n");
        for row in &rows {
            body.push_str(row);
            body.push('\n');
        }
        artifacts.push(Artifact {
            filename: format!("{table}.csv"),
            body,
        });
        // enough saturation lengths across lambda: fit the curve
        if is_lengths && rows.len() >= 6 {
            let mut lambdas = Vec::new();
            let mut ls = Vec::new();
            for row in &rows {
                let mut it = row.split(',');
                let lam: f64 = it.next().unwrap().trim().parse().unwrap();
                let l: f64 = it.next().unwrap().trim().parse().unwrap();
                if correlation_length(lam).is_ok() {
                    lambdas.push(lam);
                    ls.push(l);
                }
            }
            match fit_saturation_curve(&lambdas, &ls) {
                Err(e) => failures.push((format!("{table} fit"), e.to_string())),
                Ok(fit) => {
                    let se = fit.param_stderrs();
                    let mut body = String::from("param, value, stderr\n");
                    for (name, value, stderr) in [
                        ("c0", fit.c0, se[0]),
                        ("c1", fit.c1, se[1]),
                        ("c2", fit.c2, se[2]),
                        ("c3", fit.c3, se[3]),
                        ("xi_shift", fit.xi_shift, 0.0),
                        ("residual_norm", fit.residual_norm(), 0.0),
                    ] {
                        let _ = writeln!(body, "{name}, {value}, {stderr}");
                    }
                    artifacts.push(Artifact {
                        filename: format!("{table}_fit.csv"),
                        body,
                    });
                }
            }
        }
    }

    artifacts.sort_by(|a, b| a.filename.cmp(&b.filename));
    for art in &artifacts {
        fs::write(cfg.out_dir.join(&art.filename), &art.body)?;
    }
    if plots {
        let csvs: Vec<String> = artifacts
            .iter()
            .map(|a| a.filename.clone())
            .filter(|f| f.ends_with(".csv"))
            .collect();
        if !csvs.is_empty() {
            fs::write(cfg.out_dir.join("plot.gp"), gnuplot_script(&csvs))?;
        }
    }

    let mut manifest = String::new();
    let _ = writeln!(
        manifest,
        "config_sha256 = {}",
        hex::encode(Sha256::digest(config_text.as_bytes()))
    );
    let _ = writeln!(manifest, "code_version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "kind = {}", cfg.kind.as_str());
    let _ = writeln!(manifest, "wall_seconds = {:.3}", started.elapsed().as_secs_f64());
    let _ = writeln!(manifest, "artifacts = {}", artifacts.len());
    let _ = writeln!(manifest, "cache_hits = {hits}");
    let _ = writeln!(manifest, "cache_misses = {misses}");
    let _ = writeln!(manifest, "cells_failed = {}", failures.len());
    for a in &cfg.assumptions {
        let _ = writeln!(manifest, "assumption = {a}");
    }
    for (cell, msg) in &failures {
        let _ = writeln!(manifest, "failed_cell = {cell}: {msg}");
    }
    fs::write(cfg.out_dir.join("manifest.txt"), manifest)?;

    if failures.is_empty() {
        Ok(0)
    } else {
        for (cell, msg) in &failures {
            eprintln!("cell failed: {cell}: {msg}");
        }
        Ok(2)
    }
}
