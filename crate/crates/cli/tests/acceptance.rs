//! Acceptance gate: one test per criterion, each printing a PASS line
//! (run with `-- --nocapture` to see them); a failing criterion panics with
//! the corresponding FAIL line.

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_complex::Complex64;
use xychain::analysis::{envelope, find_revivals, fit_saturation_curve, saturation_length, smooth};
use xychain::linalg::fit_line;
use xychain::observables::{negativity, purity, BellFamily, BellFamilyState, DensityMatrix4};
use xychain::validation::run_oracle_suite;
use xychain::{
    echo_exchange, echo_single_qubit, echo_survival, independent_product, time_grid, ChainSpec,
    EchoSeries, QubitLabel,
};

fn spec(n: usize, gamma: f64, lambda: f64, g: f64, d: usize, label: QubitLabel) -> ChainSpec {
    ChainSpec::new(n, gamma, lambda, g, d, label).unwrap()
}

fn check(criterion: &str, ok: bool, detail: String) {
    if ok {
        println!("ACCEPTANCE {criterion}: PASS ({detail})");
    } else {
        panic!("ACCEPTANCE {criterion}: FAIL ({detail})");
    }
}

#[test]
fn acceptance_01_oracle_equivalence() {
    let start = std::time::Instant::now();
    let cells = run_oracle_suite(42, 20).unwrap();
    let worst = cells.iter().map(|c| c.max_err()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    check(
        "1 oracle equivalence",
        cells.len() == 20 && worst < 1e-8 && elapsed.as_secs() < 120,
        format!("20 random configs, worst |err| = {worst:.3e}, {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_02_analytic_identities() {
    let times = time_grid(10.0, 0.25);
    let mut worst: f64 = 0.0;

    // L(0) = 1
    let s = spec(30, 1.0, 0.8, 0.3, 4, QubitLabel::OneOne);
    worst = worst.max((echo_survival(&s, &times).unwrap().values[0] - 1.0).abs());
    worst = worst.max((echo_exchange(&s, 4, &times).unwrap().values[0] - 1.0).abs());

    // g = 0 implies L = 1 everywhere
    let s0 = spec(30, 1.0, 0.8, 0.0, 4, QubitLabel::OneOne);
    for &v in &echo_survival(&s0, &times).unwrap().values {
        worst = worst.max((v - 1.0).abs());
    }

    // exchange echo is trivial at d = 0
    for &v in &echo_exchange(&s, 0, &times).unwrap().values {
        worst = worst.max((v - 1.0).abs());
    }

    // both qubits on one site look like one qubit at twice the coupling
    let s_d0 = spec(30, 1.0, 0.8, 0.3, 0, QubitLabel::OneOne);
    let both = echo_survival(&s_d0, &times).unwrap();
    let single = echo_single_qubit(&s_d0, 0.6, &times).unwrap();
    for (a, b) in both.values.iter().zip(&single.values) {
        worst = worst.max((a - b).abs());
    }

    check(
        "2 analytic identities",
        worst < 1e-10,
        format!("worst deviation {worst:.3e}"),
    );
}

#[test]
fn acceptance_03_long_distance_factorization() {
    let times = time_grid(10.0, 0.05);
    let s = spec(100, 1.0, 1.5, 0.1, 50, QubitLabel::OneOne);
    let pair = echo_survival(&s, &times).unwrap();
    let indep = independent_product(&s, &times).unwrap();
    let max_diff = pair
        .values
        .iter()
        .zip(&indep.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        "3 long-distance factorization",
        max_diff <= 0.01,
        format!("max |L_00,11 - L_0,1^2| = {max_diff:.4}"),
    );
}

#[test]
fn acceptance_04_weak_coupling_distance_ordering() {
    let times = time_grid(10.0, 0.05);
    let window = 2.0;
    let s = spec(100, 1.0, 0.5, 0.1, 0, QubitLabel::OneOne);
    let baseline = smooth(&independent_product(&s, &times).unwrap(), window).unwrap();
    let surv_d0 = smooth(&echo_survival(&s, &times).unwrap(), window).unwrap();
    let exch_d1 = smooth(&echo_exchange(&s, 1, &times).unwrap(), window).unwrap();

    let late = |series: &EchoSeries| -> Vec<(f64, f64)> {
        series
            .times
            .iter()
            .zip(&series.values)
            .filter(|(t, _)| **t >= 2.0)
            .map(|(t, v)| (*t, *v))
            .collect()
    };
    let mut ok = true;
    let mut detail = String::new();
    for ((t, v), (_, b)) in late(&surv_d0).iter().zip(late(&baseline)) {
        if *v >= b {
            ok = false;
            detail = format!("L_00,11(d=0) not below baseline at t={t}: {v} vs {b}");
            break;
        }
    }
    if ok {
        for ((t, v), (_, b)) in late(&exch_d1).iter().zip(late(&baseline)) {
            if *v <= b {
                ok = false;
                detail = format!("L_01,10(d=1) not above baseline at t={t}: {v} vs {b}");
                break;
            }
        }
    }
    if ok {
        detail = "d=0 survival below baseline, d=1 exchange above, t in [2,10]".into();
    }
    check("4 weak-coupling distance ordering", ok, detail);
}

#[test]
fn acceptance_05_saturation_curve() {
    let times = time_grid(10.0, 0.05);
    let window = 2.0;
    let lambdas = [0.3, 0.5, 0.7, 1.3, 1.5, 1.8];
    let mut ls = Vec::new();
    for &lambda in &lambdas {
        let s = spec(200, 1.0, lambda, 0.1, 0, QubitLabel::OneOne);
        let baseline = smooth(&independent_product(&s, &times).unwrap(), window).unwrap();
        let mut dist = Vec::new();
        let mut norms = Vec::new();
        for d in 1..=12usize {
            let sd = spec(200, 1.0, lambda, 0.1, d, QubitLabel::OneOne);
            let echo = smooth(&echo_survival(&sd, &times).unwrap(), window).unwrap();
            let norm: f64 = echo
                .values
                .iter()
                .zip(&baseline.values)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist.push(d as f64);
            norms.push(norm);
        }
        match saturation_length(&dist, &norms) {
            Ok(l) => ls.push(l),
            Err(e) => {
                check("5 saturation curve", false, format!("no saturation length at lambda={lambda}: {e}"));
                return;
            }
        }
    }
    let monotone = ls[0] < ls[1] && ls[1] < ls[2] && ls[5] < ls[4] && ls[4] < ls[3];
    let fit = fit_saturation_curve(&lambdas, &ls).unwrap();
    let in_band = (0.8..=1.5).contains(&fit.c0) && (1.5..=3.0).contains(&fit.c3);
    let [se0, _, _, se3] = fit.param_stderrs();
    check(
        "5 saturation curve",
        monotone && in_band,
        format!(
            "l = {ls:.3?} (monotone toward critical: {monotone}); fit c0 = {:.3} (stderr {se0:.2}) vs [0.8, 1.5], c3 = {:.3} (stderr {se3:.2}) vs [1.5, 3.0]",
            fit.c0, fit.c3
        ),
    );
}

#[test]
fn acceptance_06_strong_coupling_revivals() {
    let g = 50.0;
    // calibrated qualification threshold: first revivals at lambda=0.99 have
    // prominence >= 0.166 (d=10) while the lambda=1.5 envelope only carries
    // undulations of prominence <= 0.06 on its plateau
    let prominence = 0.1;
    let mut ratios = Vec::new();
    let mut log_d = Vec::new();
    let mut log_lr = Vec::new();
    let mut missing = Vec::new();
    for &d in &[2usize, 3, 4, 6, 8, 10] {
        let times = time_grid(2.4 * d as f64 + 2.0, 0.002);
        let s = spec(100, 1.0, 0.99, g, d, QubitLabel::OneOne);
        let echo = echo_survival(&s, &times).unwrap();
        let env = envelope(&echo, 2.0 * g).unwrap();
        match find_revivals(&env, prominence) {
            None => missing.push(d),
            Some(rec) => {
                ratios.push((d, rec.t_r / d as f64));
                log_d.push((d as f64).ln());
                log_lr.push(rec.l_r.ln());
            }
        }
    }
    let ratios_ok = missing.is_empty() && ratios.iter().all(|(_, r)| (1.6..=2.4).contains(r));
    let (_, slope) = fit_line(&log_d, &log_lr);
    let slope_ok = (-0.35..=-0.15).contains(&slope);
    // no qualifying revival on the other side of the transition
    let times = time_grid(12.0, 0.002);
    let s = spec(100, 1.0, 1.5, g, 4, QubitLabel::OneOne);
    let env = envelope(&echo_survival(&s, &times).unwrap(), 2.0 * g).unwrap();
    let other_side = find_revivals(&env, prominence);
    let disp: Vec<String> = ratios.iter().map(|(d, r)| format!("d={d}: {r:.3}")).collect();
    check(
        "6 strong-coupling revivals",
        ratios_ok && slope_ok && other_side.is_none(),
        format!(
            "t_r/d [{}] vs [1.6, 2.4]{}; L_r exponent {slope:.3} vs -0.25 +/- 0.10; lambda=1.5 revival: {}",
            disp.join(", "),
            if missing.is_empty() {
                String::new()
            } else {
                format!("; none found at d in {missing:?}")
            },
            other_side.map_or("none".into(), |r| format!("t_r = {:.2}", r.t_r)),
        ),
    );
}

#[test]
fn acceptance_07_envelope_properties() {
    // g-independence at d = 0
    let times = time_grid(10.0, 0.001);
    let env_of = |g: f64, d: usize| {
        let s = spec(100, 1.0, 0.99, g, d, QubitLabel::OneOne);
        envelope(&echo_survival(&s, &times).unwrap(), 2.0 * g).unwrap()
    };
    let e50 = env_of(50.0, 0);
    let e100 = env_of(100.0, 0);
    let diff_g = e50
        .values
        .iter()
        .zip(&e100.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    // large-d envelope is the square of the d = 0 envelope
    let e_far = env_of(50.0, 50);
    let diff_sq = e_far
        .values
        .iter()
        .zip(&e50.values)
        .map(|(a, b)| (a - b * b).abs())
        .fold(0.0, f64::max);

    check(
        "7 envelope properties",
        diff_g <= 0.05 && diff_sq <= 0.05,
        format!("g=50 vs g=100 max diff {diff_g:.4}; large-d vs square {diff_sq:.4}"),
    );
}

#[test]
fn acceptance_08_finite_size_event() {
    // at weak coupling the echo never strays far from 1, so the event is
    // detected relative to the pre-event noise: a deviation from the
    // independent-environment baseline exceeding 10x the t < 10 ceiling
    // (regression-pinned: the wavefront reaches d = 50 at t ~ 25 with a
    // deviation of 3.0e-3 against a pre-event ceiling of 1.2e-4)
    let times = time_grid(200.0, 0.05);
    let s = spec(100, 1.0, 0.99, 0.1, 50, QubitLabel::OneOne);
    let echo = echo_survival(&s, &times).unwrap();
    let baseline = independent_product(&s, &times).unwrap();
    let mut early_max: f64 = 0.0;
    for ((t, a), b) in times.iter().zip(&echo.values).zip(&baseline.values) {
        if *t < 10.0 {
            early_max = early_max.max((a - b).abs());
        }
    }
    let threshold = 10.0 * early_max.max(1e-5);
    let mut event_time = None;
    let mut peak = (0.0f64, 0.0f64);
    for ((t, a), b) in times.iter().zip(&echo.values).zip(&baseline.values) {
        let dev = (a - b).abs();
        if *t >= 10.0 {
            if dev > threshold && event_time.is_none() {
                event_time = Some(*t);
            }
            if dev > peak.1 {
                peak = (*t, dev);
            }
        }
    }
    check(
        "8 finite-size event",
        event_time.is_some(),
        format!(
            "event onset t = {event_time:?}, peak deviation {:.2e} at t = {:.1}, pre-event ceiling {early_max:.2e}",
            peak.1, peak.0
        ),
    );
}

#[test]
fn acceptance_09_observable_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_neg: f64 = 0.0;
    let mut worst_pur: f64 = 0.0;
    for _ in 0..1000 {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let p: f64 = rng.gen_range(0.0..=1.0);
        let l: f64 = rng.gen_range(0.0..=1.0);
        let family = if rng.gen_bool(0.5) {
            BellFamily::Phi
        } else {
            BellFamily::Psi
        };
        let alpha = Complex64::new(theta.cos(), 0.0);
        let beta = Complex64::from_polar(theta.sin(), phase);
        let state = BellFamilyState::new(family, alpha, beta, p).unwrap();
        let rho0 = state.initial_density();
        let (i, j) = match family {
            BellFamily::Phi => (0, 3),
            BellFamily::Psi => (1, 2),
        };
        let mut m = rho0.matrix.clone();
        m[(i, j)] *= l.sqrt();
        m[(j, i)] *= l.sqrt();
        let rho = DensityMatrix4 { matrix: m };
        worst_neg = worst_neg.max((rho.negativity() - negativity(&state, l)).abs());
        worst_pur = worst_pur.max((rho.purity() - purity(&state, l)).abs());
    }
    check(
        "9 observable identities",
        worst_neg < 1e-10 && worst_pur < 1e-12,
        format!("negativity err {worst_neg:.3e}, purity err {worst_pur:.3e}"),
    );
}

#[test]
fn acceptance_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_xychain");
    let base = std::env::temp_dir().join(format!("xychain-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    std::fs::create_dir_all(&base).unwrap();
    let cfg_path = base.join("exp.cfg");
    std::fs::write(
        &cfg_path,
        "kind = echo_series\n\
         n_sites = 30\n\
         gamma = 1.0\n\
         lambda = [0.5, 1.5]\n\
         coupling = 0.1\n\
         d = [0, 2]\n\
         echoes = [L00_11, L01_10, independent]\n\
         t_max = 5\n\
         dt = 0.1\n",
    )
    .unwrap();

    let run = |out: &str, workers: &str, cache: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.arg("run")
            .arg(&cfg_path)
            .arg("--out")
            .arg(base.join(out))
            .arg("--workers")
            .arg(workers)
            .env_remove("XYCHAIN_CACHE");
        if let Some(c) = cache {
            cmd.arg("--cache").arg(base.join(c));
        }
        let status = cmd.status().unwrap();
        assert!(status.success(), "run {out} exited with {status}");
    };

    let csv_bodies = |out: &str| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(base.join(out))
            .unwrap()
            .map(|e| e.unwrap())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".csv"))
            .map(|e| {
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        files
    };

    run("a", "1", None);
    run("b", "1", None); // identical rerun
    run("c", "8", None); // different worker count
    run("d", "1", Some("cache")); // cold cache
    run("e", "1", Some("cache")); // warm cache

    let a = csv_bodies("a");
    assert!(!a.is_empty());
    let identical = a == csv_bodies("b");
    let workers_identical = a == csv_bodies("c");
    let cache_identical = a == csv_bodies("d") && a == csv_bodies("e");
    let manifest = std::fs::read_to_string(base.join("e").join("manifest.txt")).unwrap();
    let warm_hits = manifest.contains("cache_misses = 0");

    let _ = std::fs::remove_dir_all(&base);
    check(
        "10 CLI determinism",
        identical && workers_identical && cache_identical && warm_hits,
        format!(
            "rerun identical: {identical}, 1 vs 8 workers: {workers_identical}, \
             cached vs fresh: {cache_identical}, warm run fully cached: {warm_hits}"
        ),
    );
}
