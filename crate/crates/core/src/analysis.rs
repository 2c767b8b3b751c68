//! Post-processing of echo series: smoothing, distance-saturation lengths and
//! their dependence on the correlation length, strong-coupling envelopes and
//! revival detection.

use nalgebra::{DMatrix, DVector};

use crate::echo::EchoSeries;
use crate::error::{Error, Result};
use crate::linalg::fit_line;

/// Default centered-moving-average width, in time units.
pub const DEFAULT_SMOOTHING_WINDOW: f64 = 2.0;
/// Default minimum peak prominence for revival detection, in echo units.
pub const DEFAULT_PROMINENCE: f64 = 0.02;
/// Offset applied to λ before taking the correlation length in the
/// saturation-curve fit: ξ_eff = ξ·(λ + shift).
pub const XI_EFF_SHIFT: f64 = 5.7e-3;

/// Correlation length ξ = |ln λ|⁻¹ of the chain ground state.
pub fn correlation_length(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "correlation length needs λ > 0, got {lambda}"
        )));
    }
    let log = lambda.ln().abs();
    if log < 1e-14 {
        return Err(Error::CriticalPoint);
    }
    Ok(1.0 / log)
}

/// Centered moving average over a window of the given time width; endpoint
/// windows shrink to the available samples.
pub fn smooth(series: &EchoSeries, window: f64) -> Result<EchoSeries> {
    let min_dt = series
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if window < min_dt {
        return Err(Error::InvalidArgument(format!(
            "smoothing window {window} below grid spacing {min_dt}"
        )));
    }
    let half = window / 2.0 + 1e-12;
    let t = &series.times;
    let n = t.len();
    let mut out = Vec::with_capacity(n);
    let mut lo = 0usize;
    let mut hi = 0usize;
    for i in 0..n {
        while t[i] - t[lo] > half {
            lo += 1;
        }
        while hi + 1 < n && t[hi + 1] - t[i] <= half {
            hi += 1;
        }
        let sum: f64 = series.values[lo..=hi].iter().sum();
        out.push(sum / (hi - lo + 1) as f64);
    }
    EchoSeries::new(t.clone(), out, series.kind, series.spec.clone(), series.d)
}

/// Squared L2 distance between an echo at separation d and the
/// independent-environment limit, over a common time grid.
pub fn echo_distance_to_limit(echo_d: &EchoSeries, echo_indep: &EchoSeries) -> Result<f64> {
    if echo_d.times.len() != echo_indep.times.len()
        || echo_d
            .times
            .iter()
            .zip(&echo_indep.times)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::GridMismatch("time grids differ".into()));
    }
    Ok(echo_d
        .values
        .iter()
        .zip(&echo_indep.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Distances whose norm has fallen this far below the peak are dominated by
/// rounding noise in the echoes and are dropped before fitting.
const NORM_NOISE_CUT: f64 = 1e-8;

/// Saturation length l from the exponential decay of distance norms toward
/// the independent-environment limit. log(norm) vs d is fitted over the
/// largest contiguous window that stays within 20% of a straight line; the
/// norms are squared deviations, so the deviation itself decays with scale
/// l = −2/slope.
pub fn saturation_length(distances: &[f64], norms: &[f64]) -> Result<f64> {
    if distances.len() != norms.len() {
        return Err(Error::GridMismatch("distances vs norms".into()));
    }
    let n = distances.len();
    if n < 4 {
        return Err(Error::InvalidArgument(
            "need at least 4 distance points".into(),
        ));
    }
    if norms.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("norms must be positive".into()));
    }
    let peak = norms.iter().cloned().fold(0.0, f64::max);
    let keep = norms
        .iter()
        .take_while(|&&v| v >= peak * NORM_NOISE_CUT)
        .count()
        .max(4.min(n));
    let distances = &distances[..keep];
    let logs: Vec<f64> = norms[..keep].iter().map(|v| v.ln()).collect();

    // largest contiguous window whose log-norms deviate from their own
    // best-fit decaying line by at most 20% of the line's span; among equal
    // lengths the straightest window wins
    for len in (4..=keep).rev() {
        let mut best: Option<(f64, f64)> = None; // (dev/span, slope)
        for start in 0..=(keep - len) {
            let xs = &distances[start..start + len];
            let ys = &logs[start..start + len];
            let (b, m) = fit_line(xs, ys);
            if m >= -1e-12 {
                continue;
            }
            let span = (m * (xs[len - 1] - xs[0])).abs().max(1e-12);
            let max_dev = xs
                .iter()
                .zip(ys)
                .map(|(&x, &y)| (y - (b + m * x)).abs())
                .fold(0.0, f64::max);
            let ratio = max_dev / span;
            if ratio <= 0.2 && best.is_none_or(|(r, _)| ratio < r) {
                best = Some((ratio, m));
            }
        }
        if let Some((_, slope)) = best {
            return Ok(-2.0 / slope);
        }
    }
    Err(Error::FitFailure(
        "no contiguous window of log-norms decays along a line".into(),
    ))
}

/// Result of fitting l(λ) = c0 + c1·(c2 + ξ_eff⁻¹)^(−c3).
#[derive(Debug, Clone)]
pub struct SaturationFit {
    pub lambdas: Vec<f64>,
    pub sat_lengths: Vec<f64>,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub xi_shift: f64,
    pub residuals: Vec<f64>,
    /// (c2, c3) starting points tried before local refinement.
    pub start_grid: Vec<(f64, f64)>,
    pub converged: bool,
}

impl SaturationFit {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    pub fn predict(&self, lambda: f64) -> f64 {
        let x = inv_xi_eff(lambda, self.xi_shift);
        self.c0 + self.c1 * (self.c2 + x).powf(-self.c3)
    }

    /// Standard errors of (c0, c1, c2, c3) from the Jacobian at the fit:
    /// sqrt(s^2 diag((J^T J)^-1)) with s^2 = RSS / (n - 4).
    pub fn param_stderrs(&self) -> [f64; 4] {
        let n = self.lambdas.len();
        if n <= 4 {
            return [f64::NAN; 4];
        }
        let mut jac = DMatrix::<f64>::zeros(n, 4);
        for (i, &lam) in self.lambdas.iter().enumerate() {
            let x = inv_xi_eff(lam, self.xi_shift);
            let base = self.c2 + x;
            let pow = base.powf(-self.c3);
            jac[(i, 0)] = 1.0;
            jac[(i, 1)] = pow;
            jac[(i, 2)] = -self.c1 * self.c3 * base.powf(-self.c3 - 1.0);
            jac[(i, 3)] = -self.c1 * base.ln() * pow;
        }
        let s2 = self.residuals.iter().map(|r| r * r).sum::<f64>() / (n - 4) as f64;
        let jtj = jac.transpose() * &jac;
        match jtj.try_inverse() {
            None => [f64::NAN; 4],
            Some(inv) => [
                (s2 * inv[(0, 0)]).max(0.0).sqrt(),
                (s2 * inv[(1, 1)]).max(0.0).sqrt(),
                (s2 * inv[(2, 2)]).max(0.0).sqrt(),
                (s2 * inv[(3, 3)]).max(0.0).sqrt(),
            ],
        }
    }
}

/// ξ_eff⁻¹ = |ln(λ + shift)|: the correlation length evaluated at a field
/// shifted by the (small) back-action of the coupling, which keeps the
/// value finite at λ = 1.
fn inv_xi_eff(lambda: f64, shift: f64) -> f64 {
    (lambda + shift).ln().abs()
}

/// Fit l(λ) = c0 + c1·(c2 + ξ_eff⁻¹)^(−c3) over (λ, l) pairs: a deterministic
/// (c2, c3) grid with exact linear solves for (c0, c1), then damped
/// Gauss-Newton refinement of all four parameters from the best start.
pub fn fit_saturation_curve(lambdas: &[f64], ls: &[f64]) -> Result<SaturationFit> {
    if lambdas.len() != ls.len() {
        return Err(Error::GridMismatch("lambdas vs lengths".into()));
    }
    if lambdas.len() < 6 {
        return Err(Error::InvalidArgument("need at least 6 (λ, l) pairs".into()));
    }
    let shift = XI_EFF_SHIFT;
    let xs: Vec<f64> = lambdas.iter().map(|&l| inv_xi_eff(l, shift)).collect();

    let c2_starts = [0.05, 0.1, 0.17, 0.3, 0.5];
    let c3_starts = [1.0, 1.5, 2.0, 2.2, 2.6, 3.0];
    let mut start_grid = Vec::new();
    let mut best: Option<([f64; 4], f64)> = None;
    for &c2 in &c2_starts {
        for &c3 in &c3_starts {
            start_grid.push((c2, c3));
            let Some((c0, c1)) = linear_amplitudes(&xs, ls, c2, c3) else {
                continue;
            };
            let cost = sum_sq(&residuals(&xs, ls, &[c0, c1, c2, c3]));
            if best.as_ref().is_none_or(|(_, c)| cost < *c) {
                best = Some(([c0, c1, c2, c3], cost));
            }
        }
    }
    let (start, _) = best.ok_or_else(|| Error::FitFailure("no usable starting point".into()))?;
    let (params, converged) = levenberg_marquardt(&xs, ls, start);
    let res = residuals(&xs, ls, &params);
    Ok(SaturationFit {
        lambdas: lambdas.to_vec(),
        sat_lengths: ls.to_vec(),
        c0: params[0],
        c1: params[1],
        c2: params[2],
        c3: params[3],
        xi_shift: shift,
        residuals: res,
        start_grid,
        converged,
    })
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum()
}

fn residuals(xs: &[f64], ls: &[f64], p: &[f64; 4]) -> Vec<f64> {
    xs.iter()
        .zip(ls)
        .map(|(&x, &l)| p[0] + p[1] * (p[2] + x).powf(-p[3]) - l)
        .collect()
}

/// Best (c0, c1) for fixed (c2, c3) by linear least squares.
fn linear_amplitudes(xs: &[f64], ls: &[f64], c2: f64, c3: f64) -> Option<(f64, f64)> {
    if xs.iter().any(|&x| c2 + x <= 0.0) {
        return None;
    }
    let zs: Vec<f64> = xs.iter().map(|&x| (c2 + x).powf(-c3)).collect();
    let (c0, c1) = fit_line(&zs, ls);
    (c0.is_finite() && c1.is_finite()).then_some((c0, c1))
}

/// Damped least-squares refinement with analytic Jacobian; returns the best
/// parameters found and whether the step size converged.
fn levenberg_marquardt(xs: &[f64], ls: &[f64], start: [f64; 4]) -> ([f64; 4], bool) {
    let n = xs.len();
    let mut p = start;
    let mut mu = 1e-3;
    let mut cost = sum_sq(&residuals(xs, ls, &p));
    for _ in 0..200 {
        let r = residuals(xs, ls, &p);
        let mut jac = DMatrix::<f64>::zeros(n, 4);
        for (i, &x) in xs.iter().enumerate() {
            let base = p[2] + x;
            let pow = base.powf(-p[3]);
            jac[(i, 0)] = 1.0;
            jac[(i, 1)] = pow;
            jac[(i, 2)] = -p[1] * p[3] * base.powf(-p[3] - 1.0);
            jac[(i, 3)] = -p[1] * base.ln() * pow;
        }
        let rvec = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rvec;
        let mut step_taken = false;
        for _ in 0..12 {
            let mut damped = jtj.clone();
            for k in 0..4 {
                damped[(k, k)] += mu * jtj[(k, k)].max(1e-12);
            }
            let Some(delta) = damped.lu().solve(&(-&jtr)) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = p;
            for k in 0..4 {
                trial[k] += delta[k];
            }
            // keep the exponent away from 0 where the model degenerates into
            // c0 + c1·(1 − c3 ln(c2+x)) and (c0, c1) become collinear
            trial[2] = trial[2].clamp(1e-3, 10.0);
            trial[3] = trial[3].clamp(0.25, 6.0);
            if xs.iter().any(|&x| trial[2] + x <= 0.0) {
                mu *= 10.0;
                continue;
            }
            let trial_cost = sum_sq(&residuals(xs, ls, &trial));
            if trial_cost < cost {
                let small = delta.norm() < 1e-12 * (1.0 + p.iter().map(|v| v * v).sum::<f64>().sqrt());
                p = trial;
                cost = trial_cost;
                mu = (mu * 0.3).max(1e-12);
                step_taken = true;
                if small {
                    return (p, true);
                }
                break;
            }
            mu *= 10.0;
        }
        if !step_taken {
            return (p, true); // no downhill direction left at any damping
        }
    }
    (p, false)
}

/// Upper envelope of a fast-oscillating series: local maxima over sliding
/// windows of about two fast periods, linearly interpolated back onto the
/// original grid.
pub fn envelope(series: &EchoSeries, fast_freq_hint: f64) -> Result<EchoSeries> {
    if !(fast_freq_hint > 0.0) {
        return Err(Error::InvalidArgument(
            "envelope needs a positive frequency hint".into(),
        ));
    }
    let window = 2.0 * std::f64::consts::TAU / fast_freq_hint;
    let t = &series.times;
    let min_dt = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if window < min_dt {
        return Err(Error::InvalidArgument(format!(
            "envelope window {window} below grid spacing {min_dt}"
        )));
    }

    // anchor = argmax within each consecutive window
    let mut anchors: Vec<(f64, f64)> = Vec::new();
    let mut start = 0usize;
    while start < t.len() {
        let mut end = start;
        while end + 1 < t.len() && t[end + 1] - t[start] < window {
            end += 1;
        }
        let (mut bt, mut bv) = (t[start], series.values[start]);
        for i in start..=end {
            if series.values[i] > bv {
                bv = series.values[i];
                bt = t[i];
            }
        }
        anchors.push((bt, bv));
        start = end + 1;
    }

    let values = t
        .iter()
        .map(|&ti| interp_anchors(&anchors, ti))
        .collect();
    EchoSeries::new(t.clone(), values, series.kind, series.spec.clone(), series.d)
}

fn interp_anchors(anchors: &[(f64, f64)], ti: f64) -> f64 {
    if ti <= anchors[0].0 {
        return anchors[0].1;
    }
    if ti >= anchors[anchors.len() - 1].0 {
        return anchors[anchors.len() - 1].1;
    }
    let j = anchors.partition_point(|&(t, _)| t <= ti);
    let (t0, v0) = anchors[j - 1];
    let (t1, v1) = anchors[j];
    v0 + (v1 - v0) * (ti - t0) / (t1 - t0)
}

/// First revival of an envelope and the peaks that follow it.
#[derive(Debug, Clone, PartialEq)]
pub struct RevivalRecord {
    pub d: usize,
    pub t_r: f64,
    pub l_r: f64,
    /// Qualifying peak times after t_r.
    pub peak_times: Vec<f64>,
}

/// Peaks of an envelope series after its initial decay, keeping only maxima
/// whose prominence exceeds the threshold. `None` if nothing qualifies.
pub fn find_revivals(env: &EchoSeries, prominence: f64) -> Option<RevivalRecord> {
    let v = &env.values;
    let n = v.len();
    if n < 3 {
        return None;
    }
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] && peak_prominence(v, i) > prominence {
            peaks.push(i);
        }
    }
    let first = *peaks.first()?;
    Some(RevivalRecord {
        d: env.d,
        t_r: env.times[first],
        l_r: v[first],
        peak_times: peaks[1..].iter().map(|&i| env.times[i]).collect(),
    })
}

/// Height of peak i above the higher of the two valley floors that separate
/// it from taller terrain (or the series ends).
fn peak_prominence(v: &[f64], i: usize) -> f64 {
    let mut left_min = v[i];
    let mut j = i;
    while j > 0 {
        j -= 1;
        left_min = left_min.min(v[j]);
        if v[j] > v[i] {
            break;
        }
    }
    let mut right_min = v[i];
    let mut j = i;
    while j + 1 < v.len() {
        j += 1;
        right_min = right_min.min(v[j]);
        if v[j] > v[i] {
            break;
        }
    }
    v[i] - left_min.max(right_min)
}
