//! Loschmidt echoes via N x N determinants.
//!
//! Survival echo: L_00,ab(t) = |det(g + h e^{i Lambda t})|^2, with (g, h) the
//! static map from the unperturbed basis to the H_ab basis. Exchange echo:
//! L_01,10(t) = |det(g' tau^-d g'+ + h' tau^d h'+)| with (g', h') the
//! time-dependent map and tau the diagonal of translation eigenvalues.
//! Every time point is an independent determinant, evaluated through an LU
//! log-magnitude accumulation so that N = 500 stays finite.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bogoliubov::{dynamic_map, relate_bases, relate_momentum, svd_regularize};
use crate::chain::{ChainSpec, QubitLabel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::modes::{diagonalize_spec, momentum_modes, ModeBasis, MomentumBasis};

/// Condition number of the static g above which the survival echo routes
/// through the SVD-regularized evaluation.
pub const CONDITION_SWITCH: f64 = 1e8;

/// Values outside [0,1] by more than this raise a diagnostics error rather
/// than being clamped.
pub const CLAMP_TOLERANCE: f64 = 1e-6;

/// Which echo a series holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EchoKind {
    L00_01,
    L00_10,
    L00_11,
    L01_10,
    SingleQubit { g_eff: f64 },
    IndependentProduct,
}

impl std::fmt::Display for EchoKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EchoKind::L00_01 => write!(f, "L00_01"),
            EchoKind::L00_10 => write!(f, "L00_10"),
            EchoKind::L00_11 => write!(f, "L00_11"),
            EchoKind::L01_10 => write!(f, "L01_10"),
            EchoKind::SingleQubit { g_eff } => write!(f, "single_qubit(g_eff={g_eff})"),
            EchoKind::IndependentProduct => write!(f, "independent_product"),
        }
    }
}

/// Echo values over a time grid, with full provenance.
#[derive(Debug, Clone)]
pub struct EchoSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: EchoKind,
    pub spec: ChainSpec,
    pub d: usize,
}

impl EchoSeries {
    /// Validate and clamp raw values into an echo series.
    pub fn new(
        times: Vec<f64>,
        raw: Vec<f64>,
        kind: EchoKind,
        spec: ChainSpec,
        d: usize,
    ) -> Result<Self> {
        if times.len() != raw.len() {
            return Err(Error::GridMismatch(format!(
                "{} times vs {} values",
                times.len(),
                raw.len()
            )));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(
                    "times must be strictly increasing".into(),
                ));
            }
        }
        let mut values = Vec::with_capacity(raw.len());
        for (&t, &v) in times.iter().zip(&raw) {
            if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&v) {
                return Err(Error::EchoOutOfRange { t, value: v });
            }
            values.push(v.clamp(0.0, 1.0));
        }
        Ok(EchoSeries {
            times,
            values,
            kind,
            spec,
            d,
        })
    }
}

/// Uniform time grid 0, dt, 2 dt, ... up to and including t_max.
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    assert!(t_max > 0.0 && dt > 0.0);
    let steps = (t_max / dt + 1e-9).floor() as usize;
    (0..=steps).map(|i| i as f64 * dt).collect()
}

/// Default analysis grid: t in [0, 10], dt = 0.05.
pub fn default_time_grid() -> Vec<f64> {
    time_grid(10.0, 0.05)
}

fn survival_kind(label: QubitLabel) -> Result<EchoKind> {
    match label {
        QubitLabel::ZeroOne => Ok(EchoKind::L00_01),
        QubitLabel::OneZero => Ok(EchoKind::L00_10),
        QubitLabel::OneOne => Ok(EchoKind::L00_11),
        QubitLabel::ZeroZero => Err(Error::InvalidArgument(
            "survival echo needs a perturbed label (01, 10 or 11)".into(),
        )),
    }
}

/// Survival echo L_00,ab(t) for the perturbed label of `spec`.
pub fn echo_survival(spec: &ChainSpec, times: &[f64]) -> Result<EchoSeries> {
    let kind = survival_kind(spec.label)?;
    let raw = survival_values(spec, times)?;
    EchoSeries::new(times.to_vec(), raw, kind, spec.clone(), spec.site_b)
}

/// Survival echo from already-computed unperturbed and perturbed bases.
pub fn echo_survival_from(
    spec: &ChainSpec,
    b0: &ModeBasis,
    b1: &ModeBasis,
    times: &[f64],
) -> Result<EchoSeries> {
    let kind = survival_kind(spec.label)?;
    let raw = survival_values_from(b0, b1, times)?;
    EchoSeries::new(times.to_vec(), raw, kind, spec.clone(), spec.site_b)
}

fn survival_values(spec: &ChainSpec, times: &[f64]) -> Result<Vec<f64>> {
    let b0 = diagonalize_spec(&spec.unperturbed())?;
    let b1 = diagonalize_spec(spec)?;
    survival_values_from(&b0, &b1, times)
}

fn survival_values_from(b0: &ModeBasis, b1: &ModeBasis, times: &[f64]) -> Result<Vec<f64>> {
    let map = relate_bases(b0, b1)?;
    let (g_re, _) = map.real_parts();
    let energies = b1.energies.clone();

    if linalg::condition_number(&g_re) > CONDITION_SWITCH {
        let reg = svd_regularize(&map);
        Ok(times
            .par_iter()
            .map(|&t| reg.echo_value(&energies, t))
            .collect())
    } else {
        Ok(times
            .par_iter()
            .map(|&t| {
                let phases = energies.map(|e| e * t);
                let ep = linalg::phase_diagonal(&phases);
                let m = &map.gmat + &map.hmat * ep;
                linalg::abs_det_squared(&m)
            })
            .collect())
    }
}

/// Exchange echo L_01,10(t) for qubit separation d.
pub fn echo_exchange(spec: &ChainSpec, d: usize, times: &[f64]) -> Result<EchoSeries> {
    if d >= spec.n_sites {
        return Err(Error::InvalidArgument(format!(
            "d = {d} out of range for {} sites",
            spec.n_sites
        )));
    }
    let spec10 = ChainSpec::new(
        spec.n_sites,
        spec.gamma,
        spec.lambda,
        spec.coupling,
        d,
        QubitLabel::OneZero,
    )?;
    let mom = momentum_modes(&spec10.unperturbed())?;
    let b1 = diagonalize_spec(&spec10)?;
    exchange_from(spec10, d, &mom, &b1, times)
}

/// Exchange echo from an already-computed momentum basis of the unperturbed
/// chain and real basis of the single-perturbation (label 10) chain.
pub fn echo_exchange_from(
    spec: &ChainSpec,
    d: usize,
    mom: &MomentumBasis,
    b1: &ModeBasis,
    times: &[f64],
) -> Result<EchoSeries> {
    let spec10 = ChainSpec::new(
        spec.n_sites,
        spec.gamma,
        spec.lambda,
        spec.coupling,
        d,
        QubitLabel::OneZero,
    )?;
    exchange_from(spec10, d, mom, b1, times)
}

fn exchange_from(
    spec10: ChainSpec,
    d: usize,
    mom: &MomentumBasis,
    b1: &ModeBasis,
    times: &[f64],
) -> Result<EchoSeries> {
    let map = relate_momentum(mom, b1)?;
    let energies = b1.energies.clone();
    let tau_minus =
        DMatrix::<Complex64>::from_diagonal(&mom.translation_phases(-(d as i64)));
    let tau_plus = DMatrix::<Complex64>::from_diagonal(&mom.translation_phases(d as i64));

    let raw: Vec<f64> = times
        .par_iter()
        .map(|&t| {
            let dm = dynamic_map(&map, &energies, t)?;
            let m = &dm.gmat * &tau_minus * dm.gmat.adjoint()
                + &dm.hmat * &tau_plus * dm.hmat.adjoint();
            Ok(linalg::log_abs_det(&m).exp())
        })
        .collect::<Result<_>>()?;
    EchoSeries::new(times.to_vec(), raw, EchoKind::L01_10, spec10, d)
}

/// Single-qubit echo L_0,1(t): one perturbed site with coupling `g_eff`.
pub fn echo_single_qubit(spec: &ChainSpec, g_eff: f64, times: &[f64]) -> Result<EchoSeries> {
    let one_site = ChainSpec::new(
        spec.n_sites,
        spec.gamma,
        spec.lambda,
        g_eff,
        spec.site_b,
        QubitLabel::OneZero,
    )?;
    let raw = survival_values(&one_site, times)?;
    EchoSeries::new(
        times.to_vec(),
        raw,
        EchoKind::SingleQubit { g_eff },
        one_site,
        0,
    )
}

/// Independent-environment baseline: L_0,1(g)^2, the long-distance limit of
/// both two-qubit echoes.
pub fn independent_product(spec: &ChainSpec, times: &[f64]) -> Result<EchoSeries> {
    let single = echo_single_qubit(spec, spec.coupling, times)?;
    let raw = single.values.iter().map(|v| v * v).collect();
    EchoSeries::new(
        times.to_vec(),
        raw,
        EchoKind::IndependentProduct,
        single.spec.clone(),
        0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(n: usize, gamma: f64, lambda: f64, g: f64, d: usize, label: QubitLabel) -> ChainSpec {
        ChainSpec::new(n, gamma, lambda, g, d, label).unwrap()
    }

    #[test]
    fn zero_coupling_means_no_decoherence() {
        let s = spec(8, 1.0, 0.7, 0.0, 3, QubitLabel::OneOne);
        let times = time_grid(5.0, 0.5);
        let echo = echo_survival(&s, &times).unwrap();
        for &v in &echo.values {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn echo_is_one_at_time_zero() {
        let s = spec(10, 1.0, 0.5, 0.8, 4, QubitLabel::OneOne);
        let echo = echo_survival(&s, &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(echo.values[0], 1.0, epsilon = 1e-10);
        let ex = echo_exchange(&s, 4, &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(ex.values[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn exchange_echo_trivial_at_zero_distance() {
        let s = spec(8, 1.0, 0.5, 0.6, 0, QubitLabel::OneZero);
        let times = time_grid(6.0, 0.3);
        let echo = echo_exchange(&s, 0, &times).unwrap();
        for &v in &echo.values {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn exchange_symmetric_under_role_swap() {
        // tau^{+d} <-> tau^{-d} is complex conjugation of the matrix: values equal
        let s = spec(8, 1.0, 0.5, 0.4, 3, QubitLabel::OneZero);
        let times = time_grid(4.0, 0.5);
        let mom = momentum_modes(&s.unperturbed()).unwrap();
        let b1 = diagonalize_spec(&s).unwrap();
        let map = relate_momentum(&mom, &b1).unwrap();
        let tp = DMatrix::<Complex64>::from_diagonal(&mom.translation_phases(3));
        let tm = DMatrix::<Complex64>::from_diagonal(&mom.translation_phases(-3));
        for &t in &times {
            let dm = dynamic_map(&map, &b1.energies, t).unwrap();
            let m1 = &dm.gmat * &tm * dm.gmat.adjoint() + &dm.hmat * &tp * dm.hmat.adjoint();
            let m2 = &dm.gmat * &tp * dm.gmat.adjoint() + &dm.hmat * &tm * dm.hmat.adjoint();
            let v1 = linalg::log_abs_det(&m1).exp();
            let v2 = linalg::log_abs_det(&m2).exp();
            assert_abs_diff_eq!(v1, v2, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_distance_survival_equals_doubled_single_qubit() {
        // L_00,11 at d=0 equals the single-qubit echo at 2g
        let g = 0.37;
        let s = spec(10, 1.0, 0.8, g, 0, QubitLabel::OneOne);
        let times = time_grid(8.0, 0.25);
        let both = echo_survival(&s, &times).unwrap();
        let single = echo_single_qubit(&s, 2.0 * g, &times).unwrap();
        for (a, b) in both.values.iter().zip(&single.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn independent_product_is_square_of_single() {
        let s = spec(10, 1.0, 0.8, 0.2, 0, QubitLabel::OneOne);
        let times = time_grid(5.0, 0.5);
        let single = echo_single_qubit(&s, 0.2, &times).unwrap();
        let indep = independent_product(&s, &times).unwrap();
        for (a, b) in indep.values.iter().zip(&single.values) {
            assert_abs_diff_eq!(*a, b * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn survival_rejects_unperturbed_label() {
        let s = spec(8, 1.0, 0.5, 0.3, 2, QubitLabel::ZeroZero);
        assert!(echo_survival(&s, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn time_grid_includes_endpoints() {
        let g = time_grid(10.0, 0.05);
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.0);
        assert_abs_diff_eq!(g[200], 10.0, epsilon = 1e-12);
    }
}
