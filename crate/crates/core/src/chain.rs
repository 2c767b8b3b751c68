//! Chain specification and the quadratic-fermion form of the effective
//! Hamiltonians H_ab.
//!
//! The spin chain is an XY model with periodic boundary conditions; qubit A
//! couples to site 0 and qubit B to site d. After the Jordan-Wigner map the
//! effective Hamiltonians are quadratic in fermion operators with a
//! site-dependent transverse field. The cyclic quadratic fermion form is the
//! defining model here, for the determinant formulas and for the Fock-space
//! oracle alike.

use nalgebra::DMatrix;
use std::fmt;

use crate::error::{Error, Result};

/// Which two-qubit basis state |ab> selects the effective Hamiltonian H_ab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitLabel {
    ZeroZero,
    ZeroOne,
    OneZero,
    OneOne,
}

impl QubitLabel {
    /// (a, b) occupation pair.
    pub fn ab(self) -> (u8, u8) {
        match self {
            QubitLabel::ZeroZero => (0, 0),
            QubitLabel::ZeroOne => (0, 1),
            QubitLabel::OneZero => (1, 0),
            QubitLabel::OneOne => (1, 1),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(QubitLabel::ZeroZero),
            "01" => Ok(QubitLabel::ZeroOne),
            "10" => Ok(QubitLabel::OneZero),
            "11" => Ok(QubitLabel::OneOne),
            other => Err(Error::InvalidSpec(format!("unknown label '{other}'"))),
        }
    }
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.ab();
        write!(f, "{a}{b}")
    }
}

/// Full parameterization of one effective chain Hamiltonian.
///
/// Qubit A always sits at site 0; `site_b` is the separation d. Energy units:
/// chain exchange coupling = 1, hbar = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub coupling: f64,
    pub site_b: usize,
    pub label: QubitLabel,
}

impl ChainSpec {
    pub fn new(
        n_sites: usize,
        gamma: f64,
        lambda: f64,
        coupling: f64,
        site_b: usize,
        label: QubitLabel,
    ) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidSpec(format!("n_sites = {n_sites} < 2")));
        }
        if site_b >= n_sites {
            return Err(Error::InvalidSpec(format!(
                "site_b = {site_b} out of range for {n_sites} sites"
            )));
        }
        if coupling < 0.0 {
            return Err(Error::InvalidSpec(format!("coupling = {coupling} < 0")));
        }
        if !gamma.is_finite() || !lambda.is_finite() || !coupling.is_finite() {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        Ok(ChainSpec {
            n_sites,
            gamma,
            lambda,
            coupling,
            site_b,
            label,
        })
    }

    /// Same chain, different qubit-state label.
    pub fn with_label(&self, label: QubitLabel) -> Self {
        ChainSpec { label, ..self.clone() }
    }

    /// The unperturbed chain (label 00).
    pub fn unperturbed(&self) -> Self {
        self.with_label(QubitLabel::ZeroZero)
    }

    /// Site-dependent field lambda_j = lambda + g (a d_{j,0} + b d_{j,d}).
    pub fn field_profile(&self) -> Vec<f64> {
        let (a, b) = self.label.ab();
        let mut profile = vec![self.lambda; self.n_sites];
        profile[0] += self.coupling * a as f64;
        profile[self.site_b] += self.coupling * b as f64;
        profile
    }
}

/// Quadratic fermion Hamiltonian
///   H = sum_ij A_ij c+_i c_j + 1/2 sum_ij (B_ij c+_i c+_j - B_ij c_i c_j) + const,
/// with A symmetric and B antisymmetric, both real, both exact by
/// construction.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    pub a_mat: DMatrix<f64>,
    pub b_mat: DMatrix<f64>,
    pub const_shift: f64,
}

impl QuadraticHamiltonian {
    pub fn n_sites(&self) -> usize {
        self.a_mat.nrows()
    }
}

/// Build the quadratic fermion form of H_ab with cyclic fermionic couplings.
pub fn build_hamiltonian(spec: &ChainSpec) -> QuadraticHamiltonian {
    let n = spec.n_sites;
    let profile = spec.field_profile();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let jp = (j + 1) % n;
        a[(j, jp)] += -1.0;
        a[(jp, j)] += -1.0;
        b[(j, jp)] += -spec.gamma;
        b[(jp, j)] += spec.gamma;
        a[(j, j)] = -2.0 * profile[j];
    }
    let const_shift = profile.iter().sum();
    QuadraticHamiltonian {
        a_mat: a,
        b_mat: b,
        const_shift,
    }
}
