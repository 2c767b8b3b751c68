//! Two-qubit reduced density matrix evolution and entanglement observables
//! for the solvable Bell-like family.
//!
//! Initial states are mixtures rho_0 = p |phi><phi| + (1-p) I/4 with
//! |phi> = alpha|00> + beta|11> (phi family) or alpha|01> + beta|10> (psi
//! family). Under the chain coupling the diagonal stays constant and the one
//! relevant off-diagonal pair decays by sqrt(L). The echo fixes only the
//! modulus of the decoherence factor; the phase is kept at its initial value,
//! which leaves purity, negativity and ESD events untouched.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::echo::{EchoKind, EchoSeries};
use crate::error::{Error, Result};

/// Which Bell-like superposition the pure part of the state is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellFamily {
    /// alpha|00> + beta|11>, damped by L_00,11
    Phi,
    /// alpha|01> + beta|10>, damped by L_01,10
    Psi,
}

/// rho_0 = p |phi><phi| + (1 - p) I/4.
#[derive(Debug, Clone, Copy)]
pub struct BellFamilyState {
    pub family: BellFamily,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub p: f64,
}

impl BellFamilyState {
    pub fn new(family: BellFamily, alpha: Complex64, beta: Complex64, p: f64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "|alpha|^2 + |beta|^2 = {norm}, expected 1"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} outside [0,1]")));
        }
        Ok(BellFamilyState {
            family,
            alpha,
            beta,
            p,
        })
    }

    /// |alpha beta|.
    pub fn alpha_beta(&self) -> f64 {
        (self.alpha * self.beta).norm()
    }

    /// Indices (row, col) of the off-diagonal element damped by the echo, in
    /// the basis {|00>, |01>, |10>, |11>}.
    fn offdiag_indices(&self) -> (usize, usize) {
        match self.family {
            BellFamily::Phi => (0, 3),
            BellFamily::Psi => (1, 2),
        }
    }

    /// Initial 4x4 density matrix.
    pub fn initial_density(&self) -> DensityMatrix4 {
        let mut m = DMatrix::<Complex64>::identity(4, 4)
            .map(|z| z * (1.0 - self.p) * 0.25);
        let (i, j) = self.offdiag_indices();
        m[(i, i)] += Complex64::new(self.p * self.alpha.norm_sqr(), 0.0);
        m[(j, j)] += Complex64::new(self.p * self.beta.norm_sqr(), 0.0);
        let off = self.alpha * self.beta.conj() * self.p;
        m[(i, j)] += off;
        m[(j, i)] += off.conj();
        DensityMatrix4 { matrix: m }
    }
}

/// 4x4 two-qubit density matrix in the basis {|00>, |01>, |10>, |11>}.
#[derive(Debug, Clone)]
pub struct DensityMatrix4 {
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix4 {
    /// Hermiticity / trace / positivity diagnostics: (herm, |tr-1|, min eig).
    pub fn diagnostics(&self) -> (f64, f64, f64) {
        let herm = (&self.matrix - self.matrix.adjoint())
            .map(|z| z.norm())
            .max();
        let tr = (self.matrix.trace() - Complex64::new(1.0, 0.0)).norm();
        let min_eig = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .min();
        (herm, tr, min_eig)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Partial transpose over qubit B: (ab, cd) -> (ad, cb).
    pub fn partial_transpose(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::<Complex64>::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        out[(2 * a + d, 2 * c + b)] = self.matrix[(2 * a + b, 2 * c + d)];
                    }
                }
            }
        }
        out
    }

    /// Negativity as |sum of negative eigenvalues| of the partial transpose.
    pub fn negativity(&self) -> f64 {
        let eigs = self.partial_transpose().symmetric_eigen().eigenvalues;
        -eigs.iter().filter(|&&e| e < 0.0).sum::<f64>()
    }
}

/// Evolve the state along an echo series; the diagonal is untouched and the
/// off-diagonal pair is scaled by sqrt(L(t)).
pub fn evolve_state(state: &BellFamilyState, echo: &EchoSeries) -> Result<Vec<DensityMatrix4>> {
    let compatible = matches!(
        (state.family, echo.kind),
        (BellFamily::Phi, EchoKind::L00_11)
            | (BellFamily::Phi, EchoKind::IndependentProduct)
            | (BellFamily::Psi, EchoKind::L01_10)
            | (BellFamily::Psi, EchoKind::IndependentProduct)
    );
    if !compatible {
        return Err(Error::FamilyMismatch(format!(
            "family {:?} with echo kind {}",
            state.family, echo.kind
        )));
    }
    let rho0 = state.initial_density();
    let (i, j) = state.offdiag_indices();
    Ok(echo
        .values
        .iter()
        .map(|&l| {
            let mut m = rho0.matrix.clone();
            let s = l.max(0.0).sqrt();
            m[(i, j)] *= s;
            m[(j, i)] *= s;
            DensityMatrix4 { matrix: m }
        })
        .collect())
}

/// Purity as a function of the echo:
/// Tr rho^2 = (1 - p^2)/4 + p^2 [1 - 2 |alpha beta|^2 (1 - L)].
pub fn purity(state: &BellFamilyState, l: f64) -> f64 {
    let ab2 = state.alpha_beta().powi(2);
    let p2 = state.p * state.p;
    (1.0 - p2) / 4.0 + p2 * (1.0 - 2.0 * ab2 * (1.0 - l))
}

/// Negativity as a function of the echo:
/// N = max{0, p |alpha beta| sqrt(L) - (1 - p)/4}.
pub fn negativity(state: &BellFamilyState, l: f64) -> f64 {
    (state.p * state.alpha_beta() * l.max(0.0).sqrt() - (1.0 - state.p) / 4.0).max(0.0)
}

/// One interval of vanished entanglement: sudden death at `death`, sudden
/// revival at `revival` if entanglement returns within the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsdEvent {
    pub death: f64,
    pub revival: Option<f64>,
}

/// Intervals where the negativity is zero along the echo series, with the
/// entry/exit crossings interpolated linearly between grid points.
pub fn esd_events(state: &BellFamilyState, echo: &EchoSeries) -> Vec<EsdEvent> {
    // q(t) > 0 exactly when the state is entangled
    let q: Vec<f64> = echo
        .values
        .iter()
        .map(|&l| state.p * state.alpha_beta() * l.max(0.0).sqrt() - (1.0 - state.p) / 4.0)
        .collect();
    let t = &echo.times;
    let cross = |i: usize| -> f64 {
        // linear interpolation of the zero of q between t[i] and t[i+1]
        let (q0, q1) = (q[i], q[i + 1]);
        if (q1 - q0).abs() < 1e-300 {
            t[i]
        } else {
            t[i] + (t[i + 1] - t[i]) * (q0 / (q0 - q1))
        }
    };
    let mut events = Vec::new();
    let mut dead_since: Option<f64> = if q[0] <= 0.0 { Some(t[0]) } else { None };
    for i in 0..q.len() - 1 {
        match (q[i] > 0.0, q[i + 1] > 0.0) {
            (true, false) => dead_since = Some(cross(i)),
            (false, true) => {
                if let Some(death) = dead_since.take() {
                    events.push(EsdEvent {
                        death,
                        revival: Some(cross(i)),
                    });
                }
            }
            _ => {}
        }
    }
    if let Some(death) = dead_since {
        events.push(EsdEvent {
            death,
            revival: None,
        });
    }
    events
}
