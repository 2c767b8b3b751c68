//! Quasiparticle mode bases of quadratic fermion Hamiltonians.
//!
//! `diagonalize` produces the real normal modes (energies, Phi, Psi); the
//! mode operators are eta_k = sum_j [w_kj c_j + x_kj c+_j] with
//! w = (Phi + Psi)/2 and x = (Phi - Psi)/2. `momentum_modes` recombines
//! degenerate modes of the translation-invariant chain into complex momentum
//! eigenmodes labeled by integer k.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chain::{build_hamiltonian, ChainSpec, QuadraticHamiltonian, QubitLabel};
use crate::error::{Error, Result};
use crate::linalg;

/// Energies with |Lambda_k| below this are treated as zero modes.
pub const TOL_ZERO: f64 = 1e-10;

/// Real quasiparticle basis: H = sum_k Lambda_k eta+_k eta_k + E_g.
///
/// Rows of `phi` and `psi` are the mode vectors; Phi (A - B) = Lambda Psi and
/// Psi (A + B) = Lambda Phi. Energies are sorted non-decreasing.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub energies: DVector<f64>,
    pub phi: DMatrix<f64>,
    pub psi: DMatrix<f64>,
}

impl ModeBasis {
    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    /// Annihilation-side coefficients w = (Phi + Psi)/2 (rows are modes).
    pub fn w_coeffs(&self) -> DMatrix<f64> {
        (&self.phi + &self.psi).map(|x| 0.5 * x)
    }

    /// Creation-side coefficients x = (Phi - Psi)/2 (rows are modes).
    pub fn x_coeffs(&self) -> DMatrix<f64> {
        (&self.phi - &self.psi).map(|x| 0.5 * x)
    }

    /// Rebuild M = A - B from (Lambda, Phi, Psi): M = Phi^T Lambda Psi.
    pub fn reconstruct(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let lambda = DMatrix::from_diagonal(&self.energies);
        let m = self.phi.transpose() * lambda * &self.psi;
        let a = (&m + m.transpose()).map(|x| 0.5 * x);
        let b = (m.transpose() - &m).map(|x| 0.5 * x);
        (a, b)
    }

    /// Max-norm residual of the reconstruction against the source Hamiltonian.
    pub fn reconstruction_residual(&self, h: &QuadraticHamiltonian) -> f64 {
        let (a, b) = self.reconstruct();
        let da = (&a - &h.a_mat).amax();
        let db = (&b - &h.b_mat).amax();
        da.max(db)
    }

    /// Ground-state energy of the full Hamiltonian including its constant:
    /// E_g = (tr A - sum Lambda)/2 + const_shift.
    pub fn ground_energy(&self, h: &QuadraticHamiltonian) -> f64 {
        0.5 * (h.a_mat.trace() - self.energies.sum()) + h.const_shift
    }

    /// Orthogonality residual max(|Phi Phi^T - I|, |Psi Psi^T - I|).
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.n_sites();
        let eye = DMatrix::<f64>::identity(n, n);
        let ra = (&self.phi * self.phi.transpose() - &eye).amax();
        let rb = (&self.psi * self.psi.transpose() - &eye).amax();
        ra.max(rb)
    }
}

/// Diagonalize a quadratic Hamiltonian via the SVD of M = A - B.
///
/// M = U S V^T gives Phi = U^T, Psi = V^T, Lambda = S: the two symmetric
/// eigenproblems (A-B)(A+B) = M M^T and (A+B)(A-B) = M^T M are solved in one
/// factorization, and the relative signs of Phi and Psi come out consistent
/// with the reconstruction invariant.
pub fn diagonalize(h: &QuadraticHamiltonian) -> Result<ModeBasis> {
    let n = h.n_sites();
    let m = &h.a_mat - &h.b_mat;
    let svd = m.clone().svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| Error::Diagonalization("SVD produced no U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Diagonalization("SVD produced no V^T".into()))?;
    let sv = svd.singular_values;

    // sort ascending by energy
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));

    let mut energies = DVector::<f64>::zeros(n);
    let mut phi = DMatrix::<f64>::zeros(n, n);
    let mut psi = DMatrix::<f64>::zeros(n, n);
    for (row, &k) in order.iter().enumerate() {
        energies[row] = sv[k];
        for j in 0..n {
            phi[(row, j)] = u[(j, k)];
            psi[(row, j)] = v_t[(k, j)];
        }
        // zero modes: the eta vs eta+ ambiguity is fixed by making the
        // diagonal entry of Phi positive
        if energies[row] < TOL_ZERO && phi[(row, row)] < 0.0 {
            for j in 0..n {
                phi[(row, j)] = -phi[(row, j)];
            }
        }
    }
    Ok(ModeBasis { energies, phi, psi })
}

/// Shorthand: build and diagonalize in one call.
pub fn diagonalize_spec(spec: &ChainSpec) -> Result<ModeBasis> {
    diagonalize(&build_hamiltonian(spec))
}

/// Complex momentum-labeled quasiparticle basis of the unperturbed chain.
///
/// Modes satisfy T eta+_k T^-1 = exp(2 pi i k / N) eta+_k with k in 1..=N,
/// where T is the one-site translation c_j -> c_{j+1}. Rows of `wmat`/`xmat`
/// are the complex annihilation/creation-side coefficients.
#[derive(Debug, Clone)]
pub struct MomentumBasis {
    pub energies: DVector<f64>,
    pub wmat: DMatrix<Complex64>,
    pub xmat: DMatrix<Complex64>,
    pub momenta: Vec<usize>,
}

impl MomentumBasis {
    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    /// Translation phases exp(2 pi i k d / N) as a diagonal-ready vector.
    pub fn translation_phases(&self, d: i64) -> DVector<Complex64> {
        let n = self.n_sites() as f64;
        DVector::from_iterator(
            self.n_sites(),
            self.momenta.iter().map(|&k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64) * (d as f64) / n;
                Complex64::new(0.0, theta).exp()
            }),
        )
    }
}

/// Momentum eigenmodes of the translation-invariant chain (label 00).
///
/// Degenerate energy groups of the real basis are recombined by
/// diagonalizing the action of the one-site shift within each group.
pub fn momentum_modes(spec: &ChainSpec) -> Result<MomentumBasis> {
    if spec.label != QubitLabel::ZeroZero {
        return Err(Error::NotTranslationInvariant);
    }
    let basis = diagonalize_spec(spec)?;
    momentum_modes_from(spec, &basis)
}

/// Same as [`momentum_modes`] but starting from an already-computed real
/// basis of the unperturbed chain.
pub fn momentum_modes_from(spec: &ChainSpec, basis: &ModeBasis) -> Result<MomentumBasis> {
    if spec.label != QubitLabel::ZeroZero {
        return Err(Error::NotTranslationInvariant);
    }
    if basis.n_sites() != spec.n_sites {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} sites, spec {}",
            basis.n_sites(),
            spec.n_sites
        )));
    }
    let n = spec.n_sites;
    let w = basis.w_coeffs();
    let x = basis.x_coeffs();

    // shifted coefficients: T eta T^-1 = sum_j w_j c_{j+1}, so the shifted
    // row has entry w_{j-1} at site j
    let shift_row = |row: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(n, |j, _| row[(j + n - 1) % n])
    };

    let group_tol = 1e-8 * (1.0 + basis.energies.amax());
    let mut wmat = DMatrix::<Complex64>::zeros(n, n);
    let mut xmat = DMatrix::<Complex64>::zeros(n, n);
    let mut momenta = vec![0usize; n];
    let mut energies = DVector::<f64>::zeros(n);

    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && basis.energies[j] - basis.energies[j - 1] < group_tol {
            j += 1;
        }
        let dim = j - i;
        // translation action within the degenerate group:
        // T eta_a T^-1 = sum_b W_ab eta_b with
        // W_ab = <u_b, shift(u_a)> (real modes, real inner product)
        let mut wact = DMatrix::<Complex64>::zeros(dim, dim);
        for a in 0..dim {
            let wa: DVector<f64> = w.row(i + a).transpose();
            let xa: DVector<f64> = x.row(i + a).transpose();
            let swa = shift_row(&wa);
            let sxa = shift_row(&xa);
            for b in 0..dim {
                let wb: DVector<f64> = w.row(i + b).transpose();
                let xb: DVector<f64> = x.row(i + b).transpose();
                let overlap = swa.dot(&wb) + sxa.dot(&xb);
                wact[(a, b)] = Complex64::new(overlap, 0.0);
            }
        }
        // combos eta~ = sum_a z_a eta_a transform with W^T: diagonalize it
        let (mus, zvecs) = linalg::diagonalize_unitary(&wact.transpose())?;
        for c in 0..dim {
            let z = zvecs.column(c);
            let row = i + c;
            for site in 0..n {
                let mut wv = Complex64::new(0.0, 0.0);
                let mut xv = Complex64::new(0.0, 0.0);
                for a in 0..dim {
                    wv += z[a] * Complex64::new(w[(i + a, site)], 0.0);
                    xv += z[a] * Complex64::new(x[(i + a, site)], 0.0);
                }
                wmat[(row, site)] = wv;
                xmat[(row, site)] = xv;
            }
            energies[row] = basis.energies[row];
            // T eta~+ T^-1 = mu* eta~+ = exp(2 pi i k/N) eta~+
            let phase = mus[c].conj().arg();
            let mut kf = phase * (n as f64) / (2.0 * std::f64::consts::PI);
            if kf < 0.5 {
                kf += n as f64;
            }
            let k = kf.round() as usize;
            let resid = (kf - k as f64).abs();
            if resid > 1e-6 || k == 0 || k > n {
                return Err(Error::Diagonalization(format!(
                    "momentum label not near an integer: k = {kf}"
                )));
            }
            momenta[row] = k;
        }
        i = j;
    }
    Ok(MomentumBasis {
        energies,
        wmat,
        xmat,
        momenta,
    })
}
