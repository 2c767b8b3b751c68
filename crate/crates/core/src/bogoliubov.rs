//! Bogoliubov maps between quasiparticle bases.
//!
//! A map (g, h) expresses the source modes in terms of the target modes:
//! eta^src_j = sum_k g_jk eta^tgt_k + h_jk eta^tgt+_k. Static maps between
//! real bases are real; maps out of the momentum basis, and the
//! time-dependent maps of the exchange echo, are complex.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::modes::{ModeBasis, MomentumBasis};

/// Relative threshold below which a singular value of g is treated as zero
/// and the index is particle-hole swapped.
pub const SINGULAR_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    StaticReal,
    StaticComplex,
    Dynamic { t: f64 },
}

/// Canonical transformation pair (g, h) between two mode bases of equal N.
#[derive(Debug, Clone)]
pub struct BogoliubovMap {
    pub gmat: DMatrix<Complex64>,
    pub hmat: DMatrix<Complex64>,
    pub kind: MapKind,
}

impl BogoliubovMap {
    pub fn n(&self) -> usize {
        self.gmat.nrows()
    }

    /// Real parts of (g, h); meaningful for `StaticReal` maps, whose
    /// imaginary parts are exactly zero by construction.
    pub fn real_parts(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.gmat.map(|z| z.re), self.hmat.map(|z| z.re))
    }

    /// Max-norm violation of the canonical-map conditions
    /// g g+ + h h+ = I and g h^T + h g^T = 0.
    pub fn canonical_residual(&self) -> f64 {
        let n = self.n();
        let eye = DMatrix::<Complex64>::identity(n, n);
        let r1 = (&self.gmat * self.gmat.adjoint() + &self.hmat * self.hmat.adjoint() - eye)
            .map(|z| z.norm())
            .max();
        let r2 = (&self.gmat * self.hmat.transpose() + &self.hmat * self.gmat.transpose())
            .map(|z| z.norm())
            .max();
        r1.max(r2)
    }

    /// G = -g^-1 h, the pairing matrix of the vacuum relation. Test-only
    /// diagnostics: production echo paths never invert g.
    pub fn vacuum_pairing(&self) -> Result<DMatrix<Complex64>> {
        let inv = self
            .gmat
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Diagonalization("g is singular".into()))?;
        Ok(-(inv * &self.hmat))
    }
}

/// Static map between two real quasiparticle bases:
/// g = (Phi0 Phi1^T + Psi0 Psi1^T)/2, h = (Phi0 Phi1^T - Psi0 Psi1^T)/2.
pub fn relate_bases(b0: &ModeBasis, b1: &ModeBasis) -> Result<BogoliubovMap> {
    if b0.n_sites() != b1.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} sites",
            b0.n_sites(),
            b1.n_sites()
        )));
    }
    let pp = &b0.phi * b1.phi.transpose();
    let qq = &b0.psi * b1.psi.transpose();
    let g = (&pp + &qq).map(|x| 0.5 * x);
    let h = (&pp - &qq).map(|x| 0.5 * x);
    Ok(BogoliubovMap {
        gmat: linalg::to_complex(&g),
        hmat: linalg::to_complex(&h),
        kind: MapKind::StaticReal,
    })
}

/// Static map from the complex momentum basis of the unperturbed chain to a
/// real target basis.
pub fn relate_momentum(b0: &MomentumBasis, b1: &ModeBasis) -> Result<BogoliubovMap> {
    if b0.n_sites() != b1.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} sites",
            b0.n_sites(),
            b1.n_sites()
        )));
    }
    let w1 = linalg::to_complex(&b1.w_coeffs());
    let x1 = linalg::to_complex(&b1.x_coeffs());
    let g = &b0.wmat * w1.transpose() + &b0.xmat * x1.transpose();
    let h = &b0.wmat * x1.transpose() + &b0.xmat * w1.transpose();
    Ok(BogoliubovMap {
        gmat: g,
        hmat: h,
        kind: MapKind::StaticComplex,
    })
}

/// Time-dependent map between the source modes and the Heisenberg-evolved
/// source modes alpha_k = e^{iHt} eta^src_k e^{-iHt}:
/// g' = g e^{itL} g+ + h e^{-itL} h+, h' = g e^{itL} h^T + h e^{-itL} g^T,
/// with L the target-basis energies.
pub fn dynamic_map(
    map: &BogoliubovMap,
    target_energies: &DVector<f64>,
    t: f64,
) -> Result<BogoliubovMap> {
    let n = map.n();
    if target_energies.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "map size {} vs {} energies",
            n,
            target_energies.len()
        )));
    }
    let phases = target_energies.map(|e| e * t);
    let e_plus = linalg::phase_diagonal(&phases);
    let e_minus = linalg::phase_diagonal(&phases.map(|p| -p));
    let ge = &map.gmat * &e_plus;
    let he = &map.hmat * &e_minus;
    let gp = &ge * map.gmat.adjoint() + &he * map.hmat.adjoint();
    let hp = &ge * map.hmat.transpose() + &he * map.gmat.transpose();
    Ok(BogoliubovMap {
        gmat: gp,
        hmat: hp,
        kind: MapKind::Dynamic { t },
    })
}

/// SVD treatment of a static map whose g may be singular.
///
/// g = U D V; rotating to xi^src = U+ eta^src, xi^tgt = V eta^tgt turns the
/// pair into (D, h_rot) with the same vacua. Indices whose singular value is
/// below threshold are particle-hole swapped, which yields the invertible
/// pair (g_sw, h_sw).
#[derive(Debug, Clone)]
pub struct RegularizedMap {
    pub u: DMatrix<Complex64>,
    pub v_t: DMatrix<Complex64>,
    pub d: DVector<f64>,
    pub h_rot: DMatrix<Complex64>,
    pub g_sw: DMatrix<Complex64>,
    pub h_sw: DMatrix<Complex64>,
    pub swapped: Vec<usize>,
}

pub fn svd_regularize(map: &BogoliubovMap) -> RegularizedMap {
    let n = map.n();
    let svd = map.gmat.clone().svd(true, true);
    let u = svd.u.expect("SVD with U requested");
    let v_t = svd.v_t.expect("SVD with V^T requested");
    let d = svd.singular_values;
    // rotated creation-side block: h_rot = U+ h V_t^T
    let h_rot = u.adjoint() * &map.hmat * v_t.transpose();

    let dmax = d.max();
    let threshold = SINGULAR_THRESHOLD * dmax.max(f64::MIN_POSITIVE);
    let swapped: Vec<usize> = (0..n).filter(|&j| d[j] < threshold).collect();

    let mut g_sw = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        g_sw[(j, j)] = Complex64::new(d[j], 0.0);
    }
    let mut h_sw = h_rot.clone();
    for &j in &swapped {
        // xi_j <-> xi+_j: the conjugated row trades its g and h parts
        for k in 0..n {
            let hval = h_rot[(j, k)].conj();
            let gval = g_sw[(j, k)];
            g_sw[(j, k)] = hval;
            h_sw[(j, k)] = gval.conj();
        }
    }
    RegularizedMap {
        u,
        v_t,
        d,
        h_rot,
        g_sw,
        h_sw,
        swapped,
    }
}

impl RegularizedMap {
    /// Echo value at time t in the rotated frame:
    /// L = |det(D W D + h_rot conj(W) h_rot+)| with W = V_t e^{itL} V_t+.
    /// Unitarily equivalent to |det(g e^{itL} g+ + h e^{-itL} h+)| and free of
    /// any inverse, so singular rows of D are carried by the h_rot term.
    pub fn echo_value(&self, target_energies: &DVector<f64>, t: f64) -> f64 {
        let phases = target_energies.map(|e| e * t);
        let e_plus = linalg::phase_diagonal(&phases);
        let w = &self.v_t * e_plus * self.v_t.adjoint();
        let dm = DMatrix::<Complex64>::from_diagonal(&self.d.map(|x| Complex64::new(x, 0.0)));
        let m = &dm * &w * &dm + &self.h_rot * w.conjugate() * self.h_rot.adjoint();
        linalg::log_abs_det(&m).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainSpec, QubitLabel};
    use crate::modes::diagonalize_spec;
    use approx::assert_abs_diff_eq;

    fn basis(n: usize, gamma: f64, lambda: f64, g: f64, d: usize, label: QubitLabel) -> ModeBasis {
        diagonalize_spec(&ChainSpec::new(n, gamma, lambda, g, d, label).unwrap()).unwrap()
    }

    #[test]
    fn identity_map_on_same_basis() {
        let b = basis(8, 1.0, 0.5, 0.0, 0, QubitLabel::ZeroZero);
        let map = relate_bases(&b, &b).unwrap();
        let n = 8;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(map.gmat[(i, j)].re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(map.hmat[(i, j)].norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_coupling_gives_signed_permutation() {
        // same Hamiltonian reached through two labels: g must be a signed
        // permutation (up to degenerate-mode mixing) and h zero
        let b0 = basis(7, 0.8, 0.3, 0.0, 2, QubitLabel::ZeroZero);
        let b1 = basis(7, 0.8, 0.3, 0.0, 2, QubitLabel::OneOne);
        let map = relate_bases(&b0, &b1).unwrap();
        assert!(map.hmat.map(|z| z.norm()).max() < 1e-10);
        // g orthogonal
        let gg = map.gmat.map(|z| z.re);
        let res = (&gg * gg.transpose() - DMatrix::<f64>::identity(7, 7)).amax();
        assert!(res < 1e-10);
    }

    #[test]
    fn canonical_invariants_hold() {
        let b0 = basis(6, 1.0, 0.5, 0.0, 2, QubitLabel::ZeroZero);
        let b1 = basis(6, 1.0, 0.5, 0.1, 2, QubitLabel::OneOne);
        let map = relate_bases(&b0, &b1).unwrap();
        assert!(map.canonical_residual() < 1e-10);
        // g +- h orthogonal for static real maps
        let (g, h) = map.real_parts();
        for sign in [1.0, -1.0] {
            let o = &g + (h.clone() * sign);
            let res = (&o * o.transpose() - DMatrix::<f64>::identity(6, 6)).amax();
            assert!(res < 1e-10);
        }
    }

    #[test]
    fn composition_with_inverse_is_identity() {
        let b0 = basis(6, 1.0, 0.5, 0.0, 2, QubitLabel::ZeroZero);
        let b1 = basis(6, 1.0, 0.5, 0.7, 2, QubitLabel::OneOne);
        let fwd = relate_bases(&b0, &b1).unwrap();
        let bwd = relate_bases(&b1, &b0).unwrap();
        // eta0 = g_f eta1 + h_f eta1+, eta1 = g_b eta0 + h_b eta0+
        let gc = &fwd.gmat * &bwd.gmat + &fwd.hmat * &bwd.hmat;
        let hc = &fwd.gmat * &bwd.hmat + &fwd.hmat * &bwd.gmat;
        let eye = DMatrix::<Complex64>::identity(6, 6);
        assert!((gc - eye).map(|z| z.norm()).max() < 1e-10);
        assert!(hc.map(|z| z.norm()).max() < 1e-10);
    }

    #[test]
    fn vacuum_pairing_antisymmetric() {
        let b0 = basis(8, 1.0, 0.6, 0.0, 3, QubitLabel::ZeroZero);
        let b1 = basis(8, 1.0, 0.6, 0.4, 3, QubitLabel::OneOne);
        let map = relate_bases(&b0, &b1).unwrap();
        let gg = map.vacuum_pairing().unwrap();
        let res = (&gg + gg.transpose()).map(|z| z.norm()).max();
        assert!(res < 1e-8, "antisymmetry residual {res}");
    }

    #[test]
    fn dynamic_map_identities() {
        let b0 = basis(6, 1.0, 0.5, 0.0, 2, QubitLabel::ZeroZero);
        let b1 = basis(6, 1.0, 0.5, 0.1, 2, QubitLabel::OneZero);
        let map = relate_bases(&b0, &b1).unwrap();
        let at0 = dynamic_map(&map, &b1.energies, 0.0).unwrap();
        let eye = DMatrix::<Complex64>::identity(6, 6);
        assert!((at0.gmat - eye).map(|z| z.norm()).max() < 1e-10);
        assert!(at0.hmat.map(|z| z.norm()).max() < 1e-10);
        for &t in &[0.3, 1.7, 12.0] {
            let dm = dynamic_map(&map, &b1.energies, t).unwrap();
            assert!(dm.canonical_residual() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn regularize_well_conditioned_swaps_nothing() {
        let b0 = basis(6, 1.0, 0.5, 0.0, 2, QubitLabel::ZeroZero);
        let b1 = basis(6, 1.0, 0.5, 0.1, 2, QubitLabel::OneOne);
        let map = relate_bases(&b0, &b1).unwrap();
        let reg = svd_regularize(&map);
        assert!(reg.swapped.is_empty());
        // regularized echo equals the direct formula
        for &t in &[0.0, 0.5, 2.0] {
            let phases = b1.energies.map(|e| e * t);
            let ep = crate::linalg::phase_diagonal(&phases);
            let m = &map.gmat + &map.hmat * ep;
            let direct = crate::linalg::abs_det_squared(&m);
            let reg_val = reg.echo_value(&b1.energies, t);
            assert_abs_diff_eq!(direct, reg_val, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_particle_hole_map_swaps_everything() {
        // g = 0, h = I: extreme case, echo stays in [0, 1]
        let n = 5;
        let map = BogoliubovMap {
            gmat: DMatrix::<Complex64>::zeros(n, n),
            hmat: DMatrix::<Complex64>::identity(n, n),
            kind: MapKind::StaticReal,
        };
        assert!(map.canonical_residual() < 1e-15);
        let reg = svd_regularize(&map);
        assert_eq!(reg.swapped.len(), n);
        let energies = DVector::from_vec(vec![0.3, 1.0, 1.5, 2.0, 4.0]);
        for &t in &[0.0, 1.3, 7.7] {
            let v = reg.echo_value(&energies, t);
            assert!((0.0..=1.0 + 1e-9).contains(&v), "echo {v} at t={t}");
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
        }
    }
}
