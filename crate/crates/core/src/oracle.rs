//! Brute-force Fock-space validation engine.
//!
//! Lifts quadratic fermion forms to dense 2^N x 2^N many-body matrices in the
//! occupation-number basis, evolves exactly by eigendecomposition, and
//! computes the echo overlaps directly. This is the ground truth for every
//! determinant formula; it never touches the 2^N spin representation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chain::{build_hamiltonian, ChainSpec, QuadraticHamiltonian};
use crate::echo::{EchoKind, EchoSeries};
use crate::error::{Error, Result};
use crate::modes::{momentum_modes, MomentumBasis};

/// Hard cap on chain length for the oracle (dim 4096).
pub const MAX_SITES: usize = 12;

/// Many-body ground states closer than this are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Dense many-body operator on the 2^N fermion Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub n_sites: usize,
    pub matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n > MAX_SITES {
        return Err(Error::FockSpaceTooLarge { max: MAX_SITES, got: n });
    }
    Ok(())
}

/// (-1)^{number of occupied modes below j} in state `n`.
#[inline]
fn jw_sign(state: usize, j: usize) -> f64 {
    if (state & ((1 << j) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Accumulator for quadratic operators lifted to the Fock space.
struct FockBuilder {
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl FockBuilder {
    fn new(n: usize) -> Self {
        let dim = 1 << n;
        FockBuilder {
            n,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    /// z * c+_i c_j
    fn add_cdag_c(&mut self, i: usize, j: usize, z: Complex64) {
        if z == Complex64::new(0.0, 0.0) {
            return;
        }
        for state in 0..(1usize << self.n) {
            if state & (1 << j) == 0 {
                continue;
            }
            let s1 = jw_sign(state, j);
            let mid = state ^ (1 << j);
            if mid & (1 << i) != 0 {
                continue;
            }
            let s2 = jw_sign(mid, i);
            let out = mid | (1 << i);
            self.matrix[(out, state)] += z * s1 * s2;
        }
    }

    /// z * c+_i c+_j (i != j)
    fn add_cdag_cdag(&mut self, i: usize, j: usize, z: Complex64) {
        if z == Complex64::new(0.0, 0.0) || i == j {
            return;
        }
        for state in 0..(1usize << self.n) {
            if state & (1 << j) != 0 {
                continue;
            }
            let s1 = jw_sign(state, j);
            let mid = state | (1 << j);
            if mid & (1 << i) != 0 {
                continue;
            }
            let s2 = jw_sign(mid, i);
            let out = mid | (1 << i);
            self.matrix[(out, state)] += z * s1 * s2;
        }
    }

    /// z * c_i c_j (i != j)
    fn add_c_c(&mut self, i: usize, j: usize, z: Complex64) {
        if z == Complex64::new(0.0, 0.0) || i == j {
            return;
        }
        for state in 0..(1usize << self.n) {
            if state & (1 << j) == 0 {
                continue;
            }
            let s1 = jw_sign(state, j);
            let mid = state ^ (1 << j);
            if mid & (1 << i) == 0 {
                continue;
            }
            let s2 = jw_sign(mid, i);
            let out = mid ^ (1 << i);
            self.matrix[(out, state)] += z * s1 * s2;
        }
    }

    /// z * c_i c+_j
    fn add_c_cdag(&mut self, i: usize, j: usize, z: Complex64) {
        if z == Complex64::new(0.0, 0.0) {
            return;
        }
        for state in 0..(1usize << self.n) {
            if state & (1 << j) != 0 {
                continue;
            }
            let s1 = jw_sign(state, j);
            let mid = state | (1 << j);
            if mid & (1 << i) == 0 {
                continue;
            }
            let s2 = jw_sign(mid, i);
            let out = mid ^ (1 << i);
            self.matrix[(out, state)] += z * s1 * s2;
        }
    }

    fn add_identity(&mut self, z: Complex64) {
        for state in 0..(1usize << self.n) {
            self.matrix[(state, state)] += z;
        }
    }
}

/// Lift H = sum A_ij c+_i c_j + 1/2 sum (B_ij c+_i c+_j - B_ij c_i c_j)
/// + const to the full Fock space.
pub fn lift_quadratic(h: &QuadraticHamiltonian) -> Result<FockOperator> {
    let n = h.n_sites();
    check_cap(n)?;
    let mut fb = FockBuilder::new(n);
    for i in 0..n {
        for j in 0..n {
            fb.add_cdag_c(i, j, Complex64::new(h.a_mat[(i, j)], 0.0));
            fb.add_cdag_cdag(i, j, Complex64::new(0.5 * h.b_mat[(i, j)], 0.0));
            fb.add_c_c(i, j, Complex64::new(-0.5 * h.b_mat[(i, j)], 0.0));
        }
    }
    fb.add_identity(Complex64::new(h.const_shift, 0.0));
    Ok(FockOperator {
        n_sites: n,
        matrix: fb.matrix,
    })
}

/// Annihilation operator c_j as a dense Fock matrix (for convention tests).
pub fn annihilator(n: usize, j: usize) -> Result<DMatrix<Complex64>> {
    check_cap(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for state in 0..dim {
        if state & (1 << j) != 0 {
            let out = state ^ (1 << j);
            m[(out, state)] = Complex64::new(jw_sign(state, j), 0.0);
        }
    }
    Ok(m)
}

/// Generator of translations in the momentum basis:
/// G = sum_k k eta+_k eta_k, so that T^d = exp(i 2 pi d G / N).
pub fn translation_generator(mom: &MomentumBasis) -> Result<FockOperator> {
    let n = mom.n_sites();
    check_cap(n)?;
    let mut fb = FockBuilder::new(n);
    // eta+_k eta_k expands into all four quadratic blocks
    for i in 0..n {
        for j in 0..n {
            let mut pd = Complex64::new(0.0, 0.0); // c+_i c_j
            let mut pp = Complex64::new(0.0, 0.0); // c+_i c+_j
            let mut mm = Complex64::new(0.0, 0.0); // c_i c_j
            let mut md = Complex64::new(0.0, 0.0); // c_i c+_j
            for (k, &kint) in mom.momenta.iter().enumerate() {
                let kc = Complex64::new(kint as f64, 0.0);
                let wki = mom.wmat[(k, i)];
                let wkj = mom.wmat[(k, j)];
                let xki = mom.xmat[(k, i)];
                let xkj = mom.xmat[(k, j)];
                // eta+_k eta_k = (w*_i c+_i + x*_i c_i)(w_j c_j + x_j c+_j)
                pd += kc * wki.conj() * wkj;
                pp += kc * wki.conj() * xkj;
                mm += kc * xki.conj() * wkj;
                md += kc * xki.conj() * xkj;
            }
            fb.add_cdag_c(i, j, pd);
            fb.add_cdag_cdag(i, j, pp);
            fb.add_c_c(i, j, mm);
            fb.add_c_cdag(i, j, md);
        }
    }
    Ok(FockOperator {
        n_sites: n,
        matrix: fb.matrix,
    })
}

/// T^d = exp(i 2 pi d G / N), built by eigendecomposition of the generator.
pub fn translation_operator(mom: &MomentumBasis, d: i64) -> Result<DMatrix<Complex64>> {
    let gen = translation_generator(mom)?;
    let n = mom.n_sites() as f64;
    let eig = gen.matrix.symmetric_eigen();
    let dim = eig.eigenvalues.len();
    let phases = DVector::from_iterator(
        dim,
        eig.eigenvalues
            .iter()
            .map(|&g| Complex64::new(0.0, 2.0 * std::f64::consts::PI * d as f64 * g / n).exp()),
    );
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint())
}

/// Exact many-body ground state (energy, vector); errors when degenerate.
pub fn ground_state(op: &FockOperator) -> Result<(f64, DVector<Complex64>)> {
    let eig = op.matrix.clone().symmetric_eigen();
    let dim = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let gap = eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]];
    if gap < DEGENERACY_GAP {
        return Err(Error::DegenerateGroundState { gap });
    }
    Ok((
        eig.eigenvalues[order[0]],
        eig.eigenvectors.column(order[0]).into_owned(),
    ))
}

/// Survival echo |<E_0| e^{-i H_ab t} |E_0>|^2 by full eigendecomposition.
pub fn oracle_echo_survival(spec: &ChainSpec, times: &[f64]) -> Result<EchoSeries> {
    check_cap(spec.n_sites)?;
    let h00 = lift_quadratic(&build_hamiltonian(&spec.unperturbed()))?;
    let (_, e0) = ground_state(&h00)?;
    let hab = lift_quadratic(&build_hamiltonian(spec))?;
    let eig = hab.matrix.symmetric_eigen();
    let coeffs = eig.eigenvectors.adjoint() * &e0;
    let weights: Vec<(f64, f64)> = coeffs
        .iter()
        .zip(eig.eigenvalues.iter())
        .map(|(c, &e)| (c.norm_sqr(), e))
        .collect();
    let raw: Vec<f64> = times
        .iter()
        .map(|&t| {
            let amp: Complex64 = weights
                .iter()
                .map(|&(w, e)| Complex64::new(0.0, -e * t).exp() * w)
                .sum();
            amp.norm_sqr()
        })
        .collect();
    let kind = match spec.label {
        crate::chain::QubitLabel::ZeroOne => EchoKind::L00_01,
        crate::chain::QubitLabel::OneZero => EchoKind::L00_10,
        _ => EchoKind::L00_11,
    };
    EchoSeries::new(times.to_vec(), raw, kind, spec.clone(), spec.site_b)
}

/// Exchange echo |<E_0| e^{i H_10 t} T^d e^{-i H_10 t} |E_0>|^2.
pub fn oracle_echo_exchange(spec: &ChainSpec, d: usize, times: &[f64]) -> Result<EchoSeries> {
    check_cap(spec.n_sites)?;
    let spec10 = ChainSpec::new(
        spec.n_sites,
        spec.gamma,
        spec.lambda,
        spec.coupling,
        d,
        crate::chain::QubitLabel::OneZero,
    )?;
    let h00 = lift_quadratic(&build_hamiltonian(&spec10.unperturbed()))?;
    let (_, e0) = ground_state(&h00)?;
    let mom = momentum_modes(&spec10.unperturbed())?;
    let t_op = translation_operator(&mom, d as i64)?;
    let h10 = lift_quadratic(&build_hamiltonian(&spec10))?;
    let eig = h10.matrix.symmetric_eigen();
    let coeffs = eig.eigenvectors.adjoint() * &e0;
    let raw: Vec<f64> = times
        .iter()
        .map(|&t| {
            let evolved = DVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(eig.eigenvalues.iter())
                    .map(|(c, &e)| c * Complex64::new(0.0, -e * t).exp()),
            );
            let psi = &eig.eigenvectors * evolved;
            let val = (psi.adjoint() * &t_op * &psi)[(0, 0)];
            val.norm_sqr()
        })
        .collect();
    EchoSeries::new(times.to_vec(), raw, EchoKind::L01_10, spec10, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::QubitLabel;
    use crate::modes::diagonalize;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn onsite_term_is_diagonal_by_occupation() {
        // H = lambda (2 c+_0 c_0 - 1) on N=2: diagonal entries -l, +l, -l, +l
        let lambda = 0.7;
        let mut a = DMatrix::<f64>::zeros(2, 2);
        a[(0, 0)] = 2.0 * lambda;
        let h = QuadraticHamiltonian {
            a_mat: a,
            b_mat: DMatrix::zeros(2, 2),
            const_shift: -lambda,
        };
        let op = lift_quadratic(&h).unwrap();
        for state in 0..4usize {
            let expect = if state & 1 != 0 { lambda } else { -lambda };
            assert_abs_diff_eq!(op.matrix[(state, state)].re, expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn ground_energy_matches_mode_basis() {
        let spec = ChainSpec::new(6, 1.0, 0.5, 0.0, 0, QubitLabel::ZeroZero).unwrap();
        let h = build_hamiltonian(&spec);
        let basis = diagonalize(&h).unwrap();
        let op = lift_quadratic(&h).unwrap();
        let (e_ground, _) = ground_state(&op).unwrap();
        assert_abs_diff_eq!(e_ground, basis.ground_energy(&h), epsilon = 1e-10);
    }

    #[test]
    fn spectrum_is_combinatorial_over_mode_energies() {
        let spec = ChainSpec::new(6, 1.0, 0.8, 0.3, 2, QubitLabel::OneOne).unwrap();
        let h = build_hamiltonian(&spec);
        let basis = diagonalize(&h).unwrap();
        let op = lift_quadratic(&h).unwrap();
        let e_ground = basis.ground_energy(&h);
        let mut expected: Vec<f64> = (0..(1usize << 6))
            .map(|occ| {
                let mut e = e_ground;
                for k in 0..6 {
                    if occ & (1 << k) != 0 {
                        e += basis.energies[k];
                    }
                }
                e
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        let mut got: Vec<f64> = op.matrix.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
        got.sort_by(f64::total_cmp);
        for (a, b) in expected.iter().zip(&got) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn lift_is_linear_in_coefficients() {
        let s1 = ChainSpec::new(4, 0.6, 0.4, 0.2, 1, QubitLabel::OneOne).unwrap();
        let s2 = ChainSpec::new(4, 0.1, 1.1, 0.9, 2, QubitLabel::ZeroOne).unwrap();
        let h1 = build_hamiltonian(&s1);
        let h2 = build_hamiltonian(&s2);
        let sum = QuadraticHamiltonian {
            a_mat: &h1.a_mat + &h2.a_mat,
            b_mat: &h1.b_mat + &h2.b_mat,
            const_shift: h1.const_shift + h2.const_shift,
        };
        let lifted_sum = lift_quadratic(&sum).unwrap();
        let sum_lifted = lift_quadratic(&h1).unwrap().matrix + lift_quadratic(&h2).unwrap().matrix;
        let res = (&lifted_sum.matrix - sum_lifted).map(|z| z.norm()).max();
        assert!(res < 1e-12);
    }

    #[test]
    fn translation_shifts_site_operators() {
        // T c_j T^-1 = c_{j+1}
        let n = 6;
        let spec = ChainSpec::new(n, 1.0, 0.5, 0.0, 0, QubitLabel::ZeroZero).unwrap();
        let mom = momentum_modes(&spec).unwrap();
        let t1 = translation_operator(&mom, 1).unwrap();
        for j in 0..n {
            let cj = annihilator(n, j).unwrap();
            let cjp = annihilator(n, (j + 1) % n).unwrap();
            let conj = &t1 * &cj * t1.adjoint();
            let res = (&conj - &cjp).map(|z| z.norm()).max();
            assert!(res < 1e-8, "site {j}: residual {res}");
        }
    }

    #[test]
    fn translation_to_the_nth_is_identity_up_to_phase() {
        let n = 6;
        let spec = ChainSpec::new(n, 1.0, 0.5, 0.0, 0, QubitLabel::ZeroZero).unwrap();
        let mom = momentum_modes(&spec).unwrap();
        let tn = translation_operator(&mom, n as i64).unwrap();
        let phase = tn[(0, 0)] / tn[(0, 0)].norm();
        let eye = DMatrix::<Complex64>::identity(1 << n, 1 << n);
        let res = (tn.map(|z| z / phase) - eye).map(|z| z.norm()).max();
        assert!(res < 1e-8, "residual {res}");
    }

    #[test]
    fn translation_conjugates_h10_into_h01() {
        let n = 6;
        let d = 2;
        let s10 = ChainSpec::new(n, 1.0, 0.5, 0.7, d, QubitLabel::OneZero).unwrap();
        let s01 = s10.with_label(QubitLabel::ZeroOne);
        let mom = momentum_modes(&s10.unperturbed()).unwrap();
        let td = translation_operator(&mom, d as i64).unwrap();
        let h10 = lift_quadratic(&build_hamiltonian(&s10)).unwrap();
        let h01 = lift_quadratic(&build_hamiltonian(&s01)).unwrap();
        let conj = &td * &h10.matrix * td.adjoint();
        let res = (&conj - &h01.matrix).map(|z| z.norm()).max();
        assert!(res < 1e-8, "residual {res}");
    }

    #[test]
    fn oracle_echo_trivial_cases() {
        let spec = ChainSpec::new(4, 1.0, 0.5, 0.0, 2, QubitLabel::OneOne).unwrap();
        let times = [0.0, 0.5, 1.0, 3.0];
        let echo = oracle_echo_survival(&spec, &times).unwrap();
        for &v in &echo.values {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
        let spec_g = ChainSpec::new(4, 1.0, 0.5, 0.3, 2, QubitLabel::OneOne).unwrap();
        let ex = oracle_echo_exchange(&spec_g, 0, &times).unwrap();
        for &v in &ex.values {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn short_time_expansion_matches_energy_variance() {
        // L(t) = 1 - (dH)^2 t^2 + O(t^4)
        let spec = ChainSpec::new(6, 1.0, 0.5, 0.4, 2, QubitLabel::OneOne).unwrap();
        let h00 = lift_quadratic(&build_hamiltonian(&spec.unperturbed())).unwrap();
        let (_, e0) = ground_state(&h00).unwrap();
        let hab = lift_quadratic(&build_hamiltonian(&spec)).unwrap();
        let mean = (e0.adjoint() * &hab.matrix * &e0)[(0, 0)].re;
        let mean_sq = (e0.adjoint() * (&hab.matrix * &hab.matrix) * &e0)[(0, 0)].re;
        let variance = mean_sq - mean * mean;
        let t = 1e-3;
        let echo = oracle_echo_survival(&spec, &[t]).unwrap();
        let expansion = 1.0 - variance * t * t;
        assert_abs_diff_eq!(echo.values[0], expansion, epsilon = 1e-9);
    }

    #[test]
    fn oracle_invariant_under_global_phase_of_ground_state() {
        let spec = ChainSpec::new(4, 1.0, 0.6, 0.5, 1, QubitLabel::OneOne).unwrap();
        let h00 = lift_quadratic(&build_hamiltonian(&spec.unperturbed())).unwrap();
        let (_, e0) = ground_state(&h00).unwrap();
        let hab = lift_quadratic(&build_hamiltonian(&spec)).unwrap();
        let eig = hab.matrix.clone().symmetric_eigen();
        let phase = Complex64::new(0.0, 1.234).exp();
        let e0_rot = e0.map(|z| z * phase);
        let t = 0.8;
        let val = |v: &DVector<Complex64>| {
            let coeffs = eig.eigenvectors.adjoint() * v;
            let amp: Complex64 = coeffs
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, &e)| c.norm_sqr() * Complex64::new(0.0, -e * t).exp())
                .sum();
            amp.norm_sqr()
        };
        assert_abs_diff_eq!(val(&e0), val(&e0_rot), epsilon = 1e-12);
    }

    #[test]
    fn cap_enforced() {
        let spec = ChainSpec::new(13, 1.0, 0.5, 0.1, 2, QubitLabel::OneOne).unwrap();
        assert!(oracle_echo_survival(&spec, &[0.0, 1.0]).is_err());
    }
}
