//! Dense linear-algebra helpers: log-determinants of complex matrices and
//! diagonalization of unitary matrices via their commuting Hermitian parts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// ln |det M| of a complex square matrix, via in-place LU with partial
/// pivoting. The log of the pivot moduli is accumulated so that matrices of
/// size 500 with entries of order exp(+-50) neither overflow nor underflow.
/// Returns -inf for a singular matrix.
pub fn log_abs_det(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "log_abs_det needs a square matrix");
    let mut a = m.clone();
    let mut acc = 0.0f64;
    for col in 0..n {
        // pivot search on modulus
        let mut pivot_row = col;
        let mut pivot_norm = a[(col, col)].norm_sqr();
        for row in (col + 1)..n {
            let v = a[(row, col)].norm_sqr();
            if v > pivot_norm {
                pivot_norm = v;
                pivot_row = row;
            }
        }
        if pivot_norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        if pivot_row != col {
            a.swap_rows(pivot_row, col);
        }
        let pivot = a[(col, col)];
        acc += 0.5 * pivot_norm.ln();
        for row in (col + 1)..n {
            let factor = a[(row, col)] / pivot;
            a[(row, col)] = factor;
            for k in (col + 1)..n {
                let sub = factor * a[(col, k)];
                a[(row, k)] -= sub;
            }
        }
    }
    acc
}

/// |det M| computed as exp(log_abs_det).
pub fn abs_det(m: &DMatrix<Complex64>) -> f64 {
    log_abs_det(m).exp()
}

/// |det M|^2 computed as exp(2 log_abs_det).
pub fn abs_det_squared(m: &DMatrix<Complex64>) -> f64 {
    (2.0 * log_abs_det(m)).exp()
}

/// Promote a real matrix to complex entries.
pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// 2-norm condition number from singular values; +inf when singular.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Diagonalize a unitary matrix W: returns (eigenvalues, eigenvector columns)
/// with W v_k = mu_k v_k and the v_k orthonormal.
///
/// W is normal, so it is simultaneously diagonalizable with the commuting
/// Hermitian pair Re W = (W + W^dag)/2 and Im W = (W - W^dag)/2i. We
/// eigendecompose Re W, then split each degenerate cluster with Im W; the two
/// eigenvalues recombine as mu = cos + i sin.
pub fn diagonalize_unitary(
    w: &DMatrix<Complex64>,
) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = w.nrows();
    assert_eq!(n, w.ncols());
    let wd = w.adjoint();
    let re = (w + &wd).map(|z| z * 0.5);
    let im = (w - &wd).map(|z| z * Complex64::new(0.0, -0.5));

    let eig = re.clone().symmetric_eigen();
    // cluster eigenvalues of Re W
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let tol = 1e-8;
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut filled = 0usize;

    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && (eig.eigenvalues[order[j]] - eig.eigenvalues[order[j - 1]]).abs() < tol {
            j += 1;
        }
        // basis of the cluster subspace
        let dim = j - i;
        let mut basis = DMatrix::<Complex64>::zeros(n, dim);
        for (c, &idx) in order[i..j].iter().enumerate() {
            basis.set_column(c, &eig.eigenvectors.column(idx));
        }
        // project Im W onto the cluster and eigendecompose
        let proj = basis.adjoint() * &im * &basis;
        let sub = proj.symmetric_eigen();
        let combined = &basis * &sub.eigenvectors;
        for c in 0..dim {
            let v = combined.column(c).into_owned();
            let mu_re = (v.adjoint() * &re * &v)[(0, 0)].re;
            let mu_im = sub.eigenvalues[c];
            let mu = Complex64::new(mu_re, mu_im);
            // unit-modulus residual check
            let resid = (w * &v - v.map(|z| z * mu)).norm();
            if resid > 1e-7 {
                return Err(Error::Diagonalization(format!(
                    "unitary diagonalization residual {resid:.3e}"
                )));
            }
            vectors.set_column(filled, &v);
            values[filled] = mu;
            filled += 1;
        }
        i = j;
    }
    Ok((values, vectors))
}

/// Simple ordinary least squares for y = a + b x; returns (intercept, slope).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// Diagonal complex matrix with entries exp(i * phases).
pub fn phase_diagonal(phases: &DVector<f64>) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&phases.map(|p| Complex64::new(0.0, p).exp()))
}
