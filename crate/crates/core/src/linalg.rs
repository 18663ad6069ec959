//! Thin wrappers over faer for the dense problems the crate needs.

use faer::linalg::solvers::SolveLstsq;
use faer::{Mat, Side};
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Eigenpairs of a Hermitian matrix; eigenvalues ascending, eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

pub fn eigh(m: &Array2<C64>) -> Result<HermitianEigen, String> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(format!("matrix is {}x{}, not square", n, m.ncols()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err("matrix contains non-finite entries".into());
    }
    let fm = Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = fm
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| format!("self-adjoint eigensolver did not converge: {e:?}"))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i].re).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| u[(i, j)]);
    Ok(HermitianEigen { values, vectors })
}

/// Real least squares `min |A x - b|` via column-pivoted QR.
pub fn lstsq(a: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let (m, n) = a.dim();
    assert_eq!(m, b.len());
    let fa = Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let fb = Mat::<f64>::from_fn(m, 1, |i, _| b[i]);
    let x = fa.col_piv_qr().solve_lstsq(&fb);
    (0..n).map(|i| x[(i, 0)]).collect()
}
