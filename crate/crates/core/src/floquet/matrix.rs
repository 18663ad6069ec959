use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::DriveField;
use crate::crystal::BlochSolution;
use crate::error::{Error, Result};

/// Row/column of coefficient c[m][μ] in the Floquet matrix.
pub fn index(mu: i64, m: usize, mu_max: usize, n_bands: usize) -> usize {
    (mu + mu_max as i64) as usize * n_bands + m
}

/// Block-tridiagonal Floquet-Bloch Hamiltonian for the expansion Σ_μ c_μ e^{-iμωt}.
///
/// Diagonal blocks diag(ε_m) - μω, neighbouring blocks s (E0/2ω) p.
pub fn build_floquet_matrix(
    bloch: &BlochSolution,
    drive: &DriveField,
    mu_max: usize,
    n_bands: usize,
) -> Result<Array2<C64>> {
    if mu_max < 1 {
        return Err(Error::Config("mu_max must be at least 1".into()));
    }
    if n_bands < 1 || n_bands > bloch.n_bands() {
        return Err(Error::Config(format!(
            "band count {n_bands} outside 1..={} available field-free bands",
            bloch.n_bands()
        )));
    }
    let n_mu = 2 * mu_max + 1;
    let dim = n_mu * n_bands;
    let mut h = Array2::<C64>::zeros((dim, dim));
    let c = drive.half_amplitude();
    for im in 0..n_mu {
        let mu = im as i64 - mu_max as i64;
        for m in 0..n_bands {
            h[(im * n_bands + m, im * n_bands + m)] = C64::new(bloch.energies[m] - mu as f64 * drive.omega, 0.0);
        }
        if im + 1 < n_mu {
            for i in 0..n_bands {
                for j in 0..n_bands {
                    let v = c * bloch.momentum[(i, j)];
                    h[(im * n_bands + i, (im + 1) * n_bands + j)] = v;
                    h[((im + 1) * n_bands + i, im * n_bands + j)] = v;
                }
            }
        }
    }
    Ok(h)
}
