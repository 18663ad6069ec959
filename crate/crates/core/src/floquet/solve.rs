use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::{build_floquet_matrix, index};
use super::{DriveField, Warning};
use crate::crystal::BlochSolution;
use crate::error::{Competitor, Error, Result};
use crate::linalg;

pub const HYBRIDIZATION_THRESHOLD: f64 = 0.5;
pub const RESONANCE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FloquetSolution {
    pub k: f64,
    /// Valence band being continued.
    pub band: usize,
    /// Folded into (ε_i - ω/2, ε_i + ω/2].
    pub quasienergy: f64,
    /// Eigenvalue of the truncated Floquet matrix belonging to `coefficients`.
    pub eigenvalue: f64,
    pub mu_max: usize,
    /// c[μ + μ_max][m].
    pub coefficients: Array2<C64>,
    /// |c[i][0]|².
    pub overlap: f64,
}

impl FloquetSolution {
    pub fn c(&self, m: usize, mu: i64) -> C64 {
        if mu.unsigned_abs() as usize > self.mu_max || m >= self.coefficients.ncols() {
            return C64::new(0.0, 0.0);
        }
        self.coefficients[((mu + self.mu_max as i64) as usize, m)]
    }

    pub fn n_bands(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Fold q into (center - ω/2, center + ω/2].
pub fn fold(q: f64, center: f64, omega: f64) -> f64 {
    let shifted = q - center + 0.5 * omega;
    let r = shifted - omega * (shifted / omega).floor();
    let r = if r == 0.0 { omega } else { r };
    center - 0.5 * omega + r
}

/// Diagonalize and pick, for every occupied band, the eigenvector with largest weight on (i, μ = 0).
pub fn solve_floquet(
    bloch: &BlochSolution,
    drive: &DriveField,
    mu_max: usize,
    n_bands: usize,
    n_occupied: usize,
) -> Result<(Vec<FloquetSolution>, Vec<Warning>)> {
    if n_bands <= n_occupied {
        return Err(Error::Config(format!(
            "band count {n_bands} must exceed the {n_occupied} occupied bands"
        )));
    }
    let h = build_floquet_matrix(bloch, drive, mu_max, n_bands)?;
    let eig = linalg::eigh(&h).map_err(|detail| Error::Eigensolver { k: bloch.k, detail })?;
    let n_mu = 2 * mu_max + 1;
    let mut out = Vec::with_capacity(n_occupied);
    let mut warnings = Vec::new();
    for i in 0..n_occupied {
        let row = index(0, i, mu_max, n_bands);
        let eps = bloch.energies[i];
        let overlaps: Vec<f64> = (0..eig.values.len()).map(|j| eig.vectors[(row, j)].norm_sqr()).collect();
        let best = overlaps.iter().cloned().fold(0.0, f64::max);
        // ties broken by distance to the field-free energy, then by index
        let mut chosen = None::<usize>;
        for (j, &ov) in overlaps.iter().enumerate() {
            if ov >= best * (1.0 - 1e-12) {
                chosen = match chosen {
                    Some(c) if (eig.values[c] - eps).abs() <= (eig.values[j] - eps).abs() => Some(c),
                    _ => Some(j),
                };
            }
        }
        let j = chosen.expect("non-empty spectrum");
        let overlap = overlaps[j];
        if overlap < RESONANCE_THRESHOLD {
            let mut order: Vec<usize> = (0..overlaps.len()).collect();
            order.sort_by(|&a, &b| overlaps[b].partial_cmp(&overlaps[a]).unwrap());
            let comp = |j: usize| Competitor { quasienergy: eig.values[j], overlap: overlaps[j] };
            return Err(Error::Resonance {
                k: bloch.k,
                band: i,
                overlap,
                competing: [comp(order[0]), comp(order[1])],
            });
        }
        if overlap < HYBRIDIZATION_THRESHOLD {
            warnings.push(Warning::Hybridization { k: bloch.k, band: i, overlap });
        }
        let coefficients =
            Array2::from_shape_fn((n_mu, n_bands), |(im, m)| eig.vectors[(im * n_bands + m, j)]);
        out.push(FloquetSolution {
            k: bloch.k,
            band: i,
            quasienergy: fold(eig.values[j], eps, drive.omega),
            eigenvalue: eig.values[j],
            mu_max,
            coefficients,
            overlap,
        });
    }
    Ok((out, warnings))
}
