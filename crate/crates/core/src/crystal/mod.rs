//! One-dimensional periodic model crystal.

pub mod bloch;
pub mod gauge;
pub mod presets;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CellGrid;

pub use bloch::{build_bloch_hamiltonian, momentum_matrix, momentum_spectral, solve_bloch, BlochSolution};
pub use gauge::{GaugeFixing, MaxRealPositive, RandomPhase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalModel {
    /// Lattice constant a (bohr).
    pub lattice_constant: f64,
    /// V_n for n = 0..=n_max (hartree); V_{-n} = V_n* is implied.
    pub potential: Vec<C64>,
    /// Occupied spinless bands.
    pub n_occupied: usize,
    pub spin_degeneracy: u8,
    /// Number of reciprocal vectors, G_n for n = -N..=N.
    pub n_planewaves: usize,
    /// Rigid upward shift of conduction bands (hartree).
    pub scissors: f64,
    pub grid_points: usize,
    /// Declared inversion symmetry; `None` leaves it to detection.
    #[serde(default)]
    pub inversion_symmetric: Option<bool>,
    /// Explicit cell origin overriding the detected inversion center.
    #[serde(default)]
    pub origin: Option<f64>,
}

impl CrystalModel {
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.lattice_constant > 0.0) || !self.lattice_constant.is_finite() {
            return cfg(format!("lattice constant must be positive, got {}", self.lattice_constant));
        }
        if self.potential.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return cfg("potential coefficients must be finite".into());
        }
        if let Some(v0) = self.potential.first() {
            if v0.im != 0.0 {
                return cfg("V_0 must be real for a real potential".into());
            }
        }
        if self.n_planewaves % 2 == 0 {
            return cfg(format!("plane-wave count must be odd (G_n, n = -N..N), got {}", self.n_planewaves));
        }
        let need = 2 * self.n_max() + 1;
        if self.n_planewaves < need {
            return cfg(format!(
                "plane-wave cutoff {} cannot hold the potential (needs at least {need})",
                self.n_planewaves
            ));
        }
        if self.grid_points < 4 * self.n_planewaves {
            return cfg(format!(
                "grid has {} points; at least 4 x {} plane waves are required",
                self.grid_points, self.n_planewaves
            ));
        }
        if self.n_occupied == 0 || self.n_occupied >= self.n_planewaves {
            return cfg(format!("occupied band count {} is out of range", self.n_occupied));
        }
        if self.spin_degeneracy != 1 && self.spin_degeneracy != 2 {
            return cfg(format!("spin degeneracy must be 1 or 2, got {}", self.spin_degeneracy));
        }
        if !(self.scissors >= 0.0) {
            return cfg(format!("scissors shift must be non-negative, got {}", self.scissors));
        }
        if self.inversion_symmetric == Some(true) && self.potential.iter().any(|v| v.im != 0.0) {
            return cfg("a crystal declared inversion-symmetric must have real V_n".into());
        }
        Ok(())
    }

    /// Largest n with a nonzero coefficient.
    pub fn n_max(&self) -> usize {
        self.potential.iter().rposition(|v| v.norm() > 0.0).unwrap_or(0)
    }

    /// V_n for any integer n.
    pub fn v(&self, n: i64) -> C64 {
        let m = n.unsigned_abs() as usize;
        match self.potential.get(m) {
            Some(&v) if n >= 0 => v,
            Some(&v) => v.conj(),
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn g(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.lattice_constant
    }

    pub fn half_cutoff(&self) -> i64 {
        (self.n_planewaves as i64 - 1) / 2
    }

    pub fn planewave_indices(&self) -> impl Iterator<Item = i64> {
        let n = self.half_cutoff();
        -n..=n
    }

    /// Electrons per cell, spin included.
    pub fn n_electrons(&self) -> f64 {
        self.spin_degeneracy as f64 * self.n_occupied as f64
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        let mut s = self.v(0).re;
        for n in 1..self.potential.len() as i64 {
            s += 2.0 * (self.v(n) * C64::from_polar(1.0, self.g(n) * x)).re;
        }
        s
    }

    /// Smallest x_c in [0, a) about which V is even, if one exists.
    pub fn inversion_center(&self) -> Option<f64> {
        let scale = self.potential.iter().skip(1).fold(0.0f64, |m, v| m.max(v.norm()));
        let nz: Vec<i64> = (1..self.potential.len() as i64)
            .filter(|&n| self.v(n).norm() > 1e-14 * scale)
            .collect();
        let Some(&n1) = nz.first() else { return Some(0.0) };
        let a = self.lattice_constant;
        let phi = self.v(n1).arg();
        let mut candidates: Vec<f64> = (0..2 * n1)
            .map(|j| ((-phi + j as f64 * PI) / self.g(n1)).rem_euclid(a))
            .map(|x| if (a - x) < 1e-12 * a { 0.0 } else { x })
            .collect();
        candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());
        candidates.into_iter().find(|&xc| {
            nz.iter().all(|&n| {
                let w = self.v(n) * C64::from_polar(1.0, self.g(n) * xc);
                w.im.abs() <= 1e-12 * self.v(n).norm()
            })
        })
    }

    pub fn is_inversion_symmetric(&self) -> bool {
        self.inversion_symmetric.unwrap_or_else(|| self.inversion_center().is_some())
    }

    /// Cell origin used for phases and dipoles: explicit override, else inversion center, else 0.
    pub fn cell_origin(&self) -> f64 {
        self.origin.or_else(|| self.inversion_center()).unwrap_or(0.0)
    }

    pub fn grid(&self) -> CellGrid {
        CellGrid::new(self.lattice_constant, self.grid_points, self.cell_origin())
    }
}

/// Band-gap summary sampled on a dense k mesh including Γ and the zone boundary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GapInfo {
    pub valence_max: f64,
    pub conduction_min: f64,
    pub gap: f64,
    pub min_direct_gap: f64,
    pub direct_gap_k: f64,
}

pub fn band_gap(model: &CrystalModel, samples: usize) -> Result<GapInfo> {
    let a = model.lattice_constant;
    let gauge = gauge::MaxRealPositive;
    let mut info = GapInfo {
        valence_max: f64::NEG_INFINITY,
        conduction_min: f64::INFINITY,
        gap: 0.0,
        min_direct_gap: f64::INFINITY,
        direct_gap_k: 0.0,
    };
    let nv = model.n_occupied;
    for j in 0..=samples {
        let k = PI / a * j as f64 / samples as f64;
        let b = solve_bloch(model, k, &gauge)?;
        let (ev, ec) = (b.energies[nv - 1], b.energies[nv]);
        info.valence_max = info.valence_max.max(ev);
        info.conduction_min = info.conduction_min.min(ec);
        if ec - ev < info.min_direct_gap {
            info.min_direct_gap = ec - ev;
            info.direct_gap_k = k;
        }
    }
    info.gap = info.conduction_min - info.valence_max;
    Ok(info)
}

/// Reject models without a genuine gap between occupied and empty bands.
pub fn require_gap(model: &CrystalModel) -> Result<GapInfo> {
    let info = band_gap(model, 64)?;
    if info.gap <= 1e-6 {
        return Err(Error::Config(format!(
            "model is gapless or semimetallic (gap {:.3e} hartree); a genuine gap is required",
            info.gap
        )));
    }
    Ok(info)
}
