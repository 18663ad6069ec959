//! Field-free Bloch problem in the plane-wave basis.

use std::f64::consts::PI;

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::gauge::GaugeFixing;
use super::CrystalModel;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlochSolution {
    pub k: f64,
    /// Ascending, scissors applied to bands m >= n_occupied.
    pub energies: Vec<f64>,
    /// Plane-wave coefficients, one column per band (rows follow G_{-N}..G_N).
    pub coefficients: Array2<C64>,
    /// u_m(x_j), one row per band, normalized to ∫_cell |u|² = 1.
    pub u: Array2<C64>,
    /// (ik + d/dx) u_m(x_j).
    pub du: Array2<C64>,
    /// p_{m'm}(k) = ⟨u_m'|(-i d/dx + k)|u_m⟩.
    pub momentum: Array2<C64>,
}

impl BlochSolution {
    pub fn n_bands(&self) -> usize {
        self.energies.len()
    }
}

pub fn build_bloch_hamiltonian(model: &CrystalModel, k: f64) -> Result<Array2<C64>> {
    model.validate()?;
    let a = model.lattice_constant;
    if k.abs() > PI / a * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("k = {k} lies outside the first zone (|k| <= {})", PI / a)));
    }
    let idx: Vec<i64> = model.planewave_indices().collect();
    let n = idx.len();
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        let mut h = model.v(idx[i] - idx[j]);
        if i == j {
            let q = k + model.g(idx[i]);
            h += 0.5 * q * q;
        }
        h
    }))
}

pub fn solve_bloch(model: &CrystalModel, k: f64, gauge: &dyn GaugeFixing) -> Result<BlochSolution> {
    let h = build_bloch_hamiltonian(model, k)?;
    let eig = linalg::eigh(&h).map_err(|detail| Error::Eigensolver {
        k,
        detail: format!("{detail}; max |H| = {:.3e}", h.iter().fold(0.0f64, |m, z| m.max(z.norm()))),
    })?;
    let idx: Vec<i64> = model.planewave_indices().collect();
    let kg: Vec<f64> = idx.iter().map(|&n| k + model.g(n)).collect();
    let mut energies = eig.values.clone();
    let mut b = eig.vectors;
    resolve_degeneracies(&energies, &kg, &mut b)?;
    if k.abs() < 1e-12 * PI / model.lattice_constant {
        if let (true, Some(xc)) = (model.is_inversion_symmetric(), model.inversion_center()) {
            parity_resolve(model, &idx, xc, &h, &mut energies, &mut b)?;
        }
    }
    for m in 0..b.ncols() {
        gauge.fix(k, m, b.column_mut(m));
    }
    for e in energies.iter_mut().skip(model.n_occupied) {
        *e += model.scissors;
    }

    let grid = model.grid();
    let nb = b.ncols();
    let norm = 1.0 / model.lattice_constant.sqrt();
    // e^{i G_n x_j} table
    let phases = Array2::from_shape_fn((idx.len(), grid.nx), |(n, j)| {
        C64::from_polar(norm, model.g(idx[n]) * grid.x(j))
    });
    let mut u = Array2::<C64>::zeros((nb, grid.nx));
    let mut du = Array2::<C64>::zeros((nb, grid.nx));
    for m in 0..nb {
        for n in 0..idx.len() {
            let c = b[(n, m)];
            if c.norm() == 0.0 {
                continue;
            }
            let ci = c * C64::new(0.0, kg[n]);
            for j in 0..grid.nx {
                u[(m, j)] += c * phases[(n, j)];
                du[(m, j)] += ci * phases[(n, j)];
            }
        }
    }
    let momentum = plane_wave_momentum(&b, &kg);
    Ok(BlochSolution { k, energies, coefficients: b, u, du, momentum })
}

fn plane_wave_momentum(b: &Array2<C64>, kg: &[f64]) -> Array2<C64> {
    let nb = b.ncols();
    let mut p = Array2::<C64>::zeros((nb, nb));
    for i in 0..nb {
        for j in i..nb {
            let v: C64 = (0..kg.len()).map(|n| b[(n, i)].conj() * kg[n] * b[(n, j)]).sum();
            p[(i, j)] = v;
            p[(j, i)] = v.conj();
        }
        p[(i, i)].im = 0.0;
    }
    p
}

/// Within each cluster of degenerate energies, rotate to momentum eigenstates sorted by momentum.
fn resolve_degeneracies(energies: &[f64], kg: &[f64], b: &mut Array2<C64>) -> Result<()> {
    let n = energies.len();
    let mut start = 0;
    while start < n {
        let tol = 1e-8 * energies[start].abs().max(1.0);
        let mut end = start + 1;
        while end < n && (energies[end] - energies[start]).abs() < tol {
            end += 1;
        }
        if end - start > 1 {
            let sub = b.slice(s![.., start..end]).to_owned();
            let p = plane_wave_momentum(&sub, kg);
            let e = linalg::eigh(&p).map_err(|d| Error::Numerical(format!("degenerate-subspace rotation: {d}")))?;
            let rotated = sub.dot(&e.vectors);
            b.slice_mut(s![.., start..end]).assign(&rotated);
        }
        start = end;
    }
    Ok(())
}

/// Levels closer than this at Γ are split into parity eigenstates.
const PARITY_CLUSTER: f64 = 1e-2;

/// At Γ in an inversion-symmetric model, rotate clusters of close levels into simultaneous
/// eigenstates of parity about `xc` and of H within each parity sector.
fn parity_resolve(
    model: &CrystalModel,
    idx: &[i64],
    xc: f64,
    h: &Array2<C64>,
    energies: &mut [f64],
    b: &mut Array2<C64>,
) -> Result<()> {
    let half = (idx.len() as i64 - 1) / 2;
    let pos = |n: i64| (n + half) as usize;
    let parity = |v: &Array2<C64>| {
        let mut out = Array2::<C64>::zeros(v.raw_dim());
        for &n in idx {
            let ph = C64::from_polar(1.0, 2.0 * model.g(n) * xc);
            for c in 0..v.ncols() {
                out[(pos(-n), c)] = ph * v[(pos(n), c)];
            }
        }
        out
    };
    let adjoint_product = |x: &Array2<C64>, y: &Array2<C64>| x.t().mapv(|z| z.conj()).dot(y);
    let fail = |d: String| Error::Numerical(format!("parity resolution at Γ: {d}"));
    let n = energies.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && energies[end] - energies[end - 1] < PARITY_CLUSTER {
            end += 1;
        }
        if end - start > 1 {
            let sub = b.slice(s![.., start..end]).to_owned();
            let p = linalg::eigh(&adjoint_product(&sub, &parity(&sub))).map_err(fail)?;
            let rotated = sub.dot(&p.vectors);
            let mut states: Vec<(f64, ndarray::Array1<C64>)> = Vec::new();
            for sector in [false, true] {
                let cols: Vec<usize> = (0..p.values.len()).filter(|&c| (p.values[c] > 0.0) == sector).collect();
                if cols.is_empty() {
                    continue;
                }
                let part = rotated.select(ndarray::Axis(1), &cols);
                let e = linalg::eigh(&adjoint_product(&part, &h.dot(&part))).map_err(fail)?;
                let v = part.dot(&e.vectors);
                for (c, &ev) in e.values.iter().enumerate() {
                    states.push((ev, v.column(c).to_owned()));
                }
            }
            states.sort_by(|x, y| x.0.total_cmp(&y.0));
            for (c, (ev, v)) in states.into_iter().enumerate() {
                energies[start + c] = ev;
                b.column_mut(start + c).assign(&v);
            }
        }
        start = end;
    }
    Ok(())
}

/// Plane-wave route: p_{m'm} = Σ_n b*_m'(n) (k + G_n) b_m(n).
pub fn momentum_matrix(model: &CrystalModel, bloch: &BlochSolution) -> Array2<C64> {
    let kg: Vec<f64> = model.planewave_indices().map(|n| bloch.k + model.g(n)).collect();
    plane_wave_momentum(&bloch.coefficients, &kg)
}

/// Real-space route: ⟨u_m'|(-i d/dx + k)|u_m⟩ with spectral differentiation on the grid.
pub fn momentum_spectral(model: &CrystalModel, bloch: &BlochSolution) -> Array2<C64> {
    let grid = model.grid();
    let nb = bloch.n_bands();
    let rows: Vec<Vec<C64>> = (0..nb).map(|m| bloch.u.row(m).to_vec()).collect();
    let applied: Vec<Vec<C64>> = rows
        .iter()
        .map(|u| {
            grid.derivative_c(u)
                .iter()
                .zip(u)
                .map(|(d, v)| C64::new(0.0, -1.0) * d + bloch.k * v)
                .collect()
        })
        .collect();
    Array2::from_shape_fn((nb, nb), |(i, j)| {
        let f: Vec<C64> = rows[i].iter().zip(&applied[j]).map(|(a, b)| a.conj() * b).collect();
        grid.integrate_c(&f)
    })
}
