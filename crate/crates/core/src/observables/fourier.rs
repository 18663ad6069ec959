use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{RealField, Response};
use crate::error::{Error, Result};

/// Spatial Fourier data of ϱ_μ at one reciprocal vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierEntry {
    /// G = 2π n / a.
    pub n: i64,
    pub g: f64,
    pub mu: i64,
    /// ∫ cos(Gx) ϱ_μ
    pub pg: f64,
    /// ∫ sin(Gx) ϱ_μ
    pub pu: f64,
    pub modulus: f64,
    /// α_μ ∈ (-π, π]
    pub phase: f64,
    /// (iG/μω) ∫ e^{iGx} 𝔧_μ, when currents are supplied and μ ≠ 0.
    pub divergence_route: Option<C64>,
    pub divergence_rel_diff: Option<f64>,
}

impl FourierEntry {
    pub fn f(&self) -> C64 {
        C64::new(self.pg, self.pu)
    }
}

/// Integer n with G = 2πn/a, or a domain error for off-lattice G.
pub fn reciprocal_index(g: f64, a: f64) -> Result<i64> {
    let x = g * a / (2.0 * PI);
    let n = x.round();
    if (x - n).abs() > 1e-9 * x.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "G = {g} is not a reciprocal lattice vector (G a / 2π = {x}); quasielastic signal exists only at lattice G"
        )));
    }
    Ok(n as i64)
}

/// Phase in (-π, π].
pub fn wrap_phase(p: f64) -> f64 {
    let r = p.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn phase_of(z: C64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        wrap_phase(z.arg())
    }
}

/// P^g, P^u, |F|, α for each order in `rho` at each reciprocal vector in `g_list`.
pub fn fourier_decomposition(
    rho: &[RealField],
    current: Option<&[RealField]>,
    omega: f64,
    g_list: &[f64],
) -> Result<Vec<FourierEntry>> {
    let mut out = Vec::new();
    for &g in g_list {
        for (idx, field) in rho.iter().enumerate() {
            let a = field.grid.a;
            let n = reciprocal_index(g, a)?;
            let g = 2.0 * PI * n as f64 / a;
            let f = field.grid.fourier(g, &field.values);
            let mu = field.order;
            let (divergence_route, divergence_rel_diff) = match current {
                Some(js) if mu != 0 => {
                    let j = &js[idx];
                    debug_assert_eq!(j.order, mu);
                    let fj = j.grid.fourier(g, &j.values);
                    let fd = C64::new(0.0, g) * fj / (mu as f64 * omega);
                    let scale = f.norm().max(fd.norm());
                    let rel = if scale > 0.0 { (fd - f).norm() / scale } else { 0.0 };
                    (Some(fd), Some(rel))
                }
                _ => (None, None),
            };
            out.push(FourierEntry {
                n,
                g,
                mu,
                pg: f.re,
                pu: f.im,
                modulus: f.norm(),
                phase: phase_of(f),
                divergence_route,
                divergence_rel_diff,
            });
        }
    }
    Ok(out)
}

/// Decomposition of a full response at G = 2πn/a for n in `indices`.
pub fn response_fourier(resp: &Response, indices: &[i64]) -> Result<Vec<FourierEntry>> {
    let a = resp.grid.a;
    let gs: Vec<f64> = indices.iter().map(|&n| 2.0 * PI * n as f64 / a).collect();
    fourier_decomposition(&resp.rho, Some(&resp.current), resp.omega, &gs)
}

/// F_μ(G) for every order and index as a lookup table keyed by (n, μ).
pub fn lookup(entries: &[FourierEntry], n: i64, mu: i64) -> Option<&FourierEntry> {
    entries.iter().find(|e| e.n == n && e.mu == mu)
}
