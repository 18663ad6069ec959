//! Density and current amplitudes of every harmonic order, and what follows from them.

pub mod diagnostics;
pub mod dipole;
pub mod fourier;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{FloquetArchive, KPointResult};
use crate::grid::{l2, CellGrid};

pub use diagnostics::{Diagnostics, ParityReport};
pub use dipole::{dipole_moment, DipoleMoment};
pub use fourier::{fourier_decomposition, FourierEntry};

/// Complex field ρ̃_μ(x) on the cell grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarField {
    pub order: i64,
    pub grid: CellGrid,
    pub values: Vec<C64>,
}

/// Real-valued amplitude (ϱ_μ or 𝔧_μ) on the cell grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealField {
    pub order: i64,
    pub grid: CellGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn integral(&self) -> C64 {
        self.grid.integrate_c(&self.values)
    }
    pub fn conj(&self) -> ScalarField {
        ScalarField { order: -self.order, grid: self.grid, values: self.values.iter().map(|z| z.conj()).collect() }
    }
}

impl RealField {
    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }
}

/// Which part of the zone the k-sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoneSum {
    Full,
    /// k > 0 only, with the -k half restored from time reversal.
    Half,
}

/// Harmonic orbitals w_μ(x) = Σ_m c[m][μ] u_m(x) and v_μ = (ik + d/dx) w_μ for one state.
struct Orbitals {
    w: Array2<C64>,
    v: Array2<C64>,
    mu_max: i64,
}

fn orbitals(kp: &KPointResult, state: usize) -> Orbitals {
    let s = &kp.states[state];
    let nb = s.n_bands();
    let u = kp.bloch.u.slice(ndarray::s![..nb, ..]);
    let du = kp.bloch.du.slice(ndarray::s![..nb, ..]);
    Orbitals { w: s.coefficients.dot(&u), v: s.coefficients.dot(&du), mu_max: s.mu_max as i64 }
}

impl Orbitals {
    fn row<'a>(&self, m: &'a Array2<C64>, mu: i64) -> Option<ndarray::ArrayView1<'a, C64>> {
        (mu.abs() <= self.mu_max).then(|| m.row((mu + self.mu_max) as usize))
    }

    /// Σ_μ w*_{μ+ν} a_μ, where a is w or v.
    fn correlate(&self, nu: i64, second: &Array2<C64>, out: &mut [C64], weight: f64) {
        for mu in -self.mu_max..=self.mu_max {
            let (Some(wa), Some(b)) = (self.row(&self.w, mu + nu), self.row(second, mu)) else { continue };
            for (o, (x, y)) in out.iter_mut().zip(wa.iter().zip(b.iter())) {
                *o += weight * x.conj() * y;
            }
        }
    }
}

/// ρ̃_ν and f_ν = Σ w*_{μ+ν} v_μ accumulated over the zone for ν in `orders`.
fn accumulate(archive: &FloquetArchive, orders: &[i64], with_current: bool, zone: ZoneSum) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let nx = archive.model.grid_points;
    let spin = archive.model.spin_degeneracy as f64;
    let mut rho = vec![vec![C64::new(0.0, 0.0); nx]; orders.len()];
    let mut f = vec![vec![C64::new(0.0, 0.0); nx]; if with_current { orders.len() } else { 0 }];
    let mut tmp = vec![C64::new(0.0, 0.0); nx];
    for kp in &archive.kpoints {
        if zone == ZoneSum::Half && kp.k <= 0.0 {
            continue;
        }
        for i in 0..kp.states.len() {
            let orb = orbitals(kp, i);
            for (slot, &nu) in orders.iter().enumerate() {
                match zone {
                    ZoneSum::Full => {
                        orb.correlate(nu, &orb.w, &mut rho[slot], spin * kp.weight);
                        if with_current {
                            orb.correlate(nu, &orb.v, &mut f[slot], spin * kp.weight);
                        }
                    }
                    ZoneSum::Half => {
                        tmp.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                        orb.correlate(nu, &orb.w, &mut tmp, spin * kp.weight);
                        let sign = if nu.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        for (r, t) in rho[slot].iter_mut().zip(&tmp) {
                            *r += t + sign * t.conj();
                        }
                    }
                }
            }
        }
    }
    (rho, f)
}

fn check_order(archive: &FloquetArchive, mu: i64) -> Result<()> {
    let limit = 2 * archive.params.mu_max as i64;
    if mu.abs() > limit {
        return Err(Error::Domain(format!("order {mu} outside |μ| <= 2 μ_max = {limit}")));
    }
    Ok(())
}

pub fn density_amplitude(archive: &FloquetArchive, mu: i64) -> Result<ScalarField> {
    density_amplitude_zone(archive, mu, ZoneSum::Full)
}

pub fn density_amplitude_zone(archive: &FloquetArchive, mu: i64, zone: ZoneSum) -> Result<ScalarField> {
    check_order(archive, mu)?;
    let (mut rho, _) = accumulate(archive, &[mu], false, zone);
    Ok(ScalarField { order: mu, grid: archive.model.grid(), values: rho.remove(0) })
}

/// ‖Re ρ̃‖/‖ρ̃‖ for odd μ, ‖Im ρ̃‖/‖ρ̃‖ for even μ; zero for a vanishing field.
pub fn parity_residual(field: &ScalarField) -> f64 {
    let total = l2(&field.values.iter().map(|z| z.norm()).collect::<Vec<_>>());
    if total == 0.0 {
        return 0.0;
    }
    let wrong: Vec<f64> = field
        .values
        .iter()
        .map(|z| if field.order.rem_euclid(2) == 1 { z.re } else { z.im })
        .collect();
    l2(&wrong) / total
}

/// ϱ_odd = 2 Im ρ̃, ϱ_even = 2 Re ρ̃ (also for μ = 0).
pub fn real_amplitudes(field: &ScalarField, max_parity_residual: f64) -> Result<RealField> {
    let res = parity_residual(field);
    if res > max_parity_residual {
        return Err(Error::TimeReversal { mu: field.order as i32, residual: res });
    }
    let odd = field.order.rem_euclid(2) == 1;
    let values = field.values.iter().map(|z| 2.0 * if odd { z.im } else { z.re }).collect();
    Ok(RealField { order: field.order, grid: field.grid, values })
}

/// All amplitudes up to a reporting order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Response {
    pub grid: CellGrid,
    pub omega: f64,
    pub e0: f64,
    pub n_electrons: f64,
    pub mu_report: usize,
    /// ρ̃_ν for ν = 0..=mu_report + 1.
    pub rho_tilde: Vec<ScalarField>,
    /// Complex number-current coefficients j̃_ν for ν = 0..=mu_report.
    pub j_tilde: Vec<ScalarField>,
    /// ϱ_ν for ν = 0..=mu_report.
    pub rho: Vec<RealField>,
    /// 𝔧_ν for ν = 0..=mu_report (ν = 0 holds 2 Re j̃_0, the static current).
    pub current: Vec<RealField>,
}

pub const DEFAULT_PARITY_LIMIT: f64 = 1e-6;
/// Orders below this fraction of max |ρ̃_0| are roundoff and skip the parity check.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

fn max_norm(f: &ScalarField) -> f64 {
    f.values.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Paramagnetic part (f_ν - f*_{-ν})/2i plus the A(t)ρ term s(E0/2ω)(ρ̃_{ν-1} + ρ̃_{ν+1}).
pub fn compute_response(archive: &FloquetArchive, mu_report: usize) -> Result<Response> {
    let top = mu_report as i64 + 1;
    check_order(archive, top)?;
    let orders: Vec<i64> = (-top..=top).collect();
    let (rho_all, f_all) = accumulate(archive, &orders, true, ZoneSum::Full);
    let at = |nu: i64| (nu + top) as usize;
    let grid = archive.model.grid();
    let c = archive.drive.half_amplitude();
    let i2 = C64::new(0.0, 2.0);

    let rho_tilde: Vec<ScalarField> = (0..=top)
        .map(|nu| ScalarField { order: nu, grid, values: rho_all[at(nu)].clone() })
        .collect();
    let floor_scale = max_norm(&rho_tilde[0]);
    let mut j_tilde = Vec::new();
    let mut rho = Vec::new();
    let mut current = Vec::new();
    for nu in 0..=mu_report as i64 {
        let vals: Vec<C64> = (0..grid.nx)
            .map(|x| {
                let para = (f_all[at(nu)][x] - f_all[at(-nu)][x].conj()) / i2;
                para + c * (rho_all[at(nu - 1)][x] + rho_all[at(nu + 1)][x])
            })
            .collect();
        let jt = ScalarField { order: nu, grid, values: vals };
        let odd = nu.rem_euclid(2) == 1;
        let jr: Vec<f64> = jt
            .values
            .iter()
            .map(|z| if nu == 0 { 2.0 * z.re } else if odd { -2.0 * z.re } else { 2.0 * z.im })
            .collect();
        current.push(RealField { order: nu, grid, values: jr });
        let field = &rho_tilde[nu as usize];
        let limit = if max_norm(field) < ROUNDOFF_FLOOR * floor_scale { f64::INFINITY } else { DEFAULT_PARITY_LIMIT };
        rho.push(real_amplitudes(field, limit)?);
        j_tilde.push(jt);
    }
    Ok(Response {
        grid,
        omega: archive.drive.omega,
        e0: archive.drive.e0,
        n_electrons: archive.n_electrons(),
        mu_report,
        rho_tilde,
        j_tilde,
        rho,
        current,
    })
}

pub fn current_amplitude(archive: &FloquetArchive, mu: usize) -> Result<RealField> {
    let r = compute_response(archive, mu)?;
    Ok(r.current[mu].clone())
}

impl Response {
    /// ρ(x,t) = ρ̃_0 - Σ_odd ϱ_μ sin μωt + Σ_even ϱ_μ cos μωt.
    pub fn density_signal(&self, t: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self.rho_tilde[0].values.iter().map(|z| z.re).collect();
        for f in self.rho.iter().skip(1) {
            let ph = f.order as f64 * self.omega * t;
            let w = if f.order % 2 == 1 { -ph.sin() } else { ph.cos() };
            for (o, v) in out.iter_mut().zip(&f.values) {
                *o += w * v;
            }
        }
        out
    }

    /// j(x,t) = -Σ_odd 𝔧_μ cos μωt - Σ_even 𝔧_μ sin μωt.
    pub fn current_signal(&self, t: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self.current[0].values.iter().map(|v| 0.5 * v).collect();
        for f in self.current.iter().skip(1) {
            let ph = f.order as f64 * self.omega * t;
            let w = if f.order % 2 == 1 { -ph.cos() } else { -ph.sin() };
            for (o, v) in out.iter_mut().zip(&f.values) {
                *o += w * v;
            }
        }
        out
    }

    pub fn rho_of(&self, mu: usize) -> &RealField {
        &self.rho[mu]
    }
}
