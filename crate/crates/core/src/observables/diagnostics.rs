//! Symmetry and conservation checks on a computed response.

use serde::{Deserialize, Serialize};

use super::{density_amplitude_zone, parity_residual, RealField, Response, ZoneSum};
use crate::error::Result;
use crate::floquet::FloquetArchive;
use crate::grid::max_abs;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParityReport {
    pub mu: i64,
    /// max |ϱ(x) ∓ ϱ(-x)| / max |ϱ|, the sign chosen by the parity of μ.
    pub density_inversion: f64,
    /// |∫𝔧_μ| / max |𝔧_μ|.
    pub current_integral: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    /// |∫ρ̃_0 - N_el| / N_el
    pub sum_rule_zero: f64,
    /// |∫ρ̃_μ| / N_el for μ = 1..=mu_report
    pub sum_rule_higher: Vec<f64>,
    /// time-reversal parity residual per μ = 0..=mu_report
    pub time_reversal: Vec<f64>,
    /// continuity residual per μ = 1..=mu_report
    pub continuity: Vec<f64>,
    pub inversion: Vec<ParityReport>,
    /// max |static current| / max |𝔧_1|, zero without a drive
    pub static_current: f64,
}

/// max |ϱ(x0 + y) - σ ϱ(x0 - y)| / max |ϱ| with σ = +1 for even μ, -1 for odd μ.
pub fn inversion_residual(field: &RealField) -> f64 {
    let m = max_abs(&field.values);
    if m == 0.0 {
        return 0.0;
    }
    let sigma = if field.order.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let g = &field.grid;
    (0..g.nx)
        .map(|j| (field.values[j] - sigma * field.values[g.mirror(j)]).abs())
        .fold(0.0, f64::max)
        / m
}

/// max |d𝔧_μ/dx + μω ϱ_μ| / max |μω ϱ_μ|.
pub fn continuity_residual(rho: &RealField, current: &RealField, omega: f64) -> f64 {
    let mw = rho.order as f64 * omega;
    let dj = current.grid.derivative(&current.values);
    let scale = max_abs(&rho.values) * mw.abs();
    let res = dj.iter().zip(&rho.values).map(|(d, r)| (d + mw * r).abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        res / scale
    } else {
        res
    }
}

pub fn current_integral_residual(current: &RealField) -> f64 {
    let m = max_abs(&current.values);
    if m == 0.0 {
        0.0
    } else {
        current.integral().abs() / m
    }
}

pub fn diagnose(resp: &Response) -> Diagnostics {
    let nel = resp.n_electrons;
    let sum_rule_zero = (resp.rho_tilde[0].integral().re - nel).abs() / nel;
    let sum_rule_higher = (1..=resp.mu_report).map(|mu| resp.rho_tilde[mu].integral().norm() / nel).collect();
    let time_reversal = (0..=resp.mu_report).map(|mu| parity_residual(&resp.rho_tilde[mu])).collect();
    let continuity = (1..=resp.mu_report)
        .map(|mu| continuity_residual(&resp.rho[mu], &resp.current[mu], resp.omega))
        .collect();
    let inversion = (1..=resp.mu_report)
        .map(|mu| ParityReport {
            mu: mu as i64,
            density_inversion: inversion_residual(&resp.rho[mu]),
            current_integral: current_integral_residual(&resp.current[mu]),
        })
        .collect();
    let j1 = resp.current.get(1).map(|f| max_abs(&f.values)).unwrap_or(0.0);
    let static_current = if j1 > 0.0 { max_abs(&resp.current[0].values) / j1 } else { max_abs(&resp.current[0].values) };
    Diagnostics { sum_rule_zero, sum_rule_higher, time_reversal, continuity, inversion, static_current }
}

/// Largest relative difference between full-zone and half-zone ρ̃_μ, μ = 0..=mu_report.
pub fn half_zone_agreement(archive: &FloquetArchive, mu_report: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for mu in 0..=mu_report as i64 {
        let full = density_amplitude_zone(archive, mu, ZoneSum::Full)?;
        let half = density_amplitude_zone(archive, mu, ZoneSum::Half)?;
        let scale = full.values.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1e-300);
        let d = full.values.iter().zip(&half.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(d / scale);
    }
    Ok(worst)
}
