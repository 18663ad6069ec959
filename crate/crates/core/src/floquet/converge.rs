use serde::{Deserialize, Serialize};

use super::archive::{solve_archive, FloquetParams, ResonancePolicy};
use super::DriveField;
use crate::crystal::{CrystalModel, GaugeFixing};
use crate::error::{Error, Result};
use crate::observables::{self, fourier};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest allowed change of any reported F_μ(G) between ladder steps.
    pub tolerance: f64,
    pub mu_report: usize,
    /// Reciprocal vectors G_1..G_n monitored.
    pub g_count: usize,
    pub mu_max_ceiling: usize,
    pub bands_ceiling: usize,
    pub k_ceiling: usize,
    pub band_step: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tolerance: 1e-8,
            mu_report: 4,
            g_count: 3,
            mu_max_ceiling: 64,
            bands_ceiling: 25,
            k_ceiling: 64,
            band_step: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceStep {
    pub params: FloquetParams,
    /// Change when doubling μ_max (None at the ceiling).
    pub change_mu: Option<f64>,
    pub change_bands: Option<f64>,
    pub change_k: Option<f64>,
}

impl ConvergenceStep {
    pub fn max_change(&self) -> f64 {
        [self.change_mu, self.change_bands, self.change_k].iter().flatten().fold(0.0, |m: f64, v| m.max(*v))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub params: FloquetParams,
    pub trace: Vec<ConvergenceStep>,
}

fn components(
    model: &CrystalModel,
    drive: &DriveField,
    p: FloquetParams,
    tol: &Tolerances,
    gauge: &dyn GaugeFixing,
) -> Result<Vec<num_complex::Complex64>> {
    let archive = solve_archive(model, drive, p, gauge, ResonancePolicy::Exclude)?;
    let mu_report = tol.mu_report.min(2 * p.mu_max - 1);
    let resp = observables::compute_response(&archive, mu_report)?;
    let idx: Vec<i64> = (1..=tol.g_count as i64).collect();
    // orders the truncated ladder cannot represent count as zero
    let mut out = vec![num_complex::Complex64::new(0.0, 0.0); (tol.mu_report + 1) * tol.g_count];
    for e in fourier::response_fourier(&resp, &idx)? {
        out[e.mu as usize * tol.g_count + (e.n - 1) as usize] = e.f();
    }
    Ok(out)
}

fn max_diff(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Refine μ_max (doubling), band count and k-mesh (doubling) until the reported Fourier
/// components stop changing.
pub fn converge_floquet(
    model: &CrystalModel,
    drive: &DriveField,
    start: FloquetParams,
    tol: &Tolerances,
    gauge: &dyn GaugeFixing,
) -> Result<ConvergenceReport> {
    if !(tol.tolerance > 0.0) {
        return Err(Error::Config("convergence tolerance must be positive".into()));
    }
    let mut p = start;
    let mut trace = Vec::new();
    loop {
        let base = components(model, drive, p, tol, gauge)?;
        let try_step = |q: FloquetParams, allowed: bool| -> Result<Option<f64>> {
            if !allowed {
                return Ok(None);
            }
            Ok(Some(max_diff(&components(model, drive, q, tol, gauge)?, &base)))
        };
        let q_mu = FloquetParams { mu_max: 2 * p.mu_max, ..p };
        let q_b = FloquetParams { n_bands: p.n_bands + tol.band_step, ..p };
        let q_k = FloquetParams { n_k: 2 * p.n_k, ..p };
        let step = ConvergenceStep {
            params: p,
            change_mu: try_step(q_mu, q_mu.mu_max <= tol.mu_max_ceiling)?,
            change_bands: try_step(q_b, q_b.n_bands <= tol.bands_ceiling.min(model.n_planewaves))?,
            change_k: try_step(q_k, q_k.n_k <= tol.k_ceiling)?,
        };
        let over = |c: Option<f64>| c.is_some_and(|v| v >= tol.tolerance);
        let (rm, rb, rk) = (over(step.change_mu), over(step.change_bands), over(step.change_k));
        let last = step.max_change();
        trace.push(step);
        if !(rm || rb || rk) {
            let at_ceiling = trace.last().map(|s| s.change_mu.is_none() && s.change_bands.is_none() && s.change_k.is_none());
            if at_ceiling == Some(true) && trace.len() == 1 && tol.tolerance < f64::INFINITY {
                // nothing could be checked at all
                return Err(Error::Convergence { steps: trace.len(), last_change: f64::NAN });
            }
            return Ok(ConvergenceReport { params: p, trace });
        }
        if rm {
            p.mu_max *= 2;
        }
        if rb {
            p.n_bands += tol.band_step;
        }
        if rk {
            p.n_k *= 2;
        }
        if p.mu_max > tol.mu_max_ceiling || p.n_bands > tol.bands_ceiling || p.n_k > tol.k_ceiling {
            return Err(Error::Convergence { steps: trace.len(), last_change: last });
        }
    }
}
