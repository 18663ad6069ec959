use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_interference, Ablation, SpectraPair, Window};
use super::{moduli_registry, recover_phases, KnownZero, RecoveryInput, StepStatus};
use crate::error::{Error, Result};
use crate::grid::rel_l2;
use crate::observables::fourier::wrap_phase;
use crate::observables::Response;
use crate::xray::{Amplitudes, SpectrumGrid, XrayPulse};

/// Fourier weight below this fraction of the largest component counts as absent in synthesis checks.
const BAND_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundTripConfig {
    pub pulse: XrayPulse,
    /// Positive reciprocal indices n, G = 2πn/a.
    pub g_indices: Vec<i64>,
    pub mu_report: usize,
    pub grid: Option<SpectrumGrid>,
    /// Replaces the true α_0(G) as the assumed-known phase.
    pub alpha0: Option<f64>,
    pub moduli: String,
    pub ablation: Ablation,
    /// Orders synthesized in real space.
    pub synthesis_orders: Vec<usize>,
}

impl RoundTripConfig {
    pub fn new(pulse: XrayPulse, g_indices: Vec<i64>, mu_report: usize) -> Self {
        RoundTripConfig {
            pulse,
            g_indices,
            mu_report,
            grid: None,
            alpha0: None,
            moduli: "gaussian-fit".into(),
            ablation: Ablation::None,
            synthesis_orders: vec![1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryStatus {
    Known,
    Recovered,
    Undetectable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundTripEntry {
    pub n: i64,
    pub g: f64,
    pub mu: i64,
    pub status: EntryStatus,
    pub recovered_modulus: f64,
    pub recovered_phase: Option<f64>,
    pub true_modulus: f64,
    /// α_μ(G) shifted by any α_0 override, i.e. what a perfect recovery returns.
    pub true_phase: f64,
    pub modulus_error: Option<f64>,
    pub phase_error: Option<f64>,
    pub resolvable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealSpaceCheck {
    pub mu: usize,
    pub g_used: Vec<i64>,
    /// ‖ϱ_rec - ϱ‖/‖ϱ‖ for the synthesis from recovered coefficients.
    pub rel_l2: f64,
    /// The same error for a synthesis from exact coefficients over the same G set.
    pub truncation_error: f64,
    /// Some lattice G outside the set carry weight above the floor.
    pub band_limited: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub moduli_strategy: String,
    pub pulse: XrayPulse,
    pub omega: f64,
    pub delays: Vec<f64>,
    pub ablation: Ablation,
    pub windows: Vec<(i64, Vec<Window>)>,
    pub known: Vec<(i64, KnownZero)>,
    pub entries: Vec<RoundTripEntry>,
    pub real_space: Vec<RealSpaceCheck>,
    pub max_modulus_error: f64,
    pub max_phase_error: f64,
    pub max_fit_residual: f64,
}

impl ReconstructionReport {
    pub fn entry(&self, n: i64, mu: i64) -> Option<&RoundTripEntry> {
        self.entries.iter().find(|e| e.n == n && e.mu == mu)
    }

    /// Plain-text table of every entry.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "moduli: {}  tau_p = {:.3} au  ablation: {:?}\n{:>4} {:>3} {:>13} {:>13} {:>10} {:>9} {:>9} {:>10}\n",
            self.moduli_strategy, self.pulse.duration, self.ablation, "n", "mu", "|F| rec", "|F| true", "rel err", "alpha/pi", "true/pi", "err/pi"
        );
        for e in &self.entries {
            s += &format!(
                "{:>4} {:>3} {:>13.6e} {:>13.6e} {:>10} {:>9} {:>9.4} {:>10}\n",
                e.n,
                e.mu,
                e.recovered_modulus,
                e.true_modulus,
                e.modulus_error.map_or("-".into(), |v| format!("{v:.2e}")),
                e.recovered_phase.map_or("-".into(), |v| format!("{:.4}", v / PI)),
                e.true_phase / PI,
                e.phase_error.map_or("-".into(), |v| format!("{:.2e}", v / PI)),
            );
        }
        for r in &self.real_space {
            s += &format!(
                "real space mu={} over {} G: rel L2 {:.3e} (truncation {:.3e}{})\n",
                r.mu,
                r.g_used.len(),
                r.rel_l2,
                r.truncation_error,
                if r.band_limited { ", band-limited" } else { "" }
            );
        }
        s
    }
}

struct PerG {
    n: i64,
    windows: Vec<Window>,
    known: KnownZero,
    entries: Vec<RoundTripEntry>,
    recovered: Vec<C64>,
    residual: f64,
}

fn truth(resp: &Response, n: i64, mu: usize) -> C64 {
    let g = 2.0 * PI * n as f64 / resp.grid.a;
    resp.grid.fourier(g, &resp.rho[mu].values)
}

/// Forward-simulate spectra at ±G for each G, recover moduli and phases, and compare with the
/// directly computed transforms; then synthesize ϱ_μ(x) from the recovered coefficients.
pub fn round_trip_report(resp: &Response, cfg: &RoundTripConfig) -> Result<ReconstructionReport> {
    if cfg.mu_report > resp.mu_report {
        return Err(Error::Config(format!(
            "cannot reconstruct order {} from a response computed to order {}",
            cfg.mu_report, resp.mu_report
        )));
    }
    if cfg.g_indices.iter().any(|&n| n <= 0) {
        return Err(Error::Config("reconstruction uses positive reciprocal indices; -G is implied".into()));
    }
    let strategy = moduli_registry().get(&cfg.moduli)?;
    let omega = resp.omega;
    let grid = cfg.grid.clone().unwrap_or_else(|| SpectrumGrid::default_for(omega, cfg.mu_report));
    let zero_field = resp.e0 == 0.0;
    let resolvable = cfg.pulse.resolves(1, omega);

    let per_g: Vec<PerG> = cfg
        .g_indices
        .par_iter()
        .map(|&n| -> Result<PerG> {
            let amps = Amplitudes::from_response(resp, n);
            let pair = SpectraPair::simulate(&amps, &cfg.pulse, omega, &grid)?;
            let f0 = truth(resp, n, 0);
            let offset = cfg.alpha0.map_or(0.0, |a| a - f0.arg());
            let known = KnownZero { modulus: f0.norm(), phase: wrap_phase(f0.arg() + offset) };
            let mut entries = vec![RoundTripEntry {
                n,
                g: amps.g,
                mu: 0,
                status: EntryStatus::Known,
                recovered_modulus: known.modulus,
                recovered_phase: Some(known.phase),
                true_modulus: known.modulus,
                true_phase: known.phase,
                modulus_error: Some(0.0),
                phase_error: Some(0.0),
                resolvable,
            }];
            let mut recovered = vec![known.value()];
            let fit = fit_interference(&pair, &pair.recombined(cfg.ablation), cfg.mu_report)?;
            if !zero_field {
                let moduli =
                    strategy.recover(&RecoveryInput { pair: &pair, interference: &fit, known, mu_report: cfg.mu_report })?;
                let chain = recover_phases(&fit, known, omega, cfg.pulse.duration, cfg.mu_report);
                for mu in 1..=cfg.mu_report {
                    let t = truth(resp, n, mu);
                    let true_phase = wrap_phase(t.arg() + offset);
                    let step = chain.steps.iter().find(|s| s.mu == mu as i64);
                    let ok = step.is_some_and(|s| s.status == StepStatus::Recovered);
                    let phase = ok.then(|| step.unwrap().phase);
                    let modulus = if ok { moduli[mu] } else { 0.0 };
                    recovered.push(phase.map_or(C64::new(0.0, 0.0), |p| C64::from_polar(modulus, p)));
                    entries.push(RoundTripEntry {
                        n,
                        g: amps.g,
                        mu: mu as i64,
                        status: if ok { EntryStatus::Recovered } else { EntryStatus::Undetectable },
                        recovered_modulus: modulus,
                        recovered_phase: phase,
                        true_modulus: t.norm(),
                        true_phase,
                        modulus_error: (ok && t.norm() > 0.0).then(|| (modulus - t.norm()).abs() / t.norm()),
                        phase_error: phase.map(|p| wrap_phase(p - true_phase).abs()),
                        resolvable,
                    });
                }
            }
            Ok(PerG { n, windows: fit.windows.clone(), known, entries, recovered, residual: fit.residual })
        })
        .collect::<Result<_>>()?;

    let mut real_space = Vec::new();
    if !zero_field {
        for &mu in &cfg.synthesis_orders {
            if mu == 0 || mu > cfg.mu_report {
                continue;
            }
            real_space.push(synthesize(resp, mu, &per_g));
        }
    }

    let entries: Vec<RoundTripEntry> = per_g.iter().flat_map(|p| p.entries.clone()).collect();
    let max_modulus_error = entries.iter().filter_map(|e| e.modulus_error).fold(0.0, f64::max);
    let max_phase_error = entries.iter().filter_map(|e| e.phase_error).fold(0.0, f64::max);
    Ok(ReconstructionReport {
        moduli_strategy: strategy.name().into(),
        pulse: cfg.pulse,
        omega,
        delays: grid.delays.clone(),
        ablation: cfg.ablation,
        windows: per_g.iter().map(|p| (p.n, p.windows.clone())).collect(),
        known: per_g.iter().map(|p| (p.n, p.known)).collect(),
        entries,
        real_space,
        max_modulus_error,
        max_phase_error,
        max_fit_residual: per_g.iter().map(|p| p.residual).fold(0.0, f64::max),
    })
}

/// ϱ(x) = (1/a) Σ_G F(G) e^{-iGx} over ±G of the set (the G = 0 term vanishes for μ ≥ 1).
pub fn synthesize_field(grid: &crate::grid::CellGrid, coeffs: &[(i64, C64)]) -> Vec<f64> {
    (0..grid.nx)
        .map(|j| {
            let x = grid.x(j);
            coeffs
                .iter()
                .map(|&(n, f)| {
                    let g = 2.0 * PI * n as f64 / grid.a;
                    2.0 * (f * C64::from_polar(1.0, -g * x)).re
                })
                .sum::<f64>()
                / grid.a
        })
        .collect()
}

fn synthesize(resp: &Response, mu: usize, per_g: &[PerG]) -> RealSpaceCheck {
    let grid = resp.grid;
    let target = &resp.rho[mu].values;
    let rec: Vec<(i64, C64)> = per_g.iter().map(|p| (p.n, p.recovered[mu])).collect();
    let exact: Vec<(i64, C64)> = per_g.iter().map(|p| (p.n, truth(resp, p.n, mu))).collect();
    let used: Vec<i64> = per_g.iter().map(|p| p.n).collect();
    let all: Vec<f64> = (1..grid.nx as i64 / 2).map(|n| truth(resp, n, mu).norm()).collect();
    let largest = all.iter().cloned().fold(0.0, f64::max);
    let band_limited = all
        .iter()
        .enumerate()
        .any(|(i, &v)| !used.contains(&(i as i64 + 1)) && v > BAND_FLOOR * largest);
    RealSpaceCheck {
        mu,
        g_used: used,
        rel_l2: rel_l2(&synthesize_field(&grid, &rec), target),
        truncation_error: rel_l2(&synthesize_field(&grid, &exact), target),
        band_limited,
    }
}
