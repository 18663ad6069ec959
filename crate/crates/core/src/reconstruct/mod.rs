//! Recovery of |F_μ(G)| and α_μ(G) from spectra at ±G over a t_p scan.

pub mod fit;
pub mod roundtrip;

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::fourier::wrap_phase;
use crate::registry::{Named, Registry};
use crate::xray::{envelope, envelope_peak, overlap_factor, tilde_from_real};

pub use fit::{fit_interference, Ablation, InterferenceFit, SpectraPair, Window, DETECTION_FLOOR};
pub use roundtrip::{round_trip_report, EntryStatus, RealSpaceCheck, ReconstructionReport, RoundTripConfig, RoundTripEntry};

/// F_0(G), assumed known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnownZero {
    pub modulus: f64,
    pub phase: f64,
}

impl KnownZero {
    pub fn value(&self) -> C64 {
        C64::from_polar(self.modulus, self.phase)
    }
}

pub struct RecoveryInput<'a> {
    pub pair: &'a SpectraPair,
    pub interference: &'a InterferenceFit,
    pub known: KnownZero,
    pub mu_report: usize,
}

pub trait ModulusRecovery: Named + Send + Sync {
    /// |F_μ(G)| for μ = 0..=mu_report (entry 0 is the known |F_0|).
    fn recover(&self, input: &RecoveryInput<'_>) -> Result<Vec<f64>>;
}

/// Largest tolerated relative residual of the side-peak fit.
pub const PEAK_FIT_TOLERANCE: f64 = 1e-6;

/// Least-squares fit of the time-independent part to the known Gaussian side-peak shapes.
pub struct GaussianFit;

impl Named for GaussianFit {
    fn name(&self) -> &'static str {
        "gaussian-fit"
    }
    fn describe(&self) -> &'static str {
        "side-peak intensities from a least-squares fit of Ẽ_μ² shapes"
    }
}

impl ModulusRecovery for GaussianFit {
    fn recover(&self, input: &RecoveryInput<'_>) -> Result<Vec<f64>> {
        let spec = &input.pair.plus;
        let (omega, tau) = (spec.omega, spec.pulse.duration);
        let data = &input.pair.parts.time_independent;
        let top = input.mu_report as i64 + 1;
        let peak2 = envelope_peak(tau).powi(2);
        // |F̃_μ(G)| = |F̃_{-μ}(G)|, so ±μ share one unknown
        let basis = ndarray::Array2::from_shape_fn((data.len(), top as usize + 1), |(r, m)| {
            let d = spec.grid.detuning[r];
            let m = m as i64;
            let e = envelope(m, d, omega, tau).powi(2) + if m > 0 { envelope(-m, d, omega, tau).powi(2) } else { 0.0 };
            e / peak2
        });
        let x = crate::linalg::lstsq(&basis, data);
        let scale = data.iter().cloned().fold(0.0, f64::max);
        let worst = (0..data.len())
            .map(|r| (data[r] - (0..x.len()).map(|c| basis[[r, c]] * x[c]).sum::<f64>()).abs())
            .fold(0.0, f64::max);
        if scale > 0.0 && worst > PEAK_FIT_TOLERANCE * scale {
            return Err(Error::Fit(format!(
                "side-peak fit residual {:.2e} of the peak; envelope model does not describe the data",
                worst / scale
            )));
        }
        // x_0 is 1 for a noiseless spectrum; normalizing by it keeps |F_0| as the reference
        let x0 = x[0];
        if !(x0 > 0.0) {
            return Err(Error::Fit("no Bragg peak in the time-independent part".into()));
        }
        Ok((0..=input.mu_report)
            .map(|m| if m == 0 { input.known.modulus } else { input.known.modulus * (x[m].max(0.0) / x0).sqrt() })
            .collect())
    }
}

/// Moduli chained through the Δμ = 1 interference products:
/// |F_{μ+1}| = |Z_μ| |F_0|² / |F_μ|.
pub struct InterferenceRatio;

impl Named for InterferenceRatio {
    fn name(&self) -> &'static str {
        "interference-ratio"
    }
    fn describe(&self) -> &'static str {
        "moduli from interference amplitudes divided by the preceding modulus"
    }
}

impl ModulusRecovery for InterferenceRatio {
    fn recover(&self, input: &RecoveryInput<'_>) -> Result<Vec<f64>> {
        let f0 = input.known.modulus;
        let mut out = vec![f0];
        for nu in 0..input.mu_report as i64 {
            let prev = out[nu as usize];
            let next = match input.interference.get(nu) {
                Some((z, amp)) if amp >= DETECTION_FLOOR && prev > 0.0 => z.norm() * f0 * f0 / prev,
                _ => 0.0,
            };
            out.push(next);
        }
        Ok(out)
    }
}

pub fn moduli_registry() -> Registry<dyn ModulusRecovery> {
    Registry::<dyn ModulusRecovery>::new("modulus recovery strategy")
        .with(Arc::new(GaussianFit))
        .with(Arc::new(InterferenceRatio))
}

pub fn recover_moduli(
    pair: &SpectraPair,
    known: KnownZero,
    mu_report: usize,
    strategy: &dyn ModulusRecovery,
    ablation: Ablation,
) -> Result<Vec<f64>> {
    let interference = fit_interference(pair, &pair.recombined(ablation), mu_report)?;
    strategy.recover(&RecoveryInput { pair, interference: &interference, known, mu_report })
}

/// κ_μ with F̃_μ = κ_μ F_μ, read off the forward mapping.
fn kappa(mu: i64) -> C64 {
    tilde_from_real(mu, C64::new(1.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepStatus {
    Recovered,
    /// Interference amplitude below the detection floor; the chain stops here.
    Undetectable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseStep {
    pub mu: i64,
    /// α_μ in (-π, π]
    pub phase: f64,
    pub status: StepStatus,
    /// Fitted A cos ωt_p + B sin ωt_p coefficients of the (μ-1, μ) window at its centre.
    pub cos_coefficient: f64,
    pub sin_coefficient: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseChain {
    pub alpha0: f64,
    pub steps: Vec<PhaseStep>,
    /// First order that could not be reached.
    pub broken_at: Option<i64>,
}

impl PhaseChain {
    pub fn phase(&self, mu: i64) -> Option<f64> {
        if mu == 0 {
            return Some(self.alpha0);
        }
        self.steps.iter().find(|s| s.mu == mu && s.status == StepStatus::Recovered).map(|s| s.phase)
    }

    pub fn require_complete(&self) -> Result<()> {
        match self.broken_at {
            Some(mu) => Err(Error::Undetectable(format!("phase chain stops before order {mu}"))),
            None => Ok(()),
        }
    }
}

/// arg F̃_{μ+1} = arg Z_μ + arg F̃_μ, started from F̃_0 = κ_0 F_0.
pub fn recover_phases(fit: &InterferenceFit, known: KnownZero, omega: f64, tau: f64, mu_report: usize) -> PhaseChain {
    let mut arg_tilde = (kappa(0) * C64::from_polar(1.0, known.phase)).arg();
    let mut steps = Vec::new();
    let mut broken_at = None;
    let mid = overlap_factor(1.0, omega, tau);
    for nu in 0..mu_report as i64 {
        let mu = nu + 1;
        let (z, amp) = fit.get(nu).unwrap_or((C64::new(0.0, 0.0), 0.0));
        // 2 f Re[Z e^{iωt}] = A cos ωt + B sin ωt
        let (a, b) = (2.0 * mid * z.re, -2.0 * mid * z.im);
        if amp < DETECTION_FLOOR {
            steps.push(PhaseStep { mu, phase: 0.0, status: StepStatus::Undetectable, cos_coefficient: a, sin_coefficient: b });
            broken_at = Some(mu);
            break;
        }
        arg_tilde += z.arg();
        let phase = wrap_phase(arg_tilde - kappa(mu).arg());
        steps.push(PhaseStep { mu, phase, status: StepStatus::Recovered, cos_coefficient: a, sin_coefficient: b });
    }
    PhaseChain { alpha0: wrap_phase(known.phase), steps, broken_at }
}

/// |P^u_1| from the maximum of P(G) - P(-G) at ω_s = ω_i + ω/2 divided by 4 P^g_0 e^{-(ωτ)²/16ln2},
/// for inversion-symmetric crystals with P^g_0 = |F_0|.
pub fn symmetric_ratio_estimate(pair: &SpectraPair, known: KnownZero) -> Result<f64> {
    let spec = &pair.plus;
    let omega = spec.omega;
    let row = spec
        .grid
        .detuning
        .iter()
        .position(|&d| (d - 0.5 * omega).abs() < 1e-9 * omega)
        .ok_or_else(|| Error::Domain("detuning grid has no point at ω/2".into()))?;
    let d_max = pair.parts.antisymmetric.row(row).iter().map(|v| (2.0 * v).abs()).fold(0.0, f64::max);
    let f = overlap_factor(1.0, omega, spec.pulse.duration);
    Ok(d_max * known.modulus / (4.0 * f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xray::{Amplitudes, SpectrumGrid, XrayPulse};

    fn pair(vals: &[C64], periods: f64) -> SpectraPair {
        let a = Amplitudes::from_real(1, 0.785, vals);
        let w = 0.057;
        let pulse = XrayPulse::new(periods * 2.0 * std::f64::consts::PI / w, 0.0).unwrap();
        SpectraPair::simulate(&a, &pulse, w, &SpectrumGrid::default_for(w, vals.len() - 1)).unwrap()
    }

    #[test]
    fn kappa_matches_forward_mapping() {
        assert_eq!(kappa(0), C64::new(0.5, 0.0));
        assert_eq!(kappa(1), C64::new(0.0, 0.5));
        assert_eq!(kappa(2), C64::new(0.5, 0.0));
    }

    #[test]
    fn both_strategies_recover_moduli() {
        // the trailing zero marks the set as complete for the window-leakage check
        let vals = [C64::new(1.0, 0.0), C64::new(0.0, 1e-3), C64::new(2e-3, 0.0), C64::new(0.0, 0.0)];
        let p = pair(&vals, 0.8);
        let known = KnownZero { modulus: 1.0, phase: 0.0 };
        for s in moduli_registry().names() {
            let strat = moduli_registry().get(s).unwrap();
            let m = recover_moduli(&p, known, 2, strat.as_ref(), Ablation::None).unwrap();
            assert!((m[1] - 1e-3).abs() < 1e-6 * 1e-3, "{s}: {m:?}");
            assert!((m[2] - 2e-3).abs() < 1e-6 * 2e-3, "{s}: {m:?}");
        }
    }

    #[test]
    fn zero_field_breaks_chain_at_first_order() {
        let vals = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let p = pair(&vals, 0.8);
        let fit = fit_interference(&p, &p.recombined(Ablation::None), 2).unwrap();
        let chain = recover_phases(&fit, KnownZero { modulus: 1.0, phase: 0.0 }, 0.057, p.pulse().duration, 2);
        assert_eq!(chain.broken_at, Some(1));
        assert!(chain.require_complete().is_err());
    }
}
