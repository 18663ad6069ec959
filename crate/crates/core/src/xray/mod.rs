//! Quasielastic x-ray–optical wave-mixing spectra at reciprocal vectors ±G.

pub mod decompose;
pub mod spectrum;

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::Response;

pub use decompose::{decompose_pm_g, project_harmonics, Decomposition, Harmonics};
pub use spectrum::{quasielastic_spectrum, Breakdown, SpectrumGrid, SpectrumResult};

/// Probe pulse with field envelope e^{-2 ln2 [(t - t_p)/τ_p]²}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XrayPulse {
    /// τ_p (a.u. of time)
    pub duration: f64,
    /// ω_i (hartree); spectra are reported against ω_s - ω_i.
    pub photon_energy: f64,
}

impl XrayPulse {
    pub fn new(duration: f64, photon_energy: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::Config(format!("x-ray pulse duration must be positive, got {duration}")));
        }
        Ok(XrayPulse { duration, photon_energy })
    }

    /// Neighbouring side peaks Δμ apart still interfere appreciably.
    pub fn resolves(&self, dmu: u32, omega: f64) -> bool {
        overlap_factor(dmu as f64, omega, self.duration) > 0.01
    }
}

/// Ẽ_μ(ω_s) with ω_s measured from ω_i.
pub fn envelope(mu: i64, detuning: f64, omega: f64, tau: f64) -> f64 {
    let d = detuning - mu as f64 * omega;
    envelope_peak(tau) * (-d * d * tau * tau / (8.0 * LN_2)).exp()
}

/// sqrt(τ² π / 2 ln2)
pub fn envelope_peak(tau: f64) -> f64 {
    (tau * tau * PI / (2.0 * LN_2)).sqrt()
}

/// e^{-(Δμ ω τ)² / 16 ln2}: Ẽ_μ Ẽ_{μ+Δμ} at the midpoint relative to the peak value squared.
pub fn overlap_factor(dmu: f64, omega: f64, tau: f64) -> f64 {
    let x = dmu * omega * tau;
    (-x * x / (16.0 * LN_2)).exp()
}

/// Pulse duration at which the Δμ overlap factor equals `level`.
pub fn duration_for_overlap(dmu: f64, omega: f64, level: f64) -> f64 {
    (-16.0 * LN_2 * level.ln()).sqrt() / (dmu * omega)
}

/// Spatial transform F̃_μ(G) = ∫ e^{iGx} ρ̃_μ of the complex amplitudes, μ = -M..=M.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Amplitudes {
    pub n: i64,
    pub g: f64,
    pub mu_max: i64,
    values: Vec<C64>,
}

/// F̃_μ from the real transform F_μ = ∫ e^{iGx} ϱ_μ, for μ >= 0.
///
/// ρ̃_even = ϱ/2 and ρ̃_odd = iϱ/2, with ϱ_0 = 2ρ̃_0.
pub fn tilde_from_real(mu: i64, f: C64) -> C64 {
    if mu.rem_euclid(2) == 1 {
        C64::new(0.0, 0.5) * f
    } else {
        0.5 * f
    }
}

impl Amplitudes {
    pub fn new(n: i64, g: f64, values_by_mu: Vec<C64>) -> Result<Self> {
        if values_by_mu.len() % 2 != 1 {
            return Err(Error::Domain("amplitudes must cover a symmetric order range".into()));
        }
        let mu_max = (values_by_mu.len() as i64 - 1) / 2;
        Ok(Amplitudes { n, g, mu_max, values: values_by_mu })
    }

    /// Amplitudes at G = 2πn/a; negative orders from F̃_{-μ}(G) = [F̃_μ(-G)]*.
    pub fn from_response(resp: &Response, n: i64) -> Self {
        let g = 2.0 * PI * n as f64 / resp.grid.a;
        let m = resp.mu_report as i64;
        let at = |mu: i64, g: f64| resp.grid.fourier(g, &resp.rho_tilde[mu as usize].values);
        let values = (-m..=m).map(|mu| if mu >= 0 { at(mu, g) } else { at(-mu, -g).conj() }).collect();
        Amplitudes { n, g, mu_max: m, values }
    }

    /// Build from real transforms F_μ(G), μ = 0..=M, of real ϱ_μ.
    pub fn from_real(n: i64, g: f64, f_real: &[C64]) -> Self {
        let m = f_real.len() as i64 - 1;
        let values = (-m..=m)
            .map(|mu| {
                let t = tilde_from_real(mu.abs(), f_real[mu.unsigned_abs() as usize]);
                if mu >= 0 {
                    t
                } else {
                    // F̃_{-μ}(G) = [κ_μ F_μ(-G)]* = κ_μ* F_μ(G)
                    tilde_from_real(mu.abs(), C64::new(1.0, 0.0)).conj() * f_real[mu.unsigned_abs() as usize]
                }
            })
            .collect();
        Amplitudes { n, g, mu_max: m, values }
    }

    pub fn get(&self, mu: i64) -> C64 {
        if mu.abs() > self.mu_max {
            C64::new(0.0, 0.0)
        } else {
            self.values[(mu + self.mu_max) as usize]
        }
    }

    /// The same data seen from -G.
    pub fn at_minus_g(&self) -> Amplitudes {
        let values = (-self.mu_max..=self.mu_max).map(|mu| self.get(-mu).conj()).collect();
        Amplitudes { n: -self.n, g: -self.g, mu_max: self.mu_max, values }
    }

    /// Zero every order above `keep`.
    pub fn truncated(&self, keep: i64) -> Amplitudes {
        let values = (-self.mu_max..=self.mu_max)
            .map(|mu| if mu.abs() <= keep { self.get(mu) } else { C64::new(0.0, 0.0) })
            .collect();
        Amplitudes { values, ..self.clone() }
    }
}
