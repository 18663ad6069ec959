use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xray::{decompose::check_full_period, decompose_pm_g, envelope, envelope_peak, overlap_factor};
use crate::xray::{quasielastic_spectrum, Amplitudes, Decomposition, SpectrumGrid, SpectrumResult, XrayPulse};

/// Interference weaker than this fraction of the Bragg peak counts as absent.
pub const DETECTION_FLOOR: f64 = 1e-12;

/// Which dynamic part to drop before analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    #[default]
    None,
    Antisymmetric,
    CentroDynamic,
}

/// Spectra at G and -G over one t_p period, and their decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectraPair {
    pub plus: SpectrumResult,
    pub minus: SpectrumResult,
    pub parts: Decomposition,
}

impl SpectraPair {
    pub fn new(plus: SpectrumResult, minus: SpectrumResult) -> Result<Self> {
        let parts = decompose_pm_g(&plus, &minus)?;
        Ok(SpectraPair { plus, minus, parts })
    }

    pub fn simulate(amps: &Amplitudes, pulse: &XrayPulse, omega: f64, grid: &SpectrumGrid) -> Result<Self> {
        let plus = quasielastic_spectrum(amps, pulse, omega, grid)?;
        let minus = quasielastic_spectrum(&amps.at_minus_g(), pulse, omega, grid)?;
        Self::new(plus, minus)
    }

    pub fn omega(&self) -> f64 {
        self.plus.omega
    }

    pub fn pulse(&self) -> &XrayPulse {
        &self.plus.pulse
    }

    /// P(G) rebuilt from time-independent, antisymmetric and centrosymmetric-dynamic parts.
    pub fn recombined(&self, ablation: Ablation) -> Array2<f64> {
        let p = &self.parts;
        let mut out = Array2::zeros(p.antisymmetric.raw_dim());
        for (mut row, &ti) in out.rows_mut().into_iter().zip(&p.time_independent) {
            row.fill(ti);
        }
        if ablation != Ablation::Antisymmetric {
            out += &p.antisymmetric;
        }
        if ablation != Ablation::CentroDynamic {
            out += &p.centro_dynamic;
        }
        out
    }
}

/// Spectral band analysed between side peaks ν and ν+1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Window {
    pub lower_order: i64,
    /// Detuning limits (hartree)
    pub from: f64,
    pub to: f64,
    pub rows: usize,
}

/// Products Z_ν = F̃_{ν+1} F̃_ν* recovered from the e^{iωt_p} harmonic of P(G),
/// normalized by |F̃_0|².
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterferenceFit {
    pub orders: Vec<i64>,
    pub z: Vec<C64>,
    /// Peak height of each interference term relative to the Bragg peak.
    pub amplitude: Vec<f64>,
    pub windows: Vec<Window>,
    /// max |data - model| / max |data| over the fitted rows.
    pub residual: f64,
}

impl InterferenceFit {
    pub fn get(&self, nu: i64) -> Option<(C64, f64)> {
        self.orders.iter().position(|&o| o == nu).map(|i| (self.z[i], self.amplitude[i]))
    }

    pub fn detectable(&self, nu: i64) -> bool {
        self.get(nu).is_some_and(|(_, a)| a >= DETECTION_FLOOR)
    }
}

/// Complex e^{iωt_p} coefficient of every detuning row.
pub fn first_harmonic(data: &Array2<f64>, delays: &[f64], omega: f64) -> Result<Vec<C64>> {
    check_full_period(delays, omega)?;
    let n = delays.len() as f64;
    Ok(data
        .rows()
        .into_iter()
        .map(|row| {
            row.iter().zip(delays).map(|(&p, &t)| p * C64::from_polar(1.0, -omega * t)).sum::<C64>() / n
        })
        .collect())
}

/// Joint least squares of the first harmonic over the central half of every window,
/// against c_1(ω_s) = Σ_ν Ẽ_{ν+1}Ẽ_ν Z_ν.
pub fn fit_interference(pair: &SpectraPair, data: &Array2<f64>, mu_report: usize) -> Result<InterferenceFit> {
    let spec = &pair.plus;
    let omega = spec.omega;
    let tau = spec.pulse.duration;
    let c1 = first_harmonic(data, &spec.grid.delays, omega)?;
    let orders: Vec<i64> = (-1..=mu_report as i64).collect();

    let mut rows = Vec::new();
    let mut windows = Vec::new();
    for &nu in &orders {
        let band = spec.band(nu as f64 + 0.25, nu as f64 + 0.75);
        if !band.is_empty() {
            windows.push(Window {
                lower_order: nu,
                from: (nu as f64 + 0.25) * omega,
                to: (nu as f64 + 0.75) * omega,
                rows: band.len(),
            });
        }
        rows.extend(band);
    }
    if rows.len() < orders.len() {
        return Err(Error::Window(format!(
            "only {} detuning samples fall inside the interference windows; {} needed",
            rows.len(),
            orders.len()
        )));
    }
    let peak2 = envelope_peak(tau).powi(2);
    let basis = Array2::from_shape_fn((rows.len(), orders.len()), |(r, c)| {
        let d = spec.grid.detuning[rows[r]];
        envelope(orders[c] + 1, d, omega, tau) * envelope(orders[c], d, omega, tau) / peak2
    });
    let re: Vec<f64> = rows.iter().map(|&r| c1[r].re).collect();
    let im: Vec<f64> = rows.iter().map(|&r| c1[r].im).collect();
    let xr = crate::linalg::lstsq(&basis, &re);
    let xi = crate::linalg::lstsq(&basis, &im);
    let z: Vec<C64> = xr.iter().zip(&xi).map(|(&a, &b)| C64::new(a, b)).collect();

    let scale = rows.iter().map(|&r| c1[r].norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for (i, &r) in rows.iter().enumerate() {
        let model: C64 = z.iter().enumerate().map(|(c, zc)| basis[[i, c]] * zc).sum();
        worst = worst.max((model - c1[r]).norm());
    }
    let residual = if scale > 0.0 { worst / scale } else { 0.0 };
    let f = overlap_factor(1.0, omega, tau);
    let amplitude = z.iter().map(|zz| 2.0 * f * zz.norm()).collect();
    Ok(InterferenceFit { orders, z, amplitude, windows, residual })
}
