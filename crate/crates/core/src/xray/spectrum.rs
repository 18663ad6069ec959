use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{envelope, envelope_peak, Amplitudes, XrayPulse};
use crate::error::{Error, Result};

/// Agreement required between the compact sum and the term-by-term expansion.
pub const ROUTE_TOLERANCE: f64 = 1e-10;
/// Largest tolerated contribution of orders beyond the amplitude window.
pub const WINDOW_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    /// ω_s - ω_i (hartree)
    pub detuning: Vec<f64>,
    /// t_p (a.u.)
    pub delays: Vec<f64>,
}

impl SpectrumGrid {
    /// [-1, μ_report + 1]·ω at `per_omega` points per ω, and `per_period` delays over [0, T).
    pub fn uniform(omega: f64, mu_report: usize, per_omega: usize, per_period: usize) -> Self {
        let n_e = (mu_report + 2) * per_omega + 1;
        let detuning = (0..n_e).map(|i| (-1.0 + i as f64 / per_omega as f64) * omega).collect();
        let period = 2.0 * std::f64::consts::PI / omega;
        let delays = (0..per_period).map(|j| j as f64 * period / per_period as f64).collect();
        SpectrumGrid { detuning, delays }
    }

    pub fn default_for(omega: f64, mu_report: usize) -> Self {
        Self::uniform(omega, mu_report, 64, 16)
    }

    pub fn with_delays(mut self, delays: Vec<f64>) -> Self {
        self.delays = delays;
        self
    }
}

/// Term-by-term contributions, each on the [detuning, delay] grid and normalized like the total.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Breakdown {
    pub side_peaks: Array2<f64>,
    /// Δμ = 1 cross terms
    pub nearest: Array2<f64>,
    /// Δμ = 2 cross terms
    pub next_nearest: Array2<f64>,
    /// Δμ >= 3 cross terms
    pub higher: Array2<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub n: i64,
    pub g: f64,
    pub omega: f64,
    pub pulse: XrayPulse,
    pub grid: SpectrumGrid,
    /// P_qe[detuning, delay], relative to the main Bragg peak maximum.
    pub intensity: Array2<f64>,
    /// Ẽ_0(0)²|F̃_0|², the divisor applied to every intensity.
    pub normalization: f64,
    pub breakdown: Breakdown,
    /// max |compact - term-by-term|
    pub route_difference: f64,
    /// Estimated relative weight of orders outside the window.
    pub window_leakage: f64,
    /// Set once noise has been added to `intensity`; the breakdown then no longer sums to it.
    #[serde(default)]
    pub noisy: bool,
}

/// |Σ_μ Ẽ_μ(ω_s) e^{iμωt_p} F̃_μ(G)|², together with its expansion into side peaks and
/// interference terms 2 Ẽ_{μ+Δ}Ẽ_μ Re[F̃_{μ+Δ} F̃_μ* e^{iΔωt_p}].
pub fn quasielastic_spectrum(
    amps: &Amplitudes,
    pulse: &XrayPulse,
    omega: f64,
    grid: &SpectrumGrid,
) -> Result<SpectrumResult> {
    let tau = pulse.duration;
    let m = amps.mu_max;
    let f: Vec<C64> = (-m..=m).map(|mu| amps.get(mu)).collect();
    let f0 = amps.get(0).norm_sqr();
    let peak = envelope_peak(tau);
    let normalization = if f0 > 0.0 { peak * peak * f0 } else { peak * peak };

    // first orders outside the window, extrapolated geometrically from the two edge orders,
    // beating against everything inside it
    let next = |edge: i64, inner: i64| {
        let (a, b) = (amps.get(edge).norm(), amps.get(inner).norm());
        if m == 0 || b == 0.0 {
            0.0
        } else {
            a * (a / b).min(1.0)
        }
    };
    let (up, down) = (next(m, m - 1), next(-m, 1 - m));
    let window_leakage = grid
        .detuning
        .iter()
        .map(|&d| {
            let inside: f64 = (-m..=m).zip(&f).map(|(mu, z)| envelope(mu, d, omega, tau) * z.norm()).sum();
            [(envelope(m + 1, d, omega, tau), up), (envelope(-m - 1, d, omega, tau), down)]
                .iter()
                .map(|&(e, x)| e * x * (2.0 * inside + e * x))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        / normalization;
    if window_leakage > WINDOW_TOLERANCE {
        return Err(Error::Window(format!(
            "orders beyond |μ| = {m} contribute ~{window_leakage:.2e} of the Bragg peak"
        )));
    }

    let ne = grid.detuning.len();
    let nt = grid.delays.len();
    let rows: Vec<_> = grid
        .detuning
        .par_iter()
        .map(|&d| {
            let e: Vec<f64> = (-m..=m).map(|mu| envelope(mu, d, omega, tau)).collect();
            let mut out = vec![[0.0f64; 5]; nt];
            for (j, &t) in grid.delays.iter().enumerate() {
                let compact: C64 = (-m..=m)
                    .zip(&e)
                    .zip(&f)
                    .map(|((mu, &ev), &fv)| ev * C64::from_polar(1.0, mu as f64 * omega * t) * fv)
                    .sum();
                let mut side = 0.0;
                let mut parts = [0.0f64; 3];
                for a in 0..e.len() {
                    side += e[a] * e[a] * f[a].norm_sqr();
                    for b in a + 1..e.len() {
                        let delta = b - a;
                        let z = f[b] * f[a].conj() * C64::from_polar(1.0, delta as f64 * omega * t);
                        parts[(delta - 1).min(2)] += 2.0 * e[b] * e[a] * z.re;
                    }
                }
                out[j] = [compact.norm_sqr(), side, parts[0], parts[1], parts[2]];
            }
            out
        })
        .collect();

    let mut intensity = Array2::zeros((ne, nt));
    let mut bd = [Array2::zeros((ne, nt)), Array2::zeros((ne, nt)), Array2::zeros((ne, nt)), Array2::zeros((ne, nt))];
    let mut route_difference = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            intensity[[i, j]] = v[0] / normalization;
            for c in 0..4 {
                bd[c][[i, j]] = v[c + 1] / normalization;
            }
            let sum: f64 = v[1..].iter().sum();
            route_difference = route_difference.max((v[0] - sum).abs() / normalization);
        }
    }
    if route_difference > ROUTE_TOLERANCE {
        return Err(Error::Numerical(format!(
            "compact and term-by-term spectra differ by {route_difference:.2e}"
        )));
    }
    let [side_peaks, nearest, next_nearest, higher] = bd;
    Ok(SpectrumResult {
        n: amps.n,
        g: amps.g,
        omega,
        pulse: *pulse,
        grid: grid.clone(),
        intensity,
        normalization,
        breakdown: Breakdown { side_peaks, nearest, next_nearest, higher },
        route_difference,
        window_leakage,
        noisy: false,
    })
}

impl SpectrumResult {
    pub fn max(&self) -> f64 {
        self.intensity.iter().cloned().fold(0.0, f64::max)
    }

    /// Replace the intensity by Poisson counts with `counts_at_peak` expected at the Bragg peak.
    pub fn add_poisson_noise(&mut self, counts_at_peak: f64, seed: u64) -> Result<()> {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Poisson};
        if !(counts_at_peak > 0.0) {
            return Err(Error::Config("noise level must be a positive count".into()));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for v in self.intensity.iter_mut() {
            let lambda = *v * counts_at_peak;
            let n = if lambda > 0.0 {
                Poisson::new(lambda).map_err(|e| Error::Numerical(e.to_string()))?.sample(&mut rng)
            } else {
                0.0
            };
            *v = n / counts_at_peak;
        }
        self.noisy = true;
        Ok(())
    }

    /// Index range of detunings inside [lo, hi]·ω.
    pub fn band(&self, lo: f64, hi: f64) -> Vec<usize> {
        self.grid
            .detuning
            .iter()
            .enumerate()
            .filter(|(_, &d)| d >= lo * self.omega - 1e-12 && d <= hi * self.omega + 1e-12)
            .map(|(i, _)| i)
            .collect()
    }

    /// Trapezoid integral over the detuning rows in `rows`, per delay.
    pub fn integrate_rows(data: &Array2<f64>, detuning: &[f64], rows: &[usize]) -> Vec<f64> {
        let nt = data.ncols();
        let mut out = vec![0.0; nt];
        for w in rows.windows(2) {
            let h = detuning[w[1]] - detuning[w[0]];
            for (j, o) in out.iter_mut().enumerate() {
                *o += 0.5 * h * (data[[w[0], j]] + data[[w[1], j]]);
            }
        }
        out
    }

    /// Central-half integral of the band between side peaks μ and μ + 1.
    pub fn window_series(&self, data: &Array2<f64>, mu: i64) -> Vec<f64> {
        let rows = self.band(mu as f64 + 0.25, mu as f64 + 0.75);
        Self::integrate_rows(data, &self.grid.detuning, &rows)
    }
}
