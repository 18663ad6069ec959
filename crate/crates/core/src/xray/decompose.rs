use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::SpectrumResult;
use crate::error::{Error, Result};

/// Split of the ±G pair into its t_p-average, odd-in-G and remaining parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    /// Period average of (P(G) + P(-G))/2, per detuning.
    pub time_independent: Vec<f64>,
    /// (P(G) - P(-G))/2
    pub antisymmetric: Array2<f64>,
    /// (P(G) + P(-G))/2 minus the time-independent part.
    pub centro_dynamic: Array2<f64>,
}

pub(crate) fn check_full_period(delays: &[f64], omega: f64) -> Result<()> {
    let n = delays.len();
    if n < 2 {
        return Err(Error::Domain("a period average needs at least two delays".into()));
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let step = period / n as f64;
    for (j, &t) in delays.iter().enumerate() {
        if (t - delays[0] - j as f64 * step).abs() > 1e-9 * period {
            return Err(Error::Domain("delays must sample one drive period uniformly".into()));
        }
    }
    Ok(())
}

pub fn decompose_pm_g(plus: &SpectrumResult, minus: &SpectrumResult) -> Result<Decomposition> {
    if plus.grid != minus.grid || plus.omega != minus.omega {
        return Err(Error::Domain("spectra at ±G are on different grids".into()));
    }
    if plus.n != -minus.n {
        return Err(Error::Domain(format!("G indices {} and {} are not opposite", plus.n, minus.n)));
    }
    check_full_period(&plus.grid.delays, plus.omega)?;
    let sym = (&plus.intensity + &minus.intensity) * 0.5;
    let time_independent: Vec<f64> = sym.rows().into_iter().map(|r| r.mean().unwrap_or(0.0)).collect();

    // side peaks do not depend on t_p and have equal weight at ±G, so the dynamic parts are
    // formed from the interference terms alone, keeping them free of the Bragg-peak round-off
    let cross = |s: &SpectrumResult| {
        if s.noisy {
            s.intensity.clone()
        } else {
            &s.breakdown.nearest + &s.breakdown.next_nearest + &s.breakdown.higher
        }
    };
    let (cp, cm) = (cross(plus), cross(minus));
    let side = if plus.noisy || minus.noisy {
        Array2::zeros(cp.raw_dim())
    } else {
        (&plus.breakdown.side_peaks - &minus.breakdown.side_peaks) * 0.5
    };
    let antisymmetric = (&cp - &cm) * 0.5 + side;
    let mut centro_dynamic = (&cp + &cm) * 0.5;
    for mut row in centro_dynamic.rows_mut() {
        let avg = row.mean().unwrap_or(0.0);
        row.mapv_inplace(|v| v - avg);
    }
    Ok(Decomposition { time_independent, antisymmetric, centro_dynamic })
}

/// s(t) = a_0 + Σ_n a_n cos(nωt) + b_n sin(nωt), from uniform samples over one period.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Harmonics {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

pub fn project_harmonics(series: &[f64], delays: &[f64], omega: f64, n_max: usize) -> Result<Harmonics> {
    check_full_period(delays, omega)?;
    let n = series.len() as f64;
    if 2 * n_max >= series.len() {
        return Err(Error::Domain(format!("{} samples cannot resolve harmonic {n_max}", series.len())));
    }
    let mut cos = vec![0.0; n_max + 1];
    let mut sin = vec![0.0; n_max + 1];
    for h in 0..=n_max {
        let scale = if h == 0 { 1.0 / n } else { 2.0 / n };
        for (&s, &t) in series.iter().zip(delays) {
            let ph = h as f64 * omega * t;
            cos[h] += scale * s * ph.cos();
            sin[h] += scale * s * ph.sin();
        }
    }
    Ok(Harmonics { cos, sin })
}

impl Harmonics {
    /// Largest |coefficient| over the allowed and forbidden sets given `allowed(is_cos, n)`.
    pub fn split(&self, allowed: impl Fn(bool, usize) -> bool) -> (f64, f64) {
        let mut ok = 0.0f64;
        let mut bad = 0.0f64;
        for (n, (&c, &s)) in self.cos.iter().zip(&self.sin).enumerate() {
            for (is_cos, v) in [(true, c), (false, s)] {
                if !is_cos && n == 0 {
                    continue;
                }
                if allowed(is_cos, n) {
                    ok = ok.max(v.abs());
                } else {
                    bad = bad.max(v.abs());
                }
            }
        }
        (ok, bad)
    }
}

/// Antisymmetric part: cos(odd), sin(even).
pub fn antisymmetric_allowed(is_cos: bool, n: usize) -> bool {
    n > 0 && (is_cos == (n % 2 == 1))
}

/// Centrosymmetric dynamic part: sin(odd), cos(even).
pub fn centro_allowed(is_cos: bool, n: usize) -> bool {
    n > 0 && (is_cos == (n % 2 == 0))
}

/// Least-squares fit s ≈ c + A cos ωt + B sin ωt; returns (c, A, B, max residual).
pub fn fit_first_harmonic(series: &[f64], delays: &[f64], omega: f64) -> (f64, f64, f64, f64) {
    let m = Array2::from_shape_fn((series.len(), 3), |(i, j)| match j {
        0 => 1.0,
        1 => (omega * delays[i]).cos(),
        _ => (omega * delays[i]).sin(),
    });
    let x = crate::linalg::lstsq(&m, series);
    let res = series
        .iter()
        .zip(delays)
        .map(|(&s, &t)| (s - x[0] - x[1] * (omega * t).cos() - x[2] * (omega * t).sin()).abs())
        .fold(0.0, f64::max);
    (x[0], x[1], x[2], res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_identity() {
        let w = 0.3;
        let period = 2.0 * std::f64::consts::PI / w;
        let t: Vec<f64> = (0..16).map(|j| j as f64 * period / 16.0).collect();
        let s: Vec<f64> = t.iter().map(|&x| 0.5 + 2.0 * (w * x).cos() - 0.25 * (3.0 * w * x).sin()).collect();
        let h = project_harmonics(&s, &t, w, 7).unwrap();
        assert!((h.cos[0] - 0.5).abs() < 1e-14);
        assert!((h.cos[1] - 2.0).abs() < 1e-14);
        assert!((h.sin[3] + 0.25).abs() < 1e-14);
        let (ok, bad) = h.split(|c, n| (c && n <= 1) || (!c && n == 3));
        assert!(ok > 1.9 && bad < 1e-14);
    }

    #[test]
    fn nonuniform_delays_rejected() {
        assert!(project_harmonics(&[1.0, 2.0, 3.0], &[0.0, 1.0, 5.0], 1.0, 1).is_err());
    }
}
