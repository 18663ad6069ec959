use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::OracleRun;
use crate::error::{Error, Result};
use crate::observables::{parity_residual, RealField, Response, ScalarField};

/// Uniform samples covering a whole number of periods, else the projection leaks.
fn check_window(times: &[f64], omega: f64) -> Result<()> {
    let n = times.len();
    if n < 2 {
        return Err(Error::Window("need at least two time samples".into()));
    }
    let dt = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::Window("time samples are not uniform".into()));
    }
    let cycles = n as f64 * dt * omega / (2.0 * std::f64::consts::PI);
    if (cycles - cycles.round()).abs() > 1e-6 || cycles.round() < 1.0 {
        return Err(Error::Window(format!(
            "analysis window spans {cycles:.6} cycles; a whole number is required to avoid spectral leakage"
        )));
    }
    Ok(())
}

/// (1/N) Σ_t f(t) e^{-iμωt} for μ = 0..=mu_max, per spatial point.
pub fn project_series(samples: &[Vec<f64>], times: &[f64], omega: f64, mu_max: usize) -> Result<Vec<Vec<C64>>> {
    check_window(times, omega)?;
    if samples.len() != times.len() {
        return Err(Error::Domain("one sample per time point required".into()));
    }
    let nx = samples.first().map_or(0, |s| s.len());
    let n = times.len() as f64;
    Ok((0..=mu_max)
        .map(|mu| {
            let mut acc = vec![C64::new(0.0, 0.0); nx];
            for (s, &t) in samples.iter().zip(times) {
                let ph = C64::from_polar(1.0 / n, -(mu as f64) * omega * t);
                for (a, &v) in acc.iter_mut().zip(s) {
                    *a += ph * v;
                }
            }
            acc
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleDiagnostics {
    pub max_norm_drift: f64,
    /// Largest spread of the cycle-averaged initial-band population over the analysed cycles.
    pub beating: f64,
    /// Largest time-reversal parity residual of the extracted ρ̃_μ.
    pub parity_residual: f64,
}

/// Σ_mn D_mn conj(a_n(x)) b_m(x)
fn contract(d: &Array2<C64>, a: &Array2<C64>, b: &Array2<C64>, out: &mut [C64], weight: f64) {
    let nb = d.nrows();
    for (x, o) in out.iter_mut().enumerate() {
        let mut s = C64::new(0.0, 0.0);
        for m in 0..nb {
            let mut inner = C64::new(0.0, 0.0);
            for n in 0..nb {
                inner += d[(m, n)] * a[(n, x)].conj();
            }
            s += inner * b[(m, x)];
        }
        *o += weight * s;
    }
}

/// ρ̃_μ and j̃_μ (including the A(t)ρ term) from the propagated states, packaged like the
/// Floquet response so the two can be compared field by field.
pub fn extract_harmonic_amplitudes(run: &OracleRun, mu_report: usize) -> Result<(Response, OracleDiagnostics)> {
    let model = &run.model;
    let drive = &run.drive;
    let grid = model.grid();
    let nx = grid.nx;
    let spin = model.spin_degeneracy as f64;
    let top = mu_report + 1;
    let omega = drive.omega;
    let a0 = drive.polarization * drive.e0 / omega;

    let mut rho_t = vec![vec![C64::new(0.0, 0.0); nx]; top + 1];
    let mut x_plus = vec![vec![C64::new(0.0, 0.0); nx]; mu_report + 1];
    let mut x_minus = vec![vec![C64::new(0.0, 0.0); nx]; mu_report + 1];
    let mut dia = vec![vec![C64::new(0.0, 0.0); nx]; mu_report + 1];
    let mut diag = OracleDiagnostics { max_norm_drift: 0.0, beating: 0.0, parity_residual: 0.0 };

    for kp in &run.kpoints {
        let nb = kp.bloch.n_bands();
        let w = spin * kp.weight;
        let mut d_hat = vec![Array2::<C64>::zeros((nb, nb)); top + 1];
        let mut ad_hat = vec![Array2::<C64>::zeros((nb, nb)); mu_report + 1];
        for tr in &kp.trajectories {
            check_window(&tr.times, omega)?;
            diag.max_norm_drift = diag.max_norm_drift.max(tr.norm_drift);
            let (lo, hi) = tr.cycle_population.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &p| (l.min(p), h.max(p)));
            diag.beating = diag.beating.max(hi - lo);
            let n = tr.times.len() as f64;
            for (s, &t) in tr.times.iter().enumerate() {
                let c = tr.coefficients.row(s);
                let d = Array2::from_shape_fn((nb, nb), |(m, k)| c[m] * c[k].conj());
                let a = a0 * (omega * t).cos();
                for mu in 0..=top {
                    let ph = C64::from_polar(1.0 / n, -(mu as f64) * omega * t);
                    d_hat[mu].zip_mut_with(&d, |acc, &v| *acc += ph * v);
                    if mu <= mu_report {
                        ad_hat[mu].zip_mut_with(&d, |acc, &v| *acc += a * ph * v);
                    }
                }
            }
        }
        let (u, du) = (&kp.bloch.u, &kp.bloch.du);
        for mu in 0..=top {
            contract(&d_hat[mu], u, u, &mut rho_t[mu], w);
            if mu <= mu_report {
                contract(&d_hat[mu], u, du, &mut x_plus[mu], w);
                // D̂_{-μ} = D̂_μ^†
                let dag = d_hat[mu].t().mapv(|z| z.conj());
                contract(&dag, u, du, &mut x_minus[mu], w);
                contract(&ad_hat[mu], u, u, &mut dia[mu], w);
            }
        }
    }

    let rho_tilde: Vec<ScalarField> =
        rho_t.into_iter().enumerate().map(|(mu, v)| ScalarField { order: mu as i64, grid, values: v }).collect();
    let i2 = C64::new(0.0, 2.0);
    let mut j_tilde = Vec::new();
    let mut rho = Vec::new();
    let mut current = Vec::new();
    for mu in 0..=mu_report {
        let vals: Vec<C64> =
            (0..nx).map(|x| (x_plus[mu][x] - x_minus[mu][x].conj()) / i2 + dia[mu][x]).collect();
        let odd = mu % 2 == 1;
        current.push(RealField {
            order: mu as i64,
            grid,
            values: vals.iter().map(|z| if mu == 0 { 2.0 * z.re } else if odd { -2.0 * z.re } else { 2.0 * z.im }).collect(),
        });
        rho.push(RealField {
            order: mu as i64,
            grid,
            values: rho_tilde[mu].values.iter().map(|z| 2.0 * if odd { z.im } else { z.re }).collect(),
        });
        if mu > 0 {
            diag.parity_residual = diag.parity_residual.max(parity_residual(&rho_tilde[mu]));
        }
        j_tilde.push(ScalarField { order: mu as i64, grid, values: vals });
    }
    let resp = Response {
        grid,
        omega,
        e0: drive.e0,
        n_electrons: model.n_electrons(),
        mu_report,
        rho_tilde,
        j_tilde,
        rho,
        current,
    };
    Ok((resp, diag))
}

/// ρ(x, t) at every analysed sample, with the sample times.
pub fn density_samples(run: &OracleRun) -> (Vec<f64>, Vec<Vec<f64>>) {
    let grid = run.model.grid();
    let spin = run.model.spin_degeneracy as f64;
    let times = run.kpoints.first().and_then(|k| k.trajectories.first()).map(|t| t.times.clone()).unwrap_or_default();
    let mut out = vec![vec![0.0; grid.nx]; times.len()];
    for kp in &run.kpoints {
        for tr in &kp.trajectories {
            for (s, row) in out.iter_mut().enumerate() {
                let c = tr.coefficients.row(s);
                for (x, o) in row.iter_mut().enumerate() {
                    let psi: C64 = c.iter().zip(kp.bloch.u.column(x)).map(|(a, b)| a * b).sum();
                    *o += spin * kp.weight * psi.norm_sqr();
                }
            }
        }
    }
    (times, out)
}
