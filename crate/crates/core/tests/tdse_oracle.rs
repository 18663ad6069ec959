mod common;

use std::f64::consts::PI;

use common::archive;
use num_complex::Complex64 as C64;
use wavemix::crystal::{presets, solve_bloch, MaxRealPositive};
use wavemix::floquet::archive::truncate_bloch;
use wavemix::floquet::{solve_floquet, DriveField};
use wavemix::grid::rel_l2;
use wavemix::observables::{compute_response, real_amplitudes, ScalarField};
use wavemix::tdse::{density_samples, extract_harmonic_amplitudes, project_series, propagate, run_oracle, PropagationConfig};
use wavemix::Error;

const W: f64 = 0.156;

fn cfg(ramp: usize, sample: usize, steps: usize) -> PropagationConfig {
    PropagationConfig { ramp_cycles: ramp, sample_cycles: sample, steps_per_cycle: steps, samples_per_cycle: 64 }
}

fn series(f: impl Fn(f64) -> Vec<f64>, cycles: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let period = 2.0 * PI / W;
    let times: Vec<f64> = (0..32 * cycles).map(|j| period * j as f64 / 32.0).collect();
    let samples = times.iter().map(|&t| f(t)).collect();
    (times, samples)
}

#[test]
fn field_free_state_only_acquires_dynamical_phase() {
    let b = truncate_bloch(&solve_bloch(&presets::asymmetric_reference(), 0.21, &MaxRealPositive).unwrap(), 6);
    let d = DriveField::new(W, 0.0, 1.0).unwrap();
    let c = cfg(10, 2, 256);
    let tr = propagate(&b, &d, 0, &c).unwrap();
    let ramp = 10.0 * d.period();
    for (s, &t) in tr.times.iter().enumerate() {
        let expect = C64::from_polar(1.0, -b.energies[0] * (t + ramp));
        assert!((tr.coefficients[(s, 0)] - expect).norm() < 1e-10);
        for m in 1..6 {
            assert_eq!(tr.coefficients[(s, m)].norm(), 0.0);
        }
    }
    assert!(tr.norm_drift < 1e-12);
}

#[test]
fn adiabatic_population_matches_floquet_state() {
    let b = truncate_bloch(&solve_bloch(&presets::symmetric_reference(), 0.17, &MaxRealPositive).unwrap(), 8);
    let d = DriveField::new(W, 0.005, 1.0).unwrap();
    let tr = propagate(&b, &d, 0, &cfg(30, 4, 512)).unwrap();
    let (s, _) = solve_floquet(&b, &d, 10, 8, 1).unwrap();
    let floquet: f64 = (-10..=10).map(|mu| s[0].c(0, mu).norm_sqr()).sum();
    let centre = s[0].c(0, 0).norm_sqr();
    for p in &tr.cycle_population {
        assert!((p - floquet).abs() < 1e-3, "{p} vs {floquet}");
        assert!((p - centre).abs() < 1e-3);
    }
    assert!(tr.norm_drift < 1e-8);
}

#[test]
fn coarse_step_reports_norm_drift() {
    let b = truncate_bloch(&solve_bloch(&presets::symmetric_reference(), 0.0, &MaxRealPositive).unwrap(), 12);
    let d = DriveField::new(W, 0.01, 1.0).unwrap();
    let c = PropagationConfig { ramp_cycles: 10, sample_cycles: 1, steps_per_cycle: 64, samples_per_cycle: 16 };
    assert!(matches!(propagate(&b, &d, 0, &c), Err(Error::NormDrift { band: 0, .. })));
}

#[test]
fn short_ramp_rejected() {
    let b = truncate_bloch(&solve_bloch(&presets::symmetric_reference(), 0.0, &MaxRealPositive).unwrap(), 4);
    let d = DriveField::new(W, 0.01, 1.0).unwrap();
    assert!(matches!(propagate(&b, &d, 0, &cfg(5, 1, 256)), Err(Error::Config(_))));
}

#[test]
fn constant_density_projects_to_static_order() {
    let (t, s) = series(|_| vec![0.4, 1.1, -0.2], 3);
    let p = project_series(&s, &t, W, 4).unwrap();
    assert!((p[0][1] - 1.1).norm() < 1e-14);
    for order in &p[1..] {
        assert!(order.iter().all(|z| z.norm() < 1e-14));
    }
}

#[test]
fn sine_signal_projects_to_negative_first_order() {
    let f = [0.3, -1.2, 0.7];
    let (t, s) = series(|t| f.iter().map(|v| v * (W * t).sin()).collect(), 2);
    let p = project_series(&s, &t, W, 4).unwrap();
    let field = ScalarField { order: 1, grid: wavemix::grid::CellGrid::new(8.0, 3, 0.0), values: p[1].clone() };
    let rho1 = real_amplitudes(&field, 1e-12).unwrap();
    for (r, v) in rho1.values.iter().zip(f) {
        assert!((r + v).abs() < 1e-12);
    }
    for mu in [0, 2, 3, 4] {
        assert!(p[mu].iter().all(|z| z.norm() < 1e-12));
    }
}

#[test]
fn partial_cycle_window_rejected() {
    let period = 2.0 * PI / W;
    let times: Vec<f64> = (0..40).map(|j| period * j as f64 / 32.0).collect();
    let samples = vec![vec![1.0]; 40];
    assert!(matches!(project_series(&samples, &times, W, 2), Err(Error::Window(_))));
}

#[test]
fn steady_state_time_reversal_and_half_period_shift() {
    let m = presets::symmetric_reference();
    let d = DriveField::new(W, 0.005, 1.0).unwrap();
    let run = run_oracle(&m, &d, 8, 8, &cfg(30, 1, 512), &MaxRealPositive).unwrap();
    let (_, rho) = density_samples(&run);
    let grid = m.grid();
    let mean: Vec<f64> = (0..grid.nx).map(|x| rho.iter().map(|r| r[x]).sum::<f64>() / 64.0).collect();
    let dynamic = rho.iter().flat_map(|r| r.iter().zip(&mean).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
    let (mut reversal, mut mirror) = (0.0f64, 0.0f64);
    for j in 0..64 {
        let back = (96 - j) % 64;
        let half = (j + 32) % 64;
        for x in 0..grid.nx {
            reversal = reversal.max((rho[j][x] - rho[back][x]).abs());
            mirror = mirror.max((rho[j][x] - rho[half][grid.mirror(x)]).abs());
        }
    }
    assert!(reversal < 1e-2 * dynamic, "ρ(T/2 - t) vs ρ(t): {reversal} of {dynamic}");
    assert!(mirror < 1e-2 * dynamic, "ρ(x, t + T/2) vs ρ(-x, t): {mirror} of {dynamic}");
}

#[test]
fn oracle_reproduces_floquet_amplitudes() {
    let m = presets::asymmetric_reference();
    let d = DriveField::new(W, 0.005, 1.0).unwrap();
    let run = run_oracle(&m, &d, 4, 10, &cfg(30, 24, 512), &MaxRealPositive).unwrap();
    let (oracle, diag) = extract_harmonic_amplitudes(&run, 2).unwrap();
    let floquet = compute_response(&archive(&m, W, 0.005, 10, 10, 4), 2).unwrap();
    assert!(diag.max_norm_drift < 1e-8);
    for mu in 1..=2 {
        let e = rel_l2(&floquet.rho[mu].values, &oracle.rho[mu].values);
        assert!(e < 1e-2, "ϱ_{mu}: {e}");
    }
    assert!(rel_l2(&floquet.current[1].values, &oracle.current[1].values) < 1e-2);
}
