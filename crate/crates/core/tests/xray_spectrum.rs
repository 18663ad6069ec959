mod common;

use std::f64::consts::{LN_2, PI};

use common::{archive, drive_response};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use wavemix::crystal::presets;
use wavemix::observables::compute_response;
use wavemix::observables::fourier::response_fourier;
use wavemix::xray::decompose::{antisymmetric_allowed, centro_allowed, fit_first_harmonic};
use wavemix::xray::{
    decompose_pm_g, envelope, envelope_peak, overlap_factor, project_harmonics, quasielastic_spectrum, Amplitudes,
    SpectrumGrid, SpectrumResult, XrayPulse,
};
use wavemix::Error;

const W: f64 = 0.156;

fn period() -> f64 {
    2.0 * PI / W
}

fn pair(amps: &Amplitudes, cycles: f64) -> (SpectrumResult, SpectrumResult) {
    let pulse = XrayPulse::new(cycles * period(), 0.0).unwrap();
    let grid = SpectrumGrid::default_for(W, 4);
    (
        quasielastic_spectrum(amps, &pulse, W, &grid).unwrap(),
        quasielastic_spectrum(&amps.at_minus_g(), &pulse, W, &grid).unwrap(),
    )
}

#[test]
fn envelope_peaks_on_side_peak_centres() {
    let tau = 1.7 * period();
    for mu in -2..=3 {
        let peak = envelope(mu, mu as f64 * W, W, tau);
        assert!((peak - (tau * tau * PI / (2.0 * LN_2)).sqrt()).abs() < 1e-12 * peak);
        assert!(envelope(mu, (mu as f64 + 0.01) * W, W, tau) < peak);
    }
}

#[test]
fn two_femtosecond_pulse_peak() {
    let tau = wavemix::units::fs_to_au(2.0);
    assert!((tau - 82.68).abs() < 0.01);
    let v = envelope_peak(82.68);
    assert!((v - 82.68 * (PI / (2.0 * LN_2)).sqrt()).abs() < 1e-12);
    assert!((v - 124.45).abs() < 2e-4 * 124.45, "{v}");
}

#[test]
fn overlap_at_resolvability_threshold() {
    for w in [0.057, W] {
        let t = 2.0 * PI / w;
        assert!((overlap_factor(1.0, w, 1.14 * t) - 0.0098).abs() < 1e-4);
        let pulse = XrayPulse::new(1.0 * t, 0.0).unwrap();
        assert!(pulse.resolves(1, w) && !pulse.resolves(2, w));
    }
}

#[test]
fn nonpositive_duration_rejected() {
    assert!(matches!(XrayPulse::new(0.0, 1.0), Err(Error::Config(_))));
    assert!(matches!(XrayPulse::new(-3.0, 1.0), Err(Error::Config(_))));
}

#[test]
fn field_free_crystal_gives_static_bragg_peak() {
    let r = compute_response(&archive(&presets::asymmetric_reference(), W, 0.0, 4, 6, 8), 3).unwrap();
    let (p, _) = pair(&Amplitudes::from_response(&r, 1), 0.75);
    let (i_max, _) = p.grid.detuning.iter().enumerate().fold((0, f64::MIN), |best, (i, _)| {
        let v = p.intensity[[i, 0]];
        if v > best.1 { (i, v) } else { best }
    });
    assert_eq!(p.grid.detuning[i_max], 0.0);
    assert!((p.max() - 1.0).abs() < 1e-12);
    for row in p.intensity.rows() {
        assert!(row.iter().all(|v| (v - row[0]).abs() < 1e-14));
    }
}

#[test]
fn symmetric_antisymmetric_window_follows_cosine() {
    let r = drive_response(true);
    let f = response_fourier(r, &[1]).unwrap();
    let (pg0, pu1) = (f[0].pg, f[1].pu);
    let amps = Amplitudes::from_response(r, 1);
    let (p, m) = pair(&amps, 1.13);
    let d = decompose_pm_g(&p, &m).unwrap();
    let tau = 1.13 * period();
    let rows = p.band(0.25, 0.75);
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for &i in &rows {
        let e = p.grid.detuning[i];
        for (j, &t) in p.grid.delays.iter().enumerate() {
            let oracle = -0.5 * pu1 * pg0 * envelope(1, e, W, tau) * envelope(0, e, W, tau) * (W * t).cos() / p.normalization;
            scale = scale.max(oracle.abs());
            worst = worst.max((d.antisymmetric[[i, j]] - oracle).abs());
        }
    }
    // tails of the (-1, 0) and (1, 2) pairs reach into the window at the 1e-5 level
    assert!(scale > 0.0 && worst < 1e-4 * scale, "{worst} of {scale}");
    let series = p.window_series(&d.antisymmetric, 0);
    let n = series.len();
    for j in 0..n {
        assert!((series[j] + series[(j + n / 2) % n]).abs() < 1e-12 * scale, "sign flip at T/2");
    }
    assert!(series[n / 4].abs() < 1e-10 * scale && series[3 * n / 4].abs() < 1e-10 * scale);
    let peak = series.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!((series[0].abs() - peak).abs() < 1e-12 * peak);
}

#[test]
fn symmetric_centrosymmetric_part_static() {
    let (p, m) = pair(&Amplitudes::from_response(drive_response(true), 1), 1.13);
    let d = decompose_pm_g(&p, &m).unwrap();
    let worst = d.centro_dynamic.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(worst < 1e-10 * p.max(), "{worst}");
}

#[test]
fn asymmetric_window_is_shifted_sine() {
    let r = drive_response(false);
    let f = response_fourier(r, &[1]).unwrap();
    let (a0, a1) = (f[0].phase, f[1].phase);
    let (p, _) = pair(&Amplitudes::from_response(r, 1), 1.13);
    let series = p.window_series(&p.intensity, 0);
    let (_, ca, sb, res) = fit_first_harmonic(&series, &p.grid.delays, W);
    let amp = ca.hypot(sb);
    assert!(res < 1e-8 * amp, "{res} of {amp}");
    // A cos + B sin = amp sin(ωt + φ), expected φ = α_1 - α_0 modulo π
    let phi = ca.atan2(sb);
    let diff = (phi - (a1 - a0)).rem_euclid(PI);
    assert!(diff.min(PI - diff) < 1e-4, "φ = {phi}, α_1 - α_0 = {}", a1 - a0);
}

#[test]
fn antisymmetric_part_averages_to_zero() {
    for sym in [true, false] {
        let (p, m) = pair(&Amplitudes::from_response(drive_response(sym), 2), 0.6);
        let d = decompose_pm_g(&p, &m).unwrap();
        for row in d.antisymmetric.rows() {
            assert!(row.mean().unwrap().abs() < 1e-14 * p.max());
        }
        let avg: Vec<f64> = p.intensity.rows().into_iter().zip(m.intensity.rows()).map(|(a, b)| 0.5 * (a.mean().unwrap() + b.mean().unwrap())).collect();
        for (x, y) in avg.iter().zip(&d.time_independent) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}

#[test]
fn temporal_parity_of_both_parts() {
    for sym in [true, false] {
        let (p, m) = pair(&Amplitudes::from_response(drive_response(sym), 1), 0.6);
        let d = decompose_pm_g(&p, &m).unwrap();
        for i in 0..p.grid.detuning.len() {
            let a = project_harmonics(&d.antisymmetric.row(i).to_vec(), &p.grid.delays, W, 7).unwrap();
            let c = project_harmonics(&d.centro_dynamic.row(i).to_vec(), &p.grid.delays, W, 7).unwrap();
            assert!(a.split(antisymmetric_allowed).1 < 1e-10 * p.max());
            assert!(c.split(centro_allowed).1 < 1e-10 * p.max());
        }
    }
}

#[test]
fn mismatched_grids_rejected() {
    let amps = Amplitudes::from_response(drive_response(true), 1);
    let pulse = XrayPulse::new(period(), 0.0).unwrap();
    let a = quasielastic_spectrum(&amps, &pulse, W, &SpectrumGrid::default_for(W, 4)).unwrap();
    let b = quasielastic_spectrum(&amps.at_minus_g(), &pulse, W, &SpectrumGrid::uniform(W, 4, 32, 16)).unwrap();
    assert!(matches!(decompose_pm_g(&a, &b), Err(Error::Domain(_))));
}

#[test]
fn separated_side_peaks_have_single_order_intensity() {
    let amps = Amplitudes::from_response(drive_response(false), 1);
    let (p, _) = pair(&amps, 3.0);
    let tau = 3.0 * period();
    for mu in 0..=3i64 {
        let i = p.grid.detuning.iter().position(|&d| (d - mu as f64 * W).abs() < 1e-12).unwrap();
        let oracle = envelope(mu, mu as f64 * W, W, tau).powi(2) * amps.get(mu).norm_sqr() / p.normalization;
        for j in 0..p.grid.delays.len() {
            assert!((p.intensity[[i, j]] - oracle).abs() < 1e-6 * oracle, "μ = {mu}");
        }
    }
}

#[test]
fn long_pulse_loses_subcycle_structure() {
    let (p, _) = pair(&Amplitudes::from_response(drive_response(false), 1), 5.0);
    assert!(overlap_factor(1.0, W, 5.0 * period()) < 0.01);
    for row in p.intensity.rows() {
        let mean = row.mean().unwrap();
        assert!(row.iter().all(|v| (v - mean).abs() < 0.01 * p.max()));
    }
}

fn arb_amplitudes() -> impl Strategy<Value = Amplitudes> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4).prop_map(|v| {
        let f: Vec<C64> = v.iter().enumerate().map(|(mu, &(re, im))| C64::new(re, im) * 0.05f64.powi(mu as i32)).collect();
        let mut f = f;
        f[0] = C64::new(1.0 + f[0].re.abs(), 0.3 * f[0].im);
        Amplitudes::from_real(1, 2.0 * PI / 8.0, &f)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_nonnegative_and_periodic(amps in arb_amplitudes(), cycles in 0.5f64..3.0, t0 in 0.0f64..1.0) {
        let pulse = XrayPulse::new(cycles * period(), 0.0).unwrap();
        let t = t0 * period();
        let grid = SpectrumGrid::uniform(W, 3, 16, 4).with_delays(vec![t, t + period(), t - 2.0 * period()]);
        let s = quasielastic_spectrum(&amps, &pulse, W, &grid).unwrap();
        for row in s.intensity.rows() {
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row[0] - row[1]).abs() < 1e-12 * s.max());
            prop_assert!((row[0] - row[2]).abs() < 1e-12 * s.max());
        }
    }
}
