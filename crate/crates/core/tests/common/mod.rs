#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use wavemix::crystal::{presets, CrystalModel, MaxRealPositive};
use wavemix::floquet::{solve_archive, DriveField, FloquetArchive, FloquetParams, ResonancePolicy};
use wavemix::observables::{compute_response, Response};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn model(potential: &[C64], n_pw: usize) -> CrystalModel {
    let mut m = presets::symmetric_reference();
    m.potential = potential.to_vec();
    m.n_planewaves = n_pw;
    m.grid_points = (4 * n_pw).next_power_of_two();
    m
}

/// Eigenvalues of a dense Hermitian matrix through nalgebra.
pub fn hermitian_eigenvalues(rows: usize, at: impl Fn(usize, usize) -> C64) -> Vec<f64> {
    let m = DMatrix::<C64>::from_fn(rows, rows, |i, j| at(i, j));
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Plane-wave Hamiltonian written out directly: (k + 2πn/a)²/2 on the diagonal, V_{n-n'} off it.
pub fn oracle_hamiltonian(m: &CrystalModel, k: f64) -> impl Fn(usize, usize) -> C64 + '_ {
    let half = (m.n_planewaves as i64 - 1) / 2;
    let a = m.lattice_constant;
    move |i, j| {
        let (ni, nj) = (i as i64 - half, j as i64 - half);
        let d = ni - nj;
        let coef = m.potential.get(d.unsigned_abs() as usize).copied().unwrap_or_default();
        let v = if d >= 0 { coef } else { coef.conj() };
        if i == j {
            let q = k + 2.0 * PI * ni as f64 / a;
            v + 0.5 * q * q
        } else {
            v
        }
    }
}

pub fn archive(m: &CrystalModel, omega: f64, e0: f64, mu_max: usize, n_bands: usize, n_k: usize) -> FloquetArchive {
    let drive = DriveField::new(omega, e0, 1.0).unwrap();
    let params = FloquetParams { mu_max, n_bands, n_k };
    solve_archive(m, &drive, params, &MaxRealPositive, ResonancePolicy::Exclude).unwrap()
}

/// 1.55 eV, 2e12 W/cm² drive on a reference crystal to order 4, all bands kept so continuity is exact.
/// Computed once per test binary.
pub fn reference_response(symmetric: bool) -> &'static Response {
    static CELLS: [OnceLock<Response>; 2] = [OnceLock::new(), OnceLock::new()];
    CELLS[symmetric as usize].get_or_init(|| {
        let m = if symmetric { presets::symmetric_reference() } else { presets::asymmetric_reference() };
        let drive = DriveField::from_intensity(wavemix::units::ev_to_hartree(1.55), 2e12, 1.0).unwrap();
        let params = FloquetParams { mu_max: 24, n_bands: m.n_planewaves, n_k: 16 };
        let a = solve_archive(&m, &drive, params, &MaxRealPositive, ResonancePolicy::Exclude).unwrap();
        compute_response(&a, 4).unwrap()
    })
}

/// ω = 0.156, E0 = 0.01 drive with 12 bands, to order 4. Computed once per test binary.
pub fn drive_response(symmetric: bool) -> &'static Response {
    static CELLS: [OnceLock<Response>; 2] = [OnceLock::new(), OnceLock::new()];
    CELLS[symmetric as usize].get_or_init(|| {
        let m = if symmetric { presets::symmetric_reference() } else { presets::asymmetric_reference() };
        compute_response(&archive(&m, 0.156, 0.01, 12, 12, 16), 4).unwrap()
    })
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
