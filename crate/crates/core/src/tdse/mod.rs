//! Real-time propagation of Bloch states under the ramped classical drive, used as an
//! independent check on the Floquet amplitudes.

pub mod extract;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{self, BlochSolution, CrystalModel, GaugeFixing};
use crate::error::{Error, Result};
use crate::floquet::archive::truncate_bloch;
use crate::floquet::{DriveField, KGrid};

pub use extract::{density_samples, extract_harmonic_amplitudes, project_series, OracleDiagnostics};

/// Allowed deviation of ‖c‖² from 1 over a whole run.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Fixed-step fourth-order Runge-Kutta propagation with a sin² switch-on of A(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    /// Cycles over which the field envelope rises from 0 to 1.
    pub ramp_cycles: usize,
    /// Whole cycles analysed after the ramp.
    pub sample_cycles: usize,
    pub steps_per_cycle: usize,
    pub samples_per_cycle: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig { ramp_cycles: 40, sample_cycles: 8, steps_per_cycle: 4096, samples_per_cycle: 64 }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ramp_cycles < 10 {
            return Err(Error::Config(format!(
                "ramp must last at least 10 cycles to reach a single Floquet state, got {}",
                self.ramp_cycles
            )));
        }
        if self.sample_cycles < 1 || self.samples_per_cycle < 4 {
            return Err(Error::Config("need at least one analysed cycle and 4 samples per cycle".into()));
        }
        if self.steps_per_cycle % self.samples_per_cycle != 0 {
            return Err(Error::Config(format!(
                "steps_per_cycle ({}) must be a multiple of samples_per_cycle ({})",
                self.steps_per_cycle, self.samples_per_cycle
            )));
        }
        Ok(())
    }

    /// Smallest power-of-two step count with |ε_max - ε_min| dt below `phase_step` radians.
    pub fn steps_for(energies: &[f64], omega: f64, phase_step: f64) -> usize {
        let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let need = ((hi - lo) * 2.0 * std::f64::consts::PI / omega / phase_step).ceil().max(64.0) as usize;
        need.next_power_of_two()
    }
}

/// sin² envelope reaching 1 after `ramp` time units.
pub fn ramp_envelope(t: f64, ramp: f64) -> f64 {
    if t >= ramp {
        1.0
    } else if t <= 0.0 {
        0.0
    } else {
        (0.5 * std::f64::consts::PI * t / ramp).sin().powi(2)
    }
}

/// Coefficients over the field-free bands at uniform phase points of the analysed cycles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub k: f64,
    pub band: usize,
    /// Time measured from the end of the ramp, where A(t) = s (E0/ω) cos ωt.
    pub times: Vec<f64>,
    /// Schrödinger-picture coefficients, one row per sample.
    pub coefficients: Array2<C64>,
    pub norm_drift: f64,
    /// Population of the initial band averaged over each analysed cycle.
    pub cycle_population: Vec<f64>,
}

/// Propagate field-free band `band` at one k through the ramp and the analysis window.
pub fn propagate(bloch: &BlochSolution, drive: &DriveField, band: usize, cfg: &PropagationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let nb = bloch.n_bands();
    if band >= nb {
        return Err(Error::Config(format!("band {band} outside the {nb}-band basis")));
    }
    let period = drive.period();
    let dt = period / cfg.steps_per_cycle as f64;
    let ramp = cfg.ramp_cycles as f64 * period;
    let a0 = drive.polarization * drive.e0 / drive.omega;
    let eps = Array1::from(bloch.energies.clone());
    let p = &bloch.momentum;

    // i db/dt = A(t) e^{iεt} P e^{-iεt} b, with c = e^{-iεt} b and t = 0 at the start of the ramp
    let rhs = |t: f64, b: &Array1<C64>| -> Array1<C64> {
        let a = a0 * ramp_envelope(t, ramp) * (drive.omega * t).cos();
        if a == 0.0 {
            return Array1::zeros(b.len());
        }
        let y: Array1<C64> = b.iter().zip(eps.iter()).map(|(z, &e)| z * C64::from_polar(1.0, -e * t)).collect();
        let z = p.dot(&y);
        z.iter()
            .zip(eps.iter())
            .map(|(v, &e)| C64::new(0.0, -a) * v * C64::from_polar(1.0, e * t))
            .collect()
    };

    let mut b = Array1::<C64>::zeros(nb);
    b[band] = C64::new(1.0, 0.0);
    let total_cycles = cfg.ramp_cycles + cfg.sample_cycles;
    let stride = cfg.steps_per_cycle / cfg.samples_per_cycle;
    let n_samples = cfg.sample_cycles * cfg.samples_per_cycle;
    let mut coefficients = Array2::<C64>::zeros((n_samples, nb));
    let mut times = Vec::with_capacity(n_samples);
    let mut drift = 0.0f64;
    let mut population = vec![0.0; cfg.sample_cycles];

    let record_from = cfg.ramp_cycles * cfg.steps_per_cycle;
    for step in 0..total_cycles * cfg.steps_per_cycle {
        if step >= record_from && (step - record_from) % stride == 0 {
            let s = (step - record_from) / stride;
            let t = step as f64 * dt;
            for m in 0..nb {
                coefficients[(s, m)] = b[m] * C64::from_polar(1.0, -eps[m] * t);
            }
            population[s / cfg.samples_per_cycle] += b[band].norm_sqr() / cfg.samples_per_cycle as f64;
            times.push(t - ramp);
        }
        let t = step as f64 * dt;
        let k1 = rhs(t, &b);
        let k2 = rhs(t + 0.5 * dt, &(&b + &(&k1 * C64::new(0.5 * dt, 0.0))));
        let k3 = rhs(t + 0.5 * dt, &(&b + &(&k2 * C64::new(0.5 * dt, 0.0))));
        let k4 = rhs(t + dt, &(&b + &(&k3 * C64::new(dt, 0.0))));
        b = &b + &((&k1 + &(&k2 * C64::new(2.0, 0.0)) + &(&k3 * C64::new(2.0, 0.0)) + &k4) * C64::new(dt / 6.0, 0.0));
        if step % cfg.steps_per_cycle == 0 {
            drift = drift.max((b.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs());
        }
    }
    drift = drift.max((b.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs());
    if !(drift <= NORM_TOLERANCE) {
        return Err(Error::NormDrift { k: bloch.k, band, drift });
    }
    Ok(Trajectory { k: bloch.k, band, times, coefficients, norm_drift: drift, cycle_population: population })
}

/// Every occupied band at every k of the mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleRun {
    pub model: CrystalModel,
    pub drive: DriveField,
    pub config: PropagationConfig,
    pub n_bands: usize,
    pub kpoints: Vec<OracleKPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleKPoint {
    pub weight: f64,
    pub bloch: BlochSolution,
    pub trajectories: Vec<Trajectory>,
}

pub fn run_oracle(
    model: &CrystalModel,
    drive: &DriveField,
    n_k: usize,
    n_bands: usize,
    cfg: &PropagationConfig,
    gauge: &dyn GaugeFixing,
) -> Result<OracleRun> {
    model.validate()?;
    drive.validate()?;
    cfg.validate()?;
    if n_bands > model.n_planewaves || n_bands <= model.n_occupied {
        return Err(Error::Config(format!(
            "oracle basis of {n_bands} bands must exceed the {} occupied bands and fit in {} plane waves",
            model.n_occupied, model.n_planewaves
        )));
    }
    let grid = KGrid::monkhorst_pack(model.lattice_constant, n_k)?;
    let blochs: Vec<BlochSolution> = grid
        .points
        .par_iter()
        .map(|&k| crystal::solve_bloch(model, k, gauge).map(|b| truncate_bloch(&b, n_bands)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|j| (0..model.n_occupied).map(move |i| (j, i))).collect();
    let mut trajs: Vec<Trajectory> =
        jobs.par_iter().map(|&(j, i)| propagate(&blochs[j], drive, i, cfg)).collect::<Result<_>>()?;
    let mut kpoints = Vec::with_capacity(grid.len());
    for (j, bloch) in blochs.into_iter().enumerate().rev() {
        let take: Vec<Trajectory> = trajs.split_off(trajs.len() - model.n_occupied);
        kpoints.push(OracleKPoint { weight: grid.weights[j], bloch, trajectories: take });
    }
    kpoints.reverse();
    Ok(OracleRun { model: model.clone(), drive: *drive, config: *cfg, n_bands, kpoints })
}
