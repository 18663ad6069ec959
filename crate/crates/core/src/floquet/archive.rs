use ndarray::s;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kgrid::KGrid;
use super::solve::{solve_floquet, FloquetSolution};
use super::{DriveField, Warning};
use crate::crystal::{self, BlochSolution, CrystalModel, GapInfo, GaugeFixing};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloquetParams {
    pub mu_max: usize,
    pub n_bands: usize,
    pub n_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonancePolicy {
    /// Drop resonant k-points (and their -k partners) from zone sums.
    #[default]
    Exclude,
    Abort,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KPointResult {
    pub k: f64,
    pub weight: f64,
    /// Field-free solution truncated to the kept bands.
    pub bloch: BlochSolution,
    pub states: Vec<FloquetSolution>,
}

/// Every per-k result of one Floquet run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FloquetArchive {
    pub model: CrystalModel,
    pub drive: DriveField,
    pub params: FloquetParams,
    pub gauge: String,
    pub gap: GapInfo,
    /// Only the k-points that enter zone sums, ascending in k.
    pub kpoints: Vec<KPointResult>,
    pub excluded_k: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl FloquetArchive {
    pub fn n_electrons(&self) -> f64 {
        self.model.n_electrons()
    }

    pub fn min_overlap(&self) -> f64 {
        self.kpoints
            .iter()
            .flat_map(|kp| kp.states.iter().map(|s| s.overlap))
            .fold(1.0, f64::min)
    }
}

pub fn truncate_bloch(b: &BlochSolution, nb: usize) -> BlochSolution {
    BlochSolution {
        k: b.k,
        energies: b.energies[..nb].to_vec(),
        coefficients: b.coefficients.slice(s![.., ..nb]).to_owned(),
        u: b.u.slice(s![..nb, ..]).to_owned(),
        du: b.du.slice(s![..nb, ..]).to_owned(),
        momentum: b.momentum.slice(s![..nb, ..nb]).to_owned(),
    }
}

/// Field-free Bloch solutions over a Monkhorst-Pack mesh, the input to every Floquet solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlochSet {
    pub n_k: usize,
    pub gauge: String,
    pub solutions: Vec<BlochSolution>,
}

pub fn solve_bloch_set(model: &CrystalModel, n_k: usize, gauge: &dyn GaugeFixing) -> Result<BlochSet> {
    model.validate()?;
    let grid = KGrid::monkhorst_pack(model.lattice_constant, n_k)?;
    let solutions = grid.points.par_iter().map(|&k| crystal::solve_bloch(model, k, gauge)).collect::<Result<_>>()?;
    Ok(BlochSet { n_k, gauge: gauge.name().to_string(), solutions })
}

pub fn solve_archive(
    model: &CrystalModel,
    drive: &DriveField,
    params: FloquetParams,
    gauge: &dyn GaugeFixing,
    policy: ResonancePolicy,
) -> Result<FloquetArchive> {
    let set = solve_bloch_set(model, params.n_k, gauge)?;
    solve_archive_with(model, drive, params, &set, policy)
}

/// Floquet solve on precomputed Bloch solutions.
pub fn solve_archive_with(
    model: &CrystalModel,
    drive: &DriveField,
    params: FloquetParams,
    blochs: &BlochSet,
    policy: ResonancePolicy,
) -> Result<FloquetArchive> {
    model.validate()?;
    drive.validate()?;
    if params.n_bands > model.n_planewaves {
        return Err(Error::Config(format!(
            "band count {} exceeds the {} plane waves",
            params.n_bands, model.n_planewaves
        )));
    }
    let gap = crystal::require_gap(model)?;
    let grid = KGrid::monkhorst_pack(model.lattice_constant, params.n_k)?;
    if blochs.n_k != params.n_k || blochs.solutions.len() != grid.len() {
        return Err(Error::Domain(format!("Bloch set has {} k-points, the mesh needs {}", blochs.solutions.len(), grid.len())));
    }

    let results: Vec<Result<(KPointResult, Vec<Warning>)>> = blochs
        .solutions
        .par_iter()
        .zip(grid.weights.par_iter())
        .map(|(bloch, &w)| {
            let bloch = truncate_bloch(bloch, params.n_bands);
            let (states, warns) = solve_floquet(&bloch, drive, params.mu_max, params.n_bands, model.n_occupied)?;
            Ok((KPointResult { k: bloch.k, weight: w, bloch, states }, warns))
        })
        .collect();

    let mut resonant = vec![false; grid.len()];
    let mut warnings = Vec::new();
    let mut slots = Vec::with_capacity(grid.len());
    for (j, r) in results.into_iter().enumerate() {
        match r {
            Ok((kp, w)) => {
                warnings.extend(w);
                slots.push(Some(kp));
            }
            Err(Error::Resonance { k, band, overlap, competing }) => {
                if policy == ResonancePolicy::Abort {
                    return Err(Error::Resonance { k, band, overlap, competing });
                }
                warnings.push(Warning::ResonanceExcluded { k, band, overlap });
                resonant[j] = true;
                slots.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let excluded: Vec<bool> = (0..grid.len()).map(|j| resonant[j] || resonant[grid.partner(j)]).collect();
    let kept_weight: f64 = (0..grid.len()).filter(|&j| !excluded[j]).map(|j| grid.weights[j]).sum();
    if kept_weight == 0.0 {
        let (k, band, overlap) = warnings
            .iter()
            .find_map(|w| match w {
                Warning::ResonanceExcluded { k, band, overlap } => Some((*k, *band, *overlap)),
                _ => None,
            })
            .unwrap_or((0.0, 0, 0.0));
        return Err(Error::Resonance {
            k,
            band,
            overlap,
            competing: [crate::error::Competitor { quasienergy: f64::NAN, overlap }; 2],
        });
    }
    let mut kpoints = Vec::new();
    let mut excluded_k = Vec::new();
    for (j, slot) in slots.into_iter().enumerate() {
        if excluded[j] {
            excluded_k.push(grid.points[j]);
            continue;
        }
        let mut kp = slot.expect("non-resonant slot");
        kp.weight /= kept_weight;
        kpoints.push(kp);
    }
    Ok(FloquetArchive {
        model: model.clone(),
        drive: *drive,
        params,
        gauge: blochs.gauge.clone(),
        gap,
        kpoints,
        excluded_k,
        warnings,
    })
}
