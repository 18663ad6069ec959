//! TOML run configuration.
//!
//! Quantities may carry unit suffixes (`"1.55 eV"`, `"2e12 W/cm2"`, `"5 fs"`, `"0.6 T"`);
//! bare numbers are atomic units. Every section rejects unknown keys. Parsing resolves the
//! file into a [`RunConfig`] holding atomic units only.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::crystal::{self, CrystalModel};
use crate::error::{Error, Result};
use crate::floquet::{DriveField, FloquetParams, ResonancePolicy, Tolerances};
use crate::reconstruct::{moduli_registry, Ablation};
use crate::tdse::PropagationConfig;
use crate::units::{parse_quantity, Dimension, TimeContext};
use crate::xray::{SpectrumGrid, XrayPulse};

/// A number in atomic units or a string with a unit suffix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    fn resolve(&self, dim: Dimension, ctx: TimeContext) -> Result<f64> {
        match self {
            Quantity::Number(v) if v.is_finite() => Ok(*v),
            Quantity::Number(v) => Err(Error::Unit(format!("{v} is not finite"))),
            Quantity::Text(s) => parse_quantity(s, dim, ctx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum PotentialEntry {
    Real(Quantity),
    Complex(ComplexEntry),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexEntry {
    re: Quantity,
    #[serde(default = "zero")]
    im: Quantity,
}

fn zero() -> Quantity {
    Quantity::Number(0.0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    crystal: RawCrystal,
    drive: RawDrive,
    #[serde(default)]
    floquet: RawFloquet,
    #[serde(default)]
    observables: RawObservables,
    xray: Option<RawXray>,
    reconstruct: Option<RawReconstruct>,
    tdse: Option<RawTdse>,
    #[serde(default)]
    scan: RawScan,
    #[serde(default)]
    outputs: RawOutputs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrystal {
    preset: Option<String>,
    lattice_constant: Option<Quantity>,
    /// V_0, V_1, ... ; each a real quantity or `{ re, im }`.
    potential: Option<Vec<PotentialEntry>>,
    n_occupied: Option<usize>,
    spin_degeneracy: Option<u8>,
    n_planewaves: Option<usize>,
    scissors: Option<Quantity>,
    grid_points: Option<usize>,
    inversion_symmetric: Option<bool>,
    origin: Option<Quantity>,
    gauge: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    photon_energy: Quantity,
    field: Option<Quantity>,
    intensity: Option<Quantity>,
    #[serde(default = "one")]
    polarization: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawFloquet {
    mu_max: usize,
    n_bands: usize,
    n_k: usize,
    resonance: ResonancePolicy,
    converge: bool,
    tolerance: f64,
    mu_max_ceiling: usize,
    bands_ceiling: usize,
    k_ceiling: usize,
}

impl Default for RawFloquet {
    fn default() -> Self {
        let t = Tolerances::default();
        RawFloquet {
            mu_max: 12,
            n_bands: 12,
            n_k: 16,
            resonance: ResonancePolicy::Exclude,
            converge: false,
            tolerance: t.tolerance,
            mu_max_ceiling: t.mu_max_ceiling,
            bands_ceiling: t.bands_ceiling,
            k_ceiling: t.k_ceiling,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawObservables {
    mu_report: usize,
    g: Vec<i64>,
}

impl Default for RawObservables {
    fn default() -> Self {
        RawObservables { mu_report: 4, g: vec![1, 2, 3] }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawXray {
    duration: Quantity,
    #[serde(default = "zero")]
    photon_energy: Quantity,
    g: Option<Vec<i64>>,
    mu_report: Option<usize>,
    delays: Option<Vec<Quantity>>,
    #[serde(default = "sixteen")]
    delays_per_period: usize,
    #[serde(default = "sixty_four")]
    detuning_per_omega: usize,
}

fn sixteen() -> usize {
    16
}
fn sixty_four() -> usize {
    64
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReconstruct {
    #[serde(default = "gaussian")]
    moduli: String,
    #[serde(default = "two")]
    mu: usize,
    g: Option<Vec<i64>>,
    /// Assumed α_0, in radians or as `"-0.38 pi"`.
    alpha0: Option<Quantity>,
    #[serde(default)]
    ablation: Ablation,
    #[serde(default = "first_order")]
    synthesis_orders: Vec<usize>,
}

fn gaussian() -> String {
    "gaussian-fit".into()
}
fn two() -> usize {
    2
}
fn first_order() -> Vec<usize> {
    vec![1]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTdse {
    #[serde(default = "forty")]
    ramp_cycles: usize,
    #[serde(default = "twenty_four")]
    sample_cycles: usize,
    #[serde(default = "steps")]
    steps_per_cycle: usize,
    #[serde(default = "sixty_four")]
    samples_per_cycle: usize,
    n_bands: Option<usize>,
    #[serde(default)]
    frames: bool,
}

fn forty() -> usize {
    40
}
fn twenty_four() -> usize {
    24
}
fn steps() -> usize {
    1024
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    field: Option<Vec<Quantity>>,
    intensity: Option<Vec<Quantity>>,
    duration: Option<Vec<Quantity>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutputs {
    directory: PathBuf,
    formats: Vec<Format>,
}

impl Default for RawOutputs {
    fn default() -> Self {
        RawOutputs { directory: PathBuf::from("wavemix-out"), formats: vec![Format::Csv, Format::Json] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    /// Whitespace-separated `matrix nonuniform` files for heatmaps.
    Gnuplot,
    /// A copy of the Floquet archive.
    Archive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetSection {
    pub params: FloquetParams,
    pub resonance: ResonancePolicy,
    /// Run the refinement ladder starting from `params`.
    pub converge: Option<Tolerances>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservablesSection {
    pub mu_report: usize,
    pub g: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XraySection {
    pub pulse: XrayPulse,
    pub g: Vec<i64>,
    pub mu_report: usize,
    pub grid: SpectrumGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructSection {
    pub moduli: String,
    pub mu: usize,
    pub g: Vec<i64>,
    pub alpha0: Option<f64>,
    pub ablation: Ablation,
    pub synthesis_orders: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdseSection {
    pub propagation: PropagationConfig,
    pub n_bands: usize,
    pub frames: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanSection {
    /// Field amplitudes E_0 (a.u.).
    pub field: Vec<f64>,
    /// Probe durations τ_p (a.u.).
    pub duration: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

/// Fully resolved configuration in atomic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub crystal: CrystalModel,
    pub gauge: String,
    pub drive: DriveField,
    pub floquet: FloquetSection,
    pub observables: ObservablesSection,
    pub xray: Option<XraySection>,
    pub reconstruct: Option<ReconstructSection>,
    pub tdse: Option<TdseSection>,
    pub scan: ScanSection,
    pub outputs: OutputSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        resolve(raw)
    }

    /// Read a config file; a relative output directory is taken relative to the file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if cfg.outputs.directory.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.outputs.directory = dir.join(&cfg.outputs.directory);
            }
        }
        Ok(cfg)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.outputs.formats.contains(&f)
    }

    /// Hash of everything that determines the results; the output location is excluded.
    pub fn content_hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.outputs.directory = PathBuf::new();
        crate::cache::content_hash(&c)
    }
}

fn parse_phase(q: &Quantity) -> Result<f64> {
    match q {
        Quantity::Number(v) => Ok(*v),
        Quantity::Text(s) => {
            let t = s.trim().to_lowercase();
            let (num, scale) = if let Some(n) = t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
                (n.trim().trim_end_matches('*').trim(), std::f64::consts::PI)
            } else if let Some(n) = t.strip_suffix("rad") {
                (n.trim(), 1.0)
            } else {
                (t.as_str(), 1.0)
            };
            num.parse::<f64>()
                .map(|v| v * scale)
                .map_err(|_| Error::Unit(format!("cannot read a phase from '{s}' (use radians or '<x> pi')")))
        }
    }
}

fn check_indices(what: &str, g: &[i64]) -> Result<()> {
    if g.is_empty() || g.iter().any(|&n| n <= 0) {
        return Err(Error::Config(format!("{what} must list positive reciprocal indices n (G = 2πn/a)")));
    }
    Ok(())
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let none = TimeContext::default();
    let c = raw.crystal;
    let mut model = match &c.preset {
        Some(name) => crystal::presets::registry().get(name)?.build(),
        None => {
            if c.lattice_constant.is_none() || c.potential.is_none() {
                return Err(Error::Config(
                    "crystal needs either a preset or both lattice_constant and potential".into(),
                ));
            }
            crystal::presets::symmetric_reference()
        }
    };
    if let Some(q) = &c.lattice_constant {
        model.lattice_constant = q.resolve(Dimension::Length, none)?;
    }
    if let Some(p) = &c.potential {
        model.potential = p
            .iter()
            .map(|e| match e {
                PotentialEntry::Real(q) => Ok(C64::new(q.resolve(Dimension::Energy, none)?, 0.0)),
                PotentialEntry::Complex(z) => {
                    Ok(C64::new(z.re.resolve(Dimension::Energy, none)?, z.im.resolve(Dimension::Energy, none)?))
                }
            })
            .collect::<Result<_>>()?;
    }
    if let Some(v) = c.n_occupied {
        model.n_occupied = v;
    }
    if let Some(v) = c.spin_degeneracy {
        model.spin_degeneracy = v;
    }
    if let Some(v) = c.n_planewaves {
        model.n_planewaves = v;
    }
    if let Some(q) = &c.scissors {
        model.scissors = q.resolve(Dimension::Energy, none)?;
    }
    if let Some(v) = c.grid_points {
        model.grid_points = v;
    }
    if c.inversion_symmetric.is_some() {
        model.inversion_symmetric = c.inversion_symmetric;
    }
    if let Some(q) = &c.origin {
        model.origin = Some(q.resolve(Dimension::Length, none)?);
    }
    model.validate()?;
    let gauge = c.gauge.unwrap_or_else(|| "max-real-positive".into());
    crystal::gauge::registry().get(&gauge)?;

    let d = raw.drive;
    let omega = d.photon_energy.resolve(Dimension::Energy, none)?;
    let e0 = match (&d.field, &d.intensity) {
        (Some(f), None) => f.resolve(Dimension::Field, none)?,
        (None, Some(i)) => crate::units::intensity_to_field(i.resolve(Dimension::Intensity, none)?),
        _ => return Err(Error::Config("drive needs exactly one of 'field' and 'intensity'".into())),
    };
    let drive = DriveField::new(omega, e0, d.polarization)?;
    let periods = TimeContext { period: Some(drive.period()) };

    let f = raw.floquet;
    if f.mu_max == 0 || f.n_k == 0 || f.n_bands <= model.n_occupied {
        return Err(Error::Config(format!(
            "floquet needs mu_max >= 1, n_k >= 1 and more than {} bands",
            model.n_occupied
        )));
    }
    if f.n_bands > model.n_planewaves {
        return Err(Error::Config(format!("n_bands {} exceeds the {} plane waves", f.n_bands, model.n_planewaves)));
    }
    let params = FloquetParams { mu_max: f.mu_max, n_bands: f.n_bands, n_k: f.n_k };
    let obs = raw.observables;
    if obs.mu_report + 1 > 2 * f.mu_max {
        return Err(Error::Config(format!(
            "mu_report {} needs mu_max >= {} (orders up to mu_report + 1 enter the currents)",
            obs.mu_report,
            obs.mu_report.div_ceil(2) + 1
        )));
    }
    check_indices("observables.g", &obs.g)?;
    let converge = f.converge.then(|| Tolerances {
        tolerance: f.tolerance,
        mu_report: obs.mu_report,
        g_count: obs.g.iter().copied().max().unwrap_or(1) as usize,
        mu_max_ceiling: f.mu_max_ceiling,
        bands_ceiling: f.bands_ceiling,
        k_ceiling: f.k_ceiling,
        band_step: Tolerances::default().band_step,
    });
    let floquet = FloquetSection { params, resonance: f.resonance, converge };
    let observables = ObservablesSection { mu_report: obs.mu_report, g: obs.g };

    let xray = match raw.xray {
        None => None,
        Some(x) => {
            let pulse =
                XrayPulse::new(x.duration.resolve(Dimension::Time, periods)?, x.photon_energy.resolve(Dimension::Energy, none)?)?;
            let g = x.g.unwrap_or_else(|| observables.g.clone());
            check_indices("xray.g", &g)?;
            let mu_report = x.mu_report.unwrap_or(observables.mu_report);
            if mu_report > observables.mu_report {
                return Err(Error::Config(format!(
                    "xray.mu_report {mu_report} exceeds observables.mu_report {}",
                    observables.mu_report
                )));
            }
            if x.detuning_per_omega < 8 || x.delays_per_period < 2 {
                return Err(Error::Config("xray grid needs >= 8 detuning points per ω and >= 2 delays".into()));
            }
            let mut grid = SpectrumGrid::uniform(omega, mu_report, x.detuning_per_omega, x.delays_per_period);
            if let Some(list) = x.delays {
                let d: Vec<f64> = list.iter().map(|q| q.resolve(Dimension::Time, periods)).collect::<Result<_>>()?;
                if d.is_empty() {
                    return Err(Error::Config("xray.delays is empty".into()));
                }
                grid = grid.with_delays(d);
            }
            Some(XraySection { pulse, g, mu_report, grid })
        }
    };

    let reconstruct = match raw.reconstruct {
        None => None,
        Some(r) => {
            let Some(x) = &xray else {
                return Err(Error::Config("reconstruct needs an [xray] section for the probe pulse".into()));
            };
            moduli_registry().get(&r.moduli)?;
            if r.mu == 0 || r.mu > x.mu_report {
                return Err(Error::Config(format!("reconstruct.mu must be in 1..={}", x.mu_report)));
            }
            let g = r.g.unwrap_or_else(|| x.g.clone());
            check_indices("reconstruct.g", &g)?;
            Some(ReconstructSection {
                moduli: r.moduli,
                mu: r.mu,
                g,
                alpha0: r.alpha0.as_ref().map(parse_phase).transpose()?,
                ablation: r.ablation,
                synthesis_orders: r.synthesis_orders,
            })
        }
    };

    let tdse = match raw.tdse {
        None => None,
        Some(t) => {
            let propagation = PropagationConfig {
                ramp_cycles: t.ramp_cycles,
                sample_cycles: t.sample_cycles,
                steps_per_cycle: t.steps_per_cycle,
                samples_per_cycle: t.samples_per_cycle,
            };
            propagation.validate()?;
            let n_bands = t.n_bands.unwrap_or(params.n_bands);
            if n_bands <= model.n_occupied || n_bands > model.n_planewaves {
                return Err(Error::Config(format!("tdse.n_bands {n_bands} out of range")));
            }
            Some(TdseSection { propagation, n_bands, frames: t.frames })
        }
    };

    let mut scan = ScanSection::default();
    match (&raw.scan.field, &raw.scan.intensity) {
        (Some(_), Some(_)) => return Err(Error::Config("scan takes 'field' or 'intensity', not both".into())),
        (Some(list), None) => {
            scan.field = list.iter().map(|q| q.resolve(Dimension::Field, none)).collect::<Result<_>>()?;
        }
        (None, Some(list)) => {
            scan.field = list
                .iter()
                .map(|q| q.resolve(Dimension::Intensity, none).map(crate::units::intensity_to_field))
                .collect::<Result<_>>()?;
        }
        (None, None) => {}
    }
    if scan.field.iter().any(|&e| !(e >= 0.0)) {
        return Err(Error::Config("scan field amplitudes must be non-negative".into()));
    }
    if let Some(list) = &raw.scan.duration {
        if xray.is_none() {
            return Err(Error::Config("a duration scan needs an [xray] section".into()));
        }
        scan.duration = list.iter().map(|q| q.resolve(Dimension::Time, periods)).collect::<Result<_>>()?;
        if scan.duration.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Config("scan durations must be positive".into()));
        }
    }

    let mut formats = raw.outputs.formats;
    formats.dedup();
    Ok(RunConfig {
        crystal: model,
        gauge,
        drive,
        floquet,
        observables,
        xray,
        reconstruct,
        tdse,
        scan,
        outputs: OutputSection { directory: raw.outputs.directory, formats },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[crystal]
preset = "symmetric-reference"

[drive]
photon_energy = "1.55 eV"
intensity = "2e12 W/cm2"
"#;

    #[test]
    fn minimal_config_resolves_to_atomic_units() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert!((c.drive.omega - 1.55 / 27.211386245988).abs() < 1e-12);
        assert!((c.drive.e0 - (2e12f64 / 3.50944758e16).sqrt()).abs() < 1e-15);
        assert_eq!(c.observables.mu_report, 4);
        assert_eq!(c.gauge, "max-real-positive");
        assert!(c.xray.is_none());
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let text = format!("{MINIMAL}\n[floquet]\nmu_max = 8\nbogus = 1\n");
        let err = RunConfig::from_toml_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config(_)));
        assert!(msg.contains("bogus") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn explicit_crystal_and_periods() {
        let text = r#"
[crystal]
lattice_constant = "8 bohr"
potential = [0.0, "-0.15 Ha", { re = 0.0, im = "-0.05 Ha" }]

[drive]
photon_energy = 0.156
field = 0.005

[xray]
duration = "0.6 T"

[reconstruct]
alpha0 = "-0.38 pi"
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(c.crystal.potential[2], C64::new(0.0, -0.05));
        let x = c.xray.unwrap();
        assert!((x.pulse.duration - 0.6 * 2.0 * std::f64::consts::PI / 0.156).abs() < 1e-12);
        assert!((c.reconstruct.unwrap().alpha0.unwrap() + 0.38 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn bad_units_and_choices() {
        let wrong_dim = MINIMAL.replace("1.55 eV", "3 fs");
        assert!(matches!(RunConfig::from_toml_str(&wrong_dim), Err(Error::Unit(_))));
        let both = format!("{MINIMAL}field = 0.01\n");
        assert!(matches!(RunConfig::from_toml_str(&both), Err(Error::Config(_))));
        let gauge = MINIMAL.replace("preset = \"symmetric-reference\"", "preset = \"symmetric-reference\"\ngauge = \"nope\"");
        assert!(RunConfig::from_toml_str(&gauge).unwrap_err().to_string().contains("available"));
        let no_xray = format!("{MINIMAL}\n[reconstruct]\nmu = 2\n");
        assert!(matches!(RunConfig::from_toml_str(&no_xray), Err(Error::Config(_))));
    }
}
