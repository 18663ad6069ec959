//! Run orchestration: bloch → floquet → observables → spectrum → reconstruct, with the
//! TDSE cross-check and declarative scans on the side.

pub mod diff;
pub mod inspect;
pub mod write;

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cache::{Cache, CacheStatus};
use crate::config::{Format, RunConfig};
use crate::crystal::{self, GaugeFixing};
use crate::error::{Error, ErrorClass, Result};
use crate::floquet::{
    converge_floquet, solve_archive_with, solve_bloch_set, BlochSet, ConvergenceReport, DriveField, FloquetArchive,
    FloquetParams,
};
use crate::grid::l2;
use crate::observables::diagnostics::{diagnose, half_zone_agreement, Diagnostics};
use crate::observables::fourier::{lookup, response_fourier, FourierEntry};
use crate::observables::{compute_response, RealField, Response};
use crate::reconstruct::{round_trip_report, ReconstructionReport, RoundTripConfig, SpectraPair};
use crate::tdse::{density_samples, extract_harmonic_amplitudes, run_oracle, OracleDiagnostics};
use crate::xray::{overlap_factor, quasielastic_spectrum, Amplitudes, SpectrumResult, XrayPulse};

pub use diff::{diff_runs, DiffEntry, DiffReport};
pub use inspect::inspect;
pub use write::{num, ArtifactWriter, OutputRecord};

pub const MANIFEST_FORMAT: &str = "wavemix-manifest";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Cache format versions per stage.
pub mod versions {
    pub const CONVERGENCE: u32 = 3;
    pub const BLOCH: u32 = 2;
    pub const FLOQUET: u32 = 2;
    pub const OBSERVABLES: u32 = 1;
    pub const SPECTRUM: u32 = 1;
    pub const RECONSTRUCT: u32 = 1;
    pub const TDSE: u32 = 2;
    pub const SCAN: u32 = 1;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub version: u32,
    pub cache: CacheStatus,
    pub key: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub class: ErrorClass,
    pub exit_code: i32,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub tool_version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub status: RunStatus,
    pub error: Option<ErrorRecord>,
    pub stages: Vec<StageRecord>,
    pub outputs: Vec<OutputRecord>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, |e| e.exit_code)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read(&file).map_err(|e| Error::Config(format!("cannot read {}: {e}", file.display())))?;
        let m: Manifest = serde_json::from_slice(&text)
            .map_err(|e| Error::Domain(format!("{} is not a run manifest: {e}", file.display())))?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::Domain(format!("{} has format '{}'", file.display(), m.format)));
        }
        Ok(m)
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    cache: &'a Cache,
    out: ArtifactWriter,
    stages: Vec<StageRecord>,
    warnings: Vec<String>,
}

impl Ctx<'_> {
    fn record(&mut self, name: &str, version: u32, cache: CacheStatus, key: Option<String>, t0: Instant) {
        self.stages.push(StageRecord { name: name.into(), version, cache, key, seconds: t0.elapsed().as_secs_f64() });
    }

    fn csv_enabled(&self) -> bool {
        self.cfg.wants(Format::Csv)
    }

    fn json_enabled(&self) -> bool {
        self.cfg.wants(Format::Json)
    }
}

/// Execute every configured stage, writing outputs and `manifest.json` to the output
/// directory. Stage failures end up in the manifest; only an unwritable output directory
/// is returned as an error.
pub fn run(cfg: &RunConfig, cache: &Cache) -> Result<Manifest> {
    let out = ArtifactWriter::new(&cfg.outputs.directory)?;
    let mut ctx = Ctx { cfg, cache, out, stages: Vec::new(), warnings: Vec::new() };
    let result = execute(&mut ctx);
    let error = result.err().map(|e| ErrorRecord { class: e.class(), exit_code: e.exit_code(), message: e.to_string() });
    let mut outputs = ctx.out.records.clone();
    outputs.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.content_hash()?,
        config: cfg.clone(),
        status: if error.is_some() { RunStatus::Error } else { RunStatus::Ok },
        error,
        stages: ctx.stages,
        outputs,
        warnings: ctx.warnings,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(cfg.outputs.directory.join(MANIFEST_FILE), bytes)?;
    Ok(manifest)
}

/// Cached Floquet archive for one drive, reusing the Bloch set.
fn floquet_stage(
    ctx: &mut Ctx,
    name: &str,
    drive: &DriveField,
    params: FloquetParams,
    blochs: &BlochSet,
) -> Result<FloquetArchive> {
    let cfg = ctx.cfg;
    let t0 = Instant::now();
    let inputs = (&cfg.crystal, drive, params, &cfg.gauge, cfg.floquet.resonance);
    let (archive, status, key) = ctx.cache.get_or_compute("floquet", versions::FLOQUET, &inputs, || {
        solve_archive_with(&cfg.crystal, drive, params, blochs, cfg.floquet.resonance)
    })?;
    ctx.record(name, versions::FLOQUET, status, Some(key), t0);
    Ok(archive)
}

fn reported_order(cfg_mu: usize, drive: &DriveField) -> usize {
    if drive.e0 == 0.0 {
        0
    } else {
        cfg_mu
    }
}

fn execute(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let gauge: std::sync::Arc<dyn GaugeFixing> = crystal::gauge::registry().get(&cfg.gauge)?;

    let mut params = cfg.floquet.params;
    if let Some(tol) = &cfg.floquet.converge {
        let t0 = Instant::now();
        let inputs = (&cfg.crystal, &cfg.drive, params, tol, &cfg.gauge);
        let (report, status, key): (ConvergenceReport, _, _) =
            ctx.cache.get_or_compute("convergence", versions::CONVERGENCE, &inputs, || {
                converge_floquet(&cfg.crystal, &cfg.drive, params, tol, gauge.as_ref())
            })?;
        ctx.record("convergence", versions::CONVERGENCE, status, Some(key), t0);
        params = report.params;
        if ctx.json_enabled() {
            ctx.out.json("convergence.json", &report)?;
        }
    }

    let t0 = Instant::now();
    let (blochs, status, key): (BlochSet, _, _) =
        ctx.cache.get_or_compute("bloch", versions::BLOCH, &(&cfg.crystal, params.n_k, &cfg.gauge), || {
            solve_bloch_set(&cfg.crystal, params.n_k, gauge.as_ref())
        })?;
    ctx.record("bloch", versions::BLOCH, status, Some(key), t0);

    let archive = floquet_stage(ctx, "floquet", &cfg.drive, params, &blochs)?;
    ctx.warnings.extend(archive.warnings.iter().map(|w| w.to_string()));
    if cfg.wants(Format::Archive) {
        ctx.out.json("archive.json", &archive)?;
    }

    let t0 = Instant::now();
    let mu_report = reported_order(cfg.observables.mu_report, &cfg.drive);
    let resp = compute_response(&archive, mu_report)?;
    let diagnostics = diagnose(&resp);
    let half_zone = half_zone_agreement(&archive, mu_report)?;
    let fourier = response_fourier(&resp, &cfg.observables.g)?;
    write_observables(ctx, &archive, &resp, &diagnostics, half_zone, &fourier)?;
    ctx.record("observables", versions::OBSERVABLES, CacheStatus::Uncached, None, t0);

    if let Some(x) = &cfg.xray {
        let t0 = Instant::now();
        for &n in &x.g {
            let amps = Amplitudes::from_response(&resp, n).truncated(x.mu_report as i64);
            write_spectra(ctx, &amps, &x.pulse, resp.omega, &x.grid)?;
        }
        ctx.record("spectrum", versions::SPECTRUM, CacheStatus::Uncached, None, t0);
    }

    if let (Some(x), Some(r)) = (&cfg.xray, &cfg.reconstruct) {
        let t0 = Instant::now();
        let mut rc = RoundTripConfig::new(x.pulse, r.g.clone(), r.mu.min(mu_report));
        rc.grid = Some(x.grid.clone());
        rc.alpha0 = r.alpha0;
        rc.moduli = r.moduli.clone();
        rc.ablation = r.ablation;
        rc.synthesis_orders = r.synthesis_orders.clone();
        let report = round_trip_report(&resp, &rc)?;
        write_reconstruction(ctx, &report)?;
        ctx.record("reconstruct", versions::RECONSTRUCT, CacheStatus::Uncached, None, t0);
    }

    if let Some(t) = &cfg.tdse {
        let t0 = Instant::now();
        let inputs = (&cfg.crystal, &cfg.drive, params.n_k, t, &cfg.gauge, mu_report);
        let (oracle, status, key): (OracleResult, _, _) =
            ctx.cache.get_or_compute("tdse", versions::TDSE, &inputs, || {
                let run = run_oracle(&cfg.crystal, &cfg.drive, params.n_k, t.n_bands, &t.propagation, gauge.as_ref())?;
                let (response, diagnostics) = extract_harmonic_amplitudes(&run, mu_report)?;
                let frames = t.frames.then(|| density_samples(&run));
                Ok(OracleResult { response, diagnostics, frames })
            })?;
        write_tdse(ctx, &resp, &oracle)?;
        ctx.record("tdse", versions::TDSE, status, Some(key), t0);
    }

    if !cfg.scan.field.is_empty() {
        let t0 = Instant::now();
        field_scan(ctx, params, &blochs)?;
        ctx.record("scan-field", versions::SCAN, CacheStatus::Uncached, None, t0);
    }
    if !cfg.scan.duration.is_empty() {
        let t0 = Instant::now();
        duration_scan(ctx, &resp)?;
        ctx.record("scan-duration", versions::SCAN, CacheStatus::Uncached, None, t0);
    }
    Ok(())
}

#[derive(Serialize)]
struct ObservableSummary<'a> {
    params: FloquetParams,
    gauge: &'a str,
    band_gap: f64,
    min_overlap: f64,
    excluded_k: &'a [f64],
    half_zone_agreement: f64,
    diagnostics: &'a Diagnostics,
    fourier: &'a [FourierEntry],
}

fn write_observables(
    ctx: &mut Ctx,
    archive: &FloquetArchive,
    resp: &Response,
    diagnostics: &Diagnostics,
    half_zone: f64,
    fourier: &[FourierEntry],
) -> Result<()> {
    if ctx.csv_enabled() {
        let xs = resp.grid.points();
        for mu in 0..=resp.mu_report {
            for (kind, field) in [("rho", &resp.rho[mu]), ("current", &resp.current[mu])] {
                let rows = xs.iter().zip(&field.values).map(|(x, v)| vec![num(*x), num(*v)]);
                ctx.out.csv(&format!("fields/{kind}_{mu}.csv"), &["x", "value"], rows)?;
            }
        }
        let rows = fourier.iter().map(|e| {
            vec![
                e.n.to_string(),
                num(e.g),
                e.mu.to_string(),
                num(e.pg),
                num(e.pu),
                num(e.modulus),
                num(e.phase),
                num(e.phase / PI),
            ]
        });
        ctx.out.csv("fourier.csv", &["n", "G", "mu", "Pg", "Pu", "modulus", "alpha", "alpha_over_pi"], rows)?;
    }
    if ctx.json_enabled() {
        ctx.out.json("response.json", resp)?;
        let summary = ObservableSummary {
            params: archive.params,
            gauge: &archive.gauge,
            band_gap: archive.gap.gap,
            min_overlap: archive.min_overlap(),
            excluded_k: &archive.excluded_k,
            half_zone_agreement: half_zone,
            diagnostics,
            fourier,
        };
        ctx.out.json("observables.json", &summary)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpectrumSummary {
    n: i64,
    g: f64,
    normalization: f64,
    route_difference: f64,
    window_leakage: f64,
    max_plus: f64,
    max_minus: f64,
    max_antisymmetric: Option<f64>,
    max_centro_dynamic: Option<f64>,
    resolves_first_neighbour: bool,
}

fn write_spectra(ctx: &mut Ctx, amps: &Amplitudes, pulse: &XrayPulse, omega: f64, grid: &crate::xray::SpectrumGrid) -> Result<()> {
    let n = amps.n;
    let plus = quasielastic_spectrum(amps, pulse, omega, grid)?;
    let minus = quasielastic_spectrum(&amps.at_minus_g(), pulse, omega, grid)?;
    let pair = match SpectraPair::new(plus.clone(), minus.clone()) {
        Ok(p) => Some(p),
        Err(Error::Domain(m)) => {
            ctx.warnings.push(format!("G index {n}: no ±G decomposition ({m})"));
            None
        }
        Err(e) => return Err(e),
    };
    let amax = |a: &ndarray::Array2<f64>| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ctx.csv_enabled() {
        let mut header = vec!["detuning", "delay", "P_plus", "P_minus"];
        if pair.is_some() {
            header.extend(["time_independent", "antisymmetric", "centro_dynamic"]);
        }
        let mut rows = Vec::with_capacity(grid.detuning.len() * grid.delays.len());
        for (i, d) in grid.detuning.iter().enumerate() {
            for (j, t) in grid.delays.iter().enumerate() {
                let mut row = vec![num(*d), num(*t), num(plus.intensity[[i, j]]), num(minus.intensity[[i, j]])];
                if let Some(p) = &pair {
                    row.extend([
                        num(p.parts.time_independent[i]),
                        num(p.parts.antisymmetric[[i, j]]),
                        num(p.parts.centro_dynamic[[i, j]]),
                    ]);
                }
                rows.push(row);
            }
        }
        ctx.out.csv(&format!("spectra/G{n}.csv"), &header, rows)?;
    }
    if ctx.cfg.wants(Format::Gnuplot) {
        ctx.out.gnuplot_matrix(&format!("spectra/G{n}_plus.dat"), &grid.delays, &grid.detuning, &plus.intensity)?;
        ctx.out.gnuplot_matrix(&format!("spectra/G{n}_minus.dat"), &grid.delays, &grid.detuning, &minus.intensity)?;
        if let Some(p) = &pair {
            ctx.out.gnuplot_matrix(&format!("spectra/G{n}_antisymmetric.dat"), &grid.delays, &grid.detuning, &p.parts.antisymmetric)?;
            ctx.out.gnuplot_matrix(&format!("spectra/G{n}_centro_dynamic.dat"), &grid.delays, &grid.detuning, &p.parts.centro_dynamic)?;
        }
    }
    if ctx.json_enabled() {
        let s = SpectrumSummary {
            n,
            g: plus.g,
            normalization: plus.normalization,
            route_difference: plus.route_difference.max(minus.route_difference),
            window_leakage: plus.window_leakage.max(minus.window_leakage),
            max_plus: SpectrumResult::max(&plus),
            max_minus: SpectrumResult::max(&minus),
            max_antisymmetric: pair.as_ref().map(|p| amax(&p.parts.antisymmetric)),
            max_centro_dynamic: pair.as_ref().map(|p| amax(&p.parts.centro_dynamic)),
            resolves_first_neighbour: pulse.resolves(1, omega),
        };
        ctx.out.json(&format!("spectra/G{n}.json"), &s)?;
    }
    Ok(())
}

fn write_reconstruction(ctx: &mut Ctx, report: &ReconstructionReport) -> Result<()> {
    if ctx.csv_enabled() {
        let opt = |v: Option<f64>| v.map_or(String::new(), num);
        let rows = report.entries.iter().map(|e| {
            vec![
                e.n.to_string(),
                e.mu.to_string(),
                serde_json::to_value(e.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                num(e.recovered_modulus),
                num(e.true_modulus),
                opt(e.modulus_error),
                opt(e.recovered_phase),
                num(e.true_phase),
                opt(e.phase_error),
            ]
        });
        ctx.out.csv(
            "reconstruction.csv",
            &["n", "mu", "status", "modulus", "true_modulus", "modulus_rel_error", "alpha", "true_alpha", "alpha_error"],
            rows,
        )?;
    }
    if ctx.json_enabled() {
        ctx.out.json("reconstruction.json", report)?;
    }
    Ok(())
}

/// Extracted TDSE amplitudes, optionally with the sampled densities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub response: Response,
    pub diagnostics: OracleDiagnostics,
    pub frames: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

/// L2 distances from the oracle per order: relative to the same oracle order, and relative
/// to the largest order of the field (meaningful when an order vanishes, such as the static current).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleComparison {
    pub mu: usize,
    pub density_rel_l2: f64,
    pub current_rel_l2: f64,
    pub density_scaled_l2: f64,
    pub current_scaled_l2: f64,
}

pub fn compare_with_oracle(floquet: &Response, oracle: &Response) -> Vec<OracleComparison> {
    let top = floquet.mu_report.min(oracle.mu_report);
    let scale = |fields: &[RealField]| fields.iter().take(top + 1).map(|f| l2(&f.values)).fold(0.0, f64::max);
    let (sr, sj) = (scale(&oracle.rho), scale(&oracle.current));
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let over = |d: f64, s: f64| if s > 0.0 { d / s } else { d };
    (0..=top)
        .map(|mu| {
            let (f, o) = ((&floquet.rho[mu].values, &floquet.current[mu].values), (&oracle.rho[mu].values, &oracle.current[mu].values));
            let (dr, dj) = (dist(f.0, o.0), dist(f.1, o.1));
            OracleComparison {
                mu,
                density_rel_l2: over(dr, l2(o.0)),
                current_rel_l2: over(dj, l2(o.1)),
                density_scaled_l2: over(dr, sr),
                current_scaled_l2: over(dj, sj),
            }
        })
        .collect()
}

fn write_tdse(ctx: &mut Ctx, resp: &Response, oracle: &OracleResult) -> Result<()> {
    let cmp = compare_with_oracle(resp, &oracle.response);
    if ctx.csv_enabled() {
        let rows = cmp.iter().map(|c| {
            vec![
                c.mu.to_string(),
                num(c.density_rel_l2),
                num(c.current_rel_l2),
                num(c.density_scaled_l2),
                num(c.current_scaled_l2),
            ]
        });
        let header = ["mu", "density_rel_l2", "current_rel_l2", "density_scaled_l2", "current_scaled_l2"];
        ctx.out.csv("tdse/comparison.csv", &header, rows)?;
        if let Some((times, samples)) = &oracle.frames {
            let xs = resp.grid.points();
            let mut rows = Vec::with_capacity(times.len() * xs.len());
            for (t, frame) in times.iter().zip(samples) {
                for (x, v) in xs.iter().zip(frame) {
                    rows.push(vec![num(*t), num(*x), num(*v)]);
                }
            }
            ctx.out.csv("tdse/frames.csv", &["t", "x", "rho"], rows)?;
        }
    }
    if ctx.json_enabled() {
        #[derive(Serialize)]
        struct Out<'a> {
            diagnostics: &'a OracleDiagnostics,
            comparison: &'a [OracleComparison],
        }
        ctx.out.json("tdse/summary.json", &Out { diagnostics: &oracle.diagnostics, comparison: &cmp })?;
    }
    Ok(())
}

/// |F_μ(G)| over the field list, with local power-law exponents between neighbouring fields.
fn field_scan(ctx: &mut Ctx, params: FloquetParams, blochs: &BlochSet) -> Result<()> {
    let cfg = ctx.cfg;
    let mut table: Vec<(f64, Vec<FourierEntry>)> = Vec::new();
    for (i, &e0) in cfg.scan.field.iter().enumerate() {
        let drive = DriveField { e0, ..cfg.drive };
        let archive = floquet_stage(ctx, &format!("scan-field[{i}]"), &drive, params, blochs)?;
        let resp = compute_response(&archive, reported_order(cfg.observables.mu_report, &drive))?;
        table.push((e0, response_fourier(&resp, &cfg.observables.g)?));
    }
    let mut rows = Vec::new();
    for (e0, entries) in &table {
        for e in entries {
            rows.push(vec![num(*e0), num(crate::units::field_to_intensity(*e0)), e.n.to_string(), e.mu.to_string(), num(e.modulus), num(e.phase)]);
        }
    }
    let mut sorted: Vec<&(f64, Vec<FourierEntry>)> = table.iter().filter(|(e, _)| *e > 0.0).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut scaling = Vec::new();
    for w in sorted.windows(2) {
        let (ea, fa) = (w[0].0, &w[0].1);
        let (eb, fb) = (w[1].0, &w[1].1);
        for &n in &cfg.observables.g {
            for mu in 1..=cfg.observables.mu_report as i64 {
                let (Some(a), Some(b)) = (lookup(fa, n, mu), lookup(fb, n, mu)) else { continue };
                if a.modulus == 0.0 || b.modulus == 0.0 {
                    continue;
                }
                let exponent = (b.modulus / a.modulus).ln() / (eb / ea).ln();
                scaling.push(ScalingRow { n, mu, e0_low: ea, e0_high: eb, exponent, deviation: (exponent / mu as f64 - 1.0).abs() });
            }
        }
    }
    if ctx.csv_enabled() {
        ctx.out.csv("scan/field.csv", &["e0", "intensity_w_cm2", "n", "mu", "modulus", "alpha"], rows)?;
        let rows = scaling.iter().map(|s| {
            vec![s.n.to_string(), s.mu.to_string(), num(s.e0_low), num(s.e0_high), num(s.exponent), num(s.deviation)]
        });
        ctx.out.csv("scan/scaling.csv", &["n", "mu", "e0_low", "e0_high", "exponent", "deviation"], rows)?;
    }
    if ctx.json_enabled() {
        ctx.out.json("scan/scaling.json", &scaling)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: i64,
    pub mu: i64,
    pub e0_low: f64,
    pub e0_high: f64,
    /// d ln|F_μ| / d ln E_0 between the two fields.
    pub exponent: f64,
    /// |exponent/μ - 1|
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DurationRow {
    pub duration: f64,
    pub periods: f64,
    pub overlap_first: f64,
    pub overlap_second: f64,
    pub max_modulus_error: Option<f64>,
    pub max_phase_error: Option<f64>,
    pub undetectable: usize,
    pub error: Option<String>,
}

/// Round trip repeated for each probe duration; failures are recorded per row.
fn duration_scan(ctx: &mut Ctx, resp: &Response) -> Result<()> {
    let cfg = ctx.cfg;
    let x = cfg.xray.as_ref().expect("validated at parse time");
    let omega = resp.omega;
    let period = 2.0 * PI / omega;
    let mut out = Vec::new();
    for &tau in &cfg.scan.duration {
        let pulse = XrayPulse::new(tau, x.pulse.photon_energy)?;
        let (g, mu, moduli, alpha0) = match &cfg.reconstruct {
            Some(r) => (r.g.clone(), r.mu, r.moduli.clone(), r.alpha0),
            None => (x.g.clone(), x.mu_report.min(2), "gaussian-fit".to_string(), None),
        };
        let mut rc = RoundTripConfig::new(pulse, g, mu.min(resp.mu_report));
        rc.grid = Some(x.grid.clone());
        rc.moduli = moduli;
        rc.alpha0 = alpha0;
        rc.synthesis_orders = Vec::new();
        let mut row = DurationRow {
            duration: tau,
            periods: tau / period,
            overlap_first: overlap_factor(1.0, omega, tau),
            overlap_second: overlap_factor(2.0, omega, tau),
            max_modulus_error: None,
            max_phase_error: None,
            undetectable: 0,
            error: None,
        };
        match round_trip_report(resp, &rc) {
            Ok(r) => {
                row.max_modulus_error = Some(r.max_modulus_error);
                row.max_phase_error = Some(r.max_phase_error);
                row.undetectable = r.entries.iter().filter(|e| e.status == crate::reconstruct::EntryStatus::Undetectable).count();
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        out.push(row);
    }
    if ctx.csv_enabled() {
        let opt = |v: Option<f64>| v.map_or(String::new(), num);
        let rows = out.iter().map(|r| {
            vec![
                num(r.duration),
                num(r.periods),
                num(r.overlap_first),
                num(r.overlap_second),
                opt(r.max_modulus_error),
                opt(r.max_phase_error),
                r.undetectable.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        });
        ctx.out.csv(
            "scan/duration.csv",
            &["tau", "tau_over_T", "overlap_1", "overlap_2", "max_modulus_error", "max_alpha_error", "undetectable", "error"],
            rows,
        )?;
    }
    if ctx.json_enabled() {
        ctx.out.json("scan/duration.json", &out)?;
    }
    Ok(())
}
