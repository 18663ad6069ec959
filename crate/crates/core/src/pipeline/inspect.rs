use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use super::{Manifest, OracleResult, MANIFEST_FILE, MANIFEST_FORMAT};
use crate::cache::FORMAT as CACHE_FORMAT;
use crate::error::{Error, Result};
use crate::floquet::{BlochSet, ConvergenceReport, FloquetArchive};
use crate::units::{field_to_intensity, HARTREE_EV};

fn archive_summary(a: &FloquetArchive) -> String {
    let mut s = String::new();
    let m = &a.model;
    let _ = writeln!(s, "Floquet archive");
    let _ = writeln!(
        s,
        "  crystal: a = {} bohr, {} plane waves, {} occupied band(s), V = {:?}",
        m.lattice_constant, m.n_planewaves, m.n_occupied, m.potential.iter().map(|v| (v.re, v.im)).collect::<Vec<_>>()
    );
    let _ = writeln!(
        s,
        "  drive: ω = {:.6} Ha ({:.4} eV), E0 = {:.6e} au ({:.4e} W/cm²), T = {:.4} au",
        a.drive.omega,
        a.drive.omega * HARTREE_EV,
        a.drive.e0,
        field_to_intensity(a.drive.e0),
        a.drive.period()
    );
    let _ = writeln!(s, "  μ_max = {}, bands = {}, n_k = {}, gauge = {}", a.params.mu_max, a.params.n_bands, a.params.n_k, a.gauge);
    let _ = writeln!(s, "  band gap {:.6} Ha (direct {:.6} Ha at k = {:.4})", a.gap.gap, a.gap.min_direct_gap, a.gap.direct_gap_k);
    let _ = writeln!(
        s,
        "  k-points kept {}, excluded {:?}, min overlap {:.6}",
        a.kpoints.len(),
        a.excluded_k,
        a.min_overlap()
    );
    for w in &a.warnings {
        let _ = writeln!(s, "  warning: {w}");
    }
    let _ = writeln!(s, "  {:>10} {:>5} {:>14} {:>10} {:>10}", "k", "band", "quasienergy", "overlap", "norm");
    for kp in &a.kpoints {
        for st in &kp.states {
            let _ = writeln!(s, "  {:>10.6} {:>5} {:>14.8} {:>10.6} {:>10.6}", kp.k, st.band, st.quasienergy, st.overlap, st.norm_sqr());
        }
    }
    s
}

fn manifest_summary(m: &Manifest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "run manifest (wavemix {})", m.tool_version);
    let _ = writeln!(s, "  config hash {}", m.config_hash);
    let _ = writeln!(s, "  status {:?}", m.status);
    if let Some(e) = &m.error {
        let _ = writeln!(s, "  error ({:?}, exit {}): {}", e.class, e.exit_code, e.message);
    }
    for st in &m.stages {
        let _ = writeln!(s, "  stage {:<18} v{} {:>9} {:>9.3}s", st.name, st.version, format!("{:?}", st.cache).to_lowercase(), st.seconds);
    }
    let _ = writeln!(s, "  {} outputs", m.outputs.len());
    for o in &m.outputs {
        let _ = writeln!(s, "    {:<40} {:>10} bytes  {}", o.path, o.bytes, &o.sha256[..16]);
    }
    for w in &m.warnings {
        let _ = writeln!(s, "  warning: {w}");
    }
    s
}

fn bloch_summary(b: &BlochSet) -> String {
    let mut s = format!("Bloch set: {} k-points, gauge {}\n", b.solutions.len(), b.gauge);
    for sol in &b.solutions {
        let e: Vec<String> = sol.energies.iter().take(4).map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(s, "  k = {:>10.6}  lowest energies {}", sol.k, e.join(" "));
    }
    s
}

/// Human-readable summary of a run directory, manifest, cache entry or archive file.
pub fn inspect(path: &Path) -> Result<String> {
    let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let bytes = std::fs::read(&file).map_err(|e| Error::Config(format!("cannot read {}: {e}", file.display())))?;
    let value: Value =
        serde_json::from_slice(&bytes).map_err(|e| Error::Domain(format!("{} is not JSON: {e}", file.display())))?;
    let format = value.get("format").and_then(Value::as_str).unwrap_or("");
    if format == MANIFEST_FORMAT {
        return Ok(manifest_summary(&serde_json::from_value(value)?));
    }
    if format == CACHE_FORMAT {
        let stage = value.get("stage").and_then(Value::as_str).unwrap_or("").to_string();
        let version = value.get("version").and_then(Value::as_u64).unwrap_or(0);
        let payload = value.get("payload").cloned().unwrap_or(Value::Null);
        let head = format!("cache entry: stage {stage} v{version}\n");
        let body = match stage.as_str() {
            "floquet" => archive_summary(&serde_json::from_value(payload)?),
            "bloch" => bloch_summary(&serde_json::from_value(payload)?),
            "convergence" => {
                let r: ConvergenceReport = serde_json::from_value(payload)?;
                let mut s = format!("converged parameters {:?}\n", r.params);
                for st in &r.trace {
                    let _ = writeln!(s, "  {:?}: max change {:.3e}", st.params, st.max_change());
                }
                s
            }
            "tdse" => {
                let r: OracleResult = serde_json::from_value(payload)?;
                format!(
                    "TDSE extraction to order {}: max norm drift {:.3e}, beating {:.3e}, parity residual {:.3e}\n",
                    r.response.mu_report, r.diagnostics.max_norm_drift, r.diagnostics.beating, r.diagnostics.parity_residual
                )
            }
            _ => format!("{} top-level payload bytes\n", payload.to_string().len()),
        };
        return Ok(head + &body);
    }
    match serde_json::from_value::<FloquetArchive>(value) {
        Ok(a) => Ok(archive_summary(&a)),
        Err(_) => Err(Error::Domain(format!("{} is neither a manifest, a cache entry nor a Floquet archive", file.display()))),
    }
}
