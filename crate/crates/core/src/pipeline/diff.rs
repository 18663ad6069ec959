use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Manifest;
use crate::error::{Error, Result};

/// Differences of one numeric column (CSV) or one key path (JSON, array indices collapsed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffEntry {
    pub file: String,
    pub field: String,
    pub count: usize,
    pub max_abs: f64,
    /// max |a - b| over max |a|, |b| within the field.
    pub max_rel: f64,
    /// Non-numeric cells that differ.
    pub mismatches: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffReport {
    pub config_hash_a: String,
    pub config_hash_b: String,
    pub entries: Vec<DiffEntry>,
    pub max_rel: f64,
    pub identical_files: usize,
}

impl DiffReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} fields compared, {} files byte-identical, largest relative difference {:.3e}\n",
            self.entries.len(),
            self.identical_files,
            self.max_rel
        );
        s += &format!("{:<36} {:<22} {:>8} {:>11} {:>11} {:>5}\n", "file", "field", "values", "max abs", "max rel", "text");
        for e in &self.entries {
            s += &format!(
                "{:<36} {:<22} {:>8} {:>11.3e} {:>11.3e} {:>5}\n",
                e.file, e.field, e.count, e.max_abs, e.max_rel, e.mismatches
            );
        }
        s
    }

    pub fn entry(&self, file: &str, field: &str) -> Option<&DiffEntry> {
        self.entries.iter().find(|e| e.file == file && e.field == field)
    }
}

/// Phase-like fields compare modulo their period.
fn angle_period(field: &str) -> Option<f64> {
    let last = field.rsplit('.').next().unwrap_or(field).trim_end_matches("[]");
    if last.ends_with("_over_pi") {
        Some(2.0)
    } else if last.ends_with("alpha") || last == "phase" {
        Some(std::f64::consts::TAU)
    } else {
        None
    }
}

#[derive(Default)]
struct Acc {
    count: usize,
    max_abs: f64,
    scale: f64,
    mismatches: usize,
}

impl Acc {
    fn push(&mut self, a: f64, b: f64) {
        self.count += 1;
        self.max_abs = self.max_abs.max((a - b).abs());
        self.scale = self.scale.max(a.abs()).max(b.abs());
    }
    fn push_angle(&mut self, a: f64, b: f64, period: f64) {
        self.count += 1;
        let d = (a - b).rem_euclid(period);
        self.max_abs = self.max_abs.max(d.min(period - d));
        self.scale = self.scale.max(period / 2.0);
    }
    fn value(&mut self, field: &str, a: f64, b: f64) {
        match angle_period(field) {
            Some(p) => self.push_angle(a, b, p),
            None => self.push(a, b),
        }
    }
    fn text(&mut self, a: &str, b: &str) {
        self.count += 1;
        if a != b {
            self.mismatches += 1;
        }
    }
}

fn domain<T>(m: String) -> Result<T> {
    Err(Error::Domain(m))
}

fn diff_csv(file: &str, a: &[u8], b: &[u8], out: &mut BTreeMap<(String, String), Acc>) -> Result<()> {
    let read = |bytes: &[u8]| -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
        let mut r = csv::Reader::from_reader(bytes);
        let header = r.headers().map_err(|e| Error::Serde(e.to_string()))?.iter().map(String::from).collect();
        let rows = r.records().collect::<std::result::Result<Vec<_>, _>>().map_err(|e| Error::Serde(e.to_string()))?;
        Ok((header, rows))
    };
    let (ha, ra) = read(a)?;
    let (hb, rb) = read(b)?;
    if ha != hb {
        return domain(format!("{file}: columns differ ({ha:?} vs {hb:?})"));
    }
    if ra.len() != rb.len() {
        return domain(format!("{file}: {} rows vs {}", ra.len(), rb.len()));
    }
    for (x, y) in ra.iter().zip(&rb) {
        for (c, name) in ha.iter().enumerate() {
            let acc = out.entry((file.to_string(), name.clone())).or_default();
            let (sa, sb) = (x.get(c).unwrap_or(""), y.get(c).unwrap_or(""));
            match (sa.parse::<f64>(), sb.parse::<f64>()) {
                (Ok(va), Ok(vb)) => acc.value(name, va, vb),
                _ => acc.text(sa, sb),
            }
        }
    }
    Ok(())
}

fn walk(file: &str, path: &str, a: &Value, b: &Value, out: &mut BTreeMap<(String, String), Acc>) -> Result<()> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            out.entry((file.into(), path.into())).or_default().value(path, x.as_f64().unwrap_or(0.0), y.as_f64().unwrap_or(0.0))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return domain(format!("{file}: {path} has {} vs {} elements", x.len(), y.len()));
            }
            let p = format!("{path}[]");
            for (u, v) in x.iter().zip(y) {
                walk(file, &p, u, v, out)?;
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for (k, u) in x {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match y.get(k) {
                    Some(v) => walk(file, &p, u, v, out)?,
                    None => out.entry((file.into(), p)).or_default().text("present", "absent"),
                }
            }
            for k in y.keys().filter(|k| !x.contains_key(*k)) {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                out.entry((file.into(), p)).or_default().text("absent", "present");
            }
        }
        _ => {
            let acc = out.entry((file.into(), path.into())).or_default();
            acc.text(&a.to_string(), &b.to_string());
        }
    }
    Ok(())
}

fn diff_gnuplot(file: &str, a: &[u8], b: &[u8], out: &mut BTreeMap<(String, String), Acc>) -> Result<()> {
    let parse = |bytes: &[u8]| -> Vec<f64> {
        String::from_utf8_lossy(bytes).split_whitespace().filter_map(|t| t.parse().ok()).collect()
    };
    let (x, y) = (parse(a), parse(b));
    if x.len() != y.len() {
        return domain(format!("{file}: {} vs {} values", x.len(), y.len()));
    }
    let acc = out.entry((file.into(), "matrix".into())).or_default();
    for (u, v) in x.iter().zip(&y) {
        acc.push(*u, *v);
    }
    Ok(())
}

/// Field-by-field differences between two run directories.
pub fn diff_runs(dir_a: &Path, dir_b: &Path) -> Result<DiffReport> {
    let ma = Manifest::load(dir_a)?;
    let mb = Manifest::load(dir_b)?;
    let base = |p: &Path| if p.is_dir() { p.to_path_buf() } else { p.parent().map(Path::to_path_buf).unwrap_or_default() };
    let (ra, rb) = (base(dir_a), base(dir_b));
    let files_a: Vec<&str> = ma.outputs.iter().map(|o| o.path.as_str()).collect();
    let files_b: Vec<&str> = mb.outputs.iter().map(|o| o.path.as_str()).collect();
    if files_a != files_b {
        let only_a: Vec<_> = files_a.iter().filter(|f| !files_b.contains(f)).collect();
        let only_b: Vec<_> = files_b.iter().filter(|f| !files_a.contains(f)).collect();
        return domain(format!("runs have different outputs (only in a: {only_a:?}; only in b: {only_b:?})"));
    }
    let mut acc = BTreeMap::new();
    let mut identical = 0;
    for (oa, ob) in ma.outputs.iter().zip(&mb.outputs) {
        let read = |root: &Path| {
            std::fs::read(root.join(&oa.path)).map_err(|e| Error::Config(format!("cannot read {}: {e}", oa.path)))
        };
        let (a, b) = (read(&ra)?, read(&rb)?);
        if oa.sha256 == ob.sha256 && a == b {
            identical += 1;
        }
        if oa.path.ends_with(".csv") {
            diff_csv(&oa.path, &a, &b, &mut acc)?;
        } else if oa.path.ends_with(".json") {
            let va: Value = serde_json::from_slice(&a)?;
            let vb: Value = serde_json::from_slice(&b)?;
            walk(&oa.path, "", &va, &vb, &mut acc)?;
        } else if oa.path.ends_with(".dat") {
            diff_gnuplot(&oa.path, &a, &b, &mut acc)?;
        }
    }
    let entries: Vec<DiffEntry> = acc
        .into_iter()
        .map(|((file, field), a)| DiffEntry {
            file,
            field,
            count: a.count,
            max_abs: a.max_abs,
            max_rel: if a.scale > 0.0 { a.max_abs / a.scale } else { 0.0 },
            mismatches: a.mismatches,
        })
        .collect();
    let max_rel = entries.iter().map(|e| e.max_rel).fold(0.0, f64::max);
    Ok(DiffReport { config_hash_a: ma.config_hash, config_hash_b: mb.config_hash, entries, max_rel, identical_files: identical })
}
