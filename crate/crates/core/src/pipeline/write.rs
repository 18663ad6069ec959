use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::cache::bytes_hash;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Relative to the run directory, with `/` separators.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes run artifacts under one directory and records their hashes.
pub struct ArtifactWriter {
    root: PathBuf,
    pub records: Vec<OutputRecord>,
}

impl ArtifactWriter {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(ArtifactWriter { root: root.to_path_buf(), records: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn put(&mut self, rel: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, &bytes)?;
        self.records.retain(|r| r.path != rel);
        self.records.push(OutputRecord { path: rel.to_string(), sha256: bytes_hash(&bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(rel, bytes)
    }

    /// RFC 4180 CSV with a header row.
    pub fn csv<I>(&mut self, rel: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let err = |e: csv::Error| Error::Serde(e.to_string());
        w.write_record(header).map_err(err)?;
        for row in rows {
            if row.len() != header.len() {
                return Err(Error::Serde(format!("{rel}: row has {} fields, header has {}", row.len(), header.len())));
            }
            w.write_record(&row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
        self.put(rel, bytes)
    }

    /// gnuplot `matrix nonuniform` layout: first row `n x_1 .. x_n`, then `y_i z_i1 .. z_in`.
    pub fn gnuplot_matrix(&mut self, rel: &str, xs: &[f64], ys: &[f64], z: &Array2<f64>) -> Result<()> {
        if z.dim() != (ys.len(), xs.len()) {
            return Err(Error::Domain(format!("{rel}: matrix is {:?}, axes are {} x {}", z.dim(), ys.len(), xs.len())));
        }
        let mut s = num(xs.len() as f64);
        for x in xs {
            s.push(' ');
            s.push_str(&num(*x));
        }
        s.push('\n');
        for (i, y) in ys.iter().enumerate() {
            s.push_str(&num(*y));
            for v in z.row(i) {
                s.push(' ');
                s.push_str(&num(*v));
            }
            s.push('\n');
        }
        self.put(rel, s.into_bytes())
    }
}
