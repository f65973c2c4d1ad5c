use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
}

/// Uniformly sampled named channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub h: f64,
    pub t: Vec<f64>,
    names: Vec<String>,
    data: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(h: f64, names: Vec<String>) -> Self {
        let data = vec![Vec::new(); names.len()];
        Self {
            h,
            t: Vec::new(),
            names,
            data,
        }
    }

    pub fn with_capacity(h: f64, names: Vec<String>, n: usize) -> Self {
        let data = vec![Vec::with_capacity(n); names.len()];
        Self {
            h,
            t: Vec::with_capacity(n),
            names,
            data,
        }
    }

    /// Append one sample; `row` follows the channel order.
    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.names.len(), "row width");
        self.t.push(self.t.len() as f64 * self.h);
        for (c, v) in self.data.iter_mut().zip(row) {
            c.push(*v);
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        if name == "t" {
            return Some(&self.t);
        }
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.data[i].as_slice())
    }

    pub fn require(&self, name: &str) -> Result<&[f64], TraceError> {
        self.channel(name)
            .ok_or_else(|| TraceError::UnknownChannel(name.to_string()))
    }

    /// Keep only the listed channels in the given order.
    pub fn select(&self, keep: &[String]) -> Result<Trace, TraceError> {
        let mut names = Vec::new();
        let mut data = Vec::new();
        for k in keep.iter().filter(|k| k.as_str() != "t") {
            data.push(self.require(k)?.to_vec());
            names.push(k.clone());
        }
        Ok(Trace {
            h: self.h,
            t: self.t.clone(),
            names,
            data,
        })
    }

    /// Write `t,<channels>` CSV, every value with 17 significant digits.
    pub fn export_csv(&self, path: &Path) -> Result<(), TraceError> {
        let csv_err = |source| TraceError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header = vec!["t".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        let mut row = Vec::with_capacity(header.len());
        for i in 0..self.len() {
            row.clear();
            row.push(format!("{:.16e}", self.t[i]));
            for c in &self.data {
                row.push(format!("{:.16e}", c[i]));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| TraceError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn import_csv(path: &Path, h: f64) -> Result<Trace, TraceError> {
        let csv_err = |source| TraceError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header: Vec<String> = r
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(String::from)
            .collect();
        if header.first().map(String::as_str) != Some("t") {
            return Err(TraceError::Format {
                path: path.to_path_buf(),
                message: "first column must be t".into(),
            });
        }
        let names = header[1..].to_vec();
        let mut tr = Trace::new(h, names);
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let mut vals = Vec::with_capacity(rec.len());
            for field in rec.iter() {
                vals.push(field.parse::<f64>().map_err(|e| TraceError::Format {
                    path: path.to_path_buf(),
                    message: format!("bad number `{field}`: {e}"),
                })?);
            }
            tr.t.push(vals[0]);
            for (c, v) in tr.data.iter_mut().zip(&vals[1..]) {
                c.push(*v);
            }
        }
        Ok(tr)
    }

    /// Write a matplotlib script next to `csv_path` that plots every channel.
    pub fn export_plot_script(&self, csv_path: &Path) -> Result<PathBuf, TraceError> {
        let file = csv_path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default();
        let script = csv_path.with_extension("plot.py");
        let body = format!(
            r#"# Plot {file}; run from any directory.
import csv, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "{file}")) as fh:
    rows = list(csv.reader(fh))
head, body = rows[0], rows[1:]
cols = list(zip(*[[float(v) for v in r] for r in body]))
fig, ax = plt.subplots()
for name, col in zip(head[1:], cols[1:]):
    ax.plot(cols[0], col, label=name)
ax.set_xlabel("t [s]")
ax.legend()
fig.savefig(os.path.join(here, "{stem}.png"), dpi=120)
"#,
            stem = csv_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        );
        fs::write(&script, body).map_err(|source| TraceError::Io {
            path: script.clone(),
            source,
        })?;
        Ok(script)
    }
}
