//! Artifact files. Floating-point values are written with 17 significant
//! digits (`{:.16e}`), enough to round-trip every `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::density::DensityOnGrid;
use crate::error::{Error, Result};
use crate::limits::ConvergenceReport;
use crate::measure::EmpiricalMeasure;

/// Labels written into a density file header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityHeader {
    pub n: Option<usize>,
    /// Half-length of the box the density was computed in.
    pub half_length: f64,
    /// Grid points per axis.
    pub points: usize,
}

fn write_file(path: &Path, body: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body).map_err(|e| Error::io(path, e))
}

/// `# n=… L=… N=… d=… binning=…`, a column row, then one row per node.
pub fn density_csv(q: &DensityOnGrid, header: &DensityHeader) -> String {
    let mut out = String::with_capacity(48 * q.values().len());
    let n = header.n.map_or_else(|| "limit".to_string(), |n| n.to_string());
    let binning = match q.binning() {
        crate::density::Binning::Samples => "samples",
        crate::density::Binning::CellAverages => "cell_averages",
    };
    out.push_str(&format!(
        "# n={n} L={:.16e} N={} d={} binning={binning}\n",
        header.half_length,
        header.points,
        q.dim()
    ));
    if q.dim() == 1 {
        out.push_str("x,value\n");
    } else {
        out.push_str("x1,x2,value\n");
    }
    for (i, v) in q.values().iter().enumerate() {
        let p = q.node(i);
        if q.dim() == 1 {
            out.push_str(&format!("{:.16e},{v:.16e}\n", p[0]));
        } else {
            out.push_str(&format!("{:.16e},{:.16e},{v:.16e}\n", p[0], p[1]));
        }
    }
    out
}

pub fn write_density(q: &DensityOnGrid, header: &DensityHeader, path: &Path) -> Result<()> {
    write_file(path, density_csv(q, header).as_bytes())
}

pub fn measure_csv(m: &EmpiricalMeasure) -> String {
    let mut out = String::with_capacity(48 * m.len());
    out.push_str(if m.dim() == 1 { "x,weight\n" } else { "x1,x2,weight\n" });
    for (p, w) in m.atoms() {
        if m.dim() == 1 {
            out.push_str(&format!("{:.16e},{w:.16e}\n", p[0]));
        } else {
            out.push_str(&format!("{:.16e},{:.16e},{w:.16e}\n", p[0], p[1]));
        }
    }
    out
}

/// Atoms to `path` and the sampling metadata to `path` with a `.json`
/// extension.
pub fn write_measure(m: &EmpiricalMeasure, path: &Path) -> Result<()> {
    write_file(path, measure_csv(m).as_bytes())?;
    write_json(&m.meta, &path.with_extension("json"))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// `report.json` and its companion `report.csv` next to it.
pub fn write_report(r: &ConvergenceReport, path: &Path) -> Result<()> {
    write_file(path, (r.to_json() + "\n").as_bytes())?;
    write_file(&path.with_extension("csv"), r.to_csv().as_bytes())
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    write_file(path, text.as_bytes())
}
