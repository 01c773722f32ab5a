//! Grid wavefunction files.
//!
//! CSV: a header line
//! `# qwalk-grid dim=<d> coin_points=<N_y> walk_points=<N_x> refine=<r> x_domain=<position|frequency>`,
//! a column line `x_index,y_index,re,im`, then one row per grid value with
//! flat walker and coin indices (row-major multi-indices in two dimensions).
//!
//! Binary: the magic `QWGRID01`, four little-endian `u32` (dim, coin_points,
//! walk_points, refine), one `u8` domain tag (0 position, 1 frequency),
//! three zero bytes, then `re, im` pairs as little-endian `f64` in flat
//! index order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Domain, GridSpec, GridWavefunction};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"QWGRID01";

fn domain_name(d: Domain) -> &'static str {
    match d {
        Domain::Position => "position",
        Domain::Frequency => "frequency",
    }
}

pub fn write_csv<W: Write>(psi: &GridWavefunction, mut w: W) -> std::io::Result<()> {
    let s = psi.spec();
    writeln!(
        w,
        "# qwalk-grid dim={} coin_points={} walk_points={} refine={} x_domain={}",
        s.dim(),
        s.coin_points(),
        s.walk_points(),
        s.refine(),
        domain_name(psi.x_domain())
    )?;
    writeln!(w, "x_index,y_index,re,im")?;
    let coin_len = s.coin_len();
    for (idx, v) in psi.values().iter().enumerate() {
        writeln!(w, "{},{},{:.16e},{:.16e}", idx / coin_len, idx % coin_len, v.re, v.im)?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<(GridSpec, Domain)> {
    let body = line
        .strip_prefix("# qwalk-grid")
        .ok_or_else(|| Error::Parse(format!("missing grid header, found {line:?}")))?;
    let mut fields = std::collections::BTreeMap::new();
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field {tok:?}")))?;
        fields.insert(k, v);
    }
    let num = |k: &str| -> Result<usize> {
        fields
            .get(k)
            .ok_or_else(|| Error::Parse(format!("header lacks {k}")))?
            .parse()
            .map_err(|e| Error::Parse(format!("header {k}: {e}")))
    };
    let spec = GridSpec::new(num("dim")?, num("coin_points")?, num("walk_points")?, num("refine")?)?;
    let domain = match fields.get("x_domain").copied() {
        None | Some("position") => Domain::Position,
        Some("frequency") => Domain::Frequency,
        Some(other) => return Err(Error::Parse(format!("unknown x_domain {other:?}"))),
    };
    Ok((spec, domain))
}

pub fn read_csv<R: BufRead>(r: R) -> Result<GridWavefunction> {
    let mut lines = r.lines();
    let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(|e| Error::Parse(e.to_string())) };
    let header = next()?.ok_or_else(|| Error::Parse("empty grid file".into()))?;
    let (spec, domain) = parse_header(header.trim())?;
    let cols = next()?.unwrap_or_default();
    if cols.trim() != "x_index,y_index,re,im" {
        return Err(Error::Parse(format!("unexpected column line {cols:?}")));
    }
    let coin_len = spec.coin_len();
    let mut values = vec![Complex64::default(); spec.len()];
    let mut seen = vec![false; spec.len()];
    let mut row = 0usize;
    while let Some(line) = next()? {
        row += 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("row {row}: expected 4 columns")));
        }
        let bad = |what: &str| Error::Parse(format!("row {row}: bad {what}"));
        let xi: usize = parts[0].parse().map_err(|_| bad("x_index"))?;
        let yi: usize = parts[1].parse().map_err(|_| bad("y_index"))?;
        let re: f64 = parts[2].parse().map_err(|_| bad("re"))?;
        let im: f64 = parts[3].parse().map_err(|_| bad("im"))?;
        if xi >= spec.walk_len() || yi >= coin_len {
            return Err(Error::Parse(format!("row {row}: index out of range")));
        }
        let idx = xi * coin_len + yi;
        values[idx] = Complex64::new(re, im);
        seen[idx] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Parse(format!(
            "grid value ({}, {}) missing",
            missing / coin_len,
            missing % coin_len
        )));
    }
    GridWavefunction::from_values(spec, domain, values)
}

pub fn write_binary<W: Write>(psi: &GridWavefunction, mut w: W) -> std::io::Result<()> {
    let s = psi.spec();
    w.write_all(MAGIC)?;
    for v in [s.dim(), s.coin_points(), s.walk_points(), s.refine()] {
        w.write_all(&(v as u32).to_le_bytes())?;
    }
    let tag = match psi.x_domain() {
        Domain::Position => 0u8,
        Domain::Frequency => 1u8,
    };
    w.write_all(&[tag, 0, 0, 0])?;
    for v in psi.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridWavefunction> {
    let io = |e: std::io::Error| Error::Parse(format!("binary grid: {e}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Parse("not a qwalk binary grid".into()));
    }
    let mut word = [0u8; 4];
    let mut fields = [0usize; 4];
    for f in fields.iter_mut() {
        r.read_exact(&mut word).map_err(io)?;
        *f = u32::from_le_bytes(word) as usize;
    }
    let spec = GridSpec::new(fields[0], fields[1], fields[2], fields[3])?;
    r.read_exact(&mut word).map_err(io)?;
    let domain = match word[0] {
        0 => Domain::Position,
        1 => Domain::Frequency,
        t => return Err(Error::Parse(format!("unknown domain tag {t}"))),
    };
    let mut values = Vec::with_capacity(spec.len());
    let mut buf = [0u8; 16];
    for _ in 0..spec.len() {
        r.read_exact(&mut buf).map_err(io)?;
        let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    GridWavefunction::from_values(spec, domain, values)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes CSV for `*.csv` paths and the binary format otherwise.
pub fn save(psi: &GridWavefunction, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = if is_csv(path) {
        write_csv(psi, &mut w)
    } else {
        write_binary(psi, &mut w)
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<GridWavefunction> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let r = BufReader::new(file);
    if is_csv(path) {
        read_csv(r)
    } else {
        read_binary(r)
    }
}
