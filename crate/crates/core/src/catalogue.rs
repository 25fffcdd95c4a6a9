//! Append-only JSON-lines catalogue of classified orbits.
//!
//! Floats are written with 17 significant digits so every record reads back
//! bit for bit.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::cr3bp::{Involution, SystemConfig};
use crate::error::{Error, Result};
use crate::families::{OrbitRecord, PointData};
use crate::floer::cz_parity;
use crate::symplectic::{git_point_from_multipliers, GitPoint, Region};

pub const SCHEMA_VERSION: u32 = 1;

/// Compact JSON with floats as `d.dddddddddddddddde±x`.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactFormatter;

impl ExactFormatter {
    fn write_float<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }
}

impl Formatter for ExactFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        self.write_float(w, v)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_float(w, v as f64)
    }
}

/// Serializes `value` on one line with [`ExactFormatter`].
pub fn to_json_exact<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFormatter);
    value.serialize(&mut ser)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogueRecord {
    pub schema_version: u32,
    pub system: String,
    pub mu: f64,
    pub jacobi: f64,
    pub period: f64,
    /// Position–velocity initial state.
    pub state: [f64; 6],
    pub involution: Involution,
    pub symmetry: Vec<Involution>,
    pub multipliers: Vec<[f64; 2]>,
    pub p: GitPoint,
    pub region: Region,
    pub points: Vec<PointData>,
    /// Contribution of the simple orbit to `χ_SFT`, absent for degenerate types.
    pub chi_sft: Option<i64>,
    pub timestamp: String,
}

impl CatalogueRecord {
    pub fn new(record: &OrbitRecord, cfg: &SystemConfig, involution: Involution, timestamp: &str) -> Self {
        let o = &record.orbit;
        CatalogueRecord {
            schema_version: SCHEMA_VERSION,
            system: cfg.name.clone(),
            mu: cfg.mu,
            jacobi: o.jacobi,
            period: o.period,
            state: o.initial_state.velocity_form(),
            involution,
            symmetry: o.symmetry.clone(),
            multipliers: record.multipliers.clone(),
            p: record.p,
            region: record.region,
            points: record.points.clone(),
            chi_sft: cz_parity(record.region).ok().map(|p| p.sign()),
            timestamp: timestamp.to_string(),
        }
    }

    /// `p` recomputed from the stored multipliers.
    pub fn rederive_p(&self) -> Result<GitPoint> {
        let m: Vec<_> = self
            .multipliers
            .iter()
            .map(|z| num_complex::Complex64::new(z[0], z[1]))
            .collect();
        git_point_from_multipliers(&m)
    }

    pub fn to_line(&self) -> Result<String> {
        to_json_exact(self)
    }

    /// Everything but the timestamp, used to recognise repeated records.
    fn identity(&self) -> Result<String> {
        let mut c = self.clone();
        c.timestamp.clear();
        to_json_exact(&c)
    }
}

pub fn read_catalogue(path: &Path) -> Result<Vec<CatalogueRecord>> {
    let f = File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Appends the records not already present (ignoring timestamps) and returns
/// how many were written. Existing lines are never rewritten.
pub fn append_records(path: &Path, records: &[CatalogueRecord]) -> Result<usize> {
    let mut seen = HashSet::new();
    if path.exists() {
        for r in read_catalogue(path)? {
            seen.insert(r.identity()?);
        }
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut written = 0;
    for r in records {
        if seen.insert(r.identity()?) {
            writeln!(f, "{}", r.to_line()?)?;
            written += 1;
        }
    }
    f.flush()?;
    Ok(written)
}
