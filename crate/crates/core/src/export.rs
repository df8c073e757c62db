//! Field-map writers.
//!
//! CSV: header `x,y,value`, one row per pixel in row-major order (`y` outer,
//! `x` inner), every number printed with 17 significant digits so that values
//! parse back bit-identically.
//!
//! PGM: binary `P5` with maxval 65535 (big-endian samples), values min-max
//! scaled per file. A constant map scales to all zeros. The first image row is
//! the largest `y`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::imaging::FieldMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Pgm,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Pgm => "pgm",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "pgm" => Ok(ExportFormat::Pgm),
            _ => Err(Error::invalid(format!("unknown export format `{s}`"))),
        }
    }
}

pub fn write_csv<W: Write>(map: &FieldMap, mut out: W) -> io::Result<()> {
    writeln!(out, "x,y,value")?;
    for (i, v) in map.values.iter().enumerate() {
        let z = map.grid.point(i);
        writeln!(out, "{:.16e},{:.16e},{:.16e}", z.x, z.y, v)?;
    }
    out.flush()
}

/// 16-bit samples after min-max scaling, top row first.
pub fn pgm_samples(map: &FieldMap) -> Vec<u16> {
    let (lo, hi) = (map.min(), map.max());
    let span = hi - lo;
    let g = &map.grid;
    let mut samples = Vec::with_capacity(g.len());
    for iy in (0..g.ny).rev() {
        for ix in 0..g.nx {
            let v = map.get(ix, iy);
            let s = if span > 0.0 && span.is_finite() {
                ((v - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            samples.push(s);
        }
    }
    samples
}

pub fn write_pgm<W: Write>(map: &FieldMap, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n65535\n", map.grid.nx, map.grid.ny)?;
    let bytes: Vec<u8> = pgm_samples(map).into_iter().flat_map(u16::to_be_bytes).collect();
    out.write_all(&bytes)?;
    out.flush()
}

pub fn export_map(map: &FieldMap, path: &Path, format: ExportFormat) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let out = BufWriter::new(file);
    match format {
        ExportFormat::Csv => write_csv(map, out),
        ExportFormat::Pgm => write_pgm(map, out),
    }
    .map_err(io_err)
}

/// Parse a CSV produced by [`write_csv`] into `(x, y, value)` rows.
pub fn parse_csv(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("x,y,value") => {}
        other => {
            return Err(Error::invalid(format!("unexpected csv header {other:?}")));
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let mut row = [0.0; 3];
            let mut fields = line.split(',');
            for slot in &mut row {
                let field = fields
                    .next()
                    .ok_or_else(|| Error::invalid(format!("row {}: missing field", i + 1)))?;
                *slot = field
                    .parse()
                    .map_err(|e| Error::invalid(format!("row {}: {e}", i + 1)))?;
            }
            if fields.next().is_some() {
                return Err(Error::invalid(format!("row {}: extra field", i + 1)));
            }
            Ok(row)
        })
        .collect()
}
