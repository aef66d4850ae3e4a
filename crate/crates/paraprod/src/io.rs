//! Field container formats: a little-endian binary layout and a CSV variant.
//!
//! Binary layout: magic "PPF1", dim as u32, points per axis as u32, period as
//! f64, then len = N^dim interleaved (re, im) f64 pairs in row-major order.
//! CSV layout: a header line `dim,n,period`, then one `re,im` line per sample
//! in the same order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{GridSpec, SampledField};

const MAGIC: &[u8; 4] = b"PPF1";

pub fn write_field_binary(path: &Path, f: &SampledField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(f.grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(f.grid.points_per_axis() as u32).to_le_bytes())?;
    w.write_all(&f.grid.period().to_le_bytes())?;
    for v in &f.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_binary(path: &Path) -> Result<SampledField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a field container (bad magic)".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let period = f64::from_le_bytes(b8);
    let grid = GridSpec::new(dim, n, period)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        values.push(Complex64::new(re, im));
    }
    SampledField::new(grid, values)
}

pub fn write_field_csv(path: &Path, f: &SampledField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{},{},{:.17e}", f.grid.dim(), f.grid.points_per_axis(), f.grid.period())?;
    for v in &f.values {
        writeln!(w, "{:.17e},{:.17e}", v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_csv(path: &Path) -> Result<SampledField> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty field CSV".into()))??;
    let parts: Vec<&str> = header.trim().split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Format(format!("bad field CSV header: {header}")));
    }
    let dim: usize = parts[0].parse().map_err(|_| Error::Format("bad dim".into()))?;
    let n: usize = parts[1].parse().map_err(|_| Error::Format("bad n".into()))?;
    let period: f64 = parts[2].parse().map_err(|_| Error::Format("bad period".into()))?;
    let grid = GridSpec::new(dim, n, period)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let (re, im) = t
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("bad sample line: {t}")))?;
        values.push(Complex64::new(
            re.trim().parse().map_err(|_| Error::Format("bad re value".into()))?,
            im.trim().parse().map_err(|_| Error::Format("bad im value".into()))?,
        ));
    }
    SampledField::new(grid, values)
}

/// Dispatch on extension: `.csv` is the text layout, everything else binary.
pub fn read_field(path: &Path) -> Result<SampledField> {
    if path.extension().map(|e| e == "csv").unwrap_or(false) {
        read_field_csv(path)
    } else {
        read_field_binary(path)
    }
}

pub fn write_field(path: &Path, f: &SampledField) -> Result<()> {
    if path.extension().map(|e| e == "csv").unwrap_or(false) {
        write_field_csv(path, f)
    } else {
        write_field_binary(path, f)
    }
}
