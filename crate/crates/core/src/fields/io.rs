//! Plain-text and binary serialization for profiles and fields.
//!
//! Profiles: CSV with header `rho,re,im`. Fields: a short text header
//! (`BSFIELD 1`, `dim`, `half_extent`, `points`, `end`, one per line)
//! followed by little-endian f64 pairs (re, im) in row-major node order.

use num_complex::Complex64;
use std::io::{BufRead, Read, Write};

use super::grid::{CartesianGrid, Field};
use super::profile::{GridSpec1D, RadialProfile};
use crate::error::{Error, Result};

pub fn write_profile_csv<W: Write>(p: &RadialProfile, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rho", "re", "im"])?;
    for (rho, z) in p.grid().nodes().iter().zip(p.values()) {
        out.write_record([rho.to_string(), z.re.to_string(), z.im.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_profile_csv<R: Read>(r: R) -> Result<RadialProfile> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    if cols != ["rho", "re", "im"] {
        return Err(Error::Parse(format!("expected columns rho,re,im; got {cols:?}")));
    }
    let mut rho = Vec::new();
    let mut vals = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {:?}: {e}", rec.position().map(|p| p.line()))))
        };
        rho.push(num(0)?);
        vals.push(Complex64::new(num(1)?, num(2)?));
    }
    RadialProfile::sampled(GridSpec1D::irregular(rho)?, vals, None)
}

pub fn write_field<W: Write>(f: &Field, mut w: W) -> Result<()> {
    let g = f.grid();
    write!(
        w,
        "BSFIELD 1\ndim {}\nhalf_extent {}\npoints {}\nend\n",
        g.dim(),
        g.half_extent(),
        g.points_per_axis()
    )?;
    let mut buf = Vec::with_capacity(16 * f.samples().len());
    for z in f.samples() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: BufRead>(mut r: R) -> Result<Field> {
    let mut line = String::new();
    let mut next = |r: &mut R| -> Result<String> {
        line.clear();
        r.read_line(&mut line)?;
        Ok(line.trim().to_string())
    };
    if next(&mut r)? != "BSFIELD 1" {
        return Err(Error::Parse("missing BSFIELD header".into()));
    }
    let mut value = |r: &mut R, key: &str| -> Result<String> {
        let l = next(r)?;
        l.strip_prefix(key)
            .map(|v| v.trim().to_string())
            .ok_or_else(|| Error::Parse(format!("expected `{key}`, got `{l}`")))
    };
    let parse_err = |e: std::num::ParseIntError| Error::Parse(e.to_string());
    let dim: usize = value(&mut r, "dim")?.parse().map_err(parse_err)?;
    let half_extent: f64 = value(&mut r, "half_extent")?
        .parse()
        .map_err(|e: std::num::ParseFloatError| Error::Parse(e.to_string()))?;
    let points: usize = value(&mut r, "points")?.parse().map_err(parse_err)?;
    if next(&mut r)? != "end" {
        return Err(Error::Parse("missing header terminator".into()));
    }
    let grid = CartesianGrid::new(dim, half_extent, points)?;
    let mut bytes = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut bytes)?;
    let samples = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Field::new(grid, samples)
}
