//! CSV and binary serialization of fields, trajectories and tables.
//!
//! Field CSV: header `k,re,im`, one row per wavenumber for
//! `k = -M/2, ..., M/2 - 1`. Field binary: the bytes `BBM1`, `M` as a
//! little-endian `u64`, `L` as a little-endian `f64`, then `M` pairs
//! `(re, im)` of little-endian `f64` in the same `k` order. Every CSV may end
//! with a `# config-hash=<hex>` line; readers skip `#` lines.

use std::io::{BufRead, Read, Write};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::{i_h1_norm, Complex64, Grid, ImethodParams, SpectralField};

pub const BINARY_MAGIC: &[u8; 4] = b"BBM1";
pub const FIELD_HEADER: [&str; 3] = ["k", "re", "im"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "l2_norm", "h_ell_norm", "h1_I_norm"];

/// Shortest round-trip scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

/// Writes a header, rows of matching width and an optional hash trailer.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> Result<Self> {
        if header.is_empty() {
            return Err(Error::Format("CSV header is empty".into()));
        }
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            columns: header.len(),
        })
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) -> Result<()> {
        if cells.len() != self.columns {
            return Err(Error::Format(format!(
                "row has {} cells, header has {}",
                cells.len(),
                self.columns
            )));
        }
        let line: Vec<&str> = cells.iter().map(|c| c.as_ref()).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self, config_hash: Option<&str>) -> Result<W> {
        if let Some(hash) = config_hash {
            writeln!(self.out, "# config-hash={hash}")?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

fn k_range(grid: &Grid) -> std::ops::Range<i64> {
    let half = (grid.len() / 2) as i64;
    -half..half
}

pub fn write_field_csv<W: Write>(out: W, field: &SpectralField, config_hash: Option<&str>) -> Result<W> {
    let mut csv = CsvWriter::new(out, &FIELD_HEADER)?;
    for k in k_range(field.grid()) {
        let c = field.coeff(k);
        csv.row(&[k.to_string(), fmt_f64(c.re), fmt_f64(c.im)])?;
    }
    csv.finish(config_hash)
}

fn parse_f64(cell: &str, line: usize) -> Result<f64> {
    cell.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: `{cell}` is not a number")))
}

/// Reads a field CSV onto `grid`. Every wavenumber must appear exactly once.
pub fn read_field_csv<R: BufRead>(input: R, grid: &Grid) -> Result<SpectralField> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    let mut header_seen = false;
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if cols != FIELD_HEADER {
                return Err(Error::Format(format!("expected header k,re,im, got `{trimmed}`")));
            }
            header_seen = true;
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::Format(format!("line {}: expected 3 cells", n + 1)));
        }
        let k: i64 = cells[0]
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad wavenumber `{}`", n + 1, cells[0])))?;
        let idx = grid
            .index_of(k)
            .ok_or_else(|| Error::Format(format!("line {}: wavenumber {k} outside the grid", n + 1)))?;
        if seen[idx] {
            return Err(Error::Format(format!("line {}: wavenumber {k} repeated", n + 1)));
        }
        seen[idx] = true;
        coeffs[idx] = Complex64::new(parse_f64(cells[1], n + 1)?, parse_f64(cells[2], n + 1)?);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Format(format!("wavenumber {} missing", grid.k(missing))));
    }
    SpectralField::from_coeffs(grid, coeffs)
}

pub fn write_field_binary<W: Write>(mut out: W, field: &SpectralField) -> Result<()> {
    let grid = field.grid();
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(grid.len() as u64).to_le_bytes())?;
    out.write_all(&grid.half_length().to_le_bytes())?;
    for k in k_range(grid) {
        let c = field.coeff(k);
        out.write_all(&c.re.to_le_bytes())?;
        out.write_all(&c.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_field_binary<R: Read>(mut input: R) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    let m = usize::try_from(u64::from_le_bytes(buf)).map_err(|_| Error::Format("grid size overflows".into()))?;
    let half_length = read_f64(&mut input)?;
    let grid = Grid::new(m, half_length)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
    for k in k_range(&grid) {
        let re = read_f64(&mut input)?;
        let im = read_f64(&mut input)?;
        coeffs[grid.index_of(k).expect("k in range")] = Complex64::new(re, im);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after coefficients".into()));
    }
    SpectralField::from_coeffs(&grid, coeffs)
}

/// One row per stored snapshot: `t, ||u||, ||u||_{H^ell}, ||I_N u||_{H^1}`.
pub fn write_trajectory_csv<W: Write>(
    out: W,
    traj: &Trajectory,
    params: &ImethodParams,
    config_hash: Option<&str>,
) -> Result<W> {
    let mut csv = CsvWriter::new(out, &TRAJECTORY_HEADER)?;
    for (i, u) in traj.snapshots().iter().enumerate() {
        csv.row(&[
            fmt_f64(traj.time(i)),
            fmt_f64(u.l2_norm()),
            fmt_f64(u.sobolev_norm(params.ell())),
            fmt_f64(i_h1_norm(u, params)),
        ])?;
    }
    csv.finish(config_hash)
}
