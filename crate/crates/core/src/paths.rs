//! Simulated coordinate trajectories and their on-disk formats.
//!
//! CSV: header `t,z_1,...,z_N`, one row per grid point, RFC-4180, `.` decimal
//! separator. Values are written in shortest round-trip form (exponent notation for very
//! large or small magnitudes) so reading a file
//! back reproduces every `f64` exactly.
//!
//! Binary (all integers and floats little-endian):
//!
//! | offset | size        | content                          |
//! |--------|-------------|----------------------------------|
//! | 0      | 8           | magic `b"SMCEPATH"`              |
//! | 8      | 4           | `u32` format version (= 1)       |
//! | 12     | 1           | `u8` stationary flag (0 or 1)    |
//! | 13     | 3           | zero padding                     |
//! | 16     | 8           | `u64` number of coordinates `N`  |
//! | 24     | 8           | `u64` number of grid points `M`  |
//! | 32     | 8 M         | `f64` grid                       |
//! | 32+8M  | 8 N M       | `f64` values, row-major by coordinate |

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::SpectralModel;

pub const BINARY_MAGIC: &[u8; 8] = b"SMCEPATH";
pub const BINARY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatePaths {
    grid: Vec<f64>,
    values: Vec<f64>,
    n_coords: usize,
    model: Arc<SpectralModel>,
    stationary: bool,
}

impl CoordinatePaths {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        n_coords: usize,
        model: Arc<SpectralModel>,
        stationary: bool,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::invalid("path grid must contain at least one time point"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("path grid must be strictly increasing"));
        }
        if values.len() != n_coords * grid.len() {
            return Err(Error::invalid(format!(
                "path matrix has {} values, expected {n_coords} x {}",
                values.len(),
                grid.len()
            )));
        }
        if n_coords > model.len() {
            return Err(Error::invalid(format!(
                "paths hold {n_coords} coordinates but the model has only {}",
                model.len()
            )));
        }
        Ok(CoordinatePaths {
            grid,
            values,
            n_coords,
            model,
            stationary,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn n_coords(&self) -> usize {
        self.n_coords
    }
    pub fn n_times(&self) -> usize {
        self.grid.len()
    }
    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }
    pub fn is_stationary(&self) -> bool {
        self.stationary
    }
    /// Row-major `N x M` matrix.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trajectory of the zero-based coordinate `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.grid.len();
        &self.values[k * m..(k + 1) * m]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        let m = self.grid.len();
        &mut self.values[k * m..(k + 1) * m]
    }

    /// Index of the grid point equal to `t` (within `1e-9` relative).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.grid.iter().position(|g| (g - t).abs() <= tol)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.n_coords).map(|k| format!("z_{k}")));
        w.write_record(&header)?;
        for (i, t) in self.grid.iter().enumerate() {
            let mut rec = Vec::with_capacity(self.n_coords + 1);
            rec.push(format!("{t:?}"));
            rec.extend((0..self.n_coords).map(|k| format!("{:?}", self.row(k)[i])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout back; the model and stationarity flag are not part
    /// of the file and must be supplied.
    pub fn read_csv<R: Read>(reader: R, model: Arc<SpectralModel>, stationary: bool) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("t") {
            return Err(Error::invalid("path CSV must start with a `t` column"));
        }
        for (k, name) in header.iter().skip(1).enumerate() {
            if name != format!("z_{}", k + 1) {
                return Err(Error::invalid(format!("unexpected path CSV column `{name}`")));
            }
        }
        let n_coords = header.len() - 1;
        let mut grid = Vec::new();
        let mut columns = vec![Vec::new(); n_coords];
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != n_coords + 1 {
                return Err(Error::invalid("ragged path CSV row"));
            }
            grid.push(parse_f64(&rec[0])?);
            for k in 0..n_coords {
                columns[k].push(parse_f64(&rec[k + 1])?);
            }
        }
        let values = columns.concat();
        CoordinatePaths::new(grid, values, n_coords, model, stationary)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        w.write_all(&[u8::from(self.stationary), 0, 0, 0])?;
        w.write_all(&(self.n_coords as u64).to_le_bytes())?;
        w.write_all(&(self.grid.len() as u64).to_le_bytes())?;
        for x in self.grid.iter().chain(self.values.iter()) {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, model: Arc<SpectralModel>) -> Result<Self> {
        let mut head = [0u8; 32];
        r.read_exact(&mut head)?;
        if &head[0..8] != BINARY_MAGIC {
            return Err(Error::invalid("not a binary path dump (bad magic)"));
        }
        let version = u32::from_le_bytes(head[8..12].try_into().unwrap());
        if version != BINARY_VERSION {
            return Err(Error::invalid(format!("unsupported binary path version {version}")));
        }
        let stationary = match head[12] {
            0 => false,
            1 => true,
            b => return Err(Error::invalid(format!("bad stationary flag {b}"))),
        };
        let n_coords = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
        let n_times = u64::from_le_bytes(head[24..32].try_into().unwrap()) as usize;
        let mut read_f64s = |count: usize| -> Result<Vec<f64>> {
            let mut buf = vec![0u8; count.checked_mul(8).ok_or_else(|| Error::invalid("binary dims overflow"))?];
            r.read_exact(&mut buf)?;
            Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
        };
        let grid = read_f64s(n_times)?;
        let values = read_f64s(n_coords * n_times)?;
        CoordinatePaths::new(grid, values, n_coords, model, stationary)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("cannot parse `{s}` as a number")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CoordinatePaths {
        let model = Arc::new(SpectralModel::heat(1.0, 0.5, 1, 3).unwrap());
        let grid = vec![0.0, 0.5, 1.0];
        let values = vec![0.1, -0.2, 1.0 / 3.0, 4e-300, 5.5, -6.0];
        CoordinatePaths::new(grid, values, 2, model, true).unwrap()
    }

    #[test]
    fn csv_header_and_round_trip() {
        let p = sample();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,z_1,z_2\n0.0,0.1,4e-300\n"));
        let back = CoordinatePaths::read_csv(&buf[..], p.model().clone(), true).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let p = sample();
        let mut buf = Vec::new();
        p.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 8 * 3 + 8 * 6);
        assert_eq!(&buf[..8], b"SMCEPATH");
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 2);
        let back = CoordinatePaths::read_binary(&buf[..], p.model().clone()).unwrap();
        assert_eq!(back, p);
        buf[0] = b'X';
        assert!(CoordinatePaths::read_binary(&buf[..], p.model().clone()).is_err());
    }

    #[test]
    fn shape_invariants() {
        let model = Arc::new(SpectralModel::heat(1.0, 0.5, 1, 3).unwrap());
        assert!(CoordinatePaths::new(vec![0.0, 0.0], vec![0.0; 2], 1, model.clone(), true).is_err());
        assert!(CoordinatePaths::new(vec![0.0, 1.0], vec![0.0; 3], 1, model.clone(), true).is_err());
        assert!(CoordinatePaths::new(vec![0.0], vec![0.0; 4], 4, model, true).is_err());
    }
}
