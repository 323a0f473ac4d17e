use std::io::Write;

use nalgebra::DVector;

use super::{Method, Trajectory};
use crate::error::{Error, Result};
use crate::invariants::{block_radii, q_invariants};

/// Optional derived columns appended after the state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CsvColumns {
    /// `rho1..rhon`
    pub radii: bool,
    /// `Q2,Q3` with these coefficients; dimension 4 only.
    pub q_coefficients: Option<[f64; 3]>,
}

fn header(dim: usize, cols: &CsvColumns) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=dim).map(|i| format!("x{i}")));
    if cols.radii {
        h.extend((1..=dim / 4).map(|k| format!("rho{k}")));
    }
    if cols.q_coefficients.is_some() {
        h.push("Q2".into());
        h.push("Q3".into());
    }
    h
}

/// Writes `t,x1..x{4n}[,rho1..rhon,Q2,Q3]` with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(out: &mut W, traj: &Trajectory, cols: &CsvColumns) -> Result<()> {
    let dim = traj.dim();
    if cols.q_coefficients.is_some() && dim != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: dim,
        });
    }
    writeln!(out, "{}", header(dim, cols).join(","))?;
    let mut row: Vec<f64> = Vec::new();
    for (t, x) in traj.times().iter().zip(traj.states()) {
        row.clear();
        row.push(*t);
        row.extend(x.iter());
        if cols.radii {
            row.extend(block_radii(x.as_slice()));
        }
        if let Some(c) = cols.q_coefficients {
            let (q2, q3) = q_invariants(x.as_slice(), &c);
            row.push(q2);
            row.push(q3);
        }
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// A parsed trajectory table.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    /// Number of state columns `x1..xd` following `t`.
    pub fn state_dim(&self) -> usize {
        self.header
            .iter()
            .skip(1)
            .take_while(|h| h.starts_with('x'))
            .count()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_trajectory(&self, method: Method, step: Option<f64>) -> Result<Trajectory> {
        let dim = self.state_dim();
        let times = self.rows.iter().map(|r| r[0]).collect();
        let states = self
            .rows
            .iter()
            .map(|r| DVector::from_column_slice(&r[1..=dim]))
            .collect();
        Trajectory::new(times, states, method, step)
    }
}

/// Parses CSV produced by [`write_trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory csv".into()))?
        .split(',')
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 2 || header[0] != "t" || header[1] != "x1" {
        return Err(Error::InvalidArgument(
            "csv header must start with `t,x1`".into(),
        ));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidArgument(format!("csv row {}: {e}", n + 1)))?;
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: header.len(),
                found: row.len(),
            });
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}
