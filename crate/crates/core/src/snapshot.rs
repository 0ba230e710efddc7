//! Field snapshots: a short text header followed by raw little-endian `f64`
//! samples in row-major order, plus CSV export for small grids.
//!
//! ```text
//! tphase-snapshot 1
//! field phi
//! grid 128 128
//! domain 1.0000000000000000e0 1.0000000000000000e0
//! time 1.0000000000000000e-3
//! end
//! <nx * ny little-endian f64>
//! ```

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::grid::{Grid2D, ScalarField};

const MAGIC: &str = "tphase-snapshot 1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad snapshot header: {0}")]
    Header(String),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub name: String,
    pub time: f64,
    pub field: ScalarField<f64>,
}

pub fn write_snapshot(out: &mut impl Write, name: &str, time: f64, field: &ScalarField<f64>) -> io::Result<()> {
    let g = field.grid();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "field {name}")?;
    writeln!(out, "grid {} {}", g.nx(), g.ny())?;
    writeln!(out, "domain {:.16e} {:.16e}", g.lx(), g.ly())?;
    writeln!(out, "time {time:.16e}")?;
    writeln!(out, "end")?;
    let mut bytes = Vec::with_capacity(8 * field.data().len());
    for v in field.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&bytes)
}

pub fn read_snapshot(input: &mut impl BufRead) -> Result<Snapshot, SnapshotError> {
    let mut line = String::new();
    let mut next = |expect: &str| -> Result<Vec<String>, SnapshotError> {
        line.clear();
        input.read_line(&mut line)?;
        let words: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if words.first().map(String::as_str) != Some(expect) {
            return Err(SnapshotError::Header(format!("expected '{expect}', got '{}'", line.trim())));
        }
        Ok(words[1..].to_vec())
    };
    let magic = next("tphase-snapshot")?;
    if magic != ["1"] {
        return Err(SnapshotError::Header(format!("unsupported version {magic:?}")));
    }
    let name = next("field")?.join(" ");
    let num = |w: &[String], k: usize| -> Result<f64, SnapshotError> {
        w.get(k)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| SnapshotError::Header(format!("missing number in {w:?}")))
    };
    let dims = next("grid")?;
    let (nx, ny) = (num(&dims, 0)? as usize, num(&dims, 1)? as usize);
    let dom = next("domain")?;
    let (lx, ly) = (num(&dom, 0)?, num(&dom, 1)?);
    let time = num(&next("time")?, 0)?;
    next("end")?;
    let grid = Grid2D::new(nx, ny, lx, ly)?;
    let mut bytes = vec![0u8; 8 * grid.len()];
    input.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(Snapshot {
        name,
        time,
        field: ScalarField::from_vec(grid, data)?,
    })
}

/// `x,y,value` rows with a header line.
pub fn write_csv(out: &mut impl Write, field: &ScalarField<f64>) -> io::Result<()> {
    let g = field.grid();
    writeln!(out, "x,y,value")?;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", g.x(i), g.y(j), field.at(i, j))?;
        }
    }
    Ok(())
}
