//! Debug dump: row-major CSV of cell costs plus a JSON header sidecar.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;

use super::{Costmap, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostmapHeader {
    pub origin: Vec2,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
}

impl From<&GridSpec> for CostmapHeader {
    fn from(g: &GridSpec) -> Self {
        Self {
            origin: g.origin,
            resolution: g.resolution,
            width: g.width,
            height: g.height,
        }
    }
}

impl From<&CostmapHeader> for GridSpec {
    fn from(h: &CostmapHeader) -> Self {
        GridSpec::new(h.origin, h.resolution, h.width, h.height)
    }
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
}

impl Costmap {
    pub fn header(&self) -> CostmapHeader {
        CostmapHeader::from(self.spec())
    }

    /// One CSV line per grid row, starting at `y = 0`.
    pub fn to_csv(&self) -> String {
        let w = self.spec().width;
        let mut out = String::with_capacity(self.cells().len() * 4);
        for row in self.cells().chunks(w) {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{c}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn parse_csv(header: &CostmapHeader, csv: &str) -> Result<Costmap, DumpError> {
    let spec = GridSpec::from(header);
    let mut cells = Vec::with_capacity(spec.len());
    let mut rows = 0;
    for (row, line) in csv.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let before = cells.len();
        for field in line.split(',') {
            let v: u8 = field.trim().parse().map_err(|e| DumpError::Malformed {
                row,
                message: format!("`{field}`: {e}"),
            })?;
            cells.push(v);
        }
        if cells.len() - before != spec.width {
            return Err(DumpError::Malformed {
                row,
                message: format!("expected {} columns, found {}", spec.width, cells.len() - before),
            });
        }
        rows += 1;
    }
    if rows != spec.height {
        return Err(DumpError::RowCount {
            expected: spec.height,
            found: rows,
        });
    }
    Ok(Costmap::new(spec, cells))
}
