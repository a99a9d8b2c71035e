//! Binary static-structure grid and its raster / sidecar formats.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::{CellIndex, GridSpec};

/// Row-major grid of booleans; row 0 is the southernmost row.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMap {
    grid: GridSpec,
    cells: Vec<bool>,
}

impl BinaryMap {
    pub fn empty(grid: GridSpec) -> Self {
        Self {
            cells: vec![false; grid.n_cells()],
            grid,
        }
    }

    pub fn from_cells(grid: GridSpec, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != grid.n_cells() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, cells })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, c: CellIndex) -> bool {
        self.cells[self.grid.linear(c)]
    }

    pub fn set(&mut self, c: CellIndex, value: bool) {
        let i = self.grid.linear(c);
        self.cells[i] = value;
    }

    /// True when `(x, y)` falls in a static cell. Out-of-grid is not static.
    pub fn is_static_at(&self, x: f64, y: f64) -> bool {
        self.grid.cell_of(x, y).is_some_and(|c| self.get(c))
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn iter_static(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| self.grid.unlinear(i))
    }

    pub fn ensure_same_grid(&self, other: &BinaryMap) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn zip_with(&self, other: &BinaryMap, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMap> {
        self.ensure_same_grid(other)?;
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(BinaryMap {
            grid: self.grid,
            cells,
        })
    }

    /// Binary PGM (P5), north up: the first image row is the highest grid row.
    pub fn to_pgm(&self) -> Vec<u8> {
        let g = &self.grid;
        let mut out = format!("P5\n{} {}\n255\n", g.n_cols, g.n_rows).into_bytes();
        out.reserve(g.n_cells());
        for row in (0..g.n_rows).rev() {
            for col in 0..g.n_cols {
                out.push(if self.get(CellIndex { col, row }) {
                    255
                } else {
                    0
                });
            }
        }
        out
    }

    /// Parses a P2 or P5 graymap; any nonzero value is static.
    pub fn from_pgm(bytes: &[u8], grid: GridSpec, path: &Path) -> Result<Self> {
        let mut pos = 0usize;
        let mut tokens = Vec::with_capacity(4);
        while tokens.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::parse(path, 1, "truncated PGM header"));
            }
            tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        let magic = tokens[0].as_str();
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(path, 1, format!("bad PGM header field {s:?}")))
        };
        let (w, h, maxval) = (num(&tokens[1])?, num(&tokens[2])?, num(&tokens[3])?);
        if w != grid.n_cols || h != grid.n_rows {
            return Err(Error::GridMismatch);
        }
        if maxval == 0 || maxval > 255 {
            return Err(Error::parse(path, 1, "unsupported PGM maxval"));
        }
        let values: Vec<u8> = match magic {
            "P5" => {
                let data = &bytes[(pos + 1).min(bytes.len())..];
                if data.len() < w * h {
                    return Err(Error::parse(path, 1, "truncated PGM raster"));
                }
                data[..w * h].to_vec()
            }
            "P2" => {
                let text = String::from_utf8_lossy(&bytes[pos..]);
                let vals: std::result::Result<Vec<u8>, _> = text
                    .split_ascii_whitespace()
                    .take(w * h)
                    .map(|t| t.parse::<u8>())
                    .collect();
                let vals = vals.map_err(|e| Error::parse(path, 1, e.to_string()))?;
                if vals.len() < w * h {
                    return Err(Error::parse(path, 1, "truncated PGM raster"));
                }
                vals
            }
            other => {
                return Err(Error::parse(
                    path,
                    1,
                    format!("unsupported magic {other:?}"),
                ))
            }
        };
        let mut map = BinaryMap::empty(grid);
        for (i, v) in values.iter().enumerate() {
            let img_row = i / w;
            let col = i % w;
            map.set(
                CellIndex {
                    col,
                    row: h - 1 - img_row,
                },
                *v != 0,
            );
        }
        Ok(map)
    }

    /// Static region as a MultiPolygon of per-row cell runs.
    pub fn boundary_geojson(&self) -> serde_json::Value {
        let g = &self.grid;
        let mut polys = Vec::new();
        for row in 0..g.n_rows {
            let mut col = 0;
            while col < g.n_cols {
                if !self.get(CellIndex { col, row }) {
                    col += 1;
                    continue;
                }
                let start = col;
                while col < g.n_cols && self.get(CellIndex { col, row }) {
                    col += 1;
                }
                let x0 = g.origin_x + start as f64 * g.cell_size;
                let x1 = g.origin_x + col as f64 * g.cell_size;
                let y0 = g.origin_y + row as f64 * g.cell_size;
                let y1 = y0 + g.cell_size;
                polys.push(json!([[[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]]));
            }
        }
        json!({
            "type": "FeatureCollection",
            "features": [{
                "type": "Feature",
                "properties": {"kind": "static_structure"},
                "geometry": {"type": "MultiPolygon", "coordinates": polys}
            }]
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub inputs: Vec<String>,
}

/// Sidecar document written next to a map raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub grid: GridSpec,
    pub provenance: Provenance,
}

pub fn write_map(map: &BinaryMap, raster: &Path, meta: &MapMetadata) -> Result<()> {
    fs::write(raster, map.to_pgm()).map_err(|e| Error::io(raster, e))?;
    let sidecar = raster.with_extension("json");
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes") + "\n";
    fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))
}

/// Reads a raster plus its `.json` sidecar.
pub fn read_map(raster: &Path) -> Result<(BinaryMap, MapMetadata)> {
    let sidecar = raster.with_extension("json");
    let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let meta: MapMetadata =
        serde_json::from_str(&text).map_err(|e| Error::parse(&sidecar, e.line(), e.to_string()))?;
    meta.grid.validate()?;
    let bytes = fs::read(raster).map_err(|e| Error::io(raster, e))?;
    let map = BinaryMap::from_pgm(&bytes, meta.grid, raster)?;
    Ok((map, meta))
}
