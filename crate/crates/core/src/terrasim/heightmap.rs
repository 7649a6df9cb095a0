use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::LocalXY;
use crate::geostat::{GridSpec, RasterGrid};

/// Elevation nodes on a regular grid; node `(r, c)` sits at
/// `origin + (c, r) * cell_size`, row 0 southmost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heightmap {
    pub origin: LocalXY,
    pub cell_size: f64,
    pub ncols: usize,
    pub nrows: usize,
    z: Vec<f64>,
}

impl Heightmap {
    pub fn new(
        origin: LocalXY,
        cell_size: f64,
        ncols: usize,
        nrows: usize,
        z: Vec<f64>,
    ) -> Result<Self> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::InvalidInput(format!(
                "heightmap cell_size must be > 0, got {cell_size}"
            )));
        }
        if ncols < 2 || nrows < 2 {
            return Err(Error::InvalidInput(format!(
                "heightmap needs at least 2x2 nodes, got {ncols}x{nrows}"
            )));
        }
        if z.len() != ncols * nrows {
            return Err(Error::LengthMismatch {
                left: ncols * nrows,
                right: z.len(),
            });
        }
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite elevation at node {i}"
            )));
        }
        Ok(Self {
            origin,
            cell_size,
            ncols,
            nrows,
            z,
        })
    }

    pub fn elevations(&self) -> &[f64] {
        &self.z
    }

    pub fn node(&self, row: usize, col: usize) -> f64 {
        self.z[row * self.ncols + col]
    }

    /// `(x_min, y_min, x_max, y_max)` of the node lattice.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (
            self.origin.x,
            self.origin.y,
            self.origin.x + (self.ncols - 1) as f64 * self.cell_size,
            self.origin.y + (self.nrows - 1) as f64 * self.cell_size,
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            z: self.z.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }

    /// Bilinear elevation; `None` outside the lattice.
    pub fn elevation(&self, x: f64, y: f64) -> Option<f64> {
        let fx = (x - self.origin.x) / self.cell_size;
        let fy = (y - self.origin.y) / self.cell_size;
        let (cmax, rmax) = ((self.ncols - 1) as f64, (self.nrows - 1) as f64);
        if !(fx >= 0.0 && fy >= 0.0 && fx <= cmax && fy <= rmax) {
            return None;
        }
        let c = (fx.floor() as usize).min(self.ncols - 2);
        let r = (fy.floor() as usize).min(self.nrows - 2);
        let (tx, ty) = (fx - c as f64, fy - r as f64);
        let z00 = self.node(r, c);
        let z10 = self.node(r, c + 1);
        let z01 = self.node(r + 1, c);
        let z11 = self.node(r + 1, c + 1);
        // difference form: constant patches come back exactly
        let south = z00 + tx * (z10 - z00);
        let north = z01 + tx * (z11 - z01);
        Some(south + ty * (north - south))
    }

    /// Nodes become cell centres of the raster.
    pub fn to_raster(&self) -> Result<RasterGrid> {
        let spec = GridSpec {
            xll: self.origin.x - 0.5 * self.cell_size,
            yll: self.origin.y - 0.5 * self.cell_size,
            cell_size: self.cell_size,
            ncols: self.ncols,
            nrows: self.nrows,
        };
        let mut values = Vec::with_capacity(self.z.len());
        for row in (0..self.nrows).rev() {
            values.extend_from_slice(&self.z[row * self.ncols..(row + 1) * self.ncols]);
        }
        RasterGrid::new(spec, crate::geostat::raster::DEFAULT_NODATA, values, None)
    }

    pub fn from_raster(g: &RasterGrid) -> Result<Self> {
        let s = &g.spec;
        let mut z = Vec::with_capacity(g.values.len());
        for row in (0..s.nrows).rev() {
            let line = &g.values[row * s.ncols..(row + 1) * s.ncols];
            if let Some(c) = line.iter().position(|v| g.is_nodata(*v)) {
                return Err(Error::InvalidInput(format!(
                    "heightmap has nodata at row {row}, column {c}"
                )));
            }
            z.extend_from_slice(line);
        }
        Self::new(
            LocalXY::new(s.xll + 0.5 * s.cell_size, s.yll + 0.5 * s.cell_size),
            s.cell_size,
            s.ncols,
            s.nrows,
            z,
        )
    }

    pub fn write_ascii<W: Write>(&self, out: W) -> Result<()> {
        self.to_raster()?.write_ascii(out)
    }

    pub fn read_ascii<R: Read>(reader: R, source: &str) -> Result<Self> {
        Self::from_raster(&RasterGrid::read_ascii(reader, source)?)
    }
}
