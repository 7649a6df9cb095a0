//! Cell grids and their ESRI ASCII grid encoding.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{Hemisphere, UtmCoord};
use crate::stats::{pearson, SummaryStats};

pub const DEFAULT_NODATA: f64 = -9999.0;

/// UTM zone a raster's planar coordinates live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtmZone {
    pub zone: u8,
    pub hemisphere: Hemisphere,
}

/// Cell geometry without values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Lower-left corner of the lower-left cell.
    pub xll: f64,
    pub yll: f64,
    pub cell_size: f64,
    pub ncols: usize,
    pub nrows: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0) || !self.cell_size.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cell size must be > 0, got {}",
                self.cell_size
            )));
        }
        if self.ncols == 0 || self.nrows == 0 {
            return Err(Error::InvalidInput("grid has no cells".into()));
        }
        if !self.xll.is_finite() || !self.yll.is_finite() {
            return Err(Error::InvalidInput("non-finite grid origin".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Centre of the cell at `row` (0 = northernmost) and `col`.
    #[inline]
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.xll + (col as f64 + 0.5) * self.cell_size,
            self.yll + ((self.nrows - row) as f64 - 0.5) * self.cell_size,
        )
    }

    /// Row-major index of the cell containing `(x, y)`.
    pub fn index_of(&self, x: f64, y: f64) -> Option<usize> {
        let c = ((x - self.xll) / self.cell_size).floor();
        let r_from_bottom = ((y - self.yll) / self.cell_size).floor();
        if c < 0.0 || r_from_bottom < 0.0 {
            return None;
        }
        let (c, rb) = (c as usize, r_from_bottom as usize);
        if c >= self.ncols || rb >= self.nrows {
            return None;
        }
        Some((self.nrows - 1 - rb) * self.ncols + c)
    }

    fn same_geometry(&self, other: &GridSpec) -> bool {
        let tol = 1e-9 * self.cell_size.max(1.0);
        self.ncols == other.ncols
            && self.nrows == other.nrows
            && (self.cell_size - other.cell_size).abs() <= 1e-12 * self.cell_size
            && (self.xll - other.xll).abs() <= tol * self.xll.abs().max(1.0)
            && (self.yll - other.yll).abs() <= tol * self.yll.abs().max(1.0)
    }
}

/// Row-major grid of cell values; row 0 is the northern edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterGrid {
    pub spec: GridSpec,
    pub nodata: f64,
    pub values: Vec<f64>,
    pub zone: Option<UtmZone>,
}

impl RasterGrid {
    pub fn new(
        spec: GridSpec,
        nodata: f64,
        values: Vec<f64>,
        zone: Option<UtmZone>,
    ) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::LengthMismatch {
                left: spec.len(),
                right: values.len(),
            });
        }
        Ok(Self {
            spec,
            nodata,
            values,
            zone,
        })
    }

    pub fn filled(spec: GridSpec, value: f64) -> Result<Self> {
        Self::new(spec, DEFAULT_NODATA, vec![value; spec.len()], None)
    }

    pub fn is_nodata(&self, v: f64) -> bool {
        v.is_nan() || v == self.nodata
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.spec.ncols + col]
    }

    /// Lower-left corner as a UTM coordinate, when the zone is known.
    pub fn origin(&self) -> Option<UtmCoord> {
        self.zone.map(|z| UtmCoord {
            zone: z.zone,
            hemisphere: z.hemisphere,
            easting: self.spec.xll,
            northing: self.spec.yll,
        })
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|v| !self.is_nodata(*v))
    }

    /// Statistics over cells with data.
    pub fn summary(&self) -> Option<MapStats> {
        let vals: Vec<f64> = self.valid_values().collect();
        if vals.is_empty() {
            return None;
        }
        let mean = crate::stats::mean(&vals);
        Some(MapStats {
            stats: SummaryStats {
                mean,
                sigma: crate::stats::sample_sigma(&vals).unwrap_or(0.0),
                n: vals.len(),
            },
            min: vals.iter().copied().fold(f64::INFINITY, f64::min),
            max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    pub fn write_ascii<W: Write>(&self, mut out: W) -> Result<()> {
        let s = &self.spec;
        writeln!(out, "ncols {}", s.ncols)?;
        writeln!(out, "nrows {}", s.nrows)?;
        writeln!(out, "xllcorner {}", s.xll)?;
        writeln!(out, "yllcorner {}", s.yll)?;
        writeln!(out, "cellsize {}", s.cell_size)?;
        writeln!(out, "NODATA_value {}", self.nodata)?;
        let mut line = String::new();
        for row in self.values.chunks(s.ncols) {
            line.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                let v = if v.is_nan() { self.nodata } else { *v };
                line.push_str(&v.to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Parse an ESRI ASCII grid. `xllcenter`/`yllcenter` headers are
    /// converted to corners.
    pub fn read_ascii<R: Read>(reader: R, source: &str) -> Result<Self> {
        let err = |line: u64, msg: String| Error::Parse {
            source_name: source.to_string(),
            line,
            message: msg,
        };
        let mut lines = BufReader::new(reader).lines();
        let mut header = std::collections::HashMap::new();
        let mut lineno = 0u64;
        let mut first_data: Option<String> = None;
        for line in lines.by_ref() {
            let line = line?;
            lineno += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let key = parts.next().unwrap().to_ascii_lowercase();
            if key.starts_with(|c: char| c.is_ascii_alphabetic()) {
                let val = parts
                    .next()
                    .ok_or_else(|| err(lineno, format!("header `{key}` has no value")))?;
                let v: f64 = val
                    .parse()
                    .map_err(|_| err(lineno, format!("header `{key}`: bad number `{val}`")))?;
                header.insert(key, v);
            } else {
                first_data = Some(line);
                break;
            }
        }
        let need = |k: &str| {
            header.get(k).copied().ok_or_else(|| Error::MissingColumn {
                source_name: source.to_string(),
                column: k.to_string(),
            })
        };
        let ncols = need("ncols")? as usize;
        let nrows = need("nrows")? as usize;
        let cell_size = need("cellsize")?;
        let xll = match header.get("xllcorner") {
            Some(v) => *v,
            None => need("xllcenter")? - 0.5 * cell_size,
        };
        let yll = match header.get("yllcorner") {
            Some(v) => *v,
            None => need("yllcenter")? - 0.5 * cell_size,
        };
        let nodata = header
            .get("nodata_value")
            .copied()
            .unwrap_or(DEFAULT_NODATA);
        let spec = GridSpec {
            xll,
            yll,
            cell_size,
            ncols,
            nrows,
        };
        spec.validate()?;

        let mut values = Vec::with_capacity(spec.len());
        let data_start = lineno;
        let mut push_line = |text: &str, ln: u64| -> Result<()> {
            for tok in text.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| err(ln, format!("bad cell value `{tok}`")))?;
                values.push(v);
            }
            Ok(())
        };
        if let Some(l) = first_data {
            push_line(&l, data_start)?;
        }
        for line in lines {
            lineno += 1;
            push_line(&line?, lineno)?;
        }
        if values.len() != spec.len() {
            return Err(err(
                lineno,
                format!(
                    "expected {} cell values, found {}",
                    spec.len(),
                    values.len()
                ),
            ));
        }
        RasterGrid::new(spec, nodata, values, None)
    }

    /// Projection sidecar: plain `key value` lines.
    pub fn write_prj<W: Write>(&self, mut out: W) -> Result<()> {
        match self.zone {
            Some(z) => {
                writeln!(out, "PROJECTION UTM")?;
                writeln!(out, "ZONE {}", z.zone)?;
                writeln!(
                    out,
                    "HEMISPHERE {}",
                    match z.hemisphere {
                        Hemisphere::North => "NORTH",
                        Hemisphere::South => "SOUTH",
                    }
                )?;
            }
            None => writeln!(out, "PROJECTION LOCAL")?,
        }
        writeln!(out, "DATUM WGS84")?;
        writeln!(out, "UNITS METERS")?;
        Ok(())
    }

    pub fn read_prj<R: Read>(reader: R) -> Result<Option<UtmZone>> {
        let mut zone = None;
        let mut hemi = Hemisphere::North;
        let mut utm = false;
        for line in BufReader::new(reader).lines() {
            let line = line?;
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("PROJECTION"), Some(p)) => utm = p.eq_ignore_ascii_case("UTM"),
                (Some("ZONE"), Some(z)) => {
                    zone = Some(z.parse::<u8>().map_err(|_| {
                        Error::InvalidInput(format!("bad zone `{z}` in projection sidecar"))
                    })?)
                }
                (Some("HEMISPHERE"), Some(h)) => {
                    hemi = if h.eq_ignore_ascii_case("SOUTH") {
                        Hemisphere::South
                    } else {
                        Hemisphere::North
                    }
                }
                _ => {}
            }
        }
        Ok(match (utm, zone) {
            (true, Some(zone)) => Some(UtmZone {
                zone,
                hemisphere: hemi,
            }),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapStats {
    #[serde(flatten)]
    pub stats: SummaryStats,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterCorrelation {
    pub r: f64,
    pub overlap: usize,
}

/// Pixel-wise Pearson coefficient over cells where both grids have data.
pub fn raster_pearson(a: &RasterGrid, b: &RasterGrid) -> Result<RasterCorrelation> {
    if !a.spec.same_geometry(&b.spec) {
        return Err(Error::GeometryMismatch(format!(
            "{:?} vs {:?}",
            a.spec, b.spec
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .values
        .iter()
        .zip(&b.values)
        .filter(|(x, y)| !a.is_nodata(**x) && !b.is_nodata(**y))
        .map(|(x, y)| (*x, *y))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientOverlap { overlap: xs.len() });
    }
    Ok(RasterCorrelation {
        r: pearson(&xs, &ys)?,
        overlap: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: Vec<f64>) -> RasterGrid {
        RasterGrid::new(
            GridSpec {
                xll: 470_000.0,
                yll: 3_759_000.0,
                cell_size: 0.5,
                ncols: 3,
                nrows: 2,
            },
            DEFAULT_NODATA,
            values,
            Some(UtmZone {
                zone: 11,
                hemisphere: Hemisphere::North,
            }),
        )
        .unwrap()
    }

    #[test]
    fn pearson_self_negation_offset() {
        let a = grid(vec![1.0, 2.0, 5.0, 3.0, DEFAULT_NODATA, 8.0]);
        assert!((raster_pearson(&a, &a).unwrap().r - 1.0).abs() < 1e-12);
        let neg = RasterGrid {
            values: a
                .values
                .iter()
                .map(|v| if a.is_nodata(*v) { *v } else { -v })
                .collect(),
            ..a.clone()
        };
        assert!((raster_pearson(&a, &neg).unwrap().r + 1.0).abs() < 1e-12);
        let off = RasterGrid {
            values: a
                .values
                .iter()
                .map(|v| if a.is_nodata(*v) { *v } else { v + 3.67 })
                .collect(),
            ..a.clone()
        };
        let c = raster_pearson(&a, &off).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12);
        assert_eq!(c.overlap, 5);
    }

    #[test]
    fn pearson_geometry_and_overlap_errors() {
        let a = grid(vec![1.0, 2.0, 5.0, 3.0, 4.0, 8.0]);
        let mut b = a.clone();
        b.spec.cell_size = 1.0;
        assert!(matches!(
            raster_pearson(&a, &b),
            Err(Error::GeometryMismatch(_))
        ));
        let empty = grid(vec![DEFAULT_NODATA; 6]);
        assert!(matches!(
            raster_pearson(&a, &empty),
            Err(Error::InsufficientOverlap { overlap: 0 })
        ));
    }

    #[test]
    fn ascii_round_trip_and_orientation() {
        let a = grid(vec![1.0, 2.5, -3.25, 4.0, DEFAULT_NODATA, 6.125]);
        let mut buf = Vec::new();
        a.write_ascii(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("ncols 3\nnrows 2\nxllcorner 470000\nyllcorner 3759000\ncellsize 0.5\nNODATA_value -9999\n1 2.5 -3.25\n"));
        let back = RasterGrid::read_ascii(buf.as_slice(), "t.asc").unwrap();
        assert_eq!(back.values, a.values);
        assert_eq!(back.spec, a.spec);

        let mut prj = Vec::new();
        a.write_prj(&mut prj).unwrap();
        assert_eq!(RasterGrid::read_prj(prj.as_slice()).unwrap(), a.zone);

        // top row is north
        let (x, y) = a.spec.cell_center(0, 0);
        assert_eq!(a.spec.index_of(x, y), Some(0));
        assert!(y > a.spec.cell_center(1, 0).1);
    }

    #[test]
    fn ascii_center_header_and_errors() {
        let text = "NCOLS 2\nNROWS 1\nXLLCENTER 0.5\nYLLCENTER 0.5\nCELLSIZE 1\n7 8\n";
        let g = RasterGrid::read_ascii(text.as_bytes(), "c.asc").unwrap();
        assert_eq!((g.spec.xll, g.spec.yll), (0.0, 0.0));
        assert_eq!(g.nodata, DEFAULT_NODATA);
        let short = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3\n";
        assert!(RasterGrid::read_ascii(short.as_bytes(), "s.asc").is_err());
        let missing = "ncols 2\nnrows 1\ncellsize 1\n1 2\n";
        assert!(matches!(
            RasterGrid::read_ascii(missing.as_bytes(), "m.asc"),
            Err(Error::MissingColumn { .. })
        ));
    }
}
