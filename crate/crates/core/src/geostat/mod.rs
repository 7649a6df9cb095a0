//! Semivariograms, ordinary kriging and raster I/O.

pub mod fit;
pub mod kriging;
pub mod raster;
pub mod variogram;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ingest::SurveyTrack;

pub use fit::{fit_exponential, VariogramFit};
pub use kriging::{
    dedup_samples, default_grid, grid_around, krige_samples, ordinary_kriging, track_to_planar,
    KrigedPoint, Kriger, KrigingOutput, Neighborhood,
};
pub use raster::{raster_pearson, GridSpec, MapStats, RasterCorrelation, RasterGrid, UtmZone};
pub use variogram::{
    empirical_variogram, EmpiricalVariogram, ModelKind, VariogramBin, VariogramModel,
};

/// A value at a planar (UTM or local) location, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PlanarSample {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// [`empirical_variogram`] over a georeferenced track's conductivities.
pub fn track_variogram(
    track: &SurveyTrack,
    lag_width: f64,
    max_lag: f64,
) -> Result<EmpiricalVariogram> {
    let (samples, _) = track_to_planar(track)?;
    empirical_variogram(&samples, lag_width, max_lag)
}
