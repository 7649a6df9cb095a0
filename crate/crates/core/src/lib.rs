//! Robot-mounted EMI survey processing: georeferencing, interference
//! calibration, kriged ECa maps, survey comparison and a quasi-static
//! probe-clearance simulator.

// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calib;
pub mod compare;
pub mod error;
pub mod geodesy;
pub mod geostat;
pub mod ingest;
pub mod reference;
pub mod stats;
pub mod synth;
pub mod terrasim;

pub use calib::{
    build_calibration, correct_offset, recommend_placement, CalibrationEntry, CalibrationTable,
    PlacementConfig, PlacementPolicy, Recommendation, RegressionResult,
};
pub use compare::{
    align_by_arclength, compare_report, filter_outliers_sigma, polyfit_least_squares,
    AlignedSeries, CompareOptions, ComparisonReport, PolyFit,
};
pub use error::{Error, Result, Zone};
pub use geodesy::{
    utm_to_local, utm_to_wgs84, wgs84_to_utm, GeoCoord, Hemisphere, LocalXY, SurveyFrame, UtmCoord,
};
pub use geostat::{
    empirical_variogram, fit_exponential, ordinary_kriging, raster_pearson, EmpiricalVariogram,
    GridSpec, Neighborhood, PlanarSample, RasterGrid, VariogramModel,
};
pub use ingest::{
    georeference, parse_emi_log, parse_gnss_track, EcaSample, GnssFix, SurveyMetadata, SurveyTrack,
};
pub use stats::{pearson, SummaryStats};
pub use terrasim::{
    probe_clearance, robot_pose_on_terrain, simulate_traverse, synth_heightmap, Heightmap,
    OscillationReport, RobotGeometry, Trajectory,
};
