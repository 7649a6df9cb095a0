//! Seeded inputs shared by the benchmarks.

use eca_core::geostat::{GridSpec, Neighborhood, PlanarSample, VariogramModel};
use eca_core::synth::field_on_cell_centers;
use eca_core::terrasim::{
    default_trajectory, synth_heightmap, TerrainKind, TerrainParams, DEFAULT_CELL_M,
    DEFAULT_EXTENT_M,
};
use eca_core::{GeoCoord, Heightmap, RobotGeometry, Trajectory};

pub fn field_samples(n: usize, seed: u64) -> (GridSpec, Vec<PlanarSample>, VariogramModel) {
    let side = ((n * 6) as f64).sqrt().ceil() as usize;
    let spec = GridSpec {
        xll: 0.0,
        yll: 0.0,
        cell_size: 1.0,
        ncols: side,
        nrows: side,
    };
    let model = VariogramModel::exponential(0.1, 4.0, side as f64 / 3.0).expect("valid model");
    let samples = field_on_cell_centers(&spec, n, &model, 10.0, seed).expect("field");
    (spec, samples, model)
}

pub fn neighborhood(samples: &[PlanarSample]) -> Neighborhood {
    Neighborhood::default_for(samples).expect("neighborhood")
}

/// A grid of WGS84 points around one UTM zone.
pub fn geo_points(n: usize) -> Vec<GeoCoord> {
    (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            GeoCoord::new(
                -60.0 + 120.0 * t,
                -119.9 + 5.8 * ((i * 7919) % n) as f64 / n as f64,
            )
            .expect("in range")
        })
        .collect()
}

pub fn rocky_course(seed: u64) -> (Heightmap, Trajectory, RobotGeometry) {
    let geom = RobotGeometry::default();
    let h = synth_heightmap(
        TerrainKind::Rocky,
        seed,
        DEFAULT_EXTENT_M,
        DEFAULT_CELL_M,
        &TerrainParams::default(),
    )
    .expect("terrain");
    let traj = default_trajectory(&h, &geom).expect("trajectory");
    (h, traj, geom)
}
