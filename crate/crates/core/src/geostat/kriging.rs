//! Ordinary kriging on a local neighbourhood.
//!
//! Each cell solves the semivariogram form of the ordinary-kriging system
//!
//! ```text
//! | G  1 | |w|   |g0|
//! | 1' 0 | |mu| = | 1|
//! ```
//!
//! where `G[i][j] = gamma(|x_i - x_j|)` over the selected neighbours and
//! `g0[i] = gamma(|x_i - x0|)`. Coordinates are taken relative to the target
//! cell before solving. Cells are independent and run in parallel; results
//! are collected in cell order.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::SurveyFrame;
use crate::ingest::SurveyTrack;
use crate::stats::median;

use super::raster::{GridSpec, RasterGrid, UtmZone, DEFAULT_NODATA};
use super::variogram::VariogramModel;
use super::PlanarSample;

pub const DEFAULT_K_NEAREST: usize = 16;
/// Default search radius in multiples of the median nearest-neighbour
/// spacing.
pub const DEFAULT_RADIUS_FACTOR: f64 = 10.0;
/// Padding around the sample bounding box for the default grid, in cells.
pub const DEFAULT_PAD_CELLS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub k_nearest: usize,
    pub max_radius: f64,
}

impl Neighborhood {
    pub fn validate(&self) -> Result<()> {
        if self.k_nearest < 2 {
            return Err(Error::InvalidInput(format!(
                "k_nearest must be >= 2, got {}",
                self.k_nearest
            )));
        }
        if !(self.max_radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "max_radius must be > 0, got {}",
                self.max_radius
            )));
        }
        Ok(())
    }

    /// `k = 16`, radius = 10 x median nearest-neighbour spacing.
    pub fn default_for(samples: &[PlanarSample]) -> Result<Self> {
        let samples = dedup_samples(samples);
        let spacing = median_nn_spacing(&samples).ok_or(Error::Insufficient {
            what: "distinct sample locations",
            needed: 2,
            got: samples.len(),
        })?;
        Ok(Self {
            k_nearest: DEFAULT_K_NEAREST,
            max_radius: DEFAULT_RADIUS_FACTOR * spacing,
        })
    }
}

/// Average the values of samples sharing exactly the same location. Order
/// of first appearance is kept.
pub fn dedup_samples(samples: &[PlanarSample]) -> Vec<PlanarSample> {
    // +0.0 folds -0.0 into 0.0 so both hash alike
    let key = |s: &PlanarSample| ((s.x + 0.0).to_bits(), (s.y + 0.0).to_bits());
    let mut slot: HashMap<(u64, u64), usize> = HashMap::with_capacity(samples.len());
    let mut sums: Vec<(PlanarSample, usize)> = Vec::with_capacity(samples.len());
    for s in samples {
        match slot.get(&key(s)) {
            Some(&i) => {
                sums[i].0.z += s.z;
                sums[i].1 += 1;
            }
            None => {
                slot.insert(key(s), sums.len());
                sums.push((*s, 1));
            }
        }
    }
    sums.into_iter()
        .map(|(mut s, n)| {
            s.z /= n as f64;
            s
        })
        .collect()
}

fn median_nn_spacing(samples: &[PlanarSample]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let nn: Vec<f64> = samples
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            samples
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| (a.x - b.x).hypot(a.y - b.y))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    median(&nn)
}

/// Default raster geometry: cell size = median spacing between consecutive
/// samples, extent = bounding box padded by two cells.
pub fn default_grid(samples: &[PlanarSample]) -> Result<GridSpec> {
    if samples.len() < 2 {
        return Err(Error::Insufficient {
            what: "samples for a default grid",
            needed: 2,
            got: samples.len(),
        });
    }
    let steps: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[0].x - w[1].x).hypot(w[0].y - w[1].y))
        .filter(|d| *d > 0.0)
        .collect();
    let cell = median(&steps).ok_or_else(|| {
        Error::InvalidInput("all samples share one location; cannot size a grid".into())
    })?;
    grid_around(samples, cell, DEFAULT_PAD_CELLS)
}

/// Bounding box of `samples` padded by `pad` cells of size `cell`.
pub fn grid_around(samples: &[PlanarSample], cell: f64, pad: usize) -> Result<GridSpec> {
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for s in samples {
        x0 = x0.min(s.x);
        y0 = y0.min(s.y);
        x1 = x1.max(s.x);
        y1 = y1.max(s.y);
    }
    let pad_m = pad as f64 * cell;
    let spec = GridSpec {
        xll: x0 - pad_m,
        yll: y0 - pad_m,
        cell_size: cell,
        ncols: ((x1 - x0) / cell).ceil() as usize + 2 * pad + 1,
        nrows: ((y1 - y0) / cell).ceil() as usize + 2 * pad + 1,
    };
    spec.validate()?;
    Ok(spec)
}

/// Uniform bucket index for radius queries.
struct BucketIndex {
    x0: f64,
    y0: f64,
    size: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl BucketIndex {
    fn new(samples: &[PlanarSample], radius: f64) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        );
        for s in samples {
            x0 = x0.min(s.x);
            y0 = y0.min(s.y);
            x1 = x1.max(s.x);
            y1 = y1.max(s.y);
        }
        // cap the bucket count for huge radii / tiny extents
        let extent = (x1 - x0).max(y1 - y0).max(1e-9);
        let size = radius.max(extent / 512.0);
        let nx = ((x1 - x0) / size).floor() as usize + 1;
        let ny = ((y1 - y0) / size).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, s) in samples.iter().enumerate() {
            let bx = ((s.x - x0) / size).floor() as usize;
            let by = ((s.y - y0) / size).floor() as usize;
            buckets[by.min(ny - 1) * nx + bx.min(nx - 1)].push(i as u32);
        }
        Self {
            x0,
            y0,
            size,
            nx,
            ny,
            buckets,
        }
    }

    fn within(&self, samples: &[PlanarSample], x: f64, y: f64, r: f64, out: &mut Vec<(f64, u32)>) {
        out.clear();
        let lo = |v: f64, o: f64| ((v - r - o) / self.size).floor();
        let hi = |v: f64, o: f64| ((v + r - o) / self.size).floor();
        let bx0 = lo(x, self.x0).max(0.0) as usize;
        let by0 = lo(y, self.y0).max(0.0) as usize;
        let bx1 = hi(x, self.x0);
        let by1 = hi(y, self.y0);
        if bx1 < 0.0 || by1 < 0.0 {
            return;
        }
        let bx1 = (bx1 as usize).min(self.nx - 1);
        let by1 = (by1 as usize).min(self.ny - 1);
        for by in by0..=by1 {
            for bx in bx0..=bx1 {
                for &i in &self.buckets[by * self.nx + bx] {
                    let s = &samples[i as usize];
                    let d = (s.x - x).hypot(s.y - y);
                    if d <= r {
                        out.push((d, i));
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrigedPoint {
    pub value: f64,
    pub weight_sum: f64,
    pub neighbors: usize,
}

/// Reusable predictor over a fixed, deduplicated sample set.
pub struct Kriger {
    samples: Vec<PlanarSample>,
    model: VariogramModel,
    nb: Neighborhood,
    index: BucketIndex,
}

impl Kriger {
    pub fn new(samples: &[PlanarSample], model: VariogramModel, nb: Neighborhood) -> Result<Self> {
        model.validate()?;
        nb.validate()?;
        if samples.is_empty() {
            return Err(Error::Insufficient {
                what: "samples for kriging",
                needed: 1,
                got: 0,
            });
        }
        if samples
            .iter()
            .any(|s| !s.x.is_finite() || !s.y.is_finite() || !s.z.is_finite())
        {
            return Err(Error::InvalidInput("non-finite kriging sample".into()));
        }
        let samples = dedup_samples(samples);
        let index = BucketIndex::new(&samples, nb.max_radius);
        Ok(Self {
            samples,
            model,
            nb,
            index,
        })
    }

    pub fn samples(&self) -> &[PlanarSample] {
        &self.samples
    }

    /// Predict at `(x, y)`; `None` when no sample lies within the radius.
    /// `cell` only labels errors.
    pub fn predict(&self, x: f64, y: f64, cell: usize) -> Result<Option<KrigedPoint>> {
        let mut cand = Vec::new();
        self.index
            .within(&self.samples, x, y, self.nb.max_radius, &mut cand);
        if cand.is_empty() {
            return Ok(None);
        }
        let k = self.nb.k_nearest.min(cand.len());
        // ties broken by sample index so the selection is order-independent
        let by_dist = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if cand.len() > k {
            cand.select_nth_unstable_by(k - 1, by_dist);
            cand.truncate(k);
        }
        cand.sort_unstable_by(by_dist);

        let pts: Vec<(f64, f64, f64)> = cand
            .iter()
            .map(|&(_, i)| {
                let s = &self.samples[i as usize];
                (s.x - x, s.y - y, s.z)
            })
            .collect();
        let m = pts.len();
        let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
        let mut rhs = DVector::<f64>::zeros(m + 1);
        for i in 0..m {
            for j in (i + 1)..m {
                let g = self
                    .model
                    .gamma((pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1));
                a[(i, j)] = g;
                a[(j, i)] = g;
            }
            a[(i, m)] = 1.0;
            a[(m, i)] = 1.0;
            rhs[i] = self.model.gamma(pts[i].0.hypot(pts[i].1));
        }
        rhs[m] = 1.0;

        let sol = a.lu().solve(&rhs).ok_or(Error::Singular { cell })?;
        let weights = sol.rows(0, m);
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Singular { cell });
        }
        let weight_sum: f64 = weights.iter().sum();
        if (weight_sum - 1.0).abs() > 1e-6 {
            return Err(Error::Singular { cell });
        }
        let value = weights.iter().zip(&pts).map(|(w, p)| w * p.2).sum();
        Ok(Some(KrigedPoint {
            value,
            weight_sum,
            neighbors: m,
        }))
    }

    /// Predict every cell centre of `spec` in parallel.
    pub fn predict_grid(&self, spec: &GridSpec) -> Result<Vec<Option<KrigedPoint>>> {
        spec.validate()?;
        (0..spec.len())
            .into_par_iter()
            .map(|cell| {
                let (x, y) = spec.cell_center(cell / spec.ncols, cell % spec.ncols);
                self.predict(x, y, cell)
            })
            .collect()
    }
}

/// Kriged raster plus per-cell diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct KrigingOutput {
    pub raster: RasterGrid,
    /// Weight sum per cell; NaN for nodata cells.
    pub weight_sums: Vec<f64>,
}

impl KrigingOutput {
    pub fn max_weight_sum_error(&self) -> f64 {
        self.weight_sums
            .iter()
            .filter(|w| !w.is_nan())
            .map(|w| (w - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Krige planar samples onto `spec`. Cells with no sample in range are
/// nodata.
pub fn krige_samples(
    samples: &[PlanarSample],
    model: &VariogramModel,
    spec: &GridSpec,
    nb: &Neighborhood,
    zone: Option<UtmZone>,
) -> Result<KrigingOutput> {
    let kriger = Kriger::new(samples, *model, *nb)?;
    let preds = kriger.predict_grid(spec)?;
    let values = preds
        .iter()
        .map(|p| p.map_or(DEFAULT_NODATA, |k| k.value))
        .collect();
    let weight_sums = preds
        .iter()
        .map(|p| p.map_or(f64::NAN, |k| k.weight_sum))
        .collect();
    Ok(KrigingOutput {
        raster: RasterGrid::new(*spec, DEFAULT_NODATA, values, zone)?,
        weight_sums,
    })
}

/// Track positions as UTM samples in the zone of the first sample.
pub fn track_to_planar(track: &SurveyTrack) -> Result<(Vec<PlanarSample>, UtmZone)> {
    let first = track.positions().next().ok_or(Error::Insufficient {
        what: "georeferenced samples",
        needed: 1,
        got: 0,
    })?;
    let frame = SurveyFrame::anchored_at(first)?;
    let samples = track
        .samples()
        .iter()
        .map(|s| {
            let u = frame.to_utm(s.position.expect("track samples are georeferenced"))?;
            Ok(PlanarSample::new(u.easting, u.northing, s.conductivity))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        samples,
        UtmZone {
            zone: frame.origin.zone,
            hemisphere: frame.origin.hemisphere,
        },
    ))
}

/// Kriged ECa map of a survey track. `grid` and `nb` default to
/// [`default_grid`] and [`Neighborhood::default_for`].
pub fn ordinary_kriging(
    track: &SurveyTrack,
    model: &VariogramModel,
    grid: Option<GridSpec>,
    nb: Option<Neighborhood>,
) -> Result<RasterGrid> {
    if track.len() < 2 {
        return Err(Error::Insufficient {
            what: "samples for kriging",
            needed: 2,
            got: track.len(),
        });
    }
    let (samples, zone) = track_to_planar(track)?;
    let spec = match grid {
        Some(g) => g,
        None => default_grid(&samples)?,
    };
    let nb = match nb {
        Some(n) => n,
        None => Neighborhood::default_for(&samples)?,
    };
    Ok(krige_samples(&samples, model, &spec, &nb, Some(zone))?.raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> VariogramModel {
        VariogramModel::exponential(0.5, 2.0, 6.0).unwrap()
    }

    fn wide() -> Neighborhood {
        Neighborhood {
            k_nearest: 16,
            max_radius: 1e3,
        }
    }

    #[test]
    fn single_sample_everywhere() {
        let s = [PlanarSample::new(1.0, 1.0, 7.5)];
        let k = Kriger::new(&s, model(), wide()).unwrap();
        for (x, y) in [(0.0, 0.0), (1.0, 1.0), (5.0, -3.0)] {
            let p = k.predict(x, y, 0).unwrap().unwrap();
            assert!((p.value - 7.5).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_at_samples() {
        let s = [
            PlanarSample::new(0.0, 0.0, 1.0),
            PlanarSample::new(2.0, 0.5, 4.0),
            PlanarSample::new(1.0, 3.0, -2.0),
            PlanarSample::new(4.0, 4.0, 10.0),
        ];
        let k = Kriger::new(&s, model(), wide()).unwrap();
        for smp in &s {
            let p = k.predict(smp.x, smp.y, 0).unwrap().unwrap();
            assert!((p.value - smp.z).abs() < 1e-9 * smp.z.abs().max(1.0));
        }
    }

    #[test]
    fn symmetric_pair_gets_equal_weights() {
        let s = [
            PlanarSample::new(-1.0, 0.0, 2.0),
            PlanarSample::new(1.0, 0.0, 6.0),
        ];
        let k = Kriger::new(&s, model(), wide()).unwrap();
        let p = k.predict(0.0, 0.0, 0).unwrap().unwrap();
        assert!((p.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn duplicates_are_averaged() {
        let s = [
            PlanarSample::new(0.0, 0.0, 1.0),
            PlanarSample::new(0.0, 0.0, 3.0),
            PlanarSample::new(-0.0, 0.0, 5.0),
            PlanarSample::new(5.0, 0.0, 9.0),
        ];
        let d = dedup_samples(&s);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].z, 3.0);
        let k = Kriger::new(&s, model(), wide()).unwrap();
        let p = k.predict(0.0, 0.0, 0).unwrap().unwrap();
        assert!((p.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_radius_is_nodata() {
        let s = [
            PlanarSample::new(0.0, 0.0, 1.0),
            PlanarSample::new(1.0, 0.0, 2.0),
        ];
        let nb = Neighborhood {
            k_nearest: 4,
            max_radius: 2.0,
        };
        let spec = GridSpec {
            xll: -1.0,
            yll: -1.0,
            cell_size: 1.0,
            ncols: 10,
            nrows: 2,
        };
        let out = krige_samples(&s, &model(), &spec, &nb, None).unwrap();
        assert_eq!(out.raster.get(0, 9), DEFAULT_NODATA);
        assert!(out.raster.get(1, 1) != DEFAULT_NODATA);
    }

    #[test]
    fn zero_model_is_singular() {
        let s = [
            PlanarSample::new(0.0, 0.0, 1.0),
            PlanarSample::new(1.0, 0.0, 1.0),
            PlanarSample::new(0.0, 1.0, 1.0),
        ];
        let zero = VariogramModel::exponential(0.0, 0.0, 1.0).unwrap();
        let k = Kriger::new(&s, zero, wide()).unwrap();
        assert!(matches!(
            k.predict(0.3, 0.3, 17),
            Err(Error::Singular { cell: 17 })
        ));
    }

    #[test]
    fn default_grid_pads_bbox() {
        let s: Vec<PlanarSample> = (0..11)
            .map(|i| PlanarSample::new(100.0 + i as f64 * 0.5, 200.0, 0.0))
            .collect();
        let g = default_grid(&s).unwrap();
        assert_eq!(g.cell_size, 0.5);
        assert_eq!(g.xll, 99.0);
        assert!(g.xll + g.ncols as f64 * g.cell_size >= 105.0 + 1.0);
        let nb = Neighborhood::default_for(&s).unwrap();
        assert_eq!(nb.k_nearest, 16);
        assert!((nb.max_radius - 5.0).abs() < 1e-12);
    }

    fn arb_samples() -> impl Strategy<Value = Vec<PlanarSample>> {
        proptest::collection::vec((0.0f64..20.0, 0.0f64..20.0, -5.0f64..5.0), 2..25).prop_map(|v| {
            v.into_iter()
                .map(|(x, y, z)| PlanarSample::new(x, y, z))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weights_sum_to_one_and_shift_properties(
            samples in arb_samples(),
            tx in -1e4f64..1e4, ty in -1e4f64..1e4, c in -50.0f64..50.0,
            qx in 0.0f64..20.0, qy in 0.0f64..20.0,
        ) {
            let nb = Neighborhood { k_nearest: 8, max_radius: 100.0 };
            let k = Kriger::new(&samples, model(), nb).unwrap();
            let base = k.predict(qx, qy, 0).unwrap().unwrap();
            prop_assert!((base.weight_sum - 1.0).abs() < 1e-9);

            let moved: Vec<PlanarSample> = samples.iter().map(|s| PlanarSample::new(s.x + tx, s.y + ty, s.z)).collect();
            let km = Kriger::new(&moved, model(), nb).unwrap();
            let p = km.predict(qx + tx, qy + ty, 0).unwrap().unwrap();
            prop_assert!((p.value - base.value).abs() < 1e-9 * base.value.abs().max(1.0));

            let lifted: Vec<PlanarSample> = samples.iter().map(|s| PlanarSample::new(s.x, s.y, s.z + c)).collect();
            let kl = Kriger::new(&lifted, model(), nb).unwrap();
            let p = kl.predict(qx, qy, 0).unwrap().unwrap();
            prop_assert!((p.value - (base.value + c)).abs() < 1e-9 * (base.value + c).abs().max(1.0));
        }
    }
}
