//! Seeded synthetic fields and surveys for testing and demos.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{utm_to_wgs84, GeoCoord, LocalXY, SurveyFrame};
use crate::geostat::{GridSpec, PlanarSample, VariogramModel};
use crate::ingest::{Acquisition, EcaSample, SurveyMetadata, SurveyTrack};
use crate::stats::sample_sigma;

/// Gaussian random field values at `points` with covariance
/// `sill - gamma(h)` (the nugget acts as white noise), by Cholesky
/// factorisation. Suited to a few thousand points.
pub fn gaussian_field(
    points: &[(f64, f64)],
    model: &VariogramModel,
    mean: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    model.validate()?;
    let n = points.len();
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let h = (points[i].0 - points[j].0).hypot(points[i].1 - points[j].1);
            let v = model.covariance(h);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
        // jitter keeps coincident points factorisable
        c[(i, i)] += 1e-10 * model.sill().max(1e-300);
    }
    let chol = c
        .cholesky()
        .ok_or_else(|| Error::Numerical("field covariance is not positive definite".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
    let v = chol.l() * z;
    Ok(v.iter().map(|x| mean + x).collect())
}

/// `n` samples of a Gaussian field placed on distinct cell centres of
/// `spec`, returned in random order.
pub fn field_on_cell_centers(
    spec: &GridSpec,
    n: usize,
    model: &VariogramModel,
    mean: f64,
    seed: u64,
) -> Result<Vec<PlanarSample>> {
    spec.validate()?;
    if n > spec.len() {
        return Err(Error::InvalidInput(format!(
            "{n} samples requested on a {}-cell grid",
            spec.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = sample(&mut rng, spec.len(), n).into_vec();
    let points: Vec<(f64, f64)> = cells
        .iter()
        .map(|&k| spec.cell_center(k / spec.ncols, k % spec.ncols))
        .collect();
    let z = gaussian_field(&points, model, mean, rng.random())?;
    Ok(points
        .iter()
        .zip(z)
        .map(|(&(x, y), z)| PlanarSample::new(x, y, z))
        .collect())
}

/// Stationary field with exponential covariance of practical range
/// `range`, built from random Fourier features. Cheap to evaluate anywhere.
#[derive(Debug, Clone)]
pub struct SpectralField {
    mean: f64,
    scale: f64,
    waves: Vec<(f64, f64, f64)>,
}

impl SpectralField {
    pub fn new(mean: f64, sill: f64, range: f64, n_waves: usize, seed: u64) -> Result<Self> {
        if !(sill >= 0.0 && range > 0.0 && n_waves > 0) {
            return Err(Error::InvalidInput(format!(
                "spectral field needs sill >= 0, range > 0, waves > 0 (got {sill}, {range}, {n_waves})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // exp(-r / l) in 2-D has a bivariate Cauchy spectrum: N(0, I) / (l |N(0, 1)|)
        let l = range / 3.0;
        let waves = (0..n_waves)
            .map(|_| {
                let zx: f64 = rng.sample(StandardNormal);
                let zy: f64 = rng.sample(StandardNormal);
                let w: f64 = rng.sample::<f64, _>(StandardNormal).abs().max(1e-12);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                (zx / (l * w), zy / (l * w), phase)
            })
            .collect();
        Ok(Self {
            mean,
            scale: (2.0 * sill / n_waves as f64).sqrt(),
            waves,
        })
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let s: f64 = self
            .waves
            .iter()
            .map(|(kx, ky, p)| (kx * x + ky * y + p).cos())
            .sum();
        self.mean + self.scale * s
    }
}

/// Boustrophedon path over `[0, width] x [0, height]`, passes along x.
pub fn lawnmower(width: f64, height: f64, line_spacing: f64, step: f64) -> Result<Vec<LocalXY>> {
    if !(width > 0.0 && height >= 0.0 && line_spacing > 0.0 && step > 0.0) {
        return Err(Error::InvalidInput("invalid lawnmower dimensions".into()));
    }
    let per_line = (width / step).round() as usize + 1;
    let lines = (height / line_spacing).floor() as usize + 1;
    let mut pts = Vec::with_capacity(per_line * lines);
    for l in 0..lines {
        let y = l as f64 * line_spacing;
        for k in 0..per_line {
            let i = if l % 2 == 0 { k } else { per_line - 1 - k };
            pts.push(LocalXY::new(i as f64 * step, y));
        }
    }
    Ok(pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwinParams {
    pub origin: GeoCoord,
    pub width_m: f64,
    pub height_m: f64,
    pub line_spacing_m: f64,
    pub sample_spacing_m: f64,
    pub mean: f64,
    pub sill: f64,
    pub range_m: f64,
    /// Robot minus manual, mS/m.
    pub offset: f64,
    /// Noise sigma as a fraction of the sampled field's sigma.
    pub noise_frac: f64,
    pub sample_rate_hz: f64,
}

impl Default for TwinParams {
    fn default() -> Self {
        Self {
            origin: GeoCoord {
                lat: 33.972760,
                lon: -117.320437,
            },
            width_m: 40.0,
            height_m: 30.0,
            line_spacing_m: 2.0,
            sample_spacing_m: 0.5,
            mean: 12.0,
            sill: 9.0,
            range_m: 15.0,
            offset: 3.7,
            noise_frac: 0.1,
            sample_rate_hz: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwinSurvey {
    pub manual: SurveyTrack,
    pub robot: SurveyTrack,
    /// Sigma of the noiseless field along the path.
    pub field_sigma: f64,
}

/// Manual and robot surveys of one synthetic field along the same path.
/// The robot reads `offset` higher; each survey adds its own Gaussian noise.
pub fn twin_survey(p: &TwinParams, seed: u64) -> Result<TwinSurvey> {
    let field = SpectralField::new(p.mean, p.sill, p.range_m, 500, seed)?;
    let path = lawnmower(p.width_m, p.height_m, p.line_spacing_m, p.sample_spacing_m)?;
    let frame = SurveyFrame::anchored_at(p.origin)?;
    let positions = path
        .iter()
        .map(|xy| utm_to_wgs84(frame.local_to_utm(*xy)))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<f64> = path.iter().map(|xy| field.value(xy.x, xy.y)).collect();
    let field_sigma = sample_sigma(&truth).unwrap_or(0.0);
    let noise = p.noise_frac * field_sigma;

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7717);
    let mut track = |offset: f64, acquisition: Acquisition| -> Result<SurveyTrack> {
        let samples = truth
            .iter()
            .zip(&positions)
            .enumerate()
            .map(|(i, (z, pos))| {
                let e: f64 = rng.sample(StandardNormal);
                EcaSample::new(i as f64 / p.sample_rate_hz, z + offset + noise * e).at(*pos)
            })
            .collect();
        SurveyTrack::new(
            samples,
            SurveyMetadata {
                field_id: "synthetic".into(),
                acquisition,
                ..SurveyMetadata::default()
            },
        )
    };
    let manual = track(0.0, Acquisition::Manual)?;
    let robot = track(p.offset, Acquisition::Robotized)?;
    Ok(TwinSurvey {
        manual,
        robot,
        field_sigma,
    })
}
