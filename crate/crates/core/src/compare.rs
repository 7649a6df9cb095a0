//! Survey-to-survey comparison: sigma trimming, arc-length alignment,
//! polynomial trends and correlation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::SurveyFrame;
use crate::geostat::RasterCorrelation;
use crate::ingest::SurveyTrack;
pub use crate::stats::pearson;
use crate::stats::{column_stats, mean, sample_sigma, SummaryStats};

/// Drop values farther than `k` sample sigmas from the mean. Mean and sigma
/// come from the full input; one pass.
pub fn filter_outliers_sigma(values: &[f64], k: f64) -> Result<(Vec<f64>, Vec<usize>)> {
    if values.len() < 2 {
        return Err(Error::Insufficient {
            what: "values for sigma filtering",
            needed: 2,
            got: values.len(),
        });
    }
    if !(k > 0.0) {
        return Err(Error::InvalidInput(format!("k must be > 0, got {k}")));
    }
    let m = mean(values);
    let gate = k * sample_sigma(values).unwrap_or(0.0);
    let mut kept = Vec::with_capacity(values.len());
    let mut removed = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if (v - m).abs() > gate {
            removed.push(i);
        } else {
            kept.push(v);
        }
    }
    Ok((kept, removed))
}

/// Two surveys resampled on a shared normalised arc-length grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSeries {
    pub s: Vec<f64>,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
}

impl AlignedSeries {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Cumulative planar arc length, normalised to [0, 1].
fn normalized_arclength(track: &SurveyTrack, frame: &SurveyFrame, label: &str) -> Result<Vec<f64>> {
    if track.len() < 2 {
        return Err(Error::Insufficient {
            what: "georeferenced samples per track",
            needed: 2,
            got: track.len(),
        });
    }
    let mut cum = Vec::with_capacity(track.len());
    let mut prev = None;
    let mut total = 0.0;
    for p in track.positions() {
        let u = frame.to_utm(p)?;
        if let Some((e, n)) = prev {
            total += f64::hypot(u.easting - e, u.northing - n);
        }
        prev = Some((u.easting, u.northing));
        cum.push(total);
    }
    if total <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "track {label} has zero length (all points coincide)"
        )));
    }
    for c in &mut cum {
        *c /= total;
    }
    Ok(cum)
}

/// Linear interpolation of `v` over non-decreasing knots `s` at `t`.
fn interp(s: &[f64], v: &[f64], t: f64) -> f64 {
    // first knot strictly beyond t; stationary runs resolve to their last value
    let j = s.partition_point(|&x| x <= t);
    if j == 0 {
        return v[0];
    }
    if j == s.len() {
        return v[s.len() - 1];
    }
    let (s0, s1) = (s[j - 1], s[j]);
    let w = (t - s0) / (s1 - s0);
    v[j - 1] + w * (v[j] - v[j - 1])
}

/// Resample both tracks' conductivities onto `n_points` uniform values of
/// normalised arc length. Both tracks are projected in the zone of `a`'s
/// first sample.
pub fn align_by_arclength(
    a: &SurveyTrack,
    b: &SurveyTrack,
    n_points: usize,
) -> Result<AlignedSeries> {
    if n_points < 2 {
        return Err(Error::InvalidInput(format!(
            "n_points must be >= 2, got {n_points}"
        )));
    }
    let first = a.positions().next().ok_or(Error::Insufficient {
        what: "georeferenced samples per track",
        needed: 2,
        got: 0,
    })?;
    let frame = SurveyFrame::anchored_at(first)?;
    let sa = normalized_arclength(a, &frame, "a")?;
    let sb = normalized_arclength(b, &frame, "b")?;
    let va = a.conductivities();
    let vb = b.conductivities();
    let s: Vec<f64> = (0..n_points)
        .map(|i| i as f64 / (n_points - 1) as f64)
        .collect();
    Ok(AlignedSeries {
        a_values: s.iter().map(|&t| interp(&sa, &va, t)).collect(),
        b_values: s.iter().map(|&t| interp(&sb, &vb, t)).collect(),
        s,
    })
}

/// Polynomial in `t = 2 (s - s_min) / (s_max - s_min) - 1`, coefficients
/// in increasing power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub domain: (f64, f64),
}

impl PolyFit {
    pub fn to_unit(&self, s: f64) -> f64 {
        let (lo, hi) = self.domain;
        2.0 * (s - lo) / (hi - lo) - 1.0
    }

    pub fn eval(&self, s: f64) -> f64 {
        let t = self.to_unit(s);
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c)
    }
}

pub const DEFAULT_DEGREE: usize = 8;
const RANK_RTOL: f64 = 1e-12;

/// Ordinary least-squares polynomial fit via SVD of the rescaled
/// Vandermonde matrix.
pub fn polyfit_least_squares(s: &[f64], v: &[f64], degree: usize) -> Result<PolyFit> {
    if s.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: v.len(),
        });
    }
    if s.len() <= degree {
        return Err(Error::Insufficient {
            what: "points for the polynomial degree",
            needed: degree + 1,
            got: s.len(),
        });
    }
    if s.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite value in polynomial fit".into(),
        ));
    }
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::InvalidInput(
            "polynomial fit needs at least two distinct abscissae".into(),
        ));
    }
    let mut fit = PolyFit {
        degree,
        coefficients: Vec::new(),
        domain: (lo, hi),
    };
    let cols = degree + 1;
    let mut a = DMatrix::<f64>::zeros(s.len(), cols);
    for (i, &si) in s.iter().enumerate() {
        let t = fit.to_unit(si);
        let mut p = 1.0;
        for j in 0..cols {
            a[(i, j)] = p;
            p *= t;
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&x| x > RANK_RTOL * smax)
        .count();
    if rank < cols {
        return Err(Error::Numerical(format!(
            "rank-deficient polynomial system: rank {rank} < {cols}"
        )));
    }
    let coef = svd
        .solve(&DVector::from_column_slice(v), 0.0)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    fit.coefficients = coef.iter().copied().collect();
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Resampling points; `None` uses the shorter track's sample count.
    pub n_points: Option<usize>,
    pub k_sigma: f64,
    pub degree: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            n_points: None,
            k_sigma: 2.0,
            degree: DEFAULT_DEGREE,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a_stats: SummaryStats,
    pub b_stats: SummaryStats,
    /// `a.mean - b.mean`.
    pub offset_mS_per_m: f64,
    pub pcc_filtered: f64,
    pub pcc_raw: f64,
    pub polyfit_a: PolyFit,
    pub polyfit_b: PolyFit,
    pub n_aligned: usize,
    pub n_outliers_removed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raster_pcc: Option<RasterCorrelation>,
}

/// Align, trim and correlate two surveys of the same path.
///
/// Aligned pairs are dropped when either member is outside `k_sigma` of
/// its own series; the filtered PCC and both polynomial fits use the
/// remaining pairs.
pub fn compare_report(
    a: &SurveyTrack,
    b: &SurveyTrack,
    opts: &CompareOptions,
) -> Result<ComparisonReport> {
    let a_stats = column_stats(&a.conductivities())?;
    let b_stats = column_stats(&b.conductivities())?;
    let n = opts.n_points.unwrap_or(a.len().min(b.len()));
    let al = align_by_arclength(a, b, n)?;
    let pcc_raw = pearson(&al.a_values, &al.b_values)?;

    let (_, ra) = filter_outliers_sigma(&al.a_values, opts.k_sigma)?;
    let (_, rb) = filter_outliers_sigma(&al.b_values, opts.k_sigma)?;
    let mut drop = vec![false; al.len()];
    for i in ra.into_iter().chain(rb) {
        drop[i] = true;
    }
    let keep = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .zip(&drop)
            .filter(|(_, d)| !**d)
            .map(|(x, _)| *x)
            .collect()
    };
    let (s, fa, fb) = (keep(&al.s), keep(&al.a_values), keep(&al.b_values));
    Ok(ComparisonReport {
        a_stats,
        b_stats,
        offset_mS_per_m: a_stats.mean - b_stats.mean,
        pcc_filtered: pearson(&fa, &fb)?,
        pcc_raw,
        polyfit_a: polyfit_least_squares(&s, &fa, opts.degree)?,
        polyfit_b: polyfit_least_squares(&s, &fb, opts.degree)?,
        n_aligned: al.len(),
        n_outliers_removed: drop.iter().filter(|d| **d).count(),
        raster_pcc: None,
    })
}
