use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::PlanarSample;

/// Exponential semivariogram in practical-range form:
/// `gamma(h) = nugget + partial_sill * (1 - exp(-3 h / range))` for `h > 0`,
/// and `gamma(0) = 0`.
///
/// `range` is the distance at which ~95% of the sill is reached. The
/// `exp(-h / a)` convention used by some packages has `a = range / 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramModel {
    pub nugget: f64,
    pub partial_sill: f64,
    pub range: f64,
    pub kind: ModelKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Exponential,
}

impl VariogramModel {
    pub fn exponential(nugget: f64, partial_sill: f64, range: f64) -> Result<Self> {
        let m = Self {
            nugget,
            partial_sill,
            range,
            kind: ModelKind::Exponential,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.nugget.is_finite()
            && self.partial_sill.is_finite()
            && self.range.is_finite()
            && self.nugget >= 0.0
            && self.partial_sill >= 0.0
            && self.range > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "variogram model needs nugget, sill >= 0 and range > 0 (got {}, {}, {})",
                self.nugget, self.partial_sill, self.range
            )))
        }
    }

    pub fn sill(&self) -> f64 {
        self.nugget + self.partial_sill
    }

    #[inline]
    pub fn gamma(&self, h: f64) -> f64 {
        if h <= 0.0 {
            0.0
        } else {
            self.nugget + self.partial_sill * (1.0 - (-3.0 * h / self.range).exp())
        }
    }

    /// Covariance `C(h) = sill - gamma(h)`.
    #[inline]
    pub fn covariance(&self, h: f64) -> f64 {
        self.sill() - self.gamma(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramBin {
    /// Mean separation of the pairs in the bin, m.
    pub lag: f64,
    pub gamma: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalVariogram {
    pub bins: Vec<VariogramBin>,
    pub lag_width: f64,
    pub max_lag: f64,
}

/// Matheron estimator: half the mean squared increment per lag class.
///
/// Pairs with separation `h <= max_lag` fall in class `floor(h / lag_width)`.
/// Empty classes are omitted.
pub fn empirical_variogram(
    samples: &[PlanarSample],
    lag_width: f64,
    max_lag: f64,
) -> Result<EmpiricalVariogram> {
    if samples.len() < 2 {
        return Err(Error::Insufficient {
            what: "samples for a variogram",
            needed: 2,
            got: samples.len(),
        });
    }
    if !(lag_width > 0.0 && max_lag > 0.0) || !lag_width.is_finite() || !max_lag.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lag_width and max_lag must be > 0 (got {lag_width}, {max_lag})"
        )));
    }
    let nbins = (max_lag / lag_width).floor() as usize + 1;
    let mut sq = vec![0.0; nbins];
    let mut dist = vec![0.0; nbins];
    let mut count = vec![0usize; nbins];
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            let h = (a.x - b.x).hypot(a.y - b.y);
            if h > max_lag {
                continue;
            }
            let k = ((h / lag_width).floor() as usize).min(nbins - 1);
            sq[k] += (a.z - b.z).powi(2);
            dist[k] += h;
            count[k] += 1;
        }
    }
    let bins = (0..nbins)
        .filter(|&k| count[k] > 0)
        .map(|k| VariogramBin {
            lag: dist[k] / count[k] as f64,
            gamma: sq[k] / (2.0 * count[k] as f64),
            pairs: count[k],
        })
        .collect();
    Ok(EmpiricalVariogram {
        bins,
        lag_width,
        max_lag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_samples_one_bin() {
        let s = [
            PlanarSample::new(0.0, 0.0, 0.0),
            PlanarSample::new(1.0, 0.0, 2.0),
        ];
        let ev = empirical_variogram(&s, 1.0, 1.0).unwrap();
        assert_eq!(ev.bins.len(), 1);
        assert_eq!(ev.bins[0].gamma, 2.0);
        assert_eq!(ev.bins[0].pairs, 1);
    }

    #[test]
    fn constant_field_zero_gamma() {
        let s: Vec<PlanarSample> = (0..30)
            .map(|i| PlanarSample::new((i % 6) as f64, (i / 6) as f64 * 0.7, 4.2))
            .collect();
        let ev = empirical_variogram(&s, 0.5, 4.0).unwrap();
        assert!(!ev.bins.is_empty());
        assert!(ev.bins.iter().all(|b| b.gamma == 0.0));
        assert!(ev.bins.windows(2).all(|w| w[0].lag < w[1].lag));
    }

    #[test]
    fn rejects_bad_input() {
        let s = [PlanarSample::new(0.0, 0.0, 0.0)];
        assert!(empirical_variogram(&s, 1.0, 1.0).is_err());
        let s = [
            PlanarSample::new(0.0, 0.0, 0.0),
            PlanarSample::new(1.0, 0.0, 2.0),
        ];
        assert!(empirical_variogram(&s, 0.0, 1.0).is_err());
    }

    #[test]
    fn model_zero_at_origin() {
        let m = VariogramModel::exponential(1.0, 3.0, 10.0).unwrap();
        assert_eq!(m.gamma(0.0), 0.0);
        assert!((m.gamma(1e-12) - 1.0).abs() < 1e-9);
        assert!((m.gamma(10.0) - (1.0 + 3.0 * (1.0 - (-3.0f64).exp()))).abs() < 1e-12);
        assert!(VariogramModel::exponential(-1.0, 1.0, 1.0).is_err());
        assert!(VariogramModel::exponential(0.0, 1.0, 0.0).is_err());
    }
}
