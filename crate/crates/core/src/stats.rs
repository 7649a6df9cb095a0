//! Descriptive statistics shared by calibration, comparison and the
//! simulator reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean and sample standard deviation (n-1 denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub sigma: f64,
    pub n: usize,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; `None` when fewer than two values.
pub fn sample_sigma(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// Mean and n-1 sigma of a column of readings.
pub fn column_stats(values: &[f64]) -> Result<SummaryStats> {
    if values.len() < 2 {
        return Err(Error::Insufficient {
            what: "values for summary statistics",
            needed: 2,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in column".into()));
    }
    Ok(SummaryStats {
        mean: mean(values),
        sigma: sample_sigma(values).unwrap_or(0.0),
        n: values.len(),
    })
}

/// Pearson product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Insufficient {
            what: "paired values for correlation",
            needed: 2,
            got: x.len(),
        });
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("first series"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("second series"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Median of a slice (average of the two middle values for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_column() {
        let s = column_stats(&[5.0, 5.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.sigma, 0.0);
    }

    #[test]
    fn too_few_values() {
        assert!(matches!(
            column_stats(&[1.0]),
            Err(Error::Insufficient { got: 1, .. })
        ));
    }

    #[test]
    fn pearson_basic() {
        let x = [1.0, 2.0, 4.0, 7.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            pearson(&x, &[1.0, 1.0, 1.0, 1.0]),
            Err(Error::ZeroVariance(_))
        ));
        assert!(matches!(
            pearson(&x, &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    proptest! {
        #[test]
        fn pearson_invariances(
            xs in proptest::collection::vec(-100.0f64..100.0, 3..40),
            noise in proptest::collection::vec(-10.0f64..10.0, 40),
            scale in 0.01f64..100.0,
            shift in -1e3f64..1e3,
        ) {
            let y: Vec<f64> = xs.iter().zip(&noise).map(|(x, n)| 0.5 * x + n).collect();
            let r = match pearson(&xs, &y) { Ok(r) => r, Err(_) => return Ok(()) };
            let y2: Vec<f64> = y.iter().map(|v| scale * v + shift).collect();
            let r2 = pearson(&xs, &y2).unwrap();
            prop_assert!((r - r2).abs() < 1e-12);
            let yn: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert!((pearson(&xs, &yn).unwrap() + r).abs() < 1e-12);
        }
    }
}
