//! Robot interference calibration and sensor placement selection.
//!
//! Paired static readings (handheld baseline vs. probe mounted on the robot
//! at distance `d_b`) are summarised per distance and regressed against the
//! baseline. The recommendation combines these interference gates with
//! simulated probe oscillation reports.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SurveyTrack;
pub use crate::stats::{column_stats, SummaryStats};
use crate::stats::{mean, pearson};
use crate::terrasim::OscillationReport;

const DB_MIN: f64 = 0.10;
const DB_MAX: f64 = 1.00;
const KEY_EPS: f64 = 1e-9;

/// Probe placement: distance from the robot body and height off the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementConfig {
    pub d_b: f64,
    pub d_h: f64,
}

impl PlacementConfig {
    pub fn new(d_b: f64, d_h: f64) -> Result<Self> {
        if !(DB_MIN - KEY_EPS..=DB_MAX + KEY_EPS).contains(&d_b) {
            return Err(Error::OutOfRange(format!(
                "d_b = {d_b} m outside the tested envelope [{DB_MIN}, {DB_MAX}]"
            )));
        }
        if !(d_h > 0.0) || !d_h.is_finite() {
            return Err(Error::OutOfRange(format!("d_h = {d_h} m must be > 0")));
        }
        Ok(Self { d_b, d_h })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub pcc: f64,
    pub n: usize,
}

impl RegressionResult {
    pub const IDENTITY: RegressionResult = RegressionResult {
        slope: 1.0,
        intercept: 0.0,
        pcc: 1.0,
        n: 0,
    };

    /// Forward interference map `baseline -> measured`.
    pub fn apply(&self, baseline: f64) -> f64 {
        self.slope * baseline + self.intercept
    }
}

/// Ordinary least squares of `measured` on `baseline`, plus their Pearson
/// coefficient.
pub fn regress_against_baseline(baseline: &[f64], measured: &[f64]) -> Result<RegressionResult> {
    if baseline.len() != measured.len() {
        return Err(Error::LengthMismatch {
            left: baseline.len(),
            right: measured.len(),
        });
    }
    let n = baseline.len();
    if n < 2 {
        return Err(Error::Insufficient {
            what: "paired readings for regression",
            needed: 2,
            got: n,
        });
    }
    let mx = mean(baseline);
    let my = mean(measured);
    let sxx: f64 = baseline.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("baseline"));
    }
    let sxy: f64 = baseline
        .iter()
        .zip(measured)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // a constant measured column has no defined correlation; report 0
    let pcc = match pearson(baseline, measured) {
        Ok(r) => r,
        Err(Error::ZeroVariance(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(RegressionResult {
        slope,
        intercept,
        pcc,
        n,
    })
}

/// Mean absolute relative deviation from the baseline, in percent.
///
/// This is the "error percentage" panel of the interference analysis; the
/// definition is ours and is reported only, never gated on. `None` if any
/// baseline value is zero.
pub fn error_percentage(baseline: &[f64], measured: &[f64]) -> Option<f64> {
    if baseline.len() != measured.len() || baseline.is_empty() || baseline.contains(&0.0) {
        return None;
    }
    let s: f64 = baseline
        .iter()
        .zip(measured)
        .map(|(b, m)| ((m - b) / b).abs())
        .sum();
    Some(100.0 * s / baseline.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub d_b: f64,
    pub stats: SummaryStats,
    pub regression: RegressionResult,
    /// Mean |measured - baseline| / |baseline| in percent.
    pub error_pct: Option<f64>,
}

/// Per-distance statistics and regressions, all against one baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub baseline: SummaryStats,
    /// Sorted by `d_b`.
    pub per_distance: Vec<CalibrationEntry>,
}

impl CalibrationTable {
    pub fn get(&self, d_b: f64) -> Option<&CalibrationEntry> {
        self.per_distance
            .iter()
            .find(|e| (e.d_b - d_b).abs() < KEY_EPS)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "d_b_m,mean,sigma,slope,intercept,pcc,n")?;
        writeln!(
            out,
            "inf,{},{},1,0,1,{}",
            self.baseline.mean, self.baseline.sigma, self.baseline.n
        )?;
        for e in &self.per_distance {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.d_b,
                e.stats.mean,
                e.stats.sigma,
                e.regression.slope,
                e.regression.intercept,
                e.regression.pcc,
                e.stats.n
            )?;
        }
        Ok(())
    }

    /// Inverse of [`CalibrationTable::write_csv`]. The error percentage is
    /// not part of the csv form and comes back as `None`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers().map_err(csv_parse)?.clone();
        let expected = ["d_b_m", "mean", "sigma", "slope", "intercept", "pcc", "n"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(Error::Parse {
                source_name: "<calibration>".into(),
                line: 1,
                message: format!("expected header {}", expected.join(",")),
            });
        }
        let mut baseline = None;
        let mut per_distance = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_parse)?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse {
                        source_name: "<calibration>".into(),
                        line,
                        message: format!("column {} is not a number", expected[i]),
                    })
            };
            let stats = SummaryStats {
                mean: num(1)?,
                sigma: num(2)?,
                n: num(6)? as usize,
            };
            let d_b = num(0)?;
            if d_b.is_infinite() {
                baseline = Some(stats);
            } else {
                per_distance.push(CalibrationEntry {
                    d_b,
                    stats,
                    regression: RegressionResult {
                        slope: num(3)?,
                        intercept: num(4)?,
                        pcc: num(5)?,
                        n: stats.n,
                    },
                    error_pct: None,
                });
            }
        }
        let baseline = baseline.ok_or_else(|| Error::MissingColumn {
            source_name: "<calibration>".into(),
            column: "baseline row (d_b_m = inf)".into(),
        })?;
        per_distance.sort_by(|a, b| a.d_b.total_cmp(&b.d_b));
        Ok(Self {
            baseline,
            per_distance,
        })
    }
}

fn csv_parse(e: csv::Error) -> Error {
    Error::Parse {
        source_name: "<calibration>".into(),
        line: e.position().map(|p| p.line()).unwrap_or(0),
        message: e.to_string(),
    }
}

/// Summarise and regress every distance column against `baseline`.
pub fn build_calibration(
    baseline: &[f64],
    columns: &[(f64, Vec<f64>)],
) -> Result<CalibrationTable> {
    let baseline_stats = column_stats(baseline)?;
    let mut per_distance = Vec::with_capacity(columns.len());
    for (d_b, col) in columns {
        if col.len() != baseline.len() {
            return Err(Error::LengthMismatch {
                left: baseline.len(),
                right: col.len(),
            });
        }
        per_distance.push(CalibrationEntry {
            d_b: *d_b,
            stats: column_stats(col)?,
            regression: regress_against_baseline(baseline, col)?,
            error_pct: error_percentage(baseline, col),
        });
    }
    per_distance.sort_by(|a, b| a.d_b.total_cmp(&b.d_b));
    if let Some(w) = per_distance
        .windows(2)
        .find(|w| (w[1].d_b - w[0].d_b).abs() < KEY_EPS)
    {
        return Err(Error::InvalidInput(format!(
            "duplicate distance {}",
            w[0].d_b
        )));
    }
    Ok(CalibrationTable {
        baseline: baseline_stats,
        per_distance,
    })
}

/// Undo a constant-offset interference map: `c -> (c - intercept) / slope`.
pub fn correct_offset(track: &SurveyTrack, r: &RegressionResult) -> Result<SurveyTrack> {
    if r.slope == 0.0 || !r.slope.is_finite() || !r.intercept.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cannot invert regression with slope {}",
            r.slope
        )));
    }
    let (slope, intercept) = (r.slope, r.intercept);
    Ok(track.map_conductivity(|c| (c - intercept) / slope))
}

/// Thresholds for [`recommend_placement`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementPolicy {
    /// Minimum Pearson coefficient against the baseline.
    pub pcc_min: f64,
    /// Mean change (mS/m) to the next tested distance at which readings
    /// count as converged; the first converged distance is the upper limit.
    pub converge_tol: f64,
    /// Largest acceptable probe oscillation sigma, cm.
    pub osc_sigma_max: f64,
}

impl Default for PlacementPolicy {
    fn default() -> Self {
        Self {
            pcc_min: 0.98,
            converge_tol: 0.5,
            osc_sigma_max: 3.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub placement: PlacementConfig,
    pub pcc: f64,
    /// Upper distance limit from the convergence gate, m.
    pub convergence_cap: f64,
    /// Mean change to the next distance at the cap, mS/m.
    pub convergence_delta: Option<f64>,
    pub sigma_dev_cm: f64,
    /// Distances passing both interference gates.
    pub feasible_distances: Vec<f64>,
}

const SIGMA_TIE_CM: f64 = 1e-9;

/// Choose a placement.
///
/// A distance is feasible when its PCC reaches `pcc_min` and it does not lie
/// beyond the convergence limit (the first distance whose mean differs from
/// the next one by at most `converge_tol`). Among feasible distances with
/// oscillation reports, the largest one with some report at or below
/// `osc_sigma_max` wins; its height is the one with the smaller sigma, ties
/// going to the lower height.
pub fn recommend_placement(
    table: &CalibrationTable,
    osc: &[(PlacementConfig, OscillationReport)],
    policy: &PlacementPolicy,
) -> Result<Recommendation> {
    if table.per_distance.is_empty() {
        return Err(Error::Infeasible {
            gate: "calibration table has no distances".into(),
        });
    }
    if osc.is_empty() {
        return Err(Error::Infeasible {
            gate: "no oscillation reports".into(),
        });
    }
    if ![policy.pcc_min, policy.converge_tol, policy.osc_sigma_max]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::InvalidInput(
            "policy thresholds must be finite".into(),
        ));
    }

    let entries = &table.per_distance;
    let mut cap = entries.last().unwrap().d_b;
    let mut cap_delta = None;
    for w in entries.windows(2) {
        let delta = (w[0].stats.mean - w[1].stats.mean).abs();
        if delta <= policy.converge_tol {
            cap = w[0].d_b;
            cap_delta = Some(delta);
            break;
        }
    }

    let pcc_ok: Vec<&CalibrationEntry> = entries
        .iter()
        .filter(|e| e.regression.pcc >= policy.pcc_min)
        .collect();
    if pcc_ok.is_empty() {
        let best = entries
            .iter()
            .map(|e| e.regression.pcc)
            .fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::Infeasible {
            gate: format!("pcc >= {}: best observed {best:.4}", policy.pcc_min),
        });
    }
    let feasible: Vec<&CalibrationEntry> = pcc_ok
        .into_iter()
        .filter(|e| e.d_b <= cap + KEY_EPS)
        .collect();
    if feasible.is_empty() {
        return Err(Error::Infeasible {
            gate: format!(
                "convergence (|delta mean| <= {} mS/m) caps d_b at {cap} m, below every PCC-feasible distance",
                policy.converge_tol
            ),
        });
    }

    let mut with_reports = false;
    let mut best_seen = f64::INFINITY;
    for entry in feasible.iter().rev() {
        let mut candidates: Vec<&(PlacementConfig, OscillationReport)> = osc
            .iter()
            .filter(|(cfg, _)| (cfg.d_b - entry.d_b).abs() < KEY_EPS)
            .collect();
        if candidates.is_empty() {
            continue;
        }
        with_reports = true;
        candidates.sort_by(|a, b| {
            let (sa, sb) = (a.1.sigma_dev, b.1.sigma_dev);
            if (sa - sb).abs() <= SIGMA_TIE_CM {
                a.0.d_h.total_cmp(&b.0.d_h)
            } else {
                sa.total_cmp(&sb)
            }
        });
        let (cfg, report) = candidates[0];
        best_seen = best_seen.min(report.sigma_dev);
        if report.sigma_dev <= policy.osc_sigma_max {
            return Ok(Recommendation {
                placement: *cfg,
                pcc: entry.regression.pcc,
                convergence_cap: cap,
                convergence_delta: cap_delta,
                sigma_dev_cm: report.sigma_dev,
                feasible_distances: feasible.iter().map(|e| e.d_b).collect(),
            });
        }
    }
    if !with_reports {
        return Err(Error::Infeasible {
            gate: "no oscillation report for any feasible distance".into(),
        });
    }
    Err(Error::Infeasible {
        gate: format!(
            "oscillation sigma <= {} cm: smallest observed {best_seen:.3} cm",
            policy.osc_sigma_max
        ),
    })
}

/// Readings at one probe distance, `(d_b, values)`.
pub type Column = (f64, Vec<f64>);

/// Raw paired readings: one row per field point, a baseline reading and
/// one reading per probe distance.
///
/// csv header: `field,baseline,<d_b>,<d_b>,...` with distances in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceTable {
    pub distances: Vec<f64>,
    pub rows: Vec<InterferenceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceRow {
    pub field: String,
    pub baseline: f64,
    pub readings: Vec<f64>,
}

impl InterferenceTable {
    pub fn read_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let parse_err = |line: u64, message: String| Error::Parse {
            source_name: source.into(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        for (k, want) in ["field", "baseline"].iter().enumerate() {
            if headers.get(k) != Some(*want) {
                return Err(Error::MissingColumn {
                    source_name: source.into(),
                    column: (*want).into(),
                });
            }
        }
        let distances = headers
            .iter()
            .skip(2)
            .map(|h| {
                h.parse::<f64>()
                    .ok()
                    .filter(|d| d.is_finite())
                    .ok_or_else(|| {
                        parse_err(
                            1,
                            format!("distance header `{h}` is not a number of metres"),
                        )
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if distances.is_empty() {
            return Err(parse_err(1, "no distance columns".into()));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec =
                rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let num = |k: usize| -> Result<f64> {
                let raw = rec.get(k).unwrap_or("");
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        parse_err(line, format!("column {}: `{raw}` is not a number", k + 1))
                    })
            };
            rows.push(InterferenceRow {
                field: rec.get(0).unwrap_or("").to_string(),
                baseline: num(1)?,
                readings: (2..headers.len()).map(num).collect::<Result<_>>()?,
            });
        }
        Ok(Self { distances, rows })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let head: Vec<String> = self.distances.iter().map(|d| format!("{d:.2}")).collect();
        writeln!(out, "field,baseline,{}", head.join(","))?;
        for r in &self.rows {
            let vals: Vec<String> = r.readings.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{},{}", r.field, r.baseline, vals.join(","))?;
        }
        Ok(())
    }

    /// Field names in order of first appearance.
    pub fn fields(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.field.as_str()) {
                names.push(&r.field);
            }
        }
        names
    }

    /// Baseline and distance columns over the rows of `field`, or over all
    /// rows when `None`.
    pub fn columns(&self, field: Option<&str>) -> Result<(Vec<f64>, Vec<Column>)> {
        let rows: Vec<&InterferenceRow> = self
            .rows
            .iter()
            .filter(|r| field.is_none_or(|f| r.field == f))
            .collect();
        if rows.is_empty() {
            return Err(Error::Empty(match field {
                Some(f) => format!("no rows for field `{f}`"),
                None => "interference table has no rows".into(),
            }));
        }
        let baseline = rows.iter().map(|r| r.baseline).collect();
        let columns = self
            .distances
            .iter()
            .enumerate()
            .map(|(k, d)| (*d, rows.iter().map(|r| r.readings[k]).collect()))
            .collect();
        Ok((baseline, columns))
    }

    pub fn calibration(&self, field: Option<&str>) -> Result<CalibrationTable> {
        let (baseline, columns) = self.columns(field)?;
        build_calibration(&baseline, &columns)
    }
}
