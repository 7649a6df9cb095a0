//! Quasi-static probe clearance simulation over a heightfield.
//!
//! At each step the chassis pose is the least-squares plane through the
//! four wheel contacts. The probe tip sits `chassis_length / 2 + d_b` ahead
//! of the footprint centroid along the pitched chassis axis, and `d_h`
//! above the contact plane's centroid height. Clearance is the tip height
//! minus the terrain under it.

mod heightmap;
mod terrain;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::calib::PlacementConfig;
use crate::error::{Error, Result};
use crate::geodesy::LocalXY;

pub use heightmap::Heightmap;
pub use terrain::{synth_heightmap, TerrainKind, TerrainParams};

/// Clearance-deviation statistics for one run. Lengths in cm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub mean_dev: f64,
    pub sigma_dev: f64,
    pub variance_dev: f64,
    pub min_clearance: f64,
    pub collision_count: usize,
    pub n_steps: usize,
}

impl OscillationReport {
    /// Aggregate clearances (m) against the nominal height `d_h` (m).
    pub fn from_clearances(clearances: &[f64], d_h: f64) -> Result<Self> {
        if clearances.is_empty() {
            return Err(Error::Empty("no simulation steps".into()));
        }
        let dev: Vec<f64> = clearances.iter().map(|c| 100.0 * (c - d_h)).collect();
        let sigma = crate::stats::sample_sigma(&dev).unwrap_or(0.0);
        Ok(Self {
            mean_dev: crate::stats::mean(&dev),
            sigma_dev: sigma,
            variance_dev: sigma * sigma,
            min_clearance: 100.0 * clearances.iter().copied().fold(f64::INFINITY, f64::min),
            collision_count: clearances.iter().filter(|c| **c <= 0.0).count(),
            n_steps: clearances.len(),
        })
    }
}

/// Chassis dimensions, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotGeometry {
    pub wheelbase: f64,
    pub track_width: f64,
    pub chassis_length: f64,
    /// Probe mount height above the chassis reference. The flat-ground
    /// calibration to `d_h` absorbs it, so it does not affect clearance.
    pub mount_height: f64,
}

impl Default for RobotGeometry {
    /// Jackal-class platform, 0.508 m long and 0.432 m wide.
    fn default() -> Self {
        Self {
            wheelbase: 0.262,
            track_width: 0.376,
            chassis_length: 0.508,
            mount_height: 0.254,
        }
    }
}

impl RobotGeometry {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.wheelbase,
            self.track_width,
            self.chassis_length,
            self.mount_height,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "robot geometry must be positive: {self:?}"
            )))
        }
    }

    /// Horizontal lever from footprint centroid to probe tip on flat ground.
    pub fn lever(&self, cfg: &PlacementConfig) -> f64 {
        0.5 * self.chassis_length + cfg.d_b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    waypoints: Vec<LocalXY>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<LocalXY>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::Insufficient {
                what: "trajectory waypoints",
                needed: 2,
                got: waypoints.len(),
            });
        }
        if waypoints
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::InvalidInput("non-finite waypoint".into()));
        }
        if let Some(i) = waypoints.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "waypoints {i} and {} coincide",
                i + 1
            )));
        }
        Ok(Self { waypoints })
    }

    pub fn straight(from: LocalXY, to: LocalXY) -> Result<Self> {
        Self::new(vec![from, to])
    }

    pub fn waypoints(&self) -> &[LocalXY] {
        &self.waypoints
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    /// Position and heading at arc length `s` (clamped to the path).
    pub fn at(&self, s: f64) -> (LocalXY, f64) {
        let mut rest = s.max(0.0);
        let last = self.waypoints.len() - 2;
        for (i, w) in self.waypoints.windows(2).enumerate() {
            let len = w[0].dist(&w[1]);
            if rest < len || i == last {
                let t = (rest / len).min(1.0);
                let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
                return (LocalXY::new(w[0].x + t * dx, w[0].y + t * dy), dy.atan2(dx));
            }
            rest -= len;
        }
        unreachable!("trajectory has at least one segment")
    }

    /// csv with header `x_m,y_m`.
    pub fn read_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| csv_err(source, &e))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn {
                    source_name: source.into(),
                    column: name.into(),
                })
        };
        let (cx, cy) = (col("x_m")?, col("y_m")?);
        let mut pts = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_err(source, &e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse {
                        source_name: source.into(),
                        line,
                        message: format!("bad number in column {}", headers.get(i).unwrap_or("?")),
                    })
            };
            pts.push(LocalXY::new(num(cx)?, num(cy)?));
        }
        Self::new(pts)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x_m,y_m")?;
        for p in &self.waypoints {
            writeln!(out, "{},{}", p.x, p.y)?;
        }
        Ok(())
    }
}

fn csv_err(source: &str, e: &csv::Error) -> Error {
    Error::Parse {
        source_name: source.into(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// Chassis pose from the contact plane. Angles in radians; `pitch > 0` is
/// nose up, `roll > 0` raises the right side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
}

fn outside(what: &str, x: f64, y: f64) -> Error {
    Error::OutOfRange(format!(
        "{what} at ({x:.3}, {y:.3}) is outside the heightmap"
    ))
}

pub fn robot_pose_on_terrain(
    h: &Heightmap,
    x: f64,
    y: f64,
    heading: f64,
    geom: &RobotGeometry,
) -> Result<Pose> {
    let (s, c) = heading.sin_cos();
    let (hu, hv) = (0.5 * geom.wheelbase, 0.5 * geom.track_width);
    // (u, v): forward, left
    let mut z = [0.0; 4];
    for (k, (u, v)) in [(hu, hv), (hu, -hv), (-hu, hv), (-hu, -hv)]
        .into_iter()
        .enumerate()
    {
        let px = x + u * c - v * s;
        let py = y + u * s + v * c;
        z[k] = h
            .elevation(px, py)
            .ok_or_else(|| outside("wheel contact", px, py))?;
    }
    let [fl, fr, rl, rr] = z;
    // LS plane over the symmetric rectangle decouples into these sums
    let slope_u = ((fl + fr) - (rl + rr)) / (4.0 * hu);
    let slope_v = ((fl + rl) - (fr + rr)) / (4.0 * hv);
    Ok(Pose {
        z: ((fl + fr) + (rl + rr)) / 4.0,
        pitch: slope_u.atan(),
        roll: slope_v.atan(),
    })
}

/// Ground clearance of the probe tip, m.
#[allow(clippy::too_many_arguments)]
pub fn probe_clearance(
    pose: &Pose,
    geom: &RobotGeometry,
    cfg: &PlacementConfig,
    h: &Heightmap,
    x: f64,
    y: f64,
    heading: f64,
) -> Result<f64> {
    let lever = geom.lever(cfg);
    let (sp, cp) = pose.pitch.sin_cos();
    let reach = lever * cp;
    let tx = x + reach * heading.cos();
    let ty = y + reach * heading.sin();
    let ground = h
        .elevation(tx, ty)
        .ok_or_else(|| outside("probe", tx, ty))?;
    // grouped so flat terrain gives exactly d_h
    Ok(cfg.d_h + ((pose.z - ground) + lever * sp))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Traverse {
    pub report: OscillationReport,
    /// `(s_m, clearance_m)` per step.
    pub clearances: Vec<(f64, f64)>,
}

impl Traverse {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s_m,clearance_m")?;
        for (s, c) in &self.clearances {
            writeln!(out, "{s},{c}")?;
        }
        Ok(())
    }
}

/// Drive `traj` at fixed arc-length `step`, heading along the path.
pub fn simulate_traverse(
    h: &Heightmap,
    traj: &Trajectory,
    geom: &RobotGeometry,
    cfg: &PlacementConfig,
    step: f64,
) -> Result<Traverse> {
    geom.validate()?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!("step must be > 0, got {step}")));
    }
    let total = traj.length();
    let n = (total / step + 1e-9).floor() as usize + 1;
    let mut clearances = Vec::with_capacity(n);
    for i in 0..n {
        let s = i as f64 * step;
        let (p, heading) = traj.at(s);
        let pose = robot_pose_on_terrain(h, p.x, p.y, heading, geom)?;
        let c = probe_clearance(&pose, geom, cfg, h, p.x, p.y, heading)?;
        clearances.push((s, c));
    }
    let values: Vec<f64> = clearances.iter().map(|(_, c)| *c).collect();
    Ok(Traverse {
        report: OscillationReport::from_clearances(&values, cfg.d_h)?,
        clearances,
    })
}

pub const SWEEP_D_B: [f64; 4] = [0.40, 0.50, 0.60, 0.70];
pub const SWEEP_D_H: [f64; 2] = [0.06, 0.11];
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_STEP_M: f64 = 0.02;
/// Default synthetic terrain: 60 m x 8 m at 5 cm.
pub const DEFAULT_EXTENT_M: (f64, f64) = (60.0, 8.0);
pub const DEFAULT_CELL_M: f64 = 0.05;

/// Parallel passes in the default sweep.
pub const DEFAULT_PASSES: usize = 5;

fn edge_margin(geom: &RobotGeometry) -> f64 {
    0.5 * geom.wheelbase.hypot(geom.track_width) + geom.chassis_length + 1.0
}

/// `n` straight west-to-east passes evenly spread across a map, clear of
/// the edges by the footprint plus the longest swept probe lever.
pub fn default_passes(h: &Heightmap, geom: &RobotGeometry, n: usize) -> Result<Vec<Trajectory>> {
    let (x0, y0, x1, y1) = h.bounds();
    let margin = edge_margin(geom);
    let side = 0.5 * geom.wheelbase.hypot(geom.track_width) + 0.1;
    if x1 - x0 <= 2.0 * margin || y1 - y0 <= 2.0 * side || n == 0 {
        return Err(Error::InvalidInput(format!(
            "heightmap {:.2} m x {:.2} m too small for {n} default passes",
            x1 - x0,
            y1 - y0
        )));
    }
    (0..n)
        .map(|k| {
            let y = y0 + side + (y1 - y0 - 2.0 * side) * (k as f64 + 0.5) / n as f64;
            Trajectory::straight(LocalXY::new(x0 + margin, y), LocalXY::new(x1 - margin, y))
        })
        .collect()
}

/// Single straight pass along the middle of a map.
pub fn default_trajectory(h: &Heightmap, geom: &RobotGeometry) -> Result<Trajectory> {
    Ok(default_passes(h, geom, 1)?.remove(0))
}

/// One row of a placement sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub placement: PlacementConfig,
    pub report: OscillationReport,
}

/// Every combination of `d_b` and `d_h`, `d_h` outer. Each report pools
/// the steps of all `passes`.
pub fn placement_sweep(
    h: &Heightmap,
    passes: &[Trajectory],
    geom: &RobotGeometry,
    d_b: &[f64],
    d_h: &[f64],
    step: f64,
) -> Result<Vec<SweepRow>> {
    if passes.is_empty() {
        return Err(Error::InvalidInput(
            "placement sweep needs at least one pass".into(),
        ));
    }
    let mut rows = Vec::with_capacity(d_b.len() * d_h.len());
    for &hh in d_h {
        for &bb in d_b {
            let placement = PlacementConfig::new(bb, hh)?;
            let mut pooled = Vec::new();
            for traj in passes {
                let t = simulate_traverse(h, traj, geom, &placement, step)?;
                pooled.extend(t.clearances.iter().map(|(_, c)| *c));
            }
            let report = OscillationReport::from_clearances(&pooled, hh)?;
            rows.push(SweepRow { placement, report });
        }
    }
    Ok(rows)
}

/// Default rocky-terrain sweep used for placement recommendation.
pub fn default_placement_sweep(seed: u64) -> Result<Vec<SweepRow>> {
    let geom = RobotGeometry::default();
    let h = synth_heightmap(
        TerrainKind::Rocky,
        seed,
        DEFAULT_EXTENT_M,
        DEFAULT_CELL_M,
        &TerrainParams::default(),
    )?;
    let passes = default_passes(&h, &geom, DEFAULT_PASSES)?;
    placement_sweep(&h, &passes, &geom, &SWEEP_D_B, &SWEEP_D_H, DEFAULT_STEP_M)
}

/// Sweep as csv, one row per placement.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(
        out,
        "d_b_m,d_h_m,mean_dev_cm,sigma_dev_cm,variance_dev_cm2,min_clearance_cm,collision_count,n_steps"
    )?;
    for r in rows {
        let o = &r.report;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.placement.d_b,
            r.placement.d_h,
            o.mean_dev,
            o.sigma_dev,
            o.variance_dev,
            o.min_clearance,
            o.collision_count,
            o.n_steps
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat(z: f64) -> Heightmap {
        Heightmap::new(LocalXY::new(-5.0, -5.0), 0.1, 101, 101, vec![z; 101 * 101]).unwrap()
    }

    fn from_fn(f: impl Fn(f64, f64) -> f64) -> Heightmap {
        let (n, cs, o) = (201usize, 0.05, -5.0);
        let mut z = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                z.push(f(o + c as f64 * cs, o + r as f64 * cs));
            }
        }
        Heightmap::new(LocalXY::new(o, o), cs, n, n, z).unwrap()
    }

    fn cfg(d_b: f64, d_h: f64) -> PlacementConfig {
        PlacementConfig::new(d_b, d_h).unwrap()
    }

    #[test]
    fn flat_pose_and_clearance() {
        let h = flat(2.0);
        let g = RobotGeometry::default();
        let p = robot_pose_on_terrain(&h, 0.3, -0.2, 1.1, &g).unwrap();
        assert_eq!(
            p,
            Pose {
                z: 2.0,
                roll: 0.0,
                pitch: 0.0
            }
        );
        for (b, hh) in [(0.4, 0.06), (0.7, 0.11), (1.0, 0.2)] {
            let c = probe_clearance(&p, &g, &cfg(b, hh), &h, 0.3, -0.2, 1.1).unwrap();
            assert_eq!(c, hh);
        }
    }

    #[test]
    fn incline_co_rotates() {
        let grade = 0.12;
        let h = from_fn(|x, _| 1.0 + grade * x);
        let g = RobotGeometry::default();
        let p = robot_pose_on_terrain(&h, 0.0, 0.0, 0.0, &g).unwrap();
        assert!((p.pitch - grade.atan()).abs() < 1e-12);
        assert!(p.roll.abs() < 1e-12);
        let c = probe_clearance(&p, &g, &cfg(0.6, 0.06), &h, 0.0, 0.0, 0.0).unwrap();
        assert!((c - 0.06).abs() < 1e-12);
    }

    #[test]
    fn dip_under_probe_adds_depth() {
        let g = RobotGeometry::default();
        let c0 = cfg(0.6, 0.06);
        let tip = g.lever(&c0);
        let delta = 0.04;
        let h = from_fn(|x, _| if (x - tip).abs() < 0.2 { -delta } else { 0.0 });
        let p = robot_pose_on_terrain(&h, 0.0, 0.0, 0.0, &g).unwrap();
        assert_eq!(p.pitch, 0.0);
        let c = probe_clearance(&p, &g, &c0, &h, 0.0, 0.0, 0.0).unwrap();
        assert!((c - (0.06 + delta)).abs() < 1e-12);
    }

    #[test]
    fn checkerboard_pitch_bound() {
        let a = 0.01;
        let wl = 0.04;
        let g = RobotGeometry::default();
        let bound = (2.0 * a / g.wheelbase).atan();
        let h = from_fn(|x, y| {
            let cx = ((x / (0.5 * wl)).floor() as i64).rem_euclid(2);
            let cy = ((y / (0.5 * wl)).floor() as i64).rem_euclid(2);
            if cx == cy {
                a
            } else {
                -a
            }
        });
        for i in 0..40 {
            for j in 0..8 {
                let (x, y) = (i as f64 * 0.0071, j as f64 * 0.0053);
                for heading in [0.0, 0.3, 1.2, 2.9] {
                    let p = robot_pose_on_terrain(&h, x, y, heading, &g).unwrap();
                    assert!(p.pitch.abs() <= bound + 1e-12);
                }
            }
        }
    }

    #[test]
    fn footprint_outside_is_error() {
        let h = flat(0.0);
        let g = RobotGeometry::default();
        assert!(matches!(
            robot_pose_on_terrain(&h, 4.99, 0.0, 0.0, &g),
            Err(Error::OutOfRange(_))
        ));
        let p = robot_pose_on_terrain(&h, 4.5, 0.0, 0.0, &g).unwrap();
        assert!(probe_clearance(&p, &g, &cfg(0.7, 0.06), &h, 4.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn flat_traverse_is_zero() {
        let h = flat(0.37);
        let g = RobotGeometry::default();
        let traj = Trajectory::new(vec![
            LocalXY::new(-3.0, -3.0),
            LocalXY::new(2.0, -1.0),
            LocalXY::new(-1.0, 2.5),
        ])
        .unwrap();
        let t = simulate_traverse(&h, &traj, &g, &cfg(0.7, 0.11), 0.05).unwrap();
        let r = t.report;
        assert_eq!((r.mean_dev, r.sigma_dev, r.variance_dev), (0.0, 0.0, 0.0));
        assert_eq!(r.collision_count, 0);
        assert_eq!(r.n_steps, t.clearances.len());
        assert!((r.min_clearance - 11.0).abs() < 1e-12);
    }

    #[test]
    fn trench_collides() {
        let g = RobotGeometry::default();
        let h = from_fn(|x, _| if (x - 1.0).abs() < 0.25 { -0.15 } else { 0.0 });
        let traj = Trajectory::straight(LocalXY::new(-3.0, 0.0), LocalXY::new(3.0, 0.0)).unwrap();
        let t = simulate_traverse(&h, &traj, &g, &cfg(0.5, 0.06), 0.02).unwrap();
        assert!(t.report.collision_count >= 1);
        let non_pos = t.clearances.iter().filter(|(_, c)| *c <= 0.0).count();
        assert_eq!(t.report.collision_count, non_pos);
    }

    #[test]
    fn trajectory_validation_and_walk() {
        assert!(Trajectory::new(vec![LocalXY::new(0.0, 0.0)]).is_err());
        assert!(Trajectory::new(vec![LocalXY::new(0.0, 0.0), LocalXY::new(0.0, 0.0)]).is_err());
        let t = Trajectory::new(vec![
            LocalXY::new(0.0, 0.0),
            LocalXY::new(3.0, 0.0),
            LocalXY::new(3.0, 4.0),
        ])
        .unwrap();
        assert_eq!(t.length(), 7.0);
        let (p, hd) = t.at(5.0);
        assert!((p.x - 3.0).abs() < 1e-12 && (p.y - 2.0).abs() < 1e-12);
        assert!((hd - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(Trajectory::read_csv(&buf[..], "t").unwrap(), t);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn vertical_shift_equivariance(c in -50.0f64..50.0, seed in 0u64..1000, d_b in 0.1f64..1.0) {
            let base = synth_heightmap(TerrainKind::Rocky, seed, (6.0, 4.0), 0.05, &TerrainParams::default()).unwrap();
            let lifted = base.map(|z| z + c);
            let g = RobotGeometry::default();
            let traj = Trajectory::straight(LocalXY::new(1.0, 2.0), LocalXY::new(4.0, 2.0)).unwrap();
            let p = cfg(d_b, 0.06);
            let a = simulate_traverse(&base, &traj, &g, &p, 0.05).unwrap();
            let b = simulate_traverse(&lifted, &traj, &g, &p, 0.05).unwrap();
            for ((_, x), (_, y)) in a.clearances.iter().zip(&b.clearances) {
                prop_assert!((x - y).abs() < 1e-9 * c.abs().max(1.0));
            }
        }

        #[test]
        fn flat_identity_any_path(z in -10.0f64..10.0, d_b in 0.1f64..1.0, d_h in 0.01f64..0.3,
                                  hx in -2.0f64..2.0, hy in -2.0f64..2.0) {
            prop_assume!(hx.hypot(hy) > 0.1);
            let h = flat(z);
            let g = RobotGeometry::default();
            let traj = Trajectory::straight(LocalXY::new(0.0, 0.0), LocalXY::new(hx, hy)).unwrap();
            let t = simulate_traverse(&h, &traj, &g, &cfg(d_b, d_h), 0.03).unwrap();
            prop_assert!(t.clearances.iter().all(|(_, c)| *c == d_h));
            prop_assert_eq!(t.report.sigma_dev, 0.0);
            prop_assert_eq!(t.report.collision_count, 0);
        }

        #[test]
        fn report_consistency(seed in 0u64..1000) {
            let h = synth_heightmap(TerrainKind::Rocky, seed, (6.0, 4.0), 0.05, &TerrainParams::default()).unwrap();
            let traj = Trajectory::straight(LocalXY::new(1.0, 2.0), LocalXY::new(4.0, 2.0)).unwrap();
            let t = simulate_traverse(&h, &traj, &RobotGeometry::default(), &cfg(0.7, 0.02), 0.02).unwrap();
            let r = t.report;
            prop_assert!((r.variance_dev - r.sigma_dev * r.sigma_dev).abs() < 1e-9);
            prop_assert_eq!(r.collision_count, t.clearances.iter().filter(|(_, c)| *c <= 0.0).count());
        }
    }

    proptest! {
        // statistical property of finite runs: fixed generator seed keeps it reproducible
        #![proptest_config(ProptestConfig {
            cases: 24,
            rng_seed: proptest::test_runner::RngSeed::Fixed(0x7e44a),
            ..ProptestConfig::default()
        })]

        #[test]
        fn sigma_non_decreasing_in_d_b(seed in any::<u64>()) {
            let rows = default_placement_sweep(seed).unwrap();
            for per_h in rows.chunks(SWEEP_D_B.len()) {
                for w in per_h.windows(2) {
                    prop_assert!(w[0].report.sigma_dev <= w[1].report.sigma_dev, "{:?}", per_h);
                }
            }
        }
    }
}
