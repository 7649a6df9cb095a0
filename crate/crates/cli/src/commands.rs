use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use eca_core::calib::InterferenceTable;
use eca_core::geostat::{
    default_grid, grid_around, krige_samples, kriging::DEFAULT_PAD_CELLS, track_to_planar,
    EmpiricalVariogram, MapStats, UtmZone, VariogramFit,
};
use eca_core::ingest::{
    georeference_with, parse_emi_log_named, parse_gnss_track_named, read_track_csv, rtk_only,
    write_track_csv, EmiSchema, FixQuality, GnssSchema, DEFAULT_MAX_GAP_S,
};
use eca_core::terrasim::{
    default_passes, placement_sweep, SweepRow, TerrainKind, TerrainParams, DEFAULT_CELL_M,
    DEFAULT_EXTENT_M, DEFAULT_PASSES, DEFAULT_SEED, DEFAULT_STEP_M, SWEEP_D_B, SWEEP_D_H,
};
use eca_core::{
    align_by_arclength, compare_report, empirical_variogram, fit_exponential, raster_pearson,
    recommend_placement, synth_heightmap, CalibrationTable, CompareOptions, Error, GridSpec,
    Heightmap, Neighborhood, PlacementConfig, PlacementPolicy, RasterGrid, RobotGeometry,
    SurveyMetadata, SurveyTrack, Trajectory, VariogramModel,
};

use crate::config::{
    check_input, check_output, pick, require, CalibrateConfig, CompareConfig, GeorefConfig,
    KrigeConfig, RecommendConfig, SimulateConfig,
};
use crate::plot::{self, Series, Style};
use crate::{
    CalibrateArgs, CliError, CliResult, CompareArgs, GeorefArgs, KrigeArgs, RecommendArgs,
    SimulateArgs, SynthCommand,
};

fn open(p: &Path) -> CliResult<File> {
    File::open(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))
}

fn name(p: &Path) -> String {
    p.display().to_string()
}

fn write_file(p: &Path, f: impl FnOnce(&mut BufWriter<File>) -> eca_core::Result<()>) -> CliResult {
    let file = File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()
        .map_err(|e| CliError::input(format!("{}: {e}", p.display())))
}

fn write_json<T: Serialize>(p: &Path, v: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display())))
}

fn write_svg(p: &Path, svg: String) -> CliResult {
    std::fs::write(p, svg).map_err(|e| CliError::input(format!("{}: {e}", p.display())))
}

fn read_track(p: &Path) -> CliResult<SurveyTrack> {
    Ok(read_track_csv(
        open(p)?,
        &name(p),
        SurveyMetadata::default(),
    )?)
}

/// ASCII grid plus its `.prj` sidecar when one exists.
fn read_raster(p: &Path) -> CliResult<RasterGrid> {
    let mut g = RasterGrid::read_ascii(open(p)?, &name(p))?;
    let prj = p.with_extension("prj");
    if prj.is_file() {
        g.zone = RasterGrid::read_prj(open(&prj)?)?;
    }
    Ok(g)
}

fn outputs(paths: &[&Option<PathBuf>]) -> CliResult {
    for p in paths.iter().filter_map(|p| p.as_deref()) {
        check_output(p)?;
    }
    Ok(())
}

pub fn georef(a: GeorefArgs, c: &GeorefConfig) -> CliResult {
    let emi = require(pick(a.emi, &c.emi), "emi", "georef")?;
    let gnss = require(pick(a.gnss, &c.gnss), "gnss", "georef")?;
    let out = require(pick(a.out, &c.out), "out", "georef")?;
    check_input(&emi)?;
    check_input(&gnss)?;
    check_output(&out)?;

    let day_start = pick(a.day_start, &c.day_start);
    let format = pick(a.gnss_format, &c.gnss_format).unwrap_or_else(|| "csv".into());
    let schema = match format.as_str() {
        "csv" if day_start.is_some() => {
            return Err(CliError::input(
                "--day-start only applies to --gnss-format nmea",
            ))
        }
        "csv" => GnssSchema::CsvV1,
        "nmea" => GnssSchema::NmeaGga {
            day_start: day_start.unwrap_or(0.0),
        },
        other => {
            return Err(CliError::input(format!(
                "unknown --gnss-format `{other}` (csv, nmea)"
            )))
        }
    };
    let accept_any = match pick(a.accept, &c.accept).as_deref() {
        None | Some("rtk") => false,
        Some("any") => true,
        Some(other) => {
            return Err(CliError::input(format!(
                "unknown --accept `{other}` (rtk, any)"
            )))
        }
    };
    let max_gap = pick(a.max_gap, &c.max_gap).unwrap_or(DEFAULT_MAX_GAP_S);

    let log = parse_emi_log_named(open(&emi)?, EmiSchema::CsvV1, &name(&emi))?;
    for w in &log.warnings {
        eprintln!("warning: {}: {w}", emi.display());
    }
    let track = parse_gnss_track_named(open(&gnss)?, schema, &name(&gnss))?;
    if track.skipped_checksum > 0 {
        eprintln!(
            "warning: {}: {} sentences failed the checksum",
            gnss.display(),
            track.skipped_checksum
        );
    }
    let meta = SurveyMetadata {
        field_id: pick(a.field_id, &c.field_id).unwrap_or_default(),
        ..SurveyMetadata::default()
    };
    let res = if accept_any {
        georeference_with(&log.samples, &track.fixes, max_gap, meta, |f| {
            f.quality != FixQuality::None
        })?
    } else {
        georeference_with(&log.samples, &track.fixes, max_gap, meta, rtk_only)?
    };
    write_file(&out, |w| write_track_csv(res.track.samples(), w))?;
    println!("kept {} dropped {}", res.track.len(), res.dropped);
    Ok(())
}

#[derive(Serialize)]
struct CalibrationFile<'a> {
    field: Option<&'a str>,
    #[serde(flatten)]
    table: &'a CalibrationTable,
}

pub fn calibrate(a: CalibrateArgs, c: &CalibrateConfig) -> CliResult {
    let table = require(pick(a.table, &c.table), "table", "calibrate")?;
    let out = require(pick(a.out, &c.out), "out", "calibrate")?;
    let pcc_csv = pick(a.pcc_csv, &c.pcc_csv);
    let svg = pick(a.plot, &c.plot);
    let field = pick(a.field, &c.field);
    check_input(&table)?;
    check_output(&out)?;
    outputs(&[&pcc_csv, &svg])?;

    let raw = InterferenceTable::read_csv(open(&table)?, &name(&table))?;
    let cal = raw.calibration(field.as_deref())?;
    write_json(
        &out,
        &CalibrationFile {
            field: field.as_deref(),
            table: &cal,
        },
    )?;
    if let Some(p) = &pcc_csv {
        write_file(p, |w| cal.write_csv(w))?;
    }
    if let Some(p) = &svg {
        let xy = cal
            .per_distance
            .iter()
            .map(|e| (e.d_b, e.regression.pcc))
            .collect();
        let title = format!(
            "PCC against baseline ({})",
            field.as_deref().unwrap_or("all fields")
        );
        write_svg(
            p,
            plot::render(
                &title,
                "d_b (m)",
                "PCC",
                &[Series {
                    label: "pcc",
                    xy,
                    style: Style::Line,
                }],
            ),
        )?;
    }
    let stdout = std::io::stdout();
    cal.write_csv(stdout.lock())?;
    Ok(())
}

/// Oscillation reports as written by `simulate`, in any of its shapes.
#[derive(Deserialize)]
#[serde(untagged)]
enum ReportFile {
    Sweep {
        rows: Vec<SweepRow>,
    },
    Single {
        placement: PlacementConfig,
        report: eca_core::OscillationReport,
    },
    Rows(Vec<SweepRow>),
}

fn read_reports(p: &Path) -> CliResult<Vec<SweepRow>> {
    let f: ReportFile = serde_json::from_reader(std::io::BufReader::new(open(p)?))
        .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
    Ok(match f {
        ReportFile::Sweep { rows } | ReportFile::Rows(rows) => rows,
        ReportFile::Single { placement, report } => vec![SweepRow { placement, report }],
    })
}

pub fn recommend(a: RecommendArgs, c: &RecommendConfig) -> CliResult {
    let calib = require(pick(a.calib, &c.calib), "calib", "recommend")?;
    let reports = if a.reports.is_empty() {
        c.reports.clone().unwrap_or_default()
    } else {
        a.reports
    };
    if reports.is_empty() {
        return Err(CliError::input(
            "missing --reports (or `reports` under [recommend] in the config file)",
        ));
    }
    let out = pick(a.out, &c.out);
    check_input(&calib)?;
    for p in &reports {
        check_input(p)?;
    }
    outputs(&[&out])?;

    let table: CalibrationTable =
        serde_json::from_reader(std::io::BufReader::new(open(&calib)?))
            .map_err(|e| CliError::input(format!("{}: {e}", calib.display())))?;
    let mut osc = Vec::new();
    for p in &reports {
        osc.extend(
            read_reports(p)?
                .into_iter()
                .map(|r| (r.placement, r.report)),
        );
    }
    let d = PlacementPolicy::default();
    let policy = PlacementPolicy {
        pcc_min: pick(a.pcc_min, &c.pcc_min).unwrap_or(d.pcc_min),
        converge_tol: pick(a.converge_tol, &c.converge_tol).unwrap_or(d.converge_tol),
        osc_sigma_max: pick(a.osc_sigma_max, &c.osc_sigma_max).unwrap_or(d.osc_sigma_max),
    };
    let rec = recommend_placement(&table, &osc, &policy)?;

    let pl = rec.placement;
    println!("placement (d_b, d_h): {:.2} m, {:.2} m", pl.d_b, pl.d_h);
    println!("pcc:         {:.4} >= {}", rec.pcc, policy.pcc_min);
    match rec.convergence_delta {
        Some(delta) => println!(
            "convergence: d_b <= {:.2} m (|delta mean| {delta:.3} <= {} mS/m)",
            rec.convergence_cap, policy.converge_tol
        ),
        None => println!(
            "convergence: not reached, d_b <= {:.2} m (largest tested)",
            rec.convergence_cap
        ),
    }
    println!(
        "sigma_dev:   {:.3} cm <= {} cm",
        rec.sigma_dev_cm, policy.osc_sigma_max
    );
    let feas: Vec<String> = rec
        .feasible_distances
        .iter()
        .map(|d| format!("{d:.2}"))
        .collect();
    println!("feasible d_b: {}", feas.join(" "));
    if let Some(p) = &out {
        write_json(p, &rec)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct KrigeSidecar<'a> {
    model: &'a VariogramModel,
    fitted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<&'a VariogramFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variogram: Option<&'a EmpiricalVariogram>,
    map_stats: MapStats,
    grid: &'a GridSpec,
    zone: UtmZone,
    neighborhood: &'a Neighborhood,
    n_samples: usize,
    max_weight_sum_error: f64,
}

pub fn krige(a: KrigeArgs, c: &KrigeConfig) -> CliResult {
    let track_path = require(pick(a.track, &c.track), "track", "krige")?;
    let out = require(pick(a.out, &c.out), "out", "krige")?;
    let like = pick(a.like, &c.like);
    check_input(&track_path)?;
    if let Some(p) = &like {
        check_input(p)?;
    }
    check_output(&out)?;
    if matches!(
        out.extension().and_then(|e| e.to_str()),
        Some("prj" | "json")
    ) {
        return Err(CliError::input(format!(
            "{}: raster output must not use a sidecar extension",
            out.display()
        )));
    }
    let cell_size = pick(a.cell_size, &c.cell_size);
    if like.is_some() && cell_size.is_some() {
        return Err(CliError::input("--like and --cell-size are exclusive"));
    }
    let pinned = [
        pick(a.nugget, &c.nugget),
        pick(a.sill, &c.sill),
        pick(a.range, &c.range),
    ];

    let track = read_track(&track_path)?;
    if track.len() < 2 {
        return Err(Error::Insufficient {
            what: "samples for kriging",
            needed: 2,
            got: track.len(),
        }
        .into());
    }
    let (samples, zone) = track_to_planar(&track)?;

    let spec = match (&like, cell_size) {
        (Some(p), _) => {
            let g = read_raster(p)?;
            if let Some(z) = g.zone.filter(|z| *z != zone) {
                return Err(Error::GeometryMismatch(format!(
                    "{} is in UTM zone {}{:?}, track is in {}{:?}",
                    p.display(),
                    z.zone,
                    z.hemisphere,
                    zone.zone,
                    zone.hemisphere
                ))
                .into());
            }
            g.spec
        }
        (None, Some(cs)) => grid_around(&samples, cs, DEFAULT_PAD_CELLS)?,
        (None, None) => default_grid(&samples)?,
    };

    let k = pick(a.k_nearest, &c.k_nearest);
    let r = pick(a.max_radius, &c.max_radius);
    let nb = match (k, r) {
        (Some(k_nearest), Some(max_radius)) => Neighborhood {
            k_nearest,
            max_radius,
        },
        _ => {
            let d = Neighborhood::default_for(&samples)?;
            Neighborhood {
                k_nearest: k.unwrap_or(d.k_nearest),
                max_radius: r.unwrap_or(d.max_radius),
            }
        }
    };

    let (model, fit, ev) = match pinned {
        [Some(n), Some(s), Some(rg)] => (VariogramModel::exponential(n, s, rg)?, None, None),
        [None, None, None] => {
            let (x0, x1, y0, y1) = samples.iter().fold(
                (
                    f64::INFINITY,
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                    f64::NEG_INFINITY,
                ),
                |(a, b, c, d), s| (a.min(s.x), b.max(s.x), c.min(s.y), d.max(s.y)),
            );
            let max_lag = pick(a.max_lag, &c.max_lag).unwrap_or(0.5 * (x1 - x0).hypot(y1 - y0));
            let lag_width = pick(a.lag_width, &c.lag_width).unwrap_or(max_lag / 15.0);
            let ev = empirical_variogram(&samples, lag_width, max_lag)?;
            let fit = fit_exponential(&ev)?;
            (fit.model, Some(fit), Some(ev))
        }
        _ => {
            return Err(CliError::input(
                "pin the model with all of --nugget, --sill and --range, or none",
            ))
        }
    };

    let result = krige_samples(&samples, &model, &spec, &nb, Some(zone))?;
    let map_stats = result
        .raster
        .summary()
        .ok_or_else(|| Error::Empty("every raster cell is nodata".into()))?;

    write_file(&out, |w| result.raster.write_ascii(w))?;
    write_file(&out.with_extension("prj"), |w| result.raster.write_prj(w))?;
    write_json(
        &out.with_extension("json"),
        &KrigeSidecar {
            model: &model,
            fitted: fit.is_some(),
            fit: fit.as_ref(),
            variogram: ev.as_ref(),
            map_stats,
            grid: &spec,
            zone,
            neighborhood: &nb,
            n_samples: samples.len(),
            max_weight_sum_error: result.max_weight_sum_error(),
        },
    )?;
    println!(
        "model nugget {:.4} sill {:.4} range {:.3} m ({})",
        model.nugget,
        model.partial_sill,
        model.range,
        if fit.is_some() { "fitted" } else { "pinned" }
    );
    println!(
        "grid {} x {} at {} m; map mean {:.3} sigma {:.3} min {:.3} max {:.3}",
        spec.ncols,
        spec.nrows,
        spec.cell_size,
        map_stats.stats.mean,
        map_stats.stats.sigma,
        map_stats.min,
        map_stats.max
    );
    Ok(())
}

pub fn compare(a: CompareArgs, c: &CompareConfig) -> CliResult {
    let pa = require(pick(a.a, &c.a), "a", "compare")?;
    let pb = require(pick(a.b, &c.b), "b", "compare")?;
    let out = require(pick(a.out, &c.out), "out", "compare")?;
    let ra = pick(a.raster_a, &c.raster_a);
    let rb = pick(a.raster_b, &c.raster_b);
    let series_csv = pick(a.series_csv, &c.series_csv);
    let svg = pick(a.plot, &c.plot);
    for p in [Some(&pa), Some(&pb), ra.as_ref(), rb.as_ref()]
        .into_iter()
        .flatten()
    {
        check_input(p)?;
    }
    if ra.is_some() != rb.is_some() {
        return Err(CliError::input(
            "give both --raster-a and --raster-b, or neither",
        ));
    }
    check_output(&out)?;
    outputs(&[&series_csv, &svg])?;

    let d = CompareOptions::default();
    let opts = CompareOptions {
        n_points: pick(a.n_points, &c.n_points),
        k_sigma: pick(a.k_sigma, &c.k_sigma).unwrap_or(d.k_sigma),
        degree: pick(a.degree, &c.degree).unwrap_or(d.degree),
    };
    let ta = read_track(&pa)?;
    let tb = read_track(&pb)?;
    let mut report = compare_report(&ta, &tb, &opts)?;
    if let (Some(ra), Some(rb)) = (&ra, &rb) {
        let (ga, gb) = (read_raster(ra)?, read_raster(rb)?);
        if let (Some(za), Some(zb)) = (ga.zone, gb.zone) {
            if za != zb {
                return Err(Error::GeometryMismatch(format!(
                    "{} and {} are in different UTM zones",
                    ra.display(),
                    rb.display()
                ))
                .into());
            }
        }
        report.raster_pcc = Some(raster_pearson(&ga, &gb)?);
    }
    write_json(&out, &report)?;

    if series_csv.is_some() || svg.is_some() {
        let al = align_by_arclength(&ta, &tb, report.n_aligned)?;
        if let Some(p) = &series_csv {
            write_file(p, |w| {
                writeln!(w, "s_m,a,b")?;
                for i in 0..al.len() {
                    writeln!(w, "{},{},{}", al.s[i], al.a_values[i], al.b_values[i])?;
                }
                Ok(())
            })?;
        }
        if let Some(p) = &svg {
            let pts = |v: &[f64]| al.s.iter().copied().zip(v.iter().copied()).collect();
            let curve = |f: &eca_core::PolyFit| al.s.iter().map(|s| (*s, f.eval(*s))).collect();
            let series = [
                Series {
                    label: "a",
                    xy: pts(&al.a_values),
                    style: Style::Points,
                },
                Series {
                    label: "b",
                    xy: pts(&al.b_values),
                    style: Style::Points,
                },
                Series {
                    label: "fit a",
                    xy: curve(&report.polyfit_a),
                    style: Style::Line,
                },
                Series {
                    label: "fit b",
                    xy: curve(&report.polyfit_b),
                    style: Style::Line,
                },
            ];
            write_svg(
                p,
                plot::render("Aligned surveys", "s (m)", "ECa (mS/m)", &series),
            )?;
        }
    }

    println!(
        "pcc filtered {:.4} raw {:.4} ({} aligned, {} dropped)",
        report.pcc_filtered, report.pcc_raw, report.n_aligned, report.n_outliers_removed
    );
    println!("offset a - b {:.3} mS/m", report.offset_mS_per_m);
    if let Some(r) = &report.raster_pcc {
        println!("raster pcc {:.4} over {} cells", r.r, r.overlap);
    }
    Ok(())
}

#[derive(Serialize)]
struct SimHeader<'a> {
    seed: Option<u64>,
    terrain: &'a str,
    step_m: f64,
    passes: usize,
}

#[derive(Serialize)]
struct SingleRun<'a> {
    #[serde(flatten)]
    header: SimHeader<'a>,
    placement: PlacementConfig,
    report: eca_core::OscillationReport,
}

#[derive(Serialize)]
struct SweepRun<'a> {
    #[serde(flatten)]
    header: SimHeader<'a>,
    rows: &'a [SweepRow],
}

pub fn simulate(a: SimulateArgs, c: &SimulateConfig) -> CliResult {
    let out = require(pick(a.out, &c.out), "out", "simulate")?;
    let heightmap = pick(a.heightmap, &c.heightmap);
    let trajectory = pick(a.trajectory, &c.trajectory);
    let clearance_csv = pick(a.clearance_csv, &c.clearance_csv);
    let sweep_csv = pick(a.sweep_csv, &c.sweep_csv);
    let svg = pick(a.plot, &c.plot);
    let sweep = a.sweep || c.sweep.unwrap_or(false);
    for p in [heightmap.as_ref(), trajectory.as_ref()]
        .into_iter()
        .flatten()
    {
        check_input(p)?;
    }
    check_output(&out)?;
    outputs(&[&clearance_csv, &sweep_csv, &svg])?;

    let terrain = pick(a.terrain, &c.terrain);
    let seed = pick(a.seed, &c.seed);
    let (h, terrain_desc, seed) = match &heightmap {
        Some(p) => {
            if terrain.is_some() || seed.is_some() {
                return Err(CliError::input("--heightmap excludes --terrain and --seed"));
            }
            (Heightmap::read_ascii(open(p)?, &name(p))?, name(p), None)
        }
        None => {
            let kind: TerrainKind = terrain.as_deref().unwrap_or("rocky").parse()?;
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let extent = (
                pick(a.extent_x, &c.extent_x).unwrap_or(DEFAULT_EXTENT_M.0),
                pick(a.extent_y, &c.extent_y).unwrap_or(DEFAULT_EXTENT_M.1),
            );
            let cell = pick(a.cell_size, &c.cell_size).unwrap_or(DEFAULT_CELL_M);
            let h = synth_heightmap(kind, seed, extent, cell, &TerrainParams::default())?;
            (h, format!("{kind:?}").to_lowercase(), Some(seed))
        }
    };
    let geom = RobotGeometry::default();
    let step = pick(a.step, &c.step).unwrap_or(DEFAULT_STEP_M);
    let passes: Vec<Trajectory> = match &trajectory {
        Some(p) => {
            if a.passes.is_some() || c.passes.is_some() {
                return Err(CliError::input("--trajectory excludes --passes"));
            }
            vec![Trajectory::read_csv(open(p)?, &name(p))?]
        }
        None => {
            let n = pick(a.passes, &c.passes).unwrap_or(if sweep { DEFAULT_PASSES } else { 1 });
            default_passes(&h, &geom, n)?
        }
    };
    let header = SimHeader {
        seed,
        terrain: &terrain_desc,
        step_m: step,
        passes: passes.len(),
    };
    let banner = match seed {
        Some(s) => format!("# seed={s} terrain={terrain_desc}"),
        None => format!("# terrain={terrain_desc}"),
    };
    println!("{}", &banner[2..]);

    if sweep {
        let d_b = pick(a.d_b, &c.d_b);
        let d_h = pick(a.d_h, &c.d_h);
        if d_b.is_some() || d_h.is_some() || clearance_csv.is_some() || svg.is_some() {
            return Err(CliError::input(
                "--sweep runs every tested placement; --d-b, --d-h, --clearance-csv and --plot do not apply",
            ));
        }
        let rows = placement_sweep(&h, &passes, &geom, &SWEEP_D_B, &SWEEP_D_H, step)?;
        write_json(
            &out,
            &SweepRun {
                header,
                rows: &rows,
            },
        )?;
        if let Some(p) = &sweep_csv {
            write_file(p, |w| {
                writeln!(w, "{banner}")?;
                eca_core::terrasim::write_sweep_csv(&rows, w)
            })?;
        }
        println!("d_b_m d_h_m sigma_dev_cm mean_dev_cm collisions");
        for r in &rows {
            println!(
                "{:.2} {:.2} {:.3} {:.3} {}",
                r.placement.d_b,
                r.placement.d_h,
                r.report.sigma_dev,
                r.report.mean_dev,
                r.report.collision_count
            );
        }
        return Ok(());
    }
    if sweep_csv.is_some() {
        return Err(CliError::input("--sweep-csv needs --sweep"));
    }

    let placement = PlacementConfig::new(
        pick(a.d_b, &c.d_b).unwrap_or(0.6),
        pick(a.d_h, &c.d_h).unwrap_or(0.06),
    )?;
    let mut pooled = Vec::new();
    let mut per_pass = Vec::with_capacity(passes.len());
    for traj in &passes {
        let t = eca_core::simulate_traverse(&h, traj, &geom, &placement, step)?;
        pooled.extend(t.clearances.iter().map(|(_, c)| *c));
        per_pass.push(t);
    }
    let report = eca_core::OscillationReport::from_clearances(&pooled, placement.d_h)?;
    write_json(
        &out,
        &SingleRun {
            header,
            placement,
            report,
        },
    )?;
    if let Some(p) = &clearance_csv {
        write_file(p, |w| {
            writeln!(w, "{banner}")?;
            writeln!(w, "pass,s_m,clearance_m")?;
            for (k, t) in per_pass.iter().enumerate() {
                for (s, cl) in &t.clearances {
                    writeln!(w, "{k},{s},{cl}")?;
                }
            }
            Ok(())
        })?;
    }
    if let Some(p) = &svg {
        let series: Vec<Series> = per_pass
            .iter()
            .map(|t| Series {
                label: "clearance",
                xy: t
                    .clearances
                    .iter()
                    .map(|(s, cl)| (*s, 100.0 * cl))
                    .collect(),
                style: Style::Line,
            })
            .collect();
        write_svg(
            p,
            plot::render("Probe clearance", "s (m)", "clearance (cm)", &series),
        )?;
    }
    println!(
        "d_b {:.2} m d_h {:.2} m: sigma_dev {:.3} cm mean_dev {:.3} cm min clearance {:.3} cm collisions {} steps {}",
        placement.d_b,
        placement.d_h,
        report.sigma_dev,
        report.mean_dev,
        report.min_clearance,
        report.collision_count,
        report.n_steps
    );
    Ok(())
}

pub fn synth(cmd: SynthCommand) -> CliResult {
    match cmd {
        SynthCommand::Twin {
            out_dir,
            seed,
            offset,
        } => {
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| CliError::input(format!("{}: {e}", out_dir.display())))?;
            let p = eca_core::synth::TwinParams {
                offset,
                ..Default::default()
            };
            let twin = eca_core::synth::twin_survey(&p, seed)?;
            for (file, track) in [("manual.csv", &twin.manual), ("robot.csv", &twin.robot)] {
                write_file(&out_dir.join(file), |w| {
                    writeln!(w, "# synthetic twin survey seed={seed}")?;
                    write_track_csv(track.samples(), w)
                })?;
            }
            println!(
                "seed={seed} wrote {} samples per track to {}",
                twin.manual.len(),
                out_dir.display()
            );
        }
        SynthCommand::Terrain {
            out,
            kind,
            seed,
            extent_x,
            extent_y,
            cell_size,
        } => {
            check_output(&out)?;
            let kind: TerrainKind = kind.parse()?;
            let h = synth_heightmap(
                kind,
                seed,
                (extent_x, extent_y),
                cell_size,
                &TerrainParams::default(),
            )?;
            write_file(&out, |w| h.write_ascii(w))?;
            println!(
                "seed={seed} wrote {} x {} nodes to {}",
                h.ncols,
                h.nrows,
                out.display()
            );
        }
        SynthCommand::Table { out } => {
            check_output(&out)?;
            write_file(&out, |w| {
                eca_core::reference::interference_table().write_csv(w)
            })?;
        }
    }
    Ok(())
}
