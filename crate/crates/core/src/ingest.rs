//! EMI log and GNSS track parsing, and timestamp-based georeferencing.
//!
//! EMI `csv_v1` header: `t_s,cond_mS_per_m,inphase_ppt[,lat_deg,lon_deg]`.
//! GNSS `csv_v1` header: `t_s,lat_deg,lon_deg,alt_m,fix_quality`.
//! Lines starting with `#` are comments. Empty `inphase_ppt` / `alt_m`
//! fields mean "not recorded".

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::calib::PlacementConfig;
use crate::error::{Error, Result};
use crate::geodesy::GeoCoord;

/// Default outage threshold between bracketing fixes (10 Hz GNSS, ten
/// missed fixes).
pub const DEFAULT_MAX_GAP_S: f64 = 1.0;

/// One EMI reading.
///
/// `conductivity` is the out-of-phase channel in mS/m and may be negative
/// under strong interference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcaSample {
    pub t: f64,
    pub conductivity: f64,
    pub inphase: Option<f64>,
    pub position: Option<GeoCoord>,
}

impl EcaSample {
    pub fn new(t: f64, conductivity: f64) -> Self {
        Self {
            t,
            conductivity,
            inphase: None,
            position: None,
        }
    }

    pub fn at(mut self, position: GeoCoord) -> Self {
        self.position = Some(position);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixQuality {
    RtkFixed,
    RtkFloat,
    Single,
    None,
}

impl FixQuality {
    pub fn as_str(self) -> &'static str {
        match self {
            FixQuality::RtkFixed => "rtk_fixed",
            FixQuality::RtkFloat => "rtk_float",
            FixQuality::Single => "single",
            FixQuality::None => "none",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "rtk_fixed" => FixQuality::RtkFixed,
            "rtk_float" => FixQuality::RtkFloat,
            "single" => FixQuality::Single,
            "none" => FixQuality::None,
            _ => return None,
        })
    }

    /// GGA fix-quality indicator.
    fn from_gga(code: u8) -> Self {
        match code {
            0 => FixQuality::None,
            4 => FixQuality::RtkFixed,
            5 => FixQuality::RtkFloat,
            _ => FixQuality::Single,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnssFix {
    pub t: f64,
    pub pos: GeoCoord,
    pub alt: Option<f64>,
    pub quality: FixQuality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acquisition {
    Manual,
    Robotized,
}

/// Depth of investigation of the EMI probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthMode {
    #[serde(rename = "0.35")]
    Shallow,
    #[serde(rename = "0.7")]
    Deep,
}

impl DepthMode {
    pub fn meters(self) -> f64 {
        match self {
            DepthMode::Shallow => 0.35,
            DepthMode::Deep => 0.7,
        }
    }

    pub fn from_meters(m: f64) -> Result<Self> {
        if (m - 0.35).abs() < 1e-9 {
            Ok(DepthMode::Shallow)
        } else if (m - 0.7).abs() < 1e-9 {
            Ok(DepthMode::Deep)
        } else {
            Err(Error::InvalidInput(format!(
                "depth mode {m} m (expected 0.35 or 0.7)"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyMetadata {
    pub field_id: String,
    pub placement: Option<PlacementConfig>,
    pub depth_mode: DepthMode,
    pub acquisition: Acquisition,
}

impl Default for SurveyMetadata {
    fn default() -> Self {
        Self {
            field_id: String::new(),
            placement: None,
            depth_mode: DepthMode::Deep,
            acquisition: Acquisition::Robotized,
        }
    }
}

/// Georeferenced, time-ordered survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyTrack {
    samples: Vec<EcaSample>,
    pub meta: SurveyMetadata,
}

impl SurveyTrack {
    /// Every sample needs a position and timestamps must be non-decreasing.
    pub fn new(samples: Vec<EcaSample>, meta: SurveyMetadata) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if s.position.is_none() {
                return Err(Error::InvalidInput(format!(
                    "sample {i} (t={}) has no position",
                    s.t
                )));
            }
            if !s.t.is_finite() || !s.conductivity.is_finite() {
                return Err(Error::InvalidInput(format!("sample {i} is not finite")));
            }
        }
        if let Some(w) = samples.windows(2).position(|w| w[1].t < w[0].t) {
            return Err(Error::InvalidInput(format!(
                "timestamps decrease at sample {}: {} -> {}",
                w + 1,
                samples[w].t,
                samples[w + 1].t
            )));
        }
        Ok(Self { samples, meta })
    }

    pub fn samples(&self) -> &[EcaSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = GeoCoord> + '_ {
        self.samples.iter().filter_map(|s| s.position)
    }

    pub fn conductivities(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.conductivity).collect()
    }

    /// Same positions and timestamps, conductivities mapped by `f`.
    pub fn map_conductivity(&self, f: impl Fn(f64) -> f64) -> SurveyTrack {
        let samples = self
            .samples
            .iter()
            .map(|s| EcaSample {
                conductivity: f(s.conductivity),
                ..*s
            })
            .collect();
        SurveyTrack {
            samples,
            meta: self.meta.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmiSchema {
    CsvV1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GnssSchema {
    CsvV1,
    /// GGA sentences carry only time of day; `day_start` is the epoch second
    /// of the UTC midnight the log starts on.
    NmeaGga {
        day_start: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmiLog {
    pub samples: Vec<EcaSample>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GnssTrack {
    pub fixes: Vec<GnssFix>,
    /// Sentences rejected for a missing or wrong checksum.
    pub skipped_checksum: usize,
    /// GGA sentences reporting no fix.
    pub skipped_no_fix: usize,
}

const EMI_REQUIRED: [&str; 3] = ["t_s", "cond_mS_per_m", "inphase_ppt"];
const EMI_POSITION: [&str; 2] = ["lat_deg", "lon_deg"];
const GNSS_COLUMNS: [&str; 5] = ["t_s", "lat_deg", "lon_deg", "alt_m", "fix_quality"];

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader)
}

fn parse_err(source: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line,
        message: message.into(),
    }
}

fn csv_err(source: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => parse_err(source, line, e.to_string()),
    }
}

fn field_f64(source: &str, line: u64, name: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| parse_err(source, line, format!("{name}: cannot parse `{raw}`")))?;
    if !v.is_finite() {
        return Err(parse_err(
            source,
            line,
            format!("{name}: non-finite `{raw}`"),
        ));
    }
    Ok(v)
}

fn optional_f64(source: &str, line: u64, name: &str, raw: &str) -> Result<Option<f64>> {
    if raw.is_empty() {
        Ok(None)
    } else {
        field_f64(source, line, name, raw).map(Some)
    }
}

fn header_index(
    source: &str,
    headers: &csv::StringRecord,
    allowed: &[&str],
) -> Result<Vec<Option<usize>>> {
    for h in headers.iter() {
        if !allowed.contains(&h) {
            return Err(parse_err(source, 1, format!("unknown column `{h}`")));
        }
    }
    Ok(allowed
        .iter()
        .map(|name| headers.iter().position(|h| h == *name))
        .collect())
}

/// Parse an EMI log. Rows keep file order; decreasing timestamps are
/// reported as warnings.
pub fn parse_emi_log<R: Read>(reader: R, schema: EmiSchema) -> Result<EmiLog> {
    parse_emi_log_named(reader, schema, "<emi>")
}

pub fn parse_emi_log_named<R: Read>(reader: R, schema: EmiSchema, source: &str) -> Result<EmiLog> {
    let EmiSchema::CsvV1 = schema;
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(source, e))?.clone();
    let allowed: Vec<&str> = EMI_REQUIRED.iter().chain(&EMI_POSITION).copied().collect();
    let idx = header_index(source, &headers, &allowed)?;
    for (i, name) in EMI_REQUIRED.iter().enumerate() {
        if idx[i].is_none() {
            return Err(Error::MissingColumn {
                source_name: source.to_string(),
                column: name.to_string(),
            });
        }
    }
    let (lat_i, lon_i) = (idx[3], idx[4]);
    if lat_i.is_some() != lon_i.is_some() {
        return Err(Error::MissingColumn {
            source_name: source.to_string(),
            column: if lat_i.is_none() {
                "lat_deg"
            } else {
                "lon_deg"
            }
            .to_string(),
        });
    }

    let mut log = EmiLog::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(source, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != headers.len() {
            return Err(parse_err(
                source,
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        let get = |i: Option<usize>| rec.get(i.unwrap()).unwrap_or("");
        let t = field_f64(source, line, "t_s", get(idx[0]))?;
        let conductivity = field_f64(source, line, "cond_mS_per_m", get(idx[1]))?;
        let inphase = optional_f64(source, line, "inphase_ppt", get(idx[2]))?;
        let position = match (lat_i, lon_i) {
            (Some(a), Some(b)) => {
                let lat = optional_f64(source, line, "lat_deg", get(Some(a)))?;
                let lon = optional_f64(source, line, "lon_deg", get(Some(b)))?;
                match (lat, lon) {
                    (Some(lat), Some(lon)) => Some(
                        GeoCoord::new(lat, lon)
                            .map_err(|e| parse_err(source, line, e.to_string()))?,
                    ),
                    (None, None) => None,
                    _ => return Err(parse_err(source, line, "lat/lon must both be present")),
                }
            }
            _ => None,
        };
        if let Some(prev) = log.samples.last() {
            if t < prev.t {
                log.warnings.push(format!(
                    "{source}:{line}: timestamp {t} precedes previous {}",
                    prev.t
                ));
            }
        }
        log.samples.push(EcaSample {
            t,
            conductivity,
            inphase,
            position,
        });
    }
    Ok(log)
}

/// Parse a GNSS track. Fixes must be strictly increasing in time.
pub fn parse_gnss_track<R: Read>(reader: R, schema: GnssSchema) -> Result<GnssTrack> {
    parse_gnss_track_named(reader, schema, "<gnss>")
}

pub fn parse_gnss_track_named<R: Read>(
    reader: R,
    schema: GnssSchema,
    source: &str,
) -> Result<GnssTrack> {
    let (track, lines) = match schema {
        GnssSchema::CsvV1 => parse_gnss_csv(reader, source)?,
        GnssSchema::NmeaGga { day_start } => parse_gga(reader, day_start, source)?,
    };
    for (w, l) in track.fixes.windows(2).zip(lines.windows(2)) {
        if w[1].t <= w[0].t {
            return Err(parse_err(
                source,
                l[1],
                format!(
                    "fix timestamps out of order: {} (line {}) then {}",
                    w[0].t, l[0], w[1].t
                ),
            ));
        }
    }
    Ok(track)
}

fn parse_gnss_csv<R: Read>(reader: R, source: &str) -> Result<(GnssTrack, Vec<u64>)> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(source, e))?.clone();
    let idx = header_index(source, &headers, &GNSS_COLUMNS)?;
    for (i, name) in GNSS_COLUMNS.iter().enumerate() {
        if idx[i].is_none() {
            return Err(Error::MissingColumn {
                source_name: source.to_string(),
                column: name.to_string(),
            });
        }
    }
    let mut track = GnssTrack::default();
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(source, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != headers.len() {
            return Err(parse_err(
                source,
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        let get = |i: usize| rec.get(idx[i].unwrap()).unwrap_or("");
        let t = field_f64(source, line, "t_s", get(0))?;
        let lat = field_f64(source, line, "lat_deg", get(1))?;
        let lon = field_f64(source, line, "lon_deg", get(2))?;
        let alt = optional_f64(source, line, "alt_m", get(3))?;
        let quality = FixQuality::parse(get(4))
            .ok_or_else(|| parse_err(source, line, format!("fix_quality: unknown `{}`", get(4))))?;
        let pos = GeoCoord::new(lat, lon).map_err(|e| parse_err(source, line, e.to_string()))?;
        track.fixes.push(GnssFix {
            t,
            pos,
            alt,
            quality,
        });
        lines.push(line);
    }
    Ok((track, lines))
}

/// XOR of the bytes between `$` and `*`.
pub fn nmea_checksum(body: &str) -> u8 {
    body.bytes().fold(0u8, |acc, b| acc ^ b)
}

fn split_checksum(sentence: &str) -> Option<(&str, u8)> {
    let s = sentence.strip_prefix('$')?;
    let (body, cs) = s.split_once('*')?;
    let cs = u8::from_str_radix(cs.get(..2)?, 16).ok()?;
    Some((body, cs))
}

fn parse_dm(raw: &str, hemi: &str, deg_digits: usize) -> Option<f64> {
    if raw.len() < deg_digits + 2 || !raw.is_char_boundary(deg_digits) {
        return None;
    }
    let deg: f64 = raw[..deg_digits].parse().ok()?;
    let min: f64 = raw[deg_digits..].parse().ok()?;
    if !(0.0..60.0).contains(&min) {
        return None;
    }
    let v = deg + min / 60.0;
    match hemi {
        "N" | "E" => Some(v),
        "S" | "W" => Some(-v),
        _ => None,
    }
}

fn parse_hms(raw: &str) -> Option<f64> {
    if raw.len() < 6 {
        return None;
    }
    let h: f64 = raw.get(0..2)?.parse().ok()?;
    let m: f64 = raw.get(2..4)?.parse().ok()?;
    let s: f64 = raw.get(4..)?.parse().ok()?;
    if h >= 24.0 || m >= 60.0 || s >= 61.0 {
        return None;
    }
    Some(h * 3600.0 + m * 60.0 + s)
}

fn parse_gga<R: Read>(
    mut reader: R,
    day_start: f64,
    source: &str,
) -> Result<(GnssTrack, Vec<u64>)> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut track = GnssTrack::default();
    let mut lines = Vec::new();
    let mut day_offset = 0.0;
    let mut last_tod: Option<f64> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let raw = raw.trim();
        if raw.is_empty() || !raw.starts_with('$') {
            continue;
        }
        let Some((body, expected)) = split_checksum(raw) else {
            track.skipped_checksum += 1;
            continue;
        };
        if nmea_checksum(body) != expected {
            track.skipped_checksum += 1;
            continue;
        }
        let fields: Vec<&str> = body.split(',').collect();
        if fields[0].len() != 5 || !fields[0].ends_with("GGA") {
            continue;
        }
        if fields.len() < 10 {
            return Err(parse_err(source, line, "truncated GGA sentence"));
        }
        let quality_code: u8 = fields[6]
            .parse()
            .map_err(|_| parse_err(source, line, format!("bad fix quality `{}`", fields[6])))?;
        if quality_code == 0 || fields[2].is_empty() || fields[4].is_empty() {
            track.skipped_no_fix += 1;
            continue;
        }
        let tod = parse_hms(fields[1])
            .ok_or_else(|| parse_err(source, line, format!("bad UTC time `{}`", fields[1])))?;
        if let Some(prev) = last_tod {
            // midnight rollover
            if tod + 43_200.0 < prev {
                day_offset += 86_400.0;
            }
        }
        last_tod = Some(tod);
        let lat = parse_dm(fields[2], fields[3], 2)
            .ok_or_else(|| parse_err(source, line, format!("bad latitude `{}`", fields[2])))?;
        let lon = parse_dm(fields[4], fields[5], 3)
            .ok_or_else(|| parse_err(source, line, format!("bad longitude `{}`", fields[4])))?;
        let alt = if fields[9].is_empty() {
            None
        } else {
            Some(field_f64(source, line, "altitude", fields[9])?)
        };
        let pos = GeoCoord::new(lat, lon).map_err(|e| parse_err(source, line, e.to_string()))?;
        track.fixes.push(GnssFix {
            t: day_start + day_offset + tod,
            pos,
            alt,
            quality: FixQuality::from_gga(quality_code),
        });
        lines.push(line);
    }
    Ok((track, lines))
}

/// Default fix filter: RTK fixed and float solutions.
pub fn rtk_only(fix: &GnssFix) -> bool {
    matches!(fix.quality, FixQuality::RtkFixed | FixQuality::RtkFloat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Georeferenced {
    pub track: SurveyTrack,
    pub dropped: usize,
}

/// Georeference with the default RTK-only fix filter.
pub fn georeference(
    samples: &[EcaSample],
    fixes: &[GnssFix],
    max_gap: f64,
    meta: SurveyMetadata,
) -> Result<Georeferenced> {
    georeference_with(samples, fixes, max_gap, meta, rtk_only)
}

/// Interpolate each sample's position between its two bracketing fixes.
///
/// Samples outside fix coverage, or whose bracketing fixes are more than
/// `max_gap` seconds apart, are dropped.
pub fn georeference_with<F>(
    samples: &[EcaSample],
    fixes: &[GnssFix],
    max_gap: f64,
    meta: SurveyMetadata,
    accept: F,
) -> Result<Georeferenced>
where
    F: Fn(&GnssFix) -> bool,
{
    if !(max_gap > 0.0) || !max_gap.is_finite() {
        return Err(Error::InvalidInput(format!(
            "max_gap must be > 0, got {max_gap}"
        )));
    }
    let fixes: Vec<&GnssFix> = fixes.iter().filter(|f| accept(f)).collect();
    if fixes.is_empty() {
        return Err(Error::Insufficient {
            what: "GNSS fixes passing the quality filter",
            needed: 1,
            got: 0,
        });
    }
    if let Some(w) = fixes.windows(2).find(|w| w[1].t <= w[0].t) {
        return Err(Error::InvalidInput(format!(
            "fixes not time-sorted: {} then {}",
            w[0].t, w[1].t
        )));
    }

    let mut kept = Vec::with_capacity(samples.len());
    let mut dropped = 0;
    for s in samples {
        match locate(&fixes, s.t, max_gap) {
            Some(pos) => kept.push(EcaSample {
                position: Some(pos),
                ..*s
            }),
            None => dropped += 1,
        }
    }
    if kept.is_empty() {
        return Err(Error::Empty(format!(
            "all {} samples fell outside GNSS coverage",
            samples.len()
        )));
    }
    kept.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(Georeferenced {
        track: SurveyTrack::new(kept, meta)?,
        dropped,
    })
}

fn locate(fixes: &[&GnssFix], t: f64, max_gap: f64) -> Option<GeoCoord> {
    let hi = fixes.partition_point(|f| f.t < t);
    if hi < fixes.len() && fixes[hi].t == t {
        return Some(fixes[hi].pos);
    }
    if hi == 0 || hi == fixes.len() {
        return None;
    }
    let (a, b) = (fixes[hi - 1], fixes[hi]);
    let span = b.t - a.t;
    if span > max_gap {
        return None;
    }
    let w = (t - a.t) / span;
    Some(GeoCoord {
        lat: a.pos.lat + w * (b.pos.lat - a.pos.lat),
        lon: a.pos.lon + w * (b.pos.lon - a.pos.lon),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write samples in EMI `csv_v1` with position columns.
pub fn write_track_csv<W: Write>(samples: &[EcaSample], mut out: W) -> Result<()> {
    writeln!(out, "t_s,cond_mS_per_m,inphase_ppt,lat_deg,lon_deg")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.t,
            s.conductivity,
            fmt_opt(s.inphase),
            fmt_opt(s.position.map(|p| p.lat)),
            fmt_opt(s.position.map(|p| p.lon)),
        )?;
    }
    Ok(())
}

pub fn write_gnss_csv<W: Write>(fixes: &[GnssFix], mut out: W) -> Result<()> {
    writeln!(out, "{}", GNSS_COLUMNS.join(","))?;
    for f in fixes {
        writeln!(
            out,
            "{},{},{},{},{}",
            f.t,
            f.pos.lat,
            f.pos.lon,
            fmt_opt(f.alt),
            f.quality.as_str()
        )?;
    }
    Ok(())
}

/// Read a georeferenced track written by [`write_track_csv`].
pub fn read_track_csv<R: Read>(
    reader: R,
    source: &str,
    meta: SurveyMetadata,
) -> Result<SurveyTrack> {
    let log = parse_emi_log_named(reader, EmiSchema::CsvV1, source)?;
    SurveyTrack::new(log.samples, meta)
}
