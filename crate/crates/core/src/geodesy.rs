//! WGS-84 <-> UTM conversion and the planar survey frame.
//!
//! The transverse Mercator mapping uses the Krüger series carried to sixth
//! order in the third flattening `n`, which keeps the projection error in
//! the nanometre range inside a zone. Altitude is never involved: every
//! transform here is horizontal only.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result, Zone};

const WGS84_A: f64 = 6_378_137.0;
const WGS84_F: f64 = 1.0 / 298.257_223_563;
const K0: f64 = 0.9996;
const FALSE_EASTING: f64 = 500_000.0;
const FALSE_NORTHING_SOUTH: f64 = 10_000_000.0;
/// Latitude band where the projection is used.
pub const MAX_ABS_LAT: f64 = 84.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoCoord {
    pub lat: f64,
    pub lon: f64,
}

impl GeoCoord {
    /// Validated constructor. Longitude is normalised into [-180, 180).
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(invalid(format!("non-finite coordinate ({lat}, {lon})")));
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::OutOfRange(format!("latitude {lat}")));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(Error::OutOfRange(format!("longitude {lon}")));
        }
        Ok(Self {
            lat,
            lon: if lon == 180.0 { -180.0 } else { lon },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    North,
    South,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtmCoord {
    pub zone: u8,
    pub hemisphere: Hemisphere,
    pub easting: f64,
    pub northing: f64,
}

impl UtmCoord {
    pub fn new(zone: u8, hemisphere: Hemisphere, easting: f64, northing: f64) -> Result<Self> {
        let u = Self {
            zone,
            hemisphere,
            easting,
            northing,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=60).contains(&self.zone) {
            return Err(Error::OutOfRange(format!("UTM zone {}", self.zone)));
        }
        if !self.easting.is_finite() || !self.northing.is_finite() {
            return Err(invalid("non-finite UTM coordinate"));
        }
        if !(self.easting > 0.0 && self.easting < 1_000_000.0) {
            return Err(Error::OutOfRange(format!("easting {}", self.easting)));
        }
        if !(0.0..=10_000_000.0).contains(&self.northing) {
            return Err(Error::OutOfRange(format!("northing {}", self.northing)));
        }
        Ok(())
    }

    pub fn zone_label(&self) -> Zone {
        Zone {
            number: self.zone,
            north: self.hemisphere == Hemisphere::North,
        }
    }
}

/// Metres east/north of a survey origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalXY {
    pub x: f64,
    pub y: f64,
}

impl LocalXY {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &LocalXY) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

fn normalize_lon(lon: f64) -> f64 {
    if (-180.0..180.0).contains(&lon) {
        return lon;
    }
    let l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return exactly 360 - eps rounding to 180
    if l >= 180.0 {
        l - 360.0
    } else {
        l
    }
}

/// Standard UTM zone for a position, including the Norway and Svalbard
/// exceptions.
pub fn zone_for(p: GeoCoord) -> u8 {
    let lon = normalize_lon(p.lon);
    let mut zone = (((lon + 180.0) / 6.0).floor() as i32 + 1).clamp(1, 60) as u8;
    if (56.0..64.0).contains(&p.lat) && (3.0..12.0).contains(&lon) {
        zone = 32;
    }
    if (72.0..=84.0).contains(&p.lat) && (0.0..42.0).contains(&lon) {
        zone = if lon < 9.0 {
            31
        } else if lon < 21.0 {
            33
        } else if lon < 33.0 {
            35
        } else {
            37
        };
    }
    zone
}

pub fn central_meridian(zone: u8) -> f64 {
    f64::from(zone) * 6.0 - 183.0
}

struct Series {
    e: f64,
    rect_a: f64,
    alpha: [f64; 6],
    beta: [f64; 6],
}

fn series() -> Series {
    let n = WGS84_F / (2.0 - WGS84_F);
    let n2 = n * n;
    let n3 = n2 * n;
    let n4 = n3 * n;
    let n5 = n4 * n;
    let n6 = n5 * n;
    let e = (WGS84_F * (2.0 - WGS84_F)).sqrt();
    let rect_a = WGS84_A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
    let alpha = [
        n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0
            + 7891.0 * n6 / 37800.0,
        13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0
            - 1_983_433.0 * n6 / 1_935_360.0,
        61.0 * n3 / 240.0 - 103.0 * n4 / 140.0
            + 15061.0 * n5 / 26880.0
            + 167_603.0 * n6 / 181_440.0,
        49561.0 * n4 / 161_280.0 - 179.0 * n5 / 168.0 + 6_601_661.0 * n6 / 7_257_600.0,
        34729.0 * n5 / 80640.0 - 3_418_889.0 * n6 / 1_995_840.0,
        212_378_941.0 * n6 / 319_334_400.0,
    ];
    let beta = [
        n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 - 81.0 * n5 / 512.0
            + 96199.0 * n6 / 604_800.0,
        n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0
            - 1_118_711.0 * n6 / 3_870_720.0,
        17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 + 5569.0 * n6 / 90720.0,
        4397.0 * n4 / 161_280.0 - 11.0 * n5 / 504.0 - 830_251.0 * n6 / 7_257_600.0,
        4583.0 * n5 / 161_280.0 - 108_847.0 * n6 / 3_991_680.0,
        20_648_693.0 * n6 / 638_668_800.0,
    ];
    Series {
        e,
        rect_a,
        alpha,
        beta,
    }
}

/// Forward transform using the zone derived from the position.
pub fn wgs84_to_utm(p: GeoCoord) -> Result<UtmCoord> {
    let hemi = if p.lat >= 0.0 {
        Hemisphere::North
    } else {
        Hemisphere::South
    };
    wgs84_to_utm_in_zone(p, zone_for(p), hemi)
}

/// Forward transform into a caller-pinned zone and hemisphere.
pub fn wgs84_to_utm_in_zone(p: GeoCoord, zone: u8, hemisphere: Hemisphere) -> Result<UtmCoord> {
    let p = GeoCoord::new(p.lat, p.lon)?;
    if p.lat.abs() > MAX_ABS_LAT {
        return Err(Error::OutOfRange(format!(
            "latitude {} outside +/-{MAX_ABS_LAT} degrees",
            p.lat
        )));
    }
    if !(1..=60).contains(&zone) {
        return Err(Error::OutOfRange(format!("UTM zone {zone}")));
    }
    let s = series();
    let phi = p.lat.to_radians();
    let lam = normalize_lon(p.lon - central_meridian(zone)).to_radians();

    let tau = phi.tan();
    let sigma = (s.e * (s.e * tau / (1.0 + tau * tau).sqrt()).atanh()).sinh();
    let tau_p = tau * (1.0 + sigma * sigma).sqrt() - sigma * (1.0 + tau * tau).sqrt();

    let xi_p = tau_p.atan2(lam.cos());
    let eta_p = (lam.sin() / (tau_p * tau_p + lam.cos().powi(2)).sqrt()).asinh();

    let mut xi = xi_p;
    let mut eta = eta_p;
    for (j, a) in s.alpha.iter().enumerate() {
        let k = 2.0 * (j as f64 + 1.0);
        xi += a * (k * xi_p).sin() * (k * eta_p).cosh();
        eta += a * (k * xi_p).cos() * (k * eta_p).sinh();
    }

    let easting = FALSE_EASTING + K0 * s.rect_a * eta;
    let mut northing = K0 * s.rect_a * xi;
    if hemisphere == Hemisphere::South {
        northing += FALSE_NORTHING_SOUTH;
    }
    UtmCoord::new(zone, hemisphere, easting, northing)
}

pub fn utm_to_wgs84(u: UtmCoord) -> Result<GeoCoord> {
    u.validate()?;
    let s = series();
    let northing = match u.hemisphere {
        Hemisphere::North => u.northing,
        Hemisphere::South => u.northing - FALSE_NORTHING_SOUTH,
    };
    let xi = northing / (K0 * s.rect_a);
    let eta = (u.easting - FALSE_EASTING) / (K0 * s.rect_a);

    let mut xi_p = xi;
    let mut eta_p = eta;
    for (j, b) in s.beta.iter().enumerate() {
        let k = 2.0 * (j as f64 + 1.0);
        xi_p -= b * (k * xi).sin() * (k * eta).cosh();
        eta_p -= b * (k * xi).cos() * (k * eta).sinh();
    }

    let tau_p = xi_p.sin() / (eta_p.sinh().powi(2) + xi_p.cos().powi(2)).sqrt();
    let lam = eta_p.sinh().atan2(xi_p.cos());

    // Newton iteration from conformal to geodetic latitude.
    let e2 = s.e * s.e;
    let mut tau = tau_p;
    for _ in 0..10 {
        let sigma = (s.e * (s.e * tau / (1.0 + tau * tau).sqrt()).atanh()).sinh();
        let tau_i = tau * (1.0 + sigma * sigma).sqrt() - sigma * (1.0 + tau * tau).sqrt();
        let dtau = (tau_p - tau_i) / (1.0 + tau_i * tau_i).sqrt() * (1.0 + (1.0 - e2) * tau * tau)
            / ((1.0 - e2) * (1.0 + tau * tau).sqrt());
        tau += dtau;
        if dtau.abs() < 1e-15 * tau.abs().max(1.0) {
            break;
        }
    }

    let lat = tau.atan().to_degrees();
    let lon = normalize_lon(central_meridian(u.zone) + lam.to_degrees());
    GeoCoord::new(lat, lon)
}

/// Translate a UTM coordinate into the local frame anchored at `origin`.
pub fn utm_to_local(u: UtmCoord, origin: UtmCoord) -> Result<LocalXY> {
    if u.zone != origin.zone || u.hemisphere != origin.hemisphere {
        return Err(Error::ZoneMismatch(u.zone_label(), origin.zone_label()));
    }
    Ok(LocalXY {
        x: u.easting - origin.easting,
        y: u.northing - origin.northing,
    })
}

/// A survey's planar frame: the zone of the first fix is used for every
/// point, even across a zone boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyFrame {
    pub origin: UtmCoord,
}

impl SurveyFrame {
    pub fn anchored_at(first: GeoCoord) -> Result<Self> {
        Ok(Self {
            origin: wgs84_to_utm(first)?,
        })
    }

    pub fn from_origin(origin: UtmCoord) -> Self {
        Self { origin }
    }

    pub fn to_utm(&self, p: GeoCoord) -> Result<UtmCoord> {
        wgs84_to_utm_in_zone(p, self.origin.zone, self.origin.hemisphere)
    }

    pub fn to_local(&self, p: GeoCoord) -> Result<LocalXY> {
        utm_to_local(self.to_utm(p)?, self.origin)
    }

    pub fn local_to_utm(&self, xy: LocalXY) -> UtmCoord {
        UtmCoord {
            zone: self.origin.zone,
            hemisphere: self.origin.hemisphere,
            easting: self.origin.easting + xy.x,
            northing: self.origin.northing + xy.y,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Reference values from PROJ (pyproj, EPSG:326xx / EPSG:327xx),
    // computed independently of this module.
    const ORACLE: &[(f64, f64, u8, Hemisphere, f64, f64)] = &[
        (
            33.972760,
            -117.320437,
            11,
            Hemisphere::North,
            470398.836911,
            3759181.921919,
        ),
        (
            33.0,
            -114.1,
            11,
            Hemisphere::North,
            770953.331538,
            3655023.521675,
        ),
        (
            80.0,
            -119.5,
            11,
            Hemisphere::North,
            451550.129743,
            8882626.944947,
        ),
        (
            -45.0,
            -117.3,
            11,
            Hemisphere::South,
            476355.410910,
            5017005.828680,
        ),
    ];

    #[test]
    fn central_meridian_on_equator_maps_to_false_easting() {
        let u = wgs84_to_utm(GeoCoord::new(0.0, -117.0).unwrap()).unwrap();
        assert_eq!(u.zone, 11);
        assert_eq!(u.hemisphere, Hemisphere::North);
        assert!((u.easting - 500_000.0).abs() < 1e-9);
        assert!(u.northing.abs() < 1e-9);

        let g =
            utm_to_wgs84(UtmCoord::new(11, Hemisphere::North, 500_000.0, 0.0).unwrap()).unwrap();
        assert!(g.lat.abs() < 1e-9);
        assert!((g.lon + 117.0).abs() < 1e-9);
    }

    #[test]
    fn matches_reference_oracle_to_a_centimetre() {
        for &(lat, lon, zone, hemi, e, n) in ORACLE {
            let u = wgs84_to_utm_in_zone(GeoCoord::new(lat, lon).unwrap(), zone, hemi).unwrap();
            assert!(
                (u.easting - e).abs() < 0.01,
                "{lat},{lon}: E {} vs {e}",
                u.easting
            );
            assert!(
                (u.northing - n).abs() < 0.01,
                "{lat},{lon}: N {} vs {n}",
                u.northing
            );

            let g = utm_to_wgs84(UtmCoord::new(zone, hemi, e, n).unwrap()).unwrap();
            assert!((g.lat - lat).abs() < 1e-8);
            assert!((g.lon - lon).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_polar_and_non_finite() {
        assert!(wgs84_to_utm(GeoCoord {
            lat: 85.0,
            lon: 0.0
        })
        .is_err());
        assert!(wgs84_to_utm(GeoCoord {
            lat: -84.5,
            lon: 0.0
        })
        .is_err());
        assert!(GeoCoord::new(f64::NAN, 0.0).is_err());
        assert!(wgs84_to_utm(GeoCoord {
            lat: 1.0,
            lon: f64::INFINITY
        })
        .is_err());
    }

    #[test]
    fn utm_validation() {
        assert!(UtmCoord::new(0, Hemisphere::North, 500_000.0, 0.0).is_err());
        assert!(UtmCoord::new(11, Hemisphere::North, 0.0, 0.0).is_err());
        assert!(UtmCoord::new(11, Hemisphere::North, 500_000.0, -1.0).is_err());
    }

    #[test]
    fn zone_exceptions() {
        assert_eq!(zone_for(GeoCoord::new(60.0, 5.0).unwrap()), 32);
        assert_eq!(zone_for(GeoCoord::new(78.0, 10.0).unwrap()), 33);
        assert_eq!(zone_for(GeoCoord::new(33.97, -117.32).unwrap()), 11);
        assert_eq!(zone_for(GeoCoord::new(0.0, 179.999).unwrap()), 60);
    }

    #[test]
    fn local_translation() {
        let o = UtmCoord::new(11, Hemisphere::North, 470_000.0, 3_759_000.0).unwrap();
        assert_eq!(utm_to_local(o, o).unwrap(), LocalXY::new(0.0, 0.0));
        let u = UtmCoord::new(11, Hemisphere::North, 470_003.0, 3_759_004.0).unwrap();
        assert_eq!(utm_to_local(u, o).unwrap(), LocalXY::new(3.0, 4.0));
        let other = UtmCoord::new(12, Hemisphere::North, 470_003.0, 3_759_004.0).unwrap();
        assert!(matches!(
            utm_to_local(other, o),
            Err(Error::ZoneMismatch(..))
        ));
    }

    #[test]
    fn pinned_zone_survey_frame_crosses_boundary() {
        // -114.0 is the 11/12 boundary; the frame keeps zone 11.
        let frame = SurveyFrame::anchored_at(GeoCoord::new(33.0, -114.0001).unwrap()).unwrap();
        let east = frame
            .to_local(GeoCoord::new(33.0, -113.9999).unwrap())
            .unwrap();
        assert_eq!(frame.origin.zone, 11);
        assert!(east.x > 18.0 && east.x < 19.0, "{east:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip_zone_11(lat in -84.0f64..84.0, dlon in -3.0f64..3.0) {
            let p = GeoCoord::new(lat, -117.0 + dlon).unwrap();
            let u = wgs84_to_utm_in_zone(p, 11, if lat >= 0.0 { Hemisphere::North } else { Hemisphere::South });
            // near the poles the zone edge can leave the easting range
            if let Ok(u) = u {
                let q = utm_to_wgs84(u).unwrap();
                prop_assert!((q.lat - p.lat).abs() < 1e-9);
                prop_assert!((q.lon - p.lon).abs() < 1e-9);
            }
        }

        #[test]
        fn round_trip_from_utm(e in 200_000.0f64..800_000.0, n in 0.0f64..9_300_000.0) {
            let u = UtmCoord::new(11, Hemisphere::North, e, n).unwrap();
            let g = utm_to_wgs84(u).unwrap();
            prop_assume!(g.lat.abs() <= MAX_ABS_LAT);
            let v = wgs84_to_utm_in_zone(g, 11, Hemisphere::North).unwrap();
            prop_assert!((v.easting - e).abs() < 1e-3);
            prop_assert!((v.northing - n).abs() < 1e-3);
        }

        #[test]
        fn monotone_in_zone(lat in 0.0f64..80.0, lon in -119.9f64..-114.2, d in 1e-6f64..0.1) {
            let a = wgs84_to_utm_in_zone(GeoCoord::new(lat, lon).unwrap(), 11, Hemisphere::North).unwrap();
            let b = wgs84_to_utm_in_zone(GeoCoord::new(lat, lon + d).unwrap(), 11, Hemisphere::North).unwrap();
            let c = wgs84_to_utm_in_zone(GeoCoord::new(lat + d, lon).unwrap(), 11, Hemisphere::North).unwrap();
            prop_assert!(b.easting > a.easting);
            prop_assert!(c.northing > a.northing);
        }

        #[test]
        fn local_translation_is_isometric(
            pts in proptest::collection::vec((300_000.0f64..700_000.0, 1_000_000.0f64..5_000_000.0), 2..20),
        ) {
            let o = UtmCoord::new(11, Hemisphere::North, 470_000.0, 3_759_000.0).unwrap();
            let locals: Vec<LocalXY> = pts.iter()
                .map(|&(e, n)| utm_to_local(UtmCoord::new(11, Hemisphere::North, e, n).unwrap(), o).unwrap())
                .collect();
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    let d_utm = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                    prop_assert!((locals[i].dist(&locals[j]) - d_utm).abs() <= 1e-9 * d_utm.max(1.0));
                }
            }
        }
    }
}
