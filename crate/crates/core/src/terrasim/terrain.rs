use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::LocalXY;

use super::Heightmap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerrainKind {
    Smooth,
    Rocky,
    Mixed,
}

impl std::str::FromStr for TerrainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(Self::Smooth),
            "rocky" => Ok(Self::Rocky),
            "mixed" => Ok(Self::Mixed),
            _ => Err(Error::InvalidInput(format!(
                "unknown terrain kind `{s}` (smooth, rocky, mixed)"
            ))),
        }
    }
}

/// Sum-of-waves terrain parameters, m.
///
/// The smooth layer is scaled so `|z| <= smooth_amplitude`. The rock layer
/// is scaled to RMS `rock_rms`, then squashed by
/// `rock_amplitude * tanh(z / rock_amplitude)`, so it never exceeds
/// `rock_amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TerrainParams {
    pub smooth_amplitude: f64,
    pub smooth_wavelength: (f64, f64),
    pub smooth_waves: usize,
    pub rock_amplitude: f64,
    pub rock_rms: f64,
    pub rock_wavelength: (f64, f64),
    pub rock_waves: usize,
}

impl Default for TerrainParams {
    fn default() -> Self {
        Self {
            smooth_amplitude: 0.03,
            smooth_wavelength: (3.0, 10.0),
            smooth_waves: 6,
            rock_amplitude: 0.08,
            rock_rms: 0.0101,
            rock_wavelength: (0.2, 0.5),
            rock_waves: 48,
        }
    }
}

struct Wave {
    kx: f64,
    ky: f64,
    phase: f64,
    amp: f64,
}

fn waves(rng: &mut ChaCha8Rng, n: usize, wl: (f64, f64), amplitude: f64) -> Vec<Wave> {
    let raw: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|_| {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let lambda = if wl.1 > wl.0 {
                rng.random_range(wl.0..wl.1)
            } else {
                wl.0
            };
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let weight = rng.random_range(0.5..1.0);
            (theta, lambda, phase, weight)
        })
        .collect();
    let total: f64 = raw.iter().map(|r| r.3).sum();
    raw.into_iter()
        .map(|(theta, lambda, phase, w)| {
            let k = std::f64::consts::TAU / lambda;
            Wave {
                kx: k * theta.cos(),
                ky: k * theta.sin(),
                phase,
                amp: amplitude * w / total,
            }
        })
        .collect()
}

/// Rescale so the layer's RMS (amplitudes of independent phases) is `rms`.
fn with_rms(mut ws: Vec<Wave>, rms: f64) -> Vec<Wave> {
    let now = (ws.iter().map(|w| w.amp * w.amp).sum::<f64>() / 2.0).sqrt();
    if now > 0.0 {
        for w in &mut ws {
            w.amp *= rms / now;
        }
    }
    ws
}

fn eval(ws: &[Wave], x: f64, y: f64) -> f64 {
    ws.iter()
        .map(|w| w.amp * (w.kx * x + w.ky * y + w.phase).sin())
        .sum()
}

/// Deterministic synthetic terrain over `[0, extent.0] x [0, extent.1]`.
///
/// Smooth is a few long waves; rocky adds many short ones; mixed fades the
/// short waves in from west to east across the middle half of the map.
pub fn synth_heightmap(
    kind: TerrainKind,
    seed: u64,
    extent: (f64, f64),
    cell_size: f64,
    params: &TerrainParams,
) -> Result<Heightmap> {
    let (w, h) = extent;
    if !(w > 0.0 && h > 0.0 && cell_size > 0.0) || !(w + h + cell_size).is_finite() {
        return Err(Error::InvalidInput(format!(
            "terrain extent {w} x {h} m with cell {cell_size} m is invalid"
        )));
    }
    let p = params;
    if !(p.smooth_amplitude >= 0.0 && p.rock_amplitude >= 0.0 && p.rock_rms >= 0.0)
        || !(p.smooth_wavelength.0 > 0.0 && p.smooth_wavelength.1 >= p.smooth_wavelength.0)
        || !(p.rock_wavelength.0 > 0.0 && p.rock_wavelength.1 >= p.rock_wavelength.0)
    {
        return Err(Error::InvalidInput(format!(
            "invalid terrain parameters {p:?}"
        )));
    }
    let ncols = (w / cell_size).round() as usize + 1;
    let nrows = (h / cell_size).round() as usize + 1;
    if ncols < 2 || nrows < 2 {
        return Err(Error::InvalidInput(
            "terrain extent smaller than one cell".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let smooth = waves(
        &mut rng,
        p.smooth_waves,
        p.smooth_wavelength,
        p.smooth_amplitude,
    );
    let rock = with_rms(
        waves(&mut rng, p.rock_waves, p.rock_wavelength, 1.0),
        p.rock_rms,
    );
    let cap = p.rock_amplitude;
    let squash = |v: f64| {
        if cap > 0.0 {
            cap * (v / cap).tanh()
        } else {
            0.0
        }
    };
    let blend = |x: f64| -> f64 {
        match kind {
            TerrainKind::Smooth => 0.0,
            TerrainKind::Rocky => 1.0,
            TerrainKind::Mixed => {
                let t = ((x / w - 0.25) / 0.5).clamp(0.0, 1.0);
                t * t * (3.0 - 2.0 * t)
            }
        }
    };

    let mut z = Vec::with_capacity(ncols * nrows);
    for r in 0..nrows {
        let y = r as f64 * cell_size;
        for c in 0..ncols {
            let x = c as f64 * cell_size;
            let b = blend(x);
            let rough = if b > 0.0 {
                b * squash(eval(&rock, x, y))
            } else {
                0.0
            };
            z.push(eval(&smooth, x, y) + rough);
        }
    }
    Heightmap::new(LocalXY::new(0.0, 0.0), cell_size, ncols, nrows, z)
}
