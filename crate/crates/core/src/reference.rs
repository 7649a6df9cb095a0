//! Static interference measurements used to calibrate the robot mount.
//!
//! Five points per field, handheld baseline plus robot-mounted readings at
//! ten probe distances (probe 5 cm above ground). The 10 cm column contains
//! saturated and negative readings; they are kept as recorded.

use crate::calib::{build_calibration, CalibrationTable, InterferenceRow, InterferenceTable};
use crate::error::Result;

/// Probe-to-body distances of the measured columns, metres.
pub const DISTANCES_M: [f64; 10] = [0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 1.00];

#[derive(Debug, Clone, PartialEq)]
pub struct FieldBlock {
    pub name: &'static str,
    pub baseline: [f64; 5],
    /// `readings[k]` holds the five readings at `DISTANCES_M[k]`.
    pub readings: [[f64; 5]; 10],
}

impl FieldBlock {
    pub fn columns(&self) -> Vec<(f64, Vec<f64>)> {
        DISTANCES_M
            .iter()
            .zip(&self.readings)
            .map(|(d, r)| (*d, r.to_vec()))
            .collect()
    }
}

// Row-major transcription: each row is one field point, columns are the
// baseline followed by 10..100 cm.
const BARE: [[f64; 11]; 5] = [
    [
        13.9, 39.1, 85.0, 38.0, 26.2, 19.8, 17.1, 15.6, 14.9, 14.6, 14.6,
    ],
    [
        9.9, 36.8, 58.4, 28.8, 18.0, 13.4, 11.6, 10.8, 10.4, 10.2, 10.1,
    ],
    [
        10.9, -2.0, 88.7, 38.8, 24.4, 16.2, 13.2, 12.1, 11.8, 11.4, 11.2,
    ],
    [
        13.2, -17.8, 78.4, 33.8, 22.5, 18.1, 15.0, 14.1, 13.7, 13.3, 13.1,
    ],
    [
        10.3, 66.0, 61.8, 30.3, 20.2, 15.4, 12.8, 11.5, 11.0, 10.7, 10.5,
    ],
];

const OLIVE: [[f64; 11]; 5] = [
    [
        25.3, 77.8, 90.2, 51.9, 37.4, 30.6, 28.0, 26.5, 26.0, 25.6, 25.5,
    ],
    [
        26.0, 47.2, 96.1, 51.3, 36.3, 30.5, 28.1, 27.0, 26.6, 26.4, 26.2,
    ],
    [
        21.8, 7.8, 106.3, 50.6, 34.1, 27.8, 24.4, 23.1, 22.4, 22.1, 21.9,
    ],
    [
        30.3, 50.8, 105.3, 55.2, 41.3, 35.2, 33.1, 31.6, 31.0, 30.8, 30.6,
    ],
    [
        23.2, 59.4, 87.9, 48.1, 32.3, 29.0, 25.6, 24.5, 24.1, 23.8, 23.6,
    ],
];

const CITRUS: [[f64; 11]; 5] = [
    [
        27.3, 73.9, 90.7, 51.7, 35.7, 31.4, 29.2, 28.3, 27.9, 27.6, 27.5,
    ],
    [
        23.0, 69.2, 85.2, 47.3, 33.6, 27.7, 25.3, 24.2, 23.6, 23.4, 23.2,
    ],
    [
        29.2, 73.1, 90.5, 53.5, 39.0, 33.6, 31.3, 30.2, 29.8, 29.5, 29.3,
    ],
    [
        32.2, 35.6, 101.7, 57.8, 43.1, 37.2, 34.7, 33.4, 32.8, 32.5, 32.3,
    ],
    [
        22.7, 50.3, 96.5, 48.9, 33.1, 27.6, 25.3, 24.6, 23.4, 23.1, 23.0,
    ],
];

fn block(name: &'static str, rows: &[[f64; 11]; 5]) -> FieldBlock {
    let mut baseline = [0.0; 5];
    let mut readings = [[0.0; 5]; 10];
    for (p, row) in rows.iter().enumerate() {
        baseline[p] = row[0];
        for k in 0..10 {
            readings[k][p] = row[k + 1];
        }
    }
    FieldBlock {
        name,
        baseline,
        readings,
    }
}

/// Bare field, olive grove, citrus grove.
pub fn interference_blocks() -> [FieldBlock; 3] {
    [
        block("bare", &BARE),
        block("olive", &OLIVE),
        block("citrus", &CITRUS),
    ]
}

/// Baseline and distance columns pooled over all three fields (15 points).
pub fn pooled_columns() -> (Vec<f64>, Vec<(f64, Vec<f64>)>) {
    let blocks = interference_blocks();
    let baseline = blocks.iter().flat_map(|b| b.baseline).collect();
    let columns = DISTANCES_M
        .iter()
        .enumerate()
        .map(|(k, d)| (*d, blocks.iter().flat_map(|b| b.readings[k]).collect()))
        .collect();
    (baseline, columns)
}

pub fn pooled_calibration() -> Result<CalibrationTable> {
    let (baseline, columns) = pooled_columns();
    build_calibration(&baseline, &columns)
}

/// All three fields as a raw interference table, rows in field order.
pub fn interference_table() -> InterferenceTable {
    let rows = interference_blocks()
        .iter()
        .flat_map(|b| {
            (0..5).map(move |p| InterferenceRow {
                field: b.name.to_string(),
                baseline: b.baseline[p],
                readings: b.readings.iter().map(|col| col[p]).collect(),
            })
        })
        .collect();
    InterferenceTable {
        distances: DISTANCES_M.to_vec(),
        rows,
    }
}
