//! MOT Challenge rows: `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`.
//!
//! Parsing and formatting of single lines lives here; reading and writing
//! files is left to the caller.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use thiserror::Error;

use crate::error::GeometryError;
use crate::geometry::{BoundingBox, Detection};
use crate::tracker::TrackerOutput;

/// Identity carried by detection rows.
pub const NO_ID: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRow {
    pub frame: u32,
    pub id: i64,
    pub bbox: BoundingBox,
    pub conf: f64,
    /// World coordinates; read but never interpreted.
    pub world: [f64; 3],
}

impl MotRow {
    pub fn new(frame: u32, id: i64, bbox: BoundingBox, conf: f64) -> Self {
        Self {
            frame,
            id,
            bbox,
            conf,
            world: [-1.0; 3],
        }
    }

    /// Detection seen by source `source_id`. Confidence outside `[0, 1]` is
    /// read as unscored.
    pub fn to_detection(&self, source_id: u32) -> Result<Detection, GeometryError> {
        let conf = if (0.0..=1.0).contains(&self.conf) {
            self.conf
        } else {
            crate::geometry::UNSCORED
        };
        Detection::new(self.frame, self.bbox, conf, source_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RowError {
    #[error("expected at least 6 fields, found {0}")]
    TooFewFields(usize),
    #[error("expected at most 10 fields, found {0}")]
    TooManyFields(usize),
    #[error("invalid {field} `{text}`")]
    InvalidField { field: &'static str, text: String },
    #[error("frame index must be >= 1")]
    ZeroFrame,
    #[error("non-positive box dimension")]
    NonPositiveDimension,
    #[error("non-finite box coordinate")]
    NonFinite,
}

const FIELDS: [&str; 10] = [
    "frame",
    "id",
    "bb_left",
    "bb_top",
    "bb_width",
    "bb_height",
    "conf",
    "x",
    "y",
    "z",
];

/// Parses one comma-separated row. Fields 7 to 10 default to -1.
pub fn parse_row(line: &str) -> Result<MotRow, RowError> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() < 6 {
        return Err(RowError::TooFewFields(fields.len()));
    }
    if fields.len() > 10 {
        return Err(RowError::TooManyFields(fields.len()));
    }
    let invalid = |i: usize| RowError::InvalidField {
        field: FIELDS[i],
        text: fields[i].into(),
    };
    let frame: u32 = fields[0].parse().map_err(|_| invalid(0))?;
    let id: i64 = fields[1].parse().map_err(|_| invalid(1))?;
    let mut reals = [-1.0f64; 8];
    for (i, slot) in reals.iter_mut().enumerate() {
        if let Some(text) = fields.get(i + 2) {
            *slot = text.parse().map_err(|_| invalid(i + 2))?;
        }
    }
    if frame == 0 {
        return Err(RowError::ZeroFrame);
    }
    let bbox = BoundingBox::new(reals[0], reals[1], reals[2], reals[3]).map_err(|e| match e {
        GeometryError::NonPositiveDimension => RowError::NonPositiveDimension,
        _ => RowError::NonFinite,
    })?;
    Ok(MotRow {
        frame,
        id,
        bbox,
        conf: reals[4],
        world: [-1.0; 3],
    })
}

/// Writes `frame,id,left,top,width,height,conf,-1,-1,-1` with every real in
/// its shortest round-trip decimal form.
pub fn write_row(out: &mut impl Write, row: &MotRow) -> fmt::Result {
    let b = &row.bbox;
    write!(
        out,
        "{},{},{},{},{},{},{},-1,-1,-1",
        row.frame,
        row.id,
        b.left(),
        b.top(),
        b.width(),
        b.height(),
        row.conf
    )
}

pub fn format_row(row: &MotRow) -> String {
    let mut s = String::new();
    write_row(&mut s, row).expect("writing to a String cannot fail");
    s
}

/// Sorts rows by `(frame, id)`, keeping input order among equal keys.
pub fn sort_rows(rows: &mut [MotRow]) {
    rows.sort_by_key(|r| (r.frame, r.id));
}

/// Tracker output as submission rows (confidence 1).
pub fn output_rows(output: &TrackerOutput) -> Vec<MotRow> {
    let mut rows: Vec<MotRow> = output
        .rows
        .iter()
        .map(|r| MotRow::new(r.frame, r.track_id as i64, r.bbox, 1.0))
        .collect();
    sort_rows(&mut rows);
    rows
}
