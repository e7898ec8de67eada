//! Ingest of externally produced object detections (JSON lines) and the
//! per-box confidence filter.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default detector-confidence cut: boxes must score strictly above it.
pub const DEFAULT_DET_THRESHOLD: f64 = 0.005;

/// Pixel box in original-image coordinates, serialized as
/// `[x_min, y_min, x_max, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl From<[f64; 4]> for BoundingBox {
    fn from([x_min, y_min, x_max, y_max]: [f64; 4]) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

impl BoundingBox {
    pub fn is_valid(&self) -> bool {
        let c: [f64; 4] = (*self).into();
        c.iter().all(|v| v.is_finite()) && 0.0 <= self.x_min && self.x_min < self.x_max && 0.0 <= self.y_min && self.y_min < self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "class")]
    pub class_name: String,
    pub score: f64,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

/// One line of the detections file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageDetections {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub detections: Vec<Detection>,
}

impl ImageDetections {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::DetectionRecord {
            image_id: self.image_id.clone(),
            reason,
        };
        if self.image_id.is_empty() {
            return Err(bad("image_id is empty".into()));
        }
        for (i, d) in self.detections.iter().enumerate() {
            if d.class_name.is_empty() {
                return Err(bad(format!("detection {i} has an empty class")));
            }
            if !(0.0..=1.0).contains(&d.score) {
                return Err(bad(format!("detection {i} score {} outside [0, 1]", d.score)));
            }
            if !d.bbox.is_valid() {
                return Err(bad(format!("detection {i} box {:?} is not a valid box", <[f64; 4]>::from(d.bbox))));
            }
        }
        Ok(())
    }
}

pub type DetectionSet = BTreeMap<String, ImageDetections>;

pub fn parse_detections_reader(reader: impl BufRead) -> Result<DetectionSet> {
    let mut out = DetectionSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::DetectionLine { line: line_no, reason: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ImageDetections = serde_json::from_str(&line).map_err(|e| Error::DetectionLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        record.validate()?;
        if out.contains_key(&record.image_id) {
            return Err(Error::DetectionRecord {
                image_id: record.image_id,
                reason: format!("duplicate image_id on line {line_no}"),
            });
        }
        out.insert(record.image_id.clone(), record);
    }
    Ok(out)
}

pub fn parse_detections(path: impl AsRef<Path>) -> Result<DetectionSet> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_detections_reader(std::io::BufReader::new(f))
}

pub fn write_detections<'a>(mut w: impl Write, records: impl IntoIterator<Item = &'a ImageDetections>) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Keeps detections scoring strictly above `threshold`, in order.
pub fn filter_detections(dets: &[Detection], threshold: f64) -> Vec<Detection> {
    dets.iter().filter(|d| d.score > threshold).cloned().collect()
}
