//! Box importance (mean normalized CAM activation inside a detection box)
//! and selection of the high-importance set.

use serde::{Deserialize, Serialize};

use crate::attribution::ActivationMap;
use crate::detection::{BoundingBox, Detection};
use crate::error::{Error, Result};

/// Default importance cut: boxes must score strictly above it.
pub const DEFAULT_CACT_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDetection {
    pub detection: Detection,
    pub c_act: f64,
}

/// Half-open pixel index range covered by `[lo, hi)` under the pixel-center
/// rule `lo <= i + 0.5 < hi`, clipped to `0..len`.
fn covered(lo: f64, hi: f64, len: usize) -> (usize, usize) {
    let first = (lo - 0.5).ceil().max(0.0);
    let end = (hi - 0.5).ceil().max(0.0);
    ((first as usize).min(len), (end as usize).min(len))
}

/// Number of map pixels whose centers fall inside `bbox`.
pub fn pixel_count(bbox: &BoundingBox, width: usize, height: usize) -> usize {
    let (x0, x1) = covered(bbox.x_min, bbox.x_max, width);
    let (y0, y1) = covered(bbox.y_min, bbox.y_max, height);
    x1.saturating_sub(x0) * y1.saturating_sub(y0)
}

/// Sum of map values at pixels whose centers lie in the (clipped) box,
/// divided by the number of such pixels.
pub fn box_importance(map: &ActivationMap, bbox: &BoundingBox) -> Result<f64> {
    let (x0, x1) = covered(bbox.x_min, bbox.x_max, map.width());
    let (y0, y1) = covered(bbox.y_min, bbox.y_max, map.height());
    if x0 >= x1 || y0 >= y1 {
        return Err(Error::DegenerateBox((*bbox).into()));
    }
    let values = map.values();
    let mut sum = 0f64;
    for y in y0..y1 {
        let row = y * map.width();
        sum += values[row + x0..row + x1].iter().map(|&v| f64::from(v)).sum::<f64>();
    }
    Ok(sum / ((x1 - x0) * (y1 - y0)) as f64)
}

/// Detections whose importance is strictly above `threshold`, in order.
pub fn select_important(dets: &[Detection], map: &ActivationMap, threshold: f64) -> Result<Vec<ScoredDetection>> {
    let mut out = Vec::new();
    for d in dets {
        let c_act = box_importance(map, &d.bbox)?;
        if c_act > threshold {
            out.push(ScoredDetection { detection: d.clone(), c_act });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BStarEntry {
    #[serde(rename = "class")]
    pub class_name: String,
    pub c_act: f64,
}

/// One line of the per-image high-importance cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BStarRecord {
    pub image_id: String,
    pub predicted_label: String,
    pub method: String,
    pub bstar: Vec<BStarEntry>,
}

impl BStarRecord {
    pub fn new(image_id: &str, predicted_label: &str, method: &str, selected: &[ScoredDetection]) -> Self {
        Self {
            image_id: image_id.to_owned(),
            predicted_label: predicted_label.to_owned(),
            method: method.to_owned(),
            bstar: selected
                .iter()
                .map(|s| BStarEntry {
                    class_name: s.detection.class_name.clone(),
                    c_act: s.c_act,
                })
                .collect(),
        }
    }
}
