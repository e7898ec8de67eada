//! Patch-pasting label-stability experiment: paste each patch object at a
//! grid of relative positions in every image, re-classify, and tabulate how
//! often (and to what) the predicted label switches.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{composite_over, to_model_input, ImageRgba};
use crate::tensor::{ModelSpec, Prediction};

/// Pasted patches are scaled to this fraction of the image height.
pub const PATCH_HEIGHT_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct PositionGrid {
    positions: Vec<(f64, f64)>,
}

impl PositionGrid {
    pub fn new(positions: Vec<(f64, f64)>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("position grid is empty".into()));
        }
        for (i, &(x, y)) in positions.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::InvalidArgument(format!("position {i} ({x}, {y}) outside [0, 1]²")));
            }
            if positions[..i].contains(&(x, y)) {
                return Err(Error::InvalidArgument(format!("position {i} ({x}, {y}) is a duplicate")));
            }
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// One `cx,cy` pair per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut positions = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parsed = line
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
            match parsed {
                Some(p) => positions.push(p),
                None => return Err(Error::InvalidArgument(format!("positions line {}: expected \"cx,cy\"", n + 1))),
            }
        }
        Self::new(positions)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// The 4×4 lattice over {0.2, 0.4, 0.6, 0.8}² in row-major order, then the
/// image center: 17 positions.
pub fn default_grid() -> PositionGrid {
    let steps = [0.2, 0.4, 0.6, 0.8];
    let mut positions: Vec<(f64, f64)> = steps
        .iter()
        .flat_map(|&y| steps.iter().map(move |&x| (x, y)))
        .collect();
    positions.push((0.5, 0.5));
    PositionGrid::new(positions).expect("default grid is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPatch {
    pub name: String,
    pub image: ImageRgba,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationOutcome {
    pub image_id: String,
    pub patch_name: String,
    pub position_index: usize,
    pub original_label: String,
    pub new_label: String,
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationTrial {
    pub original: Prediction,
    pub altered: Prediction,
}

pub fn predict_image(model: &ModelSpec, image: &ImageRgba) -> Result<Prediction> {
    model.forward(&to_model_input(image, model)?)
}

fn predict_pasted(model: &ModelSpec, image: &ImageRgba, patch: &ImageRgba, position: (f64, f64), height_fraction: f64) -> Result<Prediction> {
    if !(0.0..=1.0).contains(&position.0) || !(0.0..=1.0).contains(&position.1) {
        return Err(Error::InvalidArgument(format!("position {position:?} outside [0, 1]²")));
    }
    let altered = composite_over(image, patch, position, height_fraction)?;
    predict_image(model, &altered)
}

/// Classifies `image` as-is and with `patch` pasted at `position`, both
/// through the same preprocessing.
pub fn perturb_and_predict(
    model: &ModelSpec,
    image: &ImageRgba,
    patch: &ImageRgba,
    position: (f64, f64),
    height_fraction: f64,
) -> Result<PerturbationTrial> {
    Ok(PerturbationTrial {
        original: predict_image(model, image)?,
        altered: predict_pasted(model, image, patch, position, height_fraction)?,
    })
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    /// Sorted by image id, patch name, position index.
    pub outcomes: Vec<PerturbationOutcome>,
    /// `(image_id, error)` for images that could not be processed.
    pub skipped: Vec<(String, String)>,
}

/// Runs every (image, patch, position) combination. Parallel over images in
/// the current rayon pool; output order does not depend on scheduling.
/// Failures on individual images are recorded in `skipped`.
pub fn run_experiment<F>(
    model: &ModelSpec,
    image_ids: &[String],
    load: F,
    patches: &[NamedPatch],
    grid: &PositionGrid,
) -> Result<ExperimentReport>
where
    F: Fn(&str) -> Result<ImageRgba> + Sync,
{
    if image_ids.is_empty() {
        return Err(Error::InvalidArgument("perturbation corpus is empty".into()));
    }
    if patches.is_empty() {
        return Err(Error::InvalidArgument("no patches given".into()));
    }
    let labels = model.labels();
    let per_image: Vec<std::result::Result<Vec<PerturbationOutcome>, (String, String)>> = image_ids
        .par_iter()
        .map(|id| {
            let run = || -> Result<Vec<PerturbationOutcome>> {
                let image = load(id)?;
                let original = &labels[predict_image(model, &image)?.predicted_index];
                let mut out = Vec::with_capacity(patches.len() * grid.len());
                for patch in patches {
                    for (position_index, &pos) in grid.positions().iter().enumerate() {
                        let altered = predict_pasted(model, &image, &patch.image, pos, PATCH_HEIGHT_FRACTION)?;
                        let new_label = &labels[altered.predicted_index];
                        out.push(PerturbationOutcome {
                            image_id: id.clone(),
                            patch_name: patch.name.clone(),
                            position_index,
                            original_label: original.clone(),
                            new_label: new_label.clone(),
                            changed: original != new_label,
                        });
                    }
                }
                Ok(out)
            };
            run().map_err(|e| (id.clone(), e.to_string()))
        })
        .collect();

    let mut report = ExperimentReport::default();
    for r in per_image {
        match r {
            Ok(o) => report.outcomes.extend(o),
            Err(skip) => report.skipped.push(skip),
        }
    }
    report.outcomes.sort_by(|a, b| {
        (&a.image_id, &a.patch_name, a.position_index).cmp(&(&b.image_id, &b.patch_name, b.position_index))
    });
    report.skipped.sort();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub patch_name: String,
    pub position_index: usize,
    pub total: usize,
    pub changed: usize,
    pub percent_changed: f64,
    /// Most frequent label switched to; ties go to the lexicographically
    /// smallest label. `None` when nothing changed.
    pub modal_new_label: Option<String>,
}

/// Per (patch, position) switch rate and modal new label, ordered by patch
/// name then position index.
pub fn summarize(outcomes: &[PerturbationOutcome]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(&str, usize), (usize, BTreeMap<&str, usize>)> = BTreeMap::new();
    for o in outcomes {
        let cell = cells.entry((&o.patch_name, o.position_index)).or_default();
        cell.0 += 1;
        if o.changed {
            *cell.1.entry(&o.new_label).or_default() += 1;
        }
    }
    cells
        .into_iter()
        .map(|((patch, position_index), (total, switched))| {
            let changed: usize = switched.values().sum();
            // BTreeMap iterates labels in order, so the first maximum wins ties.
            let modal = switched
                .iter()
                .fold(None::<(&str, usize)>, |best, (&l, &c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((l, c)),
                })
                .map(|(l, _)| l.to_owned());
            CellSummary {
                patch_name: patch.to_owned(),
                position_index,
                total,
                changed,
                percent_changed: 100.0 * changed as f64 / total as f64,
                modal_new_label: modal,
            }
        })
        .collect()
}

pub fn write_outcomes_jsonl(outcomes: &[PerturbationOutcome], mut out: impl Write) -> std::io::Result<()> {
    for o in outcomes {
        serde_json::to_writer(&mut out, o)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// `patch,position_index,cx,cy,percent_changed,modal_new_label`.
pub fn write_summary_csv(summary: &[CellSummary], grid: &PositionGrid, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["patch", "position_index", "cx", "cy", "percent_changed", "modal_new_label"])?;
    for s in summary {
        let (cx, cy) = grid
            .positions()
            .get(s.position_index)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("position index {} not in grid", s.position_index)))?;
        w.write_record([
            s.patch_name.clone(),
            s.position_index.to_string(),
            format!("{cx:.4}"),
            format!("{cy:.4}"),
            format!("{:.4}", s.percent_changed),
            s.modal_new_label.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::Encode(e.to_string()))
}
