use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use emocam_core::analytics::{rsa, write_counts_csv, write_matrix_heatmap, write_percent_csv, write_rsa_csv, Accumulator, RsaTable};
use emocam_core::attribution::{
    ablation_cam_from_activations, grad_cam_from_trace, normalize_map, occlusion_grid_raw, RawMap,
};
use emocam_core::detection::{filter_detections, parse_detections, DetectionSet};
use emocam_core::imaging::{decode_image, draw_box_outline, render_heatmap_overlay, to_model_input};
use emocam_core::importance::box_importance;
use emocam_core::perturbation::{default_grid, run_experiment, summarize, write_outcomes_jsonl, write_summary_csv, PositionGrid};
use emocam_core::synthetic::{
    demo_classes, demo_labels, lotus_patch, rugby_ball_patch, small_descriptor, soccer_ball_patch, SyntheticCorpus,
};
use emocam_core::tensor::{write_container_file, zoo::random_weights};
use emocam_core::{
    load_model, ActivationMap, AssociationMatrix, BStarRecord, CamMethod, Error, ImageRgba, ModelSpec, NamedPatch,
    ScoredDetection, Tensor,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::Cache;
use crate::config::RunConfig;
use crate::corpus::list_images;
use crate::CliError;

const TOP_K: usize = 25;
const HEATMAP_CELL: usize = 12;

/// One line of `predictions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub image_id: String,
    pub label: String,
    pub probabilities: Vec<f32>,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    finish(w, path)
}

fn load_configured_model(cfg: &RunConfig) -> Result<ModelSpec, CliError> {
    let model = cfg.require(&cfg.model, "model")?;
    let weights = cfg.require(&cfg.weights, "weights")?;
    let spec = load_model(model, weights).map_err(CliError::Model)?;
    info!("model {} ({} labels, hash {:016x})", model.display(), spec.labels().len(), spec.content_hash());
    Ok(spec)
}

fn worker_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?)
}

fn corpus(cfg: &RunConfig) -> Result<Vec<(String, PathBuf)>, CliError> {
    let images = list_images(cfg.require(&cfg.images, "images")?)?;
    if images.is_empty() {
        warn!("no images found");
    }
    Ok(images)
}

/// Lazily decoded image plus whatever model passes have been run on it.
struct ImageWork<'a> {
    model: &'a ModelSpec,
    path: &'a Path,
    image: Option<ImageRgba>,
    input: Option<Tensor>,
}

impl<'a> ImageWork<'a> {
    fn new(model: &'a ModelSpec, path: &'a Path) -> Self {
        Self {
            model,
            path,
            image: None,
            input: None,
        }
    }

    fn image(&mut self) -> Result<&ImageRgba, Error> {
        if self.image.is_none() {
            self.image = Some(decode_image(self.path)?);
        }
        Ok(self.image.as_ref().expect("decoded above"))
    }

    fn input(&mut self) -> Result<&Tensor, Error> {
        if self.input.is_none() {
            let model = self.model;
            let tensor = to_model_input(self.image()?, model)?;
            self.input = Some(tensor);
        }
        Ok(self.input.as_ref().expect("converted above"))
    }
}

fn predict_one(model: &ModelSpec, cache: &Cache, id: &str, work: &mut ImageWork) -> Result<(PredictionRecord, usize), Error> {
    if let Some(rec) = cache.load_prediction(id) {
        if let Some(idx) = model.labels().iter().position(|l| *l == rec.label) {
            if rec.probabilities.len() == model.labels().len() {
                return Ok((rec, idx));
            }
        }
    }
    let pred = model.forward(work.input()?)?;
    let rec = PredictionRecord {
        image_id: id.to_owned(),
        label: model.labels()[pred.predicted_index].clone(),
        probabilities: pred.probabilities,
    };
    cache.store_prediction(&rec);
    Ok((rec, pred.predicted_index))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PredictReport {
    pub images: usize,
    pub predicted: usize,
    pub failed: Vec<(String, String)>,
}

/// Writes `<out>/predictions.jsonl`, one line per image in id order.
pub fn cmd_predict(cfg: &RunConfig) -> Result<PredictReport, CliError> {
    let model = load_configured_model(cfg)?;
    let images = corpus(cfg)?;
    let cache = Cache::new(&cfg.out, &model, cfg.cache, cfg.grid_n);
    let results: Vec<_> = worker_pool(cfg)?.install(|| {
        images
            .par_iter()
            .map(|(id, path)| {
                let mut work = ImageWork::new(&model, path);
                predict_one(&model, &cache, id, &mut work).map(|(r, _)| r).map_err(|e| (id.clone(), e.to_string()))
            })
            .collect()
    });

    let path = cfg.out.join("predictions.jsonl");
    let mut w = create(&path)?;
    let mut report = PredictReport {
        images: images.len(),
        ..Default::default()
    };
    for r in results {
        match r {
            Ok(rec) => {
                serde_json::to_writer(&mut w, &rec).map_err(Error::from)?;
                w.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
                report.predicted += 1;
            }
            Err((id, e)) => {
                warn!("{id}: {e}");
                report.failed.push((id, e));
            }
        }
    }
    finish(w, &path)?;
    if report.images > 0 && report.predicted == 0 {
        return Err(CliError::AllFailed(report.images));
    }
    Ok(report)
}

fn compute_maps(
    model: &ModelSpec,
    cfg: &RunConfig,
    work: &mut ImageWork,
    class: usize,
    missing: &[CamMethod],
) -> Result<Vec<(CamMethod, Result<ActivationMap, Error>)>, Error> {
    let target = model
        .last_conv_layer()
        .ok_or_else(|| Error::InvalidArgument("model has no convolutional layer".into()))?
        .to_owned();
    let (w, h) = {
        let img = work.image()?;
        (img.width(), img.height())
    };
    let input = work.input()?.clone();
    let needs_split = missing.iter().any(|m| *m != CamMethod::OcclusionGrid);
    let split = if needs_split {
        Some(model.forward_split(&input, &target)?)
    } else {
        None
    };
    Ok(missing
        .iter()
        .map(|&method| {
            let raw: Result<RawMap, Error> = match (method, &split) {
                (CamMethod::GradCam, Some((_, trace))) => grad_cam_from_trace(model, trace, &target, class),
                (CamMethod::AblationCam, Some((acts, _))) => ablation_cam_from_activations(model, &target, acts, class),
                (CamMethod::OcclusionGrid, _) => occlusion_grid_raw(model, &input, class, cfg.grid_n, 0.0),
                _ => unreachable!("split computed for gradient and ablation methods"),
            };
            (method, raw.and_then(|r| normalize_map(&r, w, h)))
        })
        .collect())
}

/// Maps for every configured method, from cache where possible.
fn maps_for(
    model: &ModelSpec,
    cfg: &RunConfig,
    cache: &Cache,
    id: &str,
    work: &mut ImageWork,
    class: usize,
    methods: &[CamMethod],
) -> Result<Vec<Result<ActivationMap, Error>>, Error> {
    let mut maps: Vec<Option<Result<ActivationMap, Error>>> = methods.iter().map(|&m| cache.load_map(m, id).map(Ok)).collect();
    let missing: Vec<CamMethod> = methods.iter().zip(&maps).filter(|(_, m)| m.is_none()).map(|(&m, _)| m).collect();
    if !missing.is_empty() {
        for (method, map) in compute_maps(model, cfg, work, class, &missing)? {
            if let Ok(m) = &map {
                cache.store_map(method, id, m);
            }
            let slot = methods.iter().position(|&m| m == method).expect("method requested");
            maps[slot] = Some(map);
        }
    }
    Ok(maps.into_iter().map(|m| m.expect("every slot filled")).collect())
}

/// Detections above the score threshold whose importance is strictly above
/// the importance threshold. Boxes covering no pixel are skipped and counted.
fn select_bstar(cfg: &RunConfig, dets: &[emocam_core::Detection], map: &ActivationMap) -> (Vec<ScoredDetection>, usize) {
    let mut kept = Vec::new();
    let mut degenerate = 0;
    for d in filter_detections(dets, cfg.det_threshold) {
        match box_importance(map, &d.bbox) {
            Ok(c_act) if c_act > cfg.cact_threshold => kept.push(ScoredDetection { detection: d, c_act }),
            Ok(_) => {}
            Err(_) => degenerate += 1,
        }
    }
    (kept, degenerate)
}

fn class_vocabulary(cfg: &RunConfig, detections: &DetectionSet) -> Result<Vec<String>, CliError> {
    let seen: BTreeSet<&str> = detections
        .values()
        .flat_map(|r| r.detections.iter().map(|d| d.class_name.as_str()))
        .collect();
    let Some(path) = &cfg.classes else {
        return Ok(seen.into_iter().map(str::to_owned).collect());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read classes file {}: {e}", path.display())))?;
    let classes: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned).collect();
    let known: BTreeSet<&str> = classes.iter().map(String::as_str).collect();
    if known.len() != classes.len() {
        return Err(CliError::Config(format!("classes file {} has duplicate entries", path.display())));
    }
    if let Some(unknown) = seen.iter().find(|c| !known.contains(**c)) {
        return Err(CliError::Config(format!("detected class {unknown:?} is not in {}", path.display())));
    }
    Ok(classes)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AnalyzeReport {
    pub images: usize,
    pub analyzed: usize,
    /// Images that could not be decoded or classified.
    pub failed: Vec<(String, String)>,
    /// Images with no detection record (treated as having no boxes).
    pub missing_detections: Vec<String>,
    /// Images whose decoded size differs from their detection record.
    pub size_mismatches: Vec<String>,
    pub degenerate_boxes: usize,
    /// Per method, images whose map could not be computed.
    pub method_failures: BTreeMap<String, Vec<(String, String)>>,
}

struct Analyzed {
    id: String,
    label: String,
    missing_detections: bool,
    size_mismatch: bool,
    degenerate: usize,
    per_method: Vec<Result<Vec<ScoredDetection>, String>>,
}

/// For each method: per-image maps, high-importance boxes, association
/// matrices (counts, percentages, top classes) and a heatmap rendering.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<AnalyzeReport, CliError> {
    cfg.require_methods()?;
    let model = load_configured_model(cfg)?;
    let det_path = cfg.require(&cfg.detections, "detections")?;
    let detections = parse_detections(det_path).map_err(|e| CliError::Config(format!("detections: {e}")))?;
    let classes = class_vocabulary(cfg, &detections)?;
    let images = corpus(cfg)?;
    let cache = Cache::new(&cfg.out, &model, cfg.cache, cfg.grid_n);
    let methods = cfg.methods.clone();
    let empty = Vec::new();

    let results: Vec<Result<Analyzed, (String, String)>> = worker_pool(cfg)?.install(|| {
        images
            .par_iter()
            .map(|(id, path)| {
                let run = || -> Result<Analyzed, Error> {
                    let mut work = ImageWork::new(&model, path);
                    let (pred, class) = predict_one(&model, &cache, id, &mut work)?;
                    let maps = maps_for(&model, cfg, &cache, id, &mut work, class, &methods)?;
                    let record = detections.get(id);
                    let dets = record.map_or(&empty, |r| &r.detections);
                    let mut out = Analyzed {
                        id: id.clone(),
                        label: pred.label,
                        missing_detections: record.is_none(),
                        size_mismatch: false,
                        degenerate: 0,
                        per_method: Vec::with_capacity(methods.len()),
                    };
                    for map in maps {
                        match map {
                            Ok(map) => {
                                if let Some(r) = record {
                                    out.size_mismatch |= (r.width as usize, r.height as usize) != (map.width(), map.height());
                                }
                                let (kept, degenerate) = select_bstar(cfg, dets, &map);
                                out.degenerate = out.degenerate.max(degenerate);
                                out.per_method.push(Ok(kept));
                            }
                            Err(e) => out.per_method.push(Err(e.to_string())),
                        }
                    }
                    Ok(out)
                };
                run().map_err(|e| (id.clone(), e.to_string()))
            })
            .collect()
    });

    let mut report = AnalyzeReport {
        images: images.len(),
        ..Default::default()
    };
    let mut analyzed = Vec::new();
    for r in results {
        match r {
            Ok(a) => analyzed.push(a),
            Err((id, e)) => {
                warn!("{id}: {e}");
                report.failed.push((id, e));
            }
        }
    }
    report.analyzed = analyzed.len();
    for a in &analyzed {
        if a.missing_detections {
            report.missing_detections.push(a.id.clone());
        }
        if a.size_mismatch {
            warn!("{}: image size differs from its detection record; boxes are used as given", a.id);
            report.size_mismatches.push(a.id.clone());
        }
        report.degenerate_boxes += a.degenerate;
    }
    if report.images > 0 && analyzed.is_empty() {
        return Err(CliError::AllFailed(report.images));
    }

    for (k, method) in methods.iter().enumerate() {
        let dir = cfg.out.join(method.as_str());
        let mut acc = Accumulator::new(classes.clone(), model.labels().to_vec())?;
        let bstar_path = dir.join("bstar.jsonl");
        let mut bstar = create(&bstar_path)?;
        let failures = report.method_failures.entry(method.as_str().to_owned()).or_default();
        for a in &analyzed {
            match &a.per_method[k] {
                Ok(kept) => {
                    acc.add_image(&a.label, kept.iter().map(|s| s.detection.class_name.as_str()))?;
                    let line = BStarRecord::new(&a.id, &a.label, method.as_str(), kept);
                    serde_json::to_writer(&mut bstar, &line).map_err(Error::from)?;
                    bstar.write_all(b"\n").map_err(|e| CliError::io(&bstar_path, e))?;
                }
                Err(e) => {
                    warn!("{} [{method}]: {e}", a.id);
                    failures.push((a.id.clone(), e.clone()));
                }
            }
        }
        finish(bstar, &bstar_path)?;
        let matrix = acc.finish();
        write_matrix_outputs(&dir, &matrix)?;
        info!("{method}: {} images accumulated", matrix.corpus_size());
    }
    report.method_failures.retain(|_, v| !v.is_empty());
    write_json(&cfg.out.join("analyze_report.json"), &report)?;
    Ok(report)
}

fn write_matrix_outputs(dir: &Path, matrix: &AssociationMatrix) -> Result<(), CliError> {
    matrix.save_json(dir.join("matrix.json"))?;
    let normalized = matrix.normalize();
    let csv = |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> emocam_core::Result<()>| -> Result<(), CliError> {
        let path = dir.join(name);
        let mut w = create(&path)?;
        f(&mut w)?;
        finish(w, &path)
    };
    csv("counts.csv", &|w| write_counts_csv(matrix, w))?;
    csv("percent.csv", &|w| write_percent_csv(&normalized, w))?;
    if !matrix.class_names().is_empty() {
        let top = normalized.restrict(&normalized.top_k_classes(TOP_K)?)?;
        csv("top25_percent.csv", &|w| write_percent_csv(&top, w))?;
    }
    if !matrix.class_names().is_empty() && !matrix.emotion_labels().is_empty() {
        write_matrix_heatmap(&normalized, HEATMAP_CELL, dir.join("percent.png"))?;
    }
    Ok(())
}

/// Spearman RSA across the methods' saved matrices: `<out>/rsa/rho.csv`
/// and `<out>/rsa/p_values.csv`.
pub fn cmd_rsa(cfg: &RunConfig) -> Result<emocam_core::RsaMatrix, CliError> {
    if cfg.methods.len() < 2 {
        return Err(CliError::Config("rsa needs at least two methods".into()));
    }
    let mut matrices = Vec::new();
    for method in &cfg.methods {
        let path = cfg.out.join(method.as_str()).join("matrix.json");
        if !path.exists() {
            return Err(CliError::Config(format!(
                "no matrix for {method} at {}; run analyze first",
                path.display()
            )));
        }
        matrices.push((method.as_str().to_owned(), AssociationMatrix::load_json(&path)?));
    }
    let r = rsa(&matrices, cfg.rsa_input)?;
    let dir = cfg.out.join("rsa");
    for (name, table) in [("rho.csv", RsaTable::Rho), ("p_values.csv", RsaTable::PValue)] {
        let path = dir.join(name);
        let mut w = create(&path)?;
        write_rsa_csv(&r, table, &mut w)?;
        finish(w, &path)?;
    }
    Ok(r)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PerturbReport {
    pub images: usize,
    pub patches: usize,
    pub positions: usize,
    pub outcomes: usize,
    pub skipped: Vec<(String, String)>,
}

fn load_patches(cfg: &RunConfig) -> Result<Vec<NamedPatch>, CliError> {
    if cfg.patches.is_empty() {
        return Err(CliError::Config("--patches is required for perturb".into()));
    }
    let mut patches: Vec<NamedPatch> = Vec::new();
    for path in &cfg.patches {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::Config(format!("bad patch path {}", path.display())))?
            .to_owned();
        if patches.iter().any(|p| p.name == name) {
            return Err(CliError::Config(format!("two patches named {name:?}")));
        }
        let image = decode_image(path).map_err(|e| CliError::Config(format!("patch: {e}")))?;
        patches.push(NamedPatch { name, image });
    }
    Ok(patches)
}

/// Pastes every patch at every grid position of every image:
/// `<out>/perturb/outcomes.jsonl` and `<out>/perturb/summary.csv`.
pub fn cmd_perturb(cfg: &RunConfig) -> Result<PerturbReport, CliError> {
    let model = load_configured_model(cfg)?;
    let patches = load_patches(cfg)?;
    let grid = match &cfg.positions {
        Some(p) => PositionGrid::load(p).map_err(|e| CliError::Config(format!("positions: {e}")))?,
        None => default_grid(),
    };
    let images = corpus(cfg)?;
    if images.is_empty() {
        return Err(CliError::Config("perturb needs at least one image".into()));
    }
    let ids: Vec<String> = images.iter().map(|(id, _)| id.clone()).collect();
    let paths: BTreeMap<&str, &Path> = images.iter().map(|(id, p)| (id.as_str(), p.as_path())).collect();
    let load = |id: &str| decode_image(paths[id]);
    let result = worker_pool(cfg)?.install(|| run_experiment(&model, &ids, load, &patches, &grid))?;
    for (id, e) in &result.skipped {
        warn!("{id}: {e}");
    }
    if result.outcomes.is_empty() {
        return Err(CliError::AllFailed(images.len()));
    }

    let dir = cfg.out.join("perturb");
    let path = dir.join("outcomes.jsonl");
    let mut w = create(&path)?;
    write_outcomes_jsonl(&result.outcomes, &mut w).map_err(|e| CliError::io(&path, e))?;
    finish(w, &path)?;
    let path = dir.join("summary.csv");
    let mut w = create(&path)?;
    write_summary_csv(&summarize(&result.outcomes), &grid, &mut w)?;
    finish(w, &path)?;
    Ok(PerturbReport {
        images: images.len(),
        patches: patches.len(),
        positions: grid.len(),
        outcomes: result.outcomes.len(),
        skipped: result.skipped,
    })
}

/// Renders the CAM of `image_id` over the image with its high-importance
/// boxes outlined; returns the PNG path under `<out>/overlay/`.
pub fn cmd_overlay(cfg: &RunConfig, image_id: &str, method: Option<CamMethod>) -> Result<PathBuf, CliError> {
    let method = match method {
        Some(m) => m,
        None => *cfg.methods.first().ok_or_else(|| CliError::Config("no CAM method given".into()))?,
    };
    let model = load_configured_model(cfg)?;
    let images = corpus(cfg)?;
    let path = images
        .iter()
        .find(|(id, _)| id == image_id)
        .map(|(_, p)| p.clone())
        .ok_or_else(|| CliError::Config(format!("unknown image id {image_id:?}")))?;
    let detections = match &cfg.detections {
        Some(p) => parse_detections(p).map_err(|e| CliError::Config(format!("detections: {e}")))?,
        None => DetectionSet::new(),
    };
    let cache = Cache::new(&cfg.out, &model, cfg.cache, cfg.grid_n);
    let mut work = ImageWork::new(&model, &path);
    let (_, class) = predict_one(&model, &cache, image_id, &mut work)?;
    let map = maps_for(&model, cfg, &cache, image_id, &mut work, class, &[method])?
        .pop()
        .expect("one method requested")?;
    let mut canvas = render_heatmap_overlay(work.image()?, &map)?;
    if let Some(record) = detections.get(image_id) {
        let (kept, _) = select_bstar(cfg, &record.detections, &map);
        for s in kept {
            draw_box_outline(&mut canvas, s.detection.bbox.into(), [255, 255, 255, 255], 2);
        }
    }
    let out = cfg.out.join("overlay").join(format!("{image_id}_{method}.png"));
    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    canvas.save_png(&out)?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub out: PathBuf,
    pub images: usize,
    pub image_size: usize,
    pub model_input: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            out: PathBuf::from("demo"),
            images: 100,
            image_size: 64,
            model_input: 64,
            seed: 1,
        }
    }
}

/// Writes a self-contained demo: seeded small model, procedural images,
/// detections, class list, stand-in patches and a config file.
pub fn cmd_synth(opts: &SynthOptions) -> Result<(), CliError> {
    let out = &opts.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let desc = small_descriptor(opts.model_input, demo_labels());
    let weights = random_weights(&desc, opts.seed)?;
    ModelSpec::new(desc.clone(), weights.clone())?;
    std::fs::write(out.join("model.json"), desc.to_json()).map_err(|e| CliError::io(out.join("model.json"), e))?;
    write_container_file(out.join("model.bin"), &weights)?;

    let classes = demo_classes();
    SyntheticCorpus::generate(opts.images, opts.image_size, &classes, opts.seed).write(out)?;
    std::fs::write(out.join("classes.txt"), classes.join("\n") + "\n").map_err(|e| CliError::io(out.join("classes.txt"), e))?;

    let patch_dir = out.join("patches");
    std::fs::create_dir_all(&patch_dir).map_err(|e| CliError::io(&patch_dir, e))?;
    for (name, patch) in [
        ("rugby_ball", rugby_ball_patch(64)),
        ("soccer_ball", soccer_ball_patch(64)),
        ("lotus", lotus_patch(64)),
    ] {
        patch.save_png(patch_dir.join(format!("{name}.png")))?;
    }
    let config = "model = \"model.json\"\n\
weights = \"model.bin\"\n\
detections = \"detections.jsonl\"\n\
images = \"images\"\n\
classes = \"classes.txt\"\n\
out = \"out\"\n\
patches = [\"patches/rugby_ball.png\", \"patches/soccer_ball.png\", \"patches/lotus.png\"]\n";
    std::fs::write(out.join("emocam.toml"), config).map_err(|e| CliError::io(out.join("emocam.toml"), e))?;
    Ok(())
}
