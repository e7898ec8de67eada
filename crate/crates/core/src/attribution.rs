//! Class-activation maps at a convolutional layer: Grad-CAM, Ablation-CAM
//! and grid occlusion, plus normalization to image resolution.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imaging::{encode_pgm, resize_plane};
use crate::tensor::{ForwardTrace, ModelSpec, Tensor};

const MAP_MAGIC: &str = "EMOCAM-MAP v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CamMethod {
    GradCam,
    AblationCam,
    OcclusionGrid,
}

impl CamMethod {
    pub const ALL: [CamMethod; 3] = [CamMethod::GradCam, CamMethod::AblationCam, CamMethod::OcclusionGrid];

    pub fn as_str(self) -> &'static str {
        match self {
            CamMethod::GradCam => "gradcam",
            CamMethod::AblationCam => "ablationcam",
            CamMethod::OcclusionGrid => "occlusion",
        }
    }
}

impl fmt::Display for CamMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CamMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gradcam" | "grad-cam" => Ok(CamMethod::GradCam),
            "ablationcam" | "ablation-cam" => Ok(CamMethod::AblationCam),
            "occlusion" | "occlusion-grid" => Ok(CamMethod::OcclusionGrid),
            other => Err(Error::InvalidArgument(format!("unknown CAM method \"{other}\""))),
        }
    }
}

/// Unrectified map at feature (or occlusion-grid) resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
}

/// Attribution map at original-image resolution. Values lie in `[0, 1]`
/// and the maximum is exactly 1 unless the map is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl ActivationMap {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != values.len() {
            return Err(Error::Dimensions(format!(
                "{width}x{height} map cannot hold {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("activation map values must lie in [0, 1]".into()));
        }
        let max = values.iter().copied().fold(0.0f32, f32::max);
        if max != 0.0 && max != 1.0 {
            return Err(Error::InvalidArgument(format!(
                "activation map maximum is {max}, expected exactly 1 or an all-zero map"
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    /// `EMOCAM-MAP v1 <w> <h>\n` followed by little-endian f32 values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("{MAP_MAGIC} {} {}\n", self.width, self.height).into_bytes();
        out.reserve(self.values.len() * 4);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::MapFormat(m.to_owned());
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad("missing header line"))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
        let dims = header
            .strip_prefix(MAP_MAGIC)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| bad("bad magic"))?;
        let mut parts = dims.split(' ');
        let mut dim = || -> Result<usize> {
            parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| bad("bad dimensions"))
        };
        let (w, h) = (dim()?, dim()?);
        let body = &bytes[nl + 1..];
        if body.len() != w * h * 4 {
            return Err(bad("payload length does not match dimensions"));
        }
        let values = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(w, h, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    /// 8-bit PGM for viewing only; analysis always uses the float map.
    pub fn to_pgm(&self) -> Vec<u8> {
        let gray: Vec<u8> = self.values.iter().map(|v| (v * 255.0).round() as u8).collect();
        encode_pgm(self.width, self.height, &gray)
    }
}

/// Grad-CAM combination: `α_k = mean(∂y/∂A_k)`, `raw = Σ_k α_k A_k`.
pub fn grad_cam_from_parts(activations: &Tensor, gradients: &Tensor) -> Result<RawMap> {
    let &[k, h, w] = activations.shape() else {
        return Err(Error::Dimensions(format!(
            "activations must be (channels, height, width), got {:?}",
            activations.shape()
        )));
    };
    if gradients.shape() != activations.shape() {
        return Err(Error::Dimensions(format!(
            "gradient shape {:?} differs from activations {:?}",
            gradients.shape(),
            activations.shape()
        )));
    }
    let plane = h * w;
    let alphas = gradients
        .data()
        .chunks_exact(plane)
        .map(|g| g.iter().map(|&v| f64::from(v)).sum::<f64>() / plane as f64);
    Ok(weighted_channel_sum(activations, alphas.collect::<Vec<_>>().as_slice(), (k, h, w)))
}

fn weighted_channel_sum(activations: &Tensor, weights: &[f64], (_, h, w): (usize, usize, usize)) -> RawMap {
    let plane = h * w;
    let mut acc = vec![0f64; plane];
    for (a, &wk) in activations.data().chunks_exact(plane).zip(weights) {
        if wk == 0.0 {
            continue;
        }
        for (s, &v) in acc.iter_mut().zip(a) {
            *s += wk * f64::from(v);
        }
    }
    RawMap {
        width: w,
        height: h,
        values: acc.into_iter().map(|v| v as f32).collect(),
    }
}

pub fn grad_cam_from_trace(model: &ModelSpec, trace: &ForwardTrace, target_layer: &str, class_index: usize) -> Result<RawMap> {
    let idx = model.layer_index(target_layer)?;
    let activations = trace
        .output(idx)
        .ok_or_else(|| Error::TraceMismatch("trace shorter than target layer".into()))?;
    let gradients = model.tail_backward(trace, target_layer, class_index)?;
    grad_cam_from_parts(activations, &gradients)
}

pub fn grad_cam_raw(model: &ModelSpec, input: &Tensor, class_index: usize, target_layer: &str) -> Result<RawMap> {
    let (_, trace) = model.forward_split(input, target_layer)?;
    grad_cam_from_trace(model, &trace, target_layer, class_index)
}

/// Class score with intact activations and with each channel zeroed in turn.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationScores {
    pub baseline: f32,
    pub ablated: Vec<f32>,
}

impl AblationScores {
    /// `w_k = (y - y_k) / y`.
    pub fn weights(&self) -> Result<Vec<f64>> {
        let y = f64::from(self.baseline);
        if y.abs() < 1e-8 {
            return Err(Error::DegenerateScore(y));
        }
        Ok(self.ablated.iter().map(|&yk| (y - f64::from(yk)) / y).collect())
    }
}

/// Runs the tail once on the intact activations and once per channel with
/// that channel zeroed (K+1 evaluations for K channels).
pub fn ablation_scores(model: &ModelSpec, target_layer: &str, activations: &Tensor, class_index: usize) -> Result<AblationScores> {
    let labels = model.labels().len();
    if class_index >= labels {
        return Err(Error::ClassIndex { index: class_index, count: labels });
    }
    let (k, h, w) = activations
        .chw()
        .ok_or_else(|| Error::Dimensions("activations must be (channels, height, width)".into()))?;
    let plane = h * w;
    let baseline = model.tail_forward(target_layer, activations)?[class_index];
    let mut scratch = activations.clone();
    let mut ablated = Vec::with_capacity(k);
    for ch in 0..k {
        let span = ch * plane..(ch + 1) * plane;
        scratch.data_mut()[span.clone()].fill(0.0);
        ablated.push(model.tail_forward(target_layer, &scratch)?[class_index]);
        scratch.data_mut()[span.clone()].copy_from_slice(&activations.data()[span]);
    }
    Ok(AblationScores { baseline, ablated })
}

pub fn ablation_cam_from_activations(
    model: &ModelSpec,
    target_layer: &str,
    activations: &Tensor,
    class_index: usize,
) -> Result<RawMap> {
    let scores = ablation_scores(model, target_layer, activations, class_index)?;
    let dims = activations.chw().expect("checked by ablation_scores");
    Ok(weighted_channel_sum(activations, &scores.weights()?, dims))
}

pub fn ablation_cam_raw(model: &ModelSpec, input: &Tensor, class_index: usize, target_layer: &str) -> Result<RawMap> {
    let (activations, _) = model.forward_split(input, target_layer)?;
    ablation_cam_from_activations(model, target_layer, &activations, class_index)
}

/// Half-open bounds of cell `i` when `len` is split into `n` cells.
fn cell_bounds(i: usize, len: usize, n: usize) -> (usize, usize) {
    (i * len / n, (i + 1) * len / n)
}

/// Score drop when each cell of an `n×n` partition of the model input is
/// set to `baseline_value` (in normalized input space) across all channels.
pub fn occlusion_grid_raw(
    model: &ModelSpec,
    input: &Tensor,
    class_index: usize,
    grid_n: usize,
    baseline_value: f32,
) -> Result<RawMap> {
    if grid_n == 0 {
        return Err(Error::InvalidArgument("occlusion grid size must be >= 1".into()));
    }
    let labels = model.labels().len();
    if class_index >= labels {
        return Err(Error::ClassIndex { index: class_index, count: labels });
    }
    let reference = f64::from(model.forward(input)?.logits[class_index]);
    let (c, h, w) = input
        .chw()
        .ok_or_else(|| Error::Dimensions("input must be (channels, height, width)".into()))?;
    let mut values = Vec::with_capacity(grid_n * grid_n);
    for gy in 0..grid_n {
        let (y0, y1) = cell_bounds(gy, h, grid_n);
        for gx in 0..grid_n {
            let (x0, x1) = cell_bounds(gx, w, grid_n);
            if y0 == y1 || x0 == x1 {
                values.push(0.0);
                continue;
            }
            let mut occluded = input.clone();
            let data = occluded.data_mut();
            for ch in 0..c {
                for y in y0..y1 {
                    let row = (ch * h + y) * w;
                    data[row + x0..row + x1].fill(baseline_value);
                }
            }
            let score = f64::from(model.forward(&occluded)?.logits[class_index]);
            values.push((reference - score) as f32);
        }
    }
    Ok(RawMap {
        width: grid_n,
        height: grid_n,
        values,
    })
}

/// Rectify, upsample bilinearly to `out_w × out_h`, then divide by the
/// maximum (an all-zero map stays zero).
pub fn normalize_map(raw: &RawMap, out_w: usize, out_h: usize) -> Result<ActivationMap> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidArgument("output dimensions must be >= 1".into()));
    }
    if raw.values.len() != raw.width * raw.height || raw.values.is_empty() {
        return Err(Error::Dimensions("raw map size does not match its dimensions".into()));
    }
    if raw.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let rectified: Vec<f32> = raw.values.iter().map(|&v| v.max(0.0)).collect();
    let mut up = resize_plane(&rectified, raw.width, raw.height, out_w, out_h);
    let max = up.iter().copied().fold(0.0f32, f32::max);
    if max > 0.0 {
        for v in &mut up {
            *v /= max;
        }
    }
    ActivationMap::new(out_w, out_h, up)
}
