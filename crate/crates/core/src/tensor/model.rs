use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::container::{read_container_file, write_container, TensorMap};
use super::Tensor;
use crate::error::{Error, Result};
use crate::hash::fnv1a64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

/// Per-channel `(x - mean) / std` applied to `[0, 1]`-scaled pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f32>,
    pub std: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: LayerKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerKind {
    Conv2d {
        out_channels: usize,
        #[serde(deserialize_with = "square_or_pair")]
        kernel: [usize; 2],
        #[serde(default = "one")]
        stride: usize,
        #[serde(default)]
        padding: usize,
        weights: String,
        bias: String,
    },
    Relu,
    Maxpool {
        kernel: usize,
        stride: usize,
    },
    #[serde(rename = "adaptive-avgpool")]
    AdaptiveAvgpool {
        #[serde(deserialize_with = "square_or_pair")]
        output: [usize; 2],
    },
    Flatten,
    Linear {
        out_features: usize,
        weights: String,
        bias: String,
    },
    /// Identity at inference; the rate is kept so descriptors round-trip.
    Dropout {
        #[serde(default)]
        rate: f32,
    },
}

impl LayerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::Conv2d { .. } => "conv2d",
            LayerKind::Relu => "relu",
            LayerKind::Maxpool { .. } => "maxpool",
            LayerKind::AdaptiveAvgpool { .. } => "adaptive-avgpool",
            LayerKind::Flatten => "flatten",
            LayerKind::Linear { .. } => "linear",
            LayerKind::Dropout { .. } => "dropout",
        }
    }
}

fn one() -> usize {
    1
}

fn square_or_pair<'de, D: Deserializer<'de>>(d: D) -> Result<[usize; 2], D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Size {
        Square(usize),
        Pair([usize; 2]),
    }
    Ok(match Size::deserialize(d)? {
        Size::Square(k) => [k, k],
        Size::Pair(p) => p,
    })
}

/// The architecture descriptor file, as serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub input: InputSpec,
    pub normalization: Normalization,
    pub labels: Vec<String>,
    pub layers: Vec<LayerSpec>,
}

impl ModelDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Descriptor(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }
}

/// A validated model: descriptor plus weights whose shapes have been checked
/// against every layer. Immutable apart from [`ModelSpec::tensor_mut`].
#[derive(Debug, Clone)]
pub struct ModelSpec {
    descriptor: ModelDescriptor,
    weights: TensorMap,
    output_shapes: Vec<Vec<usize>>,
    content_hash: Option<u64>,
}

impl ModelSpec {
    pub fn new(descriptor: ModelDescriptor, weights: TensorMap) -> Result<Self> {
        let output_shapes = validate(&descriptor, &weights)?;
        Ok(Self {
            descriptor,
            weights,
            output_shapes,
            content_hash: None,
        })
    }

    pub fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.descriptor.layers
    }

    pub fn labels(&self) -> &[String] {
        &self.descriptor.labels
    }

    pub fn input(&self) -> InputSpec {
        self.descriptor.input
    }

    pub fn input_shape(&self) -> [usize; 3] {
        let i = self.descriptor.input;
        [i.channels, i.height, i.width]
    }

    pub fn normalization(&self) -> &Normalization {
        &self.descriptor.normalization
    }

    pub fn weights(&self) -> &TensorMap {
        &self.weights
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor> {
        self.weights
            .get(name)
            .ok_or_else(|| Error::MissingTensor(name.to_owned()))
    }

    /// In-place access to a weight tensor's values (shape cannot change).
    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f32]> {
        self.content_hash = None;
        self.weights.get_mut(name).map(Tensor::data_mut)
    }

    pub fn layer_index(&self, name: &str) -> Result<usize> {
        self.layers()
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLayer(name.to_owned()))
    }

    /// Output shape of layer `index` as inferred from the descriptor.
    pub fn output_shape(&self, index: usize) -> &[usize] {
        &self.output_shapes[index]
    }

    pub fn last_conv_layer(&self) -> Option<&str> {
        self.layers()
            .iter()
            .rev()
            .find(|l| matches!(l.kind, LayerKind::Conv2d { .. }))
            .map(|l| l.name.as_str())
    }

    /// 64-bit FNV-1a over the weights container bytes. Models loaded from
    /// disk hash the file as read; in-memory models hash their serialization.
    pub fn content_hash(&self) -> u64 {
        self.content_hash
            .unwrap_or_else(|| fnv1a64(&write_container(&self.weights)))
    }
}

pub fn load_model(descriptor_path: impl AsRef<Path>, weights_path: impl AsRef<Path>) -> Result<ModelSpec> {
    let descriptor_path = descriptor_path.as_ref();
    let text = std::fs::read_to_string(descriptor_path).map_err(|e| Error::io(descriptor_path, e))?;
    let descriptor = ModelDescriptor::from_json(&text)?;
    let (weights, bytes) = read_container_file(weights_path)?;
    let mut model = ModelSpec::new(descriptor, weights)?;
    model.content_hash = Some(fnv1a64(&bytes));
    Ok(model)
}

/// Output shape of `layer` for an input of `shape`.
pub(crate) fn infer_shape(layer: &LayerSpec, shape: &[usize]) -> Result<Vec<usize>> {
    let incompatible = |reason: String| Error::LayerShape {
        layer: layer.name.clone(),
        shape: shape.to_vec(),
        reason,
    };
    match &layer.kind {
        LayerKind::Conv2d {
            out_channels,
            kernel,
            stride,
            padding,
            ..
        } => {
            let &[_, h, w] = shape else {
                return Err(incompatible("conv2d expects (channels, height, width)".into()));
            };
            let oh = window_count(h + 2 * padding, kernel[0], *stride);
            let ow = window_count(w + 2 * padding, kernel[1], *stride);
            match (oh, ow) {
                (Some(oh), Some(ow)) => Ok(vec![*out_channels, oh, ow]),
                _ => Err(incompatible(format!("kernel {kernel:?} larger than padded input"))),
            }
        }
        LayerKind::Maxpool { kernel, stride } => {
            let &[c, h, w] = shape else {
                return Err(incompatible("maxpool expects (channels, height, width)".into()));
            };
            match (window_count(h, *kernel, *stride), window_count(w, *kernel, *stride)) {
                (Some(oh), Some(ow)) => Ok(vec![c, oh, ow]),
                _ => Err(incompatible(format!("pool kernel {kernel} larger than input"))),
            }
        }
        LayerKind::AdaptiveAvgpool { output } => {
            let &[c, _, _] = shape else {
                return Err(incompatible("adaptive-avgpool expects (channels, height, width)".into()));
            };
            Ok(vec![c, output[0], output[1]])
        }
        LayerKind::Flatten => Ok(vec![shape.iter().product()]),
        LayerKind::Linear { out_features, .. } => {
            if shape.len() != 1 {
                return Err(incompatible("linear expects a flat vector".into()));
            }
            Ok(vec![*out_features])
        }
        LayerKind::Relu | LayerKind::Dropout { .. } => Ok(shape.to_vec()),
    }
}

fn window_count(extent: usize, kernel: usize, stride: usize) -> Option<usize> {
    (extent >= kernel).then(|| (extent - kernel) / stride + 1)
}

fn validate(desc: &ModelDescriptor, weights: &TensorMap) -> Result<Vec<Vec<usize>>> {
    let bad = |m: String| Error::Descriptor(m);
    let input = desc.input;
    if input.channels == 0 || input.height == 0 || input.width == 0 {
        return Err(bad("input dimensions must be >= 1".into()));
    }
    let norm = &desc.normalization;
    if norm.mean.len() != input.channels || norm.std.len() != input.channels {
        return Err(bad(format!(
            "normalization needs {} means and stds, got {} and {}",
            input.channels,
            norm.mean.len(),
            norm.std.len()
        )));
    }
    if norm.std.iter().any(|&s| !(s.is_finite() && s > 0.0)) || norm.mean.iter().any(|m| !m.is_finite()) {
        return Err(bad("normalization std must be positive and finite".into()));
    }
    if desc.labels.is_empty() {
        return Err(bad("labels must be nonempty".into()));
    }
    if desc.layers.is_empty() {
        return Err(bad("model has no layers".into()));
    }

    let mut names = HashSet::new();
    let mut shape = vec![input.channels, input.height, input.width];
    let mut shapes = Vec::with_capacity(desc.layers.len());
    for layer in &desc.layers {
        if !names.insert(layer.name.as_str()) {
            return Err(bad(format!("duplicate layer name \"{}\"", layer.name)));
        }
        check_params(layer)?;
        let next = infer_shape(layer, &shape)?;
        match &layer.kind {
            LayerKind::Conv2d {
                out_channels,
                kernel,
                weights: w,
                bias,
                ..
            } => {
                check_weight(weights, &layer.name, w, &[*out_channels, shape[0], kernel[0], kernel[1]])?;
                check_weight(weights, &layer.name, bias, &[*out_channels])?;
            }
            LayerKind::Linear {
                out_features,
                weights: w,
                bias,
            } => {
                check_weight(weights, &layer.name, w, &[*out_features, shape[0]])?;
                check_weight(weights, &layer.name, bias, &[*out_features])?;
            }
            _ => {}
        }
        shape = next;
        shapes.push(shape.clone());
    }

    if shape != [desc.labels.len()] {
        return Err(bad(format!(
            "final output shape {shape:?} does not match {} labels",
            desc.labels.len()
        )));
    }
    Ok(shapes)
}

fn check_params(layer: &LayerSpec) -> Result<()> {
    let ok = match &layer.kind {
        LayerKind::Conv2d {
            out_channels,
            kernel,
            stride,
            ..
        } => *out_channels > 0 && *stride > 0 && kernel[0] > 0 && kernel[1] > 0,
        LayerKind::Maxpool { kernel, stride } => *kernel > 0 && *stride > 0,
        LayerKind::AdaptiveAvgpool { output } => output[0] > 0 && output[1] > 0,
        LayerKind::Linear { out_features, .. } => *out_features > 0,
        LayerKind::Dropout { rate } => (0.0..1.0).contains(rate),
        LayerKind::Relu | LayerKind::Flatten => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Descriptor(format!(
            "layer {}: invalid {} parameters (sizes and strides must be >= 1, dropout rate in [0, 1))",
            layer.name,
            layer.kind.name()
        )))
    }
}

fn check_weight(weights: &TensorMap, layer: &str, name: &str, expected: &[usize]) -> Result<()> {
    let t = weights
        .get(name)
        .ok_or_else(|| Error::MissingTensor(name.to_owned()))?;
    if t.shape() != expected {
        return Err(Error::WeightShape {
            layer: layer.to_owned(),
            tensor: name.to_owned(),
            expected: expected.to_vec(),
            found: t.shape().to_vec(),
        });
    }
    Ok(())
}
