//! Descriptor builders for AlexNet-family networks and seeded weight init.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::container::TensorMap;
use super::model::{InputSpec, LayerKind, LayerSpec, ModelDescriptor, Normalization};
use super::Tensor;
use crate::error::Result;

/// ImageNet channel statistics, the usual normalization for AlexNet weights.
pub fn imagenet_normalization() -> Normalization {
    Normalization {
        mean: vec![0.485, 0.456, 0.406],
        std: vec![0.229, 0.224, 0.225],
    }
}

/// Widths of an AlexNet-style stack: five convolutions, three linear layers.
#[derive(Debug, Clone)]
pub struct AlexNetConfig {
    pub input_size: usize,
    pub conv_channels: [usize; 5],
    pub hidden: [usize; 2],
    pub pooled: usize,
}

impl Default for AlexNetConfig {
    /// The original single-tower AlexNet at 227×227.
    fn default() -> Self {
        Self {
            input_size: 227,
            conv_channels: [96, 256, 384, 384, 256],
            hidden: [4096, 4096],
            pooled: 6,
        }
    }
}

fn conv(name: &str, out: usize, k: usize, stride: usize, padding: usize) -> LayerSpec {
    LayerSpec {
        name: name.into(),
        kind: LayerKind::Conv2d {
            out_channels: out,
            kernel: [k, k],
            stride,
            padding,
            weights: format!("{name}.weight"),
            bias: format!("{name}.bias"),
        },
    }
}

fn linear(name: &str, out: usize) -> LayerSpec {
    LayerSpec {
        name: name.into(),
        kind: LayerKind::Linear {
            out_features: out,
            weights: format!("{name}.weight"),
            bias: format!("{name}.bias"),
        },
    }
}

fn simple(name: &str, kind: LayerKind) -> LayerSpec {
    LayerSpec { name: name.into(), kind }
}

pub fn alexnet_family(config: &AlexNetConfig, labels: Vec<String>) -> ModelDescriptor {
    let [c1, c2, c3, c4, c5] = config.conv_channels;
    let pool = |name: &str| simple(name, LayerKind::Maxpool { kernel: 3, stride: 2 });
    let layers = vec![
        conv("conv1", c1, 11, 4, 0),
        simple("relu1", LayerKind::Relu),
        pool("pool1"),
        conv("conv2", c2, 5, 1, 2),
        simple("relu2", LayerKind::Relu),
        pool("pool2"),
        conv("conv3", c3, 3, 1, 1),
        simple("relu3", LayerKind::Relu),
        conv("conv4", c4, 3, 1, 1),
        simple("relu4", LayerKind::Relu),
        conv("conv5", c5, 3, 1, 1),
        simple("relu5", LayerKind::Relu),
        pool("pool5"),
        simple("avgpool", LayerKind::AdaptiveAvgpool { output: [config.pooled; 2] }),
        simple("flatten", LayerKind::Flatten),
        simple("drop6", LayerKind::Dropout { rate: 0.5 }),
        linear("fc6", config.hidden[0]),
        simple("relu6", LayerKind::Relu),
        simple("drop7", LayerKind::Dropout { rate: 0.5 }),
        linear("fc7", config.hidden[1]),
        simple("relu7", LayerKind::Relu),
        linear("fc8", labels.len()),
    ];
    ModelDescriptor {
        input: InputSpec {
            channels: 3,
            height: config.input_size,
            width: config.input_size,
        },
        normalization: imagenet_normalization(),
        labels,
        layers,
    }
}

/// He-uniform weights and small uniform biases for every parameterized
/// layer, drawn in layer order from a ChaCha8 stream seeded with `seed`.
pub fn random_weights(desc: &ModelDescriptor, seed: u64) -> Result<TensorMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = TensorMap::new();
    let mut channels = desc.input.channels;
    let mut shape = vec![desc.input.channels, desc.input.height, desc.input.width];
    for layer in &desc.layers {
        let next = super::model::infer_shape(layer, &shape)?;
        let params = match &layer.kind {
            LayerKind::Conv2d {
                out_channels,
                kernel,
                weights,
                bias,
                ..
            } => Some((weights, bias, vec![*out_channels, channels, kernel[0], kernel[1]])),
            LayerKind::Linear {
                out_features,
                weights,
                bias,
            } => Some((weights, bias, vec![*out_features, shape.iter().product()])),
            _ => None,
        };
        if let Some((w, b, wshape)) = params {
            let out = wshape[0];
            let fan_in: usize = wshape[1..].iter().product();
            let bound = (6.0 / fan_in as f32).sqrt();
            let count: usize = wshape.iter().product();
            let data = (0..count).map(|_| rng.random_range(-bound..bound)).collect();
            map.insert(w.clone(), Tensor::new(wshape, data)?);
            let data = (0..out).map(|_| rng.random_range(-0.1f32..0.1)).collect();
            map.insert(b.clone(), Tensor::new(vec![out], data)?);
        }
        shape = next;
        if shape.len() == 3 {
            channels = shape[0];
        }
    }
    Ok(map)
}
