//! Seeded model builders shared by the oracle suites.

#![allow(dead_code)]

use emocam_core::tensor::zoo::random_weights;
use emocam_core::tensor::{InputSpec, LayerKind, LayerSpec, ModelDescriptor, Normalization};
use emocam_core::{ModelSpec, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("label{i}")).collect()
}

pub fn layer(name: &str, kind: LayerKind) -> LayerSpec {
    LayerSpec { name: name.into(), kind }
}

pub fn conv(name: &str, out: usize, k: [usize; 2], stride: usize, padding: usize) -> LayerSpec {
    layer(
        name,
        LayerKind::Conv2d {
            out_channels: out,
            kernel: k,
            stride,
            padding,
            weights: format!("{name}.weight"),
            bias: format!("{name}.bias"),
        },
    )
}

pub fn linear(name: &str, out: usize) -> LayerSpec {
    layer(
        name,
        LayerKind::Linear {
            out_features: out,
            weights: format!("{name}.weight"),
            bias: format!("{name}.bias"),
        },
    )
}

pub fn build(input: [usize; 3], layers: Vec<LayerSpec>, n_labels: usize, seed: u64) -> ModelSpec {
    let desc = ModelDescriptor {
        input: InputSpec {
            channels: input[0],
            height: input[1],
            width: input[2],
        },
        normalization: Normalization {
            mean: vec![0.5; input[0]],
            std: vec![0.25; input[0]],
        },
        labels: labels(n_labels),
        layers,
    };
    let weights = random_weights(&desc, seed).unwrap();
    ModelSpec::new(desc, weights).unwrap()
}

pub fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0f32..1.0)).collect()).unwrap()
}

/// A conv target layer `target` followed by a random differentiable tail
/// drawn from relu / maxpool / adaptive-avgpool / flatten / dropout / linear.
pub fn random_tail_model(seed: u64) -> ModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.random_range(1..=3);
    let size = rng.random_range(6..=12);
    let k = rng.random_range(2..=6);
    let n_labels = rng.random_range(2..=5);
    let mut layers = vec![conv("target", k, [3, 3], 1, 1)];
    if rng.random_bool(0.7) {
        layers.push(layer("relu_a", LayerKind::Relu));
    }
    let mut spatial = size;
    if rng.random_bool(0.6) {
        let kernel = rng.random_range(2..=3);
        let stride = rng.random_range(1..=2);
        layers.push(layer("pool", LayerKind::Maxpool { kernel, stride }));
        spatial = (spatial - kernel) / stride + 1;
    }
    if rng.random_bool(0.6) {
        let o = rng.random_range(1..=spatial.min(5));
        layers.push(layer("avgpool", LayerKind::AdaptiveAvgpool { output: [o, rng.random_range(1..=spatial.min(5))] }));
    }
    layers.push(layer("flatten", LayerKind::Flatten));
    if rng.random_bool(0.5) {
        layers.push(layer("drop", LayerKind::Dropout { rate: 0.5 }));
    }
    if rng.random_bool(0.7) {
        layers.push(linear("fc_hidden", rng.random_range(4..=16)));
        layers.push(layer("relu_b", LayerKind::Relu));
    }
    layers.push(linear("fc_out", n_labels));
    build([c, size, size], layers, n_labels, seed ^ 0xabcdef)
}

/// Input tensor for `model` with values in [-2, 2].
pub fn random_input(model: &ModelSpec, rng: &mut ChaCha8Rng) -> Tensor {
    let shape = model.input_shape();
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-2.0f32..2.0)).collect()).unwrap()
}
