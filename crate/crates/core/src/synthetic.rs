//! Seeded fixtures: a small 3-conv/2-linear classifier, procedural images,
//! detection records and stand-in patch objects. Used by tests, benchmarks
//! and the demo corpus generator.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detection::{BoundingBox, Detection, DetectionSet, ImageDetections};
use crate::error::{Error, Result};
use crate::imaging::ImageRgba;
use crate::tensor::zoo::{imagenet_normalization, random_weights};
use crate::tensor::{InputSpec, LayerKind, LayerSpec, ModelDescriptor, ModelSpec};

pub const DEMO_LABELS: [&str; 8] = [
    "Anger",
    "Awe",
    "Calmness",
    "Excitement",
    "Fear",
    "Interest",
    "Joy",
    "Sadness",
];

pub const DEMO_CLASSES: [&str; 6] = ["Ball", "Building", "Clothing", "Dog", "Human face", "Tree"];

pub fn demo_labels() -> Vec<String> {
    DEMO_LABELS.iter().map(|s| s.to_string()).collect()
}

pub fn demo_classes() -> Vec<String> {
    DEMO_CLASSES.iter().map(|s| s.to_string()).collect()
}

fn layer(name: &str, kind: LayerKind) -> LayerSpec {
    LayerSpec { name: name.into(), kind }
}

fn conv(name: &str, out: usize) -> LayerSpec {
    layer(
        name,
        LayerKind::Conv2d {
            out_channels: out,
            kernel: [3, 3],
            stride: 1,
            padding: 1,
            weights: format!("{name}.weight"),
            bias: format!("{name}.bias"),
        },
    )
}

fn linear(name: &str, out: usize) -> LayerSpec {
    layer(
        name,
        LayerKind::Linear {
            out_features: out,
            weights: format!("{name}.weight"),
            bias: format!("{name}.bias"),
        },
    )
}

/// Three 3×3 convolutions (the last is the CAM target `conv3`), adaptive
/// average pooling to 4×4 and two linear layers. `input_size` must be ≥ 4.
pub fn small_descriptor(input_size: usize, labels: Vec<String>) -> ModelDescriptor {
    let pool = |name: &str| layer(name, LayerKind::Maxpool { kernel: 2, stride: 2 });
    ModelDescriptor {
        input: InputSpec {
            channels: 3,
            height: input_size,
            width: input_size,
        },
        normalization: imagenet_normalization(),
        labels: labels.clone(),
        layers: vec![
            conv("conv1", 8),
            layer("relu1", LayerKind::Relu),
            pool("pool1"),
            conv("conv2", 16),
            layer("relu2", LayerKind::Relu),
            pool("pool2"),
            conv("conv3", 16),
            layer("relu3", LayerKind::Relu),
            layer("avgpool", LayerKind::AdaptiveAvgpool { output: [4, 4] }),
            layer("flatten", LayerKind::Flatten),
            linear("fc1", 32),
            layer("relu4", LayerKind::Relu),
            linear("fc2", labels.len()),
        ],
    }
}

pub fn small_model(input_size: usize, labels: Vec<String>, seed: u64) -> Result<ModelSpec> {
    let desc = small_descriptor(input_size, labels);
    let weights = random_weights(&desc, seed)?;
    ModelSpec::new(desc, weights)
}

/// Smooth colored background with a few soft blobs, fully opaque.
pub fn synthetic_image(width: usize, height: usize, seed: u64) -> ImageRgba {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let tilt: [f64; 3] = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
    let blobs: Vec<(f64, f64, f64, [f64; 3])> = (0..rng.random_range(2..5))
        .map(|_| {
            (
                rng.random_range(0.0..width as f64),
                rng.random_range(0.0..height as f64),
                rng.random_range(0.08..0.3) * width.min(height) as f64,
                [rng.random(), rng.random(), rng.random()],
            )
        })
        .collect();
    let mut pixels = Vec::with_capacity(width * height * 4);
    for y in 0..height {
        for x in 0..width {
            let t = (x + y) as f64 / (width + height) as f64;
            let mut rgb = [0.0; 3];
            for c in 0..3 {
                rgb[c] = base[c] + tilt[c] * (t - 0.5);
            }
            for &(bx, by, r, color) in &blobs {
                let d2 = ((x as f64 - bx).powi(2) + (y as f64 - by).powi(2)) / (r * r);
                let w = (-d2).exp();
                for c in 0..3 {
                    rgb[c] = rgb[c] * (1.0 - w) + color[c] * w;
                }
            }
            pixels.extend(rgb.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
            pixels.push(255);
        }
    }
    ImageRgba::new(width, height, pixels).expect("buffer size matches")
}

/// Between one and six random boxes with scores spread across the
/// detection threshold.
pub fn synthetic_detections(image_id: &str, width: usize, height: usize, classes: &[String], seed: u64) -> ImageDetections {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);
    let detections = (0..rng.random_range(1..=6))
        .map(|_| {
            let bw = rng.random_range(0.15..0.6) * w;
            let bh = rng.random_range(0.15..0.6) * h;
            let x = rng.random_range(0.0..w - bw);
            let y = rng.random_range(0.0..h - bh);
            Detection {
                class_name: classes[rng.random_range(0..classes.len())].clone(),
                score: if rng.random_bool(0.15) {
                    rng.random_range(0.0..0.005)
                } else {
                    rng.random_range(0.05..1.0)
                },
                bbox: BoundingBox {
                    x_min: x,
                    y_min: y,
                    x_max: x + bw,
                    y_max: y + bh,
                },
            }
        })
        .collect();
    ImageDetections {
        image_id: image_id.into(),
        width: width as u32,
        height: height as u32,
        detections,
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// `(image_id, image)` sorted by id.
    pub images: Vec<(String, ImageRgba)>,
    pub detections: DetectionSet,
}

impl SyntheticCorpus {
    pub fn generate(count: usize, size: usize, classes: &[String], seed: u64) -> Self {
        let mut images = Vec::with_capacity(count);
        let mut detections = DetectionSet::new();
        for i in 0..count {
            let id = format!("img_{i:04}");
            let s = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            images.push((id.clone(), synthetic_image(size, size, s)));
            detections.insert(id.clone(), synthetic_detections(&id, size, size, classes, s ^ 0x5eed));
        }
        Self { images, detections }
    }

    /// Writes `<dir>/images/<id>.png` and `<dir>/detections.jsonl`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let images = dir.join("images");
        std::fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
        for (id, img) in &self.images {
            img.save_png(images.join(format!("{id}.png")))?;
        }
        let path = dir.join("detections.jsonl");
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = std::io::BufWriter::new(file);
        crate::detection::write_detections(&mut out, self.detections.values()).map_err(|e| Error::io(&path, e))?;
        std::io::Write::flush(&mut out).map_err(|e| Error::io(&path, e))
    }
}

/// Rasterizes a shape from a signed inside test with 4×4 supersampling for
/// antialiased alpha.
fn raster(width: usize, height: usize, shade: impl Fn(f64, f64) -> Option<[u8; 3]>) -> ImageRgba {
    const S: usize = 4;
    let mut img = ImageRgba::filled(width, height, [0, 0, 0, 0]).expect("nonzero size");
    for y in 0..height {
        for x in 0..width {
            let mut acc = [0u32; 3];
            let mut hits = 0u32;
            for sy in 0..S {
                for sx in 0..S {
                    let u = (x as f64 + (sx as f64 + 0.5) / S as f64) / width as f64;
                    let v = (y as f64 + (sy as f64 + 0.5) / S as f64) / height as f64;
                    if let Some(c) = shade(u * 2.0 - 1.0, v * 2.0 - 1.0) {
                        hits += 1;
                        for k in 0..3 {
                            acc[k] += c[k] as u32;
                        }
                    }
                }
            }
            if hits > 0 {
                let rgb = acc.map(|a| (a / hits) as u8);
                let alpha = (hits * 255 / (S * S) as u32) as u8;
                img.set_pixel(x, y, [rgb[0], rgb[1], rgb[2], alpha]);
            }
        }
    }
    img
}

/// Brown prolate ellipse with white laces.
pub fn rugby_ball_patch(height: usize) -> ImageRgba {
    let width = (height as f64 * 1.6).round() as usize;
    raster(width, height, |u, v| {
        if u * u + v * v / 0.7 > 1.0 {
            return None;
        }
        let lace = v.abs() < 0.08 && u.abs() < 0.4 || (u * 10.0).rem_euclid(2.0) < 0.5 && u.abs() < 0.4 && v.abs() < 0.22;
        Some(if lace { [240, 240, 240] } else { [139, 69, 19] })
    })
}

/// White disc with a black pentagon and dark seam spots.
pub fn soccer_ball_patch(height: usize) -> ImageRgba {
    raster(height, height, |u, v| {
        let r = (u * u + v * v).sqrt();
        if r > 1.0 {
            return None;
        }
        let a = v.atan2(u);
        let sector = (a / (2.0 * PI / 5.0)).rem_euclid(1.0) - 0.5;
        let pent = r * (sector * 2.0 * PI / 5.0).cos() < 0.3;
        let spot = r > 0.65 && r < 0.9 && sector.abs() < 0.12;
        Some(if pent || spot { [20, 20, 20] } else { [245, 245, 245] })
    })
}

/// Pink petal rosette with a yellow center.
pub fn lotus_patch(height: usize) -> ImageRgba {
    raster(height, height, |u, v| {
        let r = (u * u + v * v).sqrt();
        let a = v.atan2(u);
        let petal = 0.55 + 0.45 * (4.0 * a).cos().abs();
        if r > petal {
            return None;
        }
        Some(if r < 0.25 {
            [250, 210, 60]
        } else {
            let t = r / petal;
            [240, (180.0 - 80.0 * t) as u8, (200.0 - 60.0 * t) as u8]
        })
    })
}

pub fn transparent_patch(width: usize, height: usize) -> ImageRgba {
    ImageRgba::filled(width, height, [255, 0, 0, 0]).expect("nonzero size")
}
