//! Raster I/O, bilinear resampling, model-input preparation, alpha
//! compositing and heatmap rendering.

use std::io::Cursor;
use std::path::Path;

use crate::attribution::ActivationMap;
use crate::error::{Error, Result};
use crate::tensor::{ModelSpec, Tensor};

/// 8-bit straight-alpha RGBA image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRgba {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl ImageRgba {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || width * height * 4 != pixels.len() {
            return Err(Error::Dimensions(format!(
                "{width}x{height} RGBA image cannot hold {} bytes",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, rgba: [u8; 4]) -> Result<Self> {
        Self::new(width, height, rgba.repeat(width * height))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 4] {
        let i = (y * self.width + x) * 4;
        self.pixels[i..i + 4].try_into().unwrap()
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgba: [u8; 4]) {
        let i = (y * self.width + x) * 4;
        self.pixels[i..i + 4].copy_from_slice(&rgba);
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let buf = image::RgbaImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
            .expect("buffer size checked at construction");
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)
            .map_err(|e| Error::Encode(e.to_string()))?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode_png()?).map_err(|e| Error::io(path, e))
    }

    /// Binary PPM (P6, maxval 255); alpha is dropped.
    pub fn encode_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for px in self.pixels.chunks_exact(4) {
            out.extend_from_slice(&px[..3]);
        }
        out
    }
}

/// Binary PGM (P5, maxval 255).
pub fn encode_pgm(width: usize, height: usize, gray: &[u8]) -> Vec<u8> {
    assert_eq!(width * height, gray.len(), "PGM buffer size");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(gray);
    out
}

pub fn decode_image(path: impl AsRef<Path>) -> Result<ImageRgba> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image_bytes(&bytes).map_err(|reason| Error::Decode {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn decode_image_bytes(bytes: &[u8]) -> std::result::Result<ImageRgba, String> {
    let img = image::load_from_memory(bytes).map_err(|e| e.to_string())?;
    let rgba = img.to_rgba8();
    let (w, h) = rgba.dimensions();
    ImageRgba::new(w as usize, h as usize, rgba.into_raw()).map_err(|e| e.to_string())
}

/// Source coordinate for each output index under half-pixel-center
/// alignment: `(i0, i1, t)` with the sample at `i0 + t·(i1 - i0)`.
fn sample_axis(out_len: usize, in_len: usize) -> Vec<(usize, usize, f64)> {
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|o| {
            let src = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (in_len - 1) as f64);
            let i0 = src.floor() as usize;
            let i1 = (i0 + 1).min(in_len - 1);
            (i0, i1, src - i0 as f64)
        })
        .collect()
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Bilinear resize of an interleaved buffer with `channels` values per pixel.
fn resize_interleaved<T: Copy + Into<f64>>(
    src: &[T],
    channels: usize,
    (w, h): (usize, usize),
    (out_w, out_h): (usize, usize),
    mut emit: impl FnMut(f64),
) {
    let xs = sample_axis(out_w, w);
    let ys = sample_axis(out_h, h);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            for c in 0..channels {
                let at = |x: usize, y: usize| src[(y * w + x) * channels + c].into();
                let top = lerp(at(x0, y0), at(x1, y0), tx);
                let bottom = lerp(at(x0, y1), at(x1, y1), tx);
                emit(lerp(top, bottom, ty));
            }
        }
    }
}

pub fn resize_bilinear(img: &ImageRgba, out_w: usize, out_h: usize) -> ImageRgba {
    assert!(out_w >= 1 && out_h >= 1, "resize target must be at least 1x1");
    if (out_w, out_h) == (img.width, img.height) {
        return img.clone();
    }
    let mut pixels = Vec::with_capacity(out_w * out_h * 4);
    resize_interleaved(&img.pixels, 4, (img.width, img.height), (out_w, out_h), |v| {
        pixels.push(v.round().clamp(0.0, 255.0) as u8)
    });
    ImageRgba::new(out_w, out_h, pixels).expect("resize output size")
}

/// Bilinear resize of a single-channel float plane.
pub fn resize_plane(values: &[f32], width: usize, height: usize, out_w: usize, out_h: usize) -> Vec<f32> {
    assert_eq!(values.len(), width * height, "plane size");
    assert!(out_w >= 1 && out_h >= 1, "resize target must be at least 1x1");
    let mut out = Vec::with_capacity(out_w * out_h);
    resize_interleaved(values, 1, (width, height), (out_w, out_h), |v| out.push(v as f32));
    out
}

/// Resizes to the model's input size, scales to `[0, 1]`, applies the
/// per-channel normalization and lays the result out channel-major.
/// Single-channel models receive Rec. 601 luma; alpha is ignored.
pub fn to_model_input(img: &ImageRgba, model: &ModelSpec) -> Result<Tensor> {
    let input = model.input();
    let norm = model.normalization();
    let planes: Vec<Vec<f32>> = match input.channels {
        3 => (0..3)
            .map(|c| img.pixels.chunks_exact(4).map(|p| f32::from(p[c]) / 255.0).collect())
            .collect(),
        1 => vec![img
            .pixels
            .chunks_exact(4)
            .map(|p| ((0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2])) / 255.0) as f32)
            .collect()],
        n => {
            return Err(Error::InvalidArgument(format!(
                "cannot build a {n}-channel model input from an RGB image"
            )))
        }
    };
    let mut data = Vec::with_capacity(input.channels * input.height * input.width);
    for (c, plane) in planes.iter().enumerate() {
        let resized = resize_plane(plane, img.width, img.height, input.width, input.height);
        let (mean, std) = (f64::from(norm.mean[c]), f64::from(norm.std[c]));
        data.extend(resized.iter().map(|&v| ((f64::from(v) - mean) / std) as f32));
    }
    Tensor::new(vec![input.channels, input.height, input.width], data)
}

/// Pastes `patch` onto `base`, scaled so its height is
/// `round(height_fraction · base height)` (aspect preserved, at least 1×1),
/// centered at the relative position `center`. Source-over blending;
/// anything past the border is clipped.
pub fn composite_over(base: &ImageRgba, patch: &ImageRgba, center: (f64, f64), height_fraction: f64) -> Result<ImageRgba> {
    if !(height_fraction > 0.0 && height_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "patch height fraction {height_fraction} outside (0, 1]"
        )));
    }
    let th = ((height_fraction * base.height as f64).round() as usize).max(1);
    let tw = ((th as f64 * patch.width as f64 / patch.height as f64).round() as usize).max(1);
    let resized = resize_bilinear(patch, tw, th);
    let (left, top) = paste_origin(base, (tw, th), center);

    let mut out = base.clone();
    for py in 0..th {
        let y = top + py as i64;
        if y < 0 || y >= base.height as i64 {
            continue;
        }
        for px in 0..tw {
            let x = left + px as i64;
            if x < 0 || x >= base.width as i64 {
                continue;
            }
            let (x, y) = (x as usize, y as usize);
            let src = resized.pixel(px, py);
            out.set_pixel(x, y, source_over(src, base.pixel(x, y)));
        }
    }
    Ok(out)
}

/// Top-left corner of a `size` patch centered at the relative `center`.
pub fn paste_origin(base: &ImageRgba, size: (usize, usize), center: (f64, f64)) -> (i64, i64) {
    let left = (center.0 * base.width as f64 - size.0 as f64 / 2.0).round() as i64;
    let top = (center.1 * base.height as f64 - size.1 as f64 / 2.0).round() as i64;
    (left, top)
}

/// Straight-alpha source-over for one pixel.
pub fn source_over(src: [u8; 4], dst: [u8; 4]) -> [u8; 4] {
    match src[3] {
        0 => dst,
        255 => src,
        sa => {
            let sa = f64::from(sa) / 255.0;
            let da = f64::from(dst[3]) / 255.0;
            let oa = sa + da * (1.0 - sa);
            let mut out = [0u8; 4];
            for c in 0..3 {
                let v = (f64::from(src[c]) * sa + f64::from(dst[c]) * da * (1.0 - sa)) / oa;
                out[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            out[3] = (oa * 255.0).round() as u8;
            out
        }
    }
}

/// Linear blue (0) → red (1) colormap.
pub fn colormap(v: f32) -> [u8; 3] {
    let v = f64::from(v.clamp(0.0, 1.0));
    [(255.0 * v).round() as u8, 0, (255.0 * (1.0 - v)).round() as u8]
}

/// `0.5·image + 0.5·colormap(map)` per pixel; output is opaque.
pub fn render_heatmap_overlay(img: &ImageRgba, map: &ActivationMap) -> Result<ImageRgba> {
    if (map.width(), map.height()) != (img.width, img.height) {
        return Err(Error::Dimensions(format!(
            "map is {}x{} but image is {}x{}",
            map.width(),
            map.height(),
            img.width,
            img.height
        )));
    }
    let mut pixels = Vec::with_capacity(img.pixels.len());
    for (px, &v) in img.pixels.chunks_exact(4).zip(map.values()) {
        let cm = colormap(v);
        for c in 0..3 {
            pixels.push((0.5 * f64::from(px[c]) + 0.5 * f64::from(cm[c])).round() as u8);
        }
        pixels.push(255);
    }
    ImageRgba::new(img.width, img.height, pixels)
}

/// Draws a rectangle outline using the same pixel-center membership rule as
/// box scoring: pixel `x` lies inside when `x_min <= x + 0.5 < x_max`.
pub fn draw_box_outline(img: &mut ImageRgba, corners: [f64; 4], rgba: [u8; 4], thickness: usize) {
    let to_range = |lo: f64, hi: f64, len: usize| {
        let a = ((lo - 0.5).ceil().max(0.0) as usize).min(len);
        let b = ((hi - 0.5).ceil().max(0.0) as usize).min(len);
        (a, b)
    };
    let (x0, x1) = to_range(corners[0], corners[2], img.width);
    let (y0, y1) = to_range(corners[1], corners[3], img.height);
    if x0 >= x1 || y0 >= y1 {
        return;
    }
    for y in y0..y1 {
        for x in x0..x1 {
            let edge = x < x0 + thickness || x + thickness >= x1 || y < y0 + thickness || y + thickness >= y1;
            if edge {
                img.set_pixel(x, y, rgba);
            }
        }
    }
}

/// Renders a row-major matrix as colored cells scaled by `max`.
pub fn render_matrix(values: &[f64], rows: usize, cols: usize, cell: usize, max: f64) -> Result<ImageRgba> {
    let (w, h) = ((cols * cell).max(1), (rows * cell).max(1));
    let mut img = ImageRgba::filled(w, h, [255, 255, 255, 255])?;
    for r in 0..rows {
        for c in 0..cols {
            let v = if max > 0.0 { values[r * cols + c] / max } else { 0.0 };
            let [red, g, b] = colormap(v as f32);
            for y in r * cell..(r + 1) * cell {
                for x in c * cell..(c + 1) * cell {
                    img.set_pixel(x, y, [red, g, b, 255]);
                }
            }
        }
    }
    Ok(img)
}
