use super::model::{infer_shape, LayerKind, LayerSpec, ModelSpec};
use super::Tensor;
use crate::error::{Error, Result};

/// Output of a full forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub logits: Vec<f32>,
    pub probabilities: Vec<f32>,
    pub predicted_index: usize,
}

impl Prediction {
    pub fn from_logits(logits: Vec<f32>) -> Self {
        let probabilities = softmax(&logits);
        let predicted_index = argmax(&logits);
        Self {
            logits,
            probabilities,
            predicted_index,
        }
    }
}

/// Everything recorded during one forward pass: the output of every layer
/// and, for max-pooling layers, the flat input index each output came from.
#[derive(Debug, Clone, Default)]
pub struct ForwardTrace {
    outputs: Vec<Tensor>,
    argmax: Vec<Option<Vec<usize>>>,
}

impl ForwardTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn output(&self, index: usize) -> Option<&Tensor> {
        self.outputs.get(index)
    }

    pub fn argmax(&self, index: usize) -> Option<&[usize]> {
        self.argmax.get(index).and_then(|a| a.as_deref())
    }

    /// Output of the last layer executed.
    pub fn logits(&self) -> &[f32] {
        self.outputs.last().map(Tensor::data).unwrap_or(&[])
    }

    pub fn prediction(&self) -> Prediction {
        Prediction::from_logits(self.logits().to_vec())
    }
}

/// Numerically stable softmax, computed in f64.
pub fn softmax(logits: &[f32]) -> Vec<f32> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(f64::from(v)));
    let exps: Vec<f64> = logits.iter().map(|&v| (f64::from(v) - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| (e / total) as f32).collect()
}

/// First index of the maximum.
fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl ModelSpec {
    /// Evaluates one layer and records its output (and pooling argmax) in `trace`.
    pub fn apply_layer(&self, layer: &LayerSpec, input: &Tensor, trace: &mut ForwardTrace) -> Result<Tensor> {
        let (out, argmax) = self.eval_layer(layer, input)?;
        trace.outputs.push(out.clone());
        trace.argmax.push(argmax);
        Ok(out)
    }

    fn eval_layer(&self, layer: &LayerSpec, input: &Tensor) -> Result<(Tensor, Option<Vec<usize>>)> {
        let out_shape = infer_shape(layer, input.shape())?;
        Ok(match &layer.kind {
            LayerKind::Conv2d {
                kernel,
                stride,
                padding,
                weights,
                bias,
                ..
            } => {
                let w = self.tensor(weights)?;
                let b = self.tensor(bias)?;
                if w.shape()[1] != input.shape()[0] {
                    return Err(Error::LayerShape {
                        layer: layer.name.clone(),
                        shape: input.shape().to_vec(),
                        reason: format!("conv2d expects {} input channels", w.shape()[1]),
                    });
                }
                (conv2d(input, w, b, *kernel, *stride, *padding, out_shape), None)
            }
            LayerKind::Relu => {
                let data = input.data().iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
                (Tensor::new(out_shape, data)?, None)
            }
            LayerKind::Maxpool { kernel, stride } => {
                let (out, idx) = maxpool(input, *kernel, *stride, out_shape);
                (out, Some(idx))
            }
            LayerKind::AdaptiveAvgpool { .. } => (adaptive_avgpool(input, out_shape), None),
            LayerKind::Flatten | LayerKind::Dropout { .. } => (input.clone().reshape(out_shape)?, None),
            LayerKind::Linear { weights, bias, .. } => {
                let w = self.tensor(weights)?;
                let b = self.tensor(bias)?;
                if w.shape()[1] != input.len() {
                    return Err(Error::LayerShape {
                        layer: layer.name.clone(),
                        shape: input.shape().to_vec(),
                        reason: format!("linear expects {} features", w.shape()[1]),
                    });
                }
                (linear(input, w, b), None)
            }
        })
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        if input.shape() != self.input_shape() {
            return Err(Error::LayerShape {
                layer: "input".into(),
                shape: input.shape().to_vec(),
                reason: format!("model expects {:?}", self.input_shape()),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &Tensor) -> Result<Prediction> {
        self.check_input(input)?;
        let mut x = input.clone();
        for layer in self.layers() {
            x = self.eval_layer(layer, &x)?.0;
        }
        Ok(Prediction::from_logits(x.into_data()))
    }

    /// Full forward pass keeping every intermediate output.
    pub fn forward_trace(&self, input: &Tensor) -> Result<ForwardTrace> {
        self.check_input(input)?;
        let mut trace = ForwardTrace::new();
        let mut x = input.clone();
        for layer in self.layers() {
            x = self.apply_layer(layer, &x, &mut trace)?;
        }
        Ok(trace)
    }

    /// Runs the full network and returns the raw output of `target_layer`
    /// (a conv2d, before any following activation) together with the trace.
    pub fn forward_split(&self, input: &Tensor, target_layer: &str) -> Result<(Tensor, ForwardTrace)> {
        let idx = self.conv_index(target_layer)?;
        let trace = self.forward_trace(input)?;
        let activations = trace.outputs[idx].clone();
        Ok((activations, trace))
    }

    /// Evaluates every layer after `target_layer` on `activations`.
    pub fn tail_forward(&self, target_layer: &str, activations: &Tensor) -> Result<Vec<f32>> {
        let idx = self.layer_index(target_layer)?;
        if activations.shape() != self.output_shape(idx) {
            return Err(Error::LayerShape {
                layer: target_layer.to_owned(),
                shape: activations.shape().to_vec(),
                reason: format!("tail expects {:?}", self.output_shape(idx)),
            });
        }
        let tail = &self.layers()[idx + 1..];
        let Some((first, rest)) = tail.split_first() else {
            return Ok(activations.data().to_vec());
        };
        let mut x = self.eval_layer(first, activations)?.0;
        for layer in rest {
            x = self.eval_layer(layer, &x)?.0;
        }
        Ok(x.into_data())
    }

    /// Gradient of the pre-softmax logit `class_index` with respect to the
    /// output of `target_layer`, back-propagated through the recorded trace.
    ///
    /// Convolutions are not differentiable here, so every layer after the
    /// target must be relu, maxpool, adaptive-avgpool, flatten, linear or
    /// dropout.
    pub fn tail_backward(&self, trace: &ForwardTrace, target_layer: &str, class_index: usize) -> Result<Tensor> {
        let idx = self.layer_index(target_layer)?;
        let labels = self.labels().len();
        if class_index >= labels {
            return Err(Error::ClassIndex {
                index: class_index,
                count: labels,
            });
        }
        if trace.len() != self.layers().len() {
            return Err(Error::TraceMismatch(format!(
                "{} layer outputs recorded for a {}-layer model",
                trace.len(),
                self.layers().len()
            )));
        }
        for (i, out) in trace.outputs.iter().enumerate() {
            if out.shape() != self.output_shape(i) {
                return Err(Error::TraceMismatch(format!("layer {i} output shape {:?}", out.shape())));
            }
        }

        let mut grad = vec![0f64; labels];
        grad[class_index] = 1.0;
        for i in (idx + 1..self.layers().len()).rev() {
            let layer = &self.layers()[i];
            let input_shape = self.output_shape(i - 1);
            let input_len: usize = input_shape.iter().product();
            grad = match &layer.kind {
                LayerKind::Linear { weights, .. } => {
                    let w = self.tensor(weights)?.data();
                    let mut g = vec![0f64; input_len];
                    for (row, &go) in w.chunks_exact(input_len).zip(&grad) {
                        if go == 0.0 {
                            continue;
                        }
                        for (gi, &wv) in g.iter_mut().zip(row) {
                            *gi += f64::from(wv) * go;
                        }
                    }
                    g
                }
                LayerKind::Relu => {
                    let out = trace.outputs[i].data();
                    grad.iter()
                        .zip(out)
                        .map(|(&g, &o)| if o > 0.0 { g } else { 0.0 })
                        .collect()
                }
                LayerKind::Maxpool { .. } => {
                    let routes = trace.argmax(i).ok_or_else(|| {
                        Error::TraceMismatch(format!("no argmax recorded for pooling layer {}", layer.name))
                    })?;
                    let mut g = vec![0f64; input_len];
                    for (&src, &go) in routes.iter().zip(&grad) {
                        g[src] += go;
                    }
                    g
                }
                LayerKind::AdaptiveAvgpool { output } => {
                    let &[c, h, w] = input_shape else { unreachable!("validated shape") };
                    let mut g = vec![0f64; input_len];
                    for ch in 0..c {
                        for oy in 0..output[0] {
                            let (y0, y1) = adaptive_bounds(oy, h, output[0]);
                            for ox in 0..output[1] {
                                let (x0, x1) = adaptive_bounds(ox, w, output[1]);
                                let go = grad[(ch * output[0] + oy) * output[1] + ox];
                                let share = go / ((y1 - y0) * (x1 - x0)) as f64;
                                for y in y0..y1 {
                                    for x in x0..x1 {
                                        g[(ch * h + y) * w + x] += share;
                                    }
                                }
                            }
                        }
                    }
                    g
                }
                LayerKind::Flatten | LayerKind::Dropout { .. } => grad,
                LayerKind::Conv2d { .. } => {
                    return Err(Error::UnsupportedTailLayer {
                        layer: layer.name.clone(),
                        kind: layer.kind.name(),
                    })
                }
            };
        }
        Tensor::new(
            self.output_shape(idx).to_vec(),
            grad.into_iter().map(|g| g as f32).collect(),
        )
    }

    fn conv_index(&self, name: &str) -> Result<usize> {
        let idx = self.layer_index(name)?;
        match self.layers()[idx].kind {
            LayerKind::Conv2d { .. } => Ok(idx),
            _ => Err(Error::NotConvLayer(name.to_owned())),
        }
    }
}

fn conv2d(
    input: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    kernel: [usize; 2],
    stride: usize,
    padding: usize,
    out_shape: Vec<usize>,
) -> Tensor {
    let (in_c, h, w) = input.chw().expect("validated conv input");
    let (out_c, oh, ow) = (out_shape[0], out_shape[1], out_shape[2]);
    let [kh, kw] = kernel;
    let x = input.data();
    let wt = weight.data();
    let mut out = Vec::with_capacity(out_c * oh * ow);
    let mut acc = vec![0f64; oh * ow];

    for oc in 0..out_c {
        acc.fill(f64::from(bias.data()[oc]));
        for ic in 0..in_c {
            let plane = &x[ic * h * w..(ic + 1) * h * w];
            let taps = &wt[(oc * in_c + ic) * kh * kw..(oc * in_c + ic + 1) * kh * kw];
            for ky in 0..kh {
                for kx in 0..kw {
                    let wv = f64::from(taps[ky * kw + kx]);
                    let Some((ox_lo, ox_hi)) = valid_range(ow, w, kx, stride, padding) else {
                        continue;
                    };
                    for oy in 0..oh {
                        let iy = (oy * stride + ky) as isize - padding as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = &plane[iy as usize * w..(iy as usize + 1) * w];
                        let dst = &mut acc[oy * ow..(oy + 1) * ow];
                        for ox in ox_lo..ox_hi {
                            dst[ox] += wv * f64::from(row[ox * stride + kx - padding]);
                        }
                    }
                }
            }
        }
        out.extend(acc.iter().map(|&v| v as f32));
    }
    Tensor::new(out_shape, out).expect("conv output shape")
}

/// Output columns `lo..hi` whose input column `o*stride + k - padding` is in bounds.
fn valid_range(out_len: usize, in_len: usize, k: usize, stride: usize, padding: usize) -> Option<(usize, usize)> {
    let lo = if padding > k { (padding - k).div_ceil(stride) } else { 0 };
    if in_len + padding <= k {
        return None;
    }
    let hi = ((in_len + padding - k - 1) / stride + 1).min(out_len);
    (lo < hi).then_some((lo, hi))
}

fn maxpool(input: &Tensor, kernel: usize, stride: usize, out_shape: Vec<usize>) -> (Tensor, Vec<usize>) {
    let (c, h, w) = input.chw().expect("validated pool input");
    let (oh, ow) = (out_shape[1], out_shape[2]);
    let x = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut idx = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = (ch * h + oy * stride) * w + ox * stride;
                for ky in 0..kernel {
                    let row = (ch * h + oy * stride + ky) * w + ox * stride;
                    for i in row..row + kernel {
                        if x[i] > x[best] {
                            best = i;
                        }
                    }
                }
                out.push(x[best]);
                idx.push(best);
            }
        }
    }
    (Tensor::new(out_shape, out).expect("pool output shape"), idx)
}

/// `floor(i*n/m) .. ceil((i+1)*n/m)`.
fn adaptive_bounds(i: usize, input: usize, output: usize) -> (usize, usize) {
    (i * input / output, ((i + 1) * input).div_ceil(output))
}

fn adaptive_avgpool(input: &Tensor, out_shape: Vec<usize>) -> Tensor {
    let (c, h, w) = input.chw().expect("validated pool input");
    let (oh, ow) = (out_shape[1], out_shape[2]);
    let x = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            let (y0, y1) = adaptive_bounds(oy, h, oh);
            for ox in 0..ow {
                let (x0, x1) = adaptive_bounds(ox, w, ow);
                let mut sum = 0f64;
                for y in y0..y1 {
                    for xx in x0..x1 {
                        sum += f64::from(x[(ch * h + y) * w + xx]);
                    }
                }
                out.push((sum / ((y1 - y0) * (x1 - x0)) as f64) as f32);
            }
        }
    }
    Tensor::new(out_shape, out).expect("pool output shape")
}

fn linear(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Tensor {
    let n = input.len();
    let x = input.data();
    let out: Vec<f32> = weight
        .data()
        .chunks_exact(n)
        .zip(bias.data())
        .map(|(row, &b)| {
            let dot: f64 = row.iter().zip(x).map(|(&w, &v)| f64::from(w) * f64::from(v)).sum();
            (f64::from(b) + dot) as f32
        })
        .collect();
    let len = out.len();
    Tensor::new(vec![len], out).expect("linear output shape")
}
