//! Independent reference implementations used as test oracles. Nothing here
//! calls into the kernels under test; everything is plain f64 loops.

#![allow(dead_code)]

use emocam_core::tensor::LayerKind;
use emocam_core::ModelSpec;

/// Direct six-loop convolution with zero padding.
#[allow(clippy::too_many_arguments)]
pub fn conv2d_six_loop(
    input: &[f64],
    (c, h, w): (usize, usize, usize),
    weight: &[f64],
    bias: &[f64],
    out_c: usize,
    (kh, kw): (usize, usize),
    stride: usize,
    pad: usize,
) -> (Vec<f64>, usize, usize) {
    let oh = (h + 2 * pad - kh) / stride + 1;
    let ow = (w + 2 * pad - kw) / stride + 1;
    let mut out = vec![0.0; out_c * oh * ow];
    for o in 0..out_c {
        for y in 0..oh {
            for x in 0..ow {
                let mut s = bias[o];
                for ci in 0..c {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let iy = (y * stride + ky) as isize - pad as isize;
                            let ix = (x * stride + kx) as isize - pad as isize;
                            if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                continue;
                            }
                            s += input[(ci * h + iy as usize) * w + ix as usize]
                                * weight[((o * c + ci) * kh + ky) * kw + kx];
                        }
                    }
                }
                out[(o * oh + y) * ow + x] = s;
            }
        }
    }
    (out, oh, ow)
}

fn widen(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

/// Evaluates every layer after `target` in f64, starting from `acts` of
/// shape `shape`. Supports the layer kinds allowed in a differentiable tail.
pub fn reference_tail(model: &ModelSpec, target: &str, acts: &[f64], shape: &[usize]) -> Vec<f64> {
    let start = model.layers().iter().position(|l| l.name == target).expect("target layer") + 1;
    let mut x = acts.to_vec();
    let mut shape = shape.to_vec();
    for layer in &model.layers()[start..] {
        match &layer.kind {
            LayerKind::Relu => x.iter_mut().for_each(|v| *v = v.max(0.0)),
            LayerKind::Flatten | LayerKind::Dropout { .. } => shape = vec![x.len()],
            LayerKind::Linear { weights, bias, out_features } => {
                let w = widen(model.tensor(weights).unwrap().data());
                let b = widen(model.tensor(bias).unwrap().data());
                let n = x.len();
                x = (0..*out_features)
                    .map(|o| b[o] + (0..n).map(|i| w[o * n + i] * x[i]).sum::<f64>())
                    .collect();
                shape = vec![*out_features];
            }
            LayerKind::Maxpool { kernel, stride } => {
                let (c, h, w) = (shape[0], shape[1], shape[2]);
                let oh = (h - kernel) / stride + 1;
                let ow = (w - kernel) / stride + 1;
                let mut out = Vec::with_capacity(c * oh * ow);
                for ch in 0..c {
                    for y in 0..oh {
                        for xo in 0..ow {
                            let mut m = f64::NEG_INFINITY;
                            for ky in 0..*kernel {
                                for kx in 0..*kernel {
                                    m = m.max(x[(ch * h + y * stride + ky) * w + xo * stride + kx]);
                                }
                            }
                            out.push(m);
                        }
                    }
                }
                x = out;
                shape = vec![c, oh, ow];
            }
            LayerKind::AdaptiveAvgpool { output } => {
                let (c, h, w) = (shape[0], shape[1], shape[2]);
                let [oh, ow] = *output;
                let lo = |i: usize, n: usize, o: usize| i * n / o;
                let hi = |i: usize, n: usize, o: usize| ((i + 1) * n).div_ceil(o);
                let mut out = Vec::with_capacity(c * oh * ow);
                for ch in 0..c {
                    for y in 0..oh {
                        for xo in 0..ow {
                            let (y0, y1) = (lo(y, h, oh), hi(y, h, oh));
                            let (x0, x1) = (lo(xo, w, ow), hi(xo, w, ow));
                            let mut s = 0.0;
                            for yy in y0..y1 {
                                for xx in x0..x1 {
                                    s += x[(ch * h + yy) * w + xx];
                                }
                            }
                            out.push(s / ((y1 - y0) * (x1 - x0)) as f64);
                        }
                    }
                }
                x = out;
                shape = vec![c, oh, ow];
            }
            LayerKind::Conv2d { .. } => panic!("reference tail does not evaluate convolutions"),
        }
    }
    x
}

/// Brute-force box importance: scan every pixel and test its center.
pub fn brute_force_c_act(values: &[f32], width: usize, height: usize, b: [f64; 4]) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 0..height {
        for x in 0..width {
            let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
            if b[0] <= cx && cx < b[2] && b[1] <= cy && cy < b[3] {
                sum += values[y * width + x] as f64;
                count += 1;
            }
        }
    }
    (count > 0).then(|| sum / count as f64)
}

/// Ranks by counting: `1 + #less + (#equal - 1) / 2`.
pub fn counting_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let less = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Two-sided Student-t tail probability. Substituting `t = √ν·tan θ` turns
/// the density into `cos^(ν-1) θ`, which is integrated numerically.
pub fn t_two_sided(t: f64, nu: f64) -> f64 {
    let theta0 = (t.abs() / nu.sqrt()).atan();
    let f = |th: f64| th.cos().powf(nu - 1.0);
    let half = std::f64::consts::FRAC_PI_2;
    simpson(f, theta0, half, 200_000) / simpson(f, 0.0, half, 200_000)
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> (f64, f64) {
    let rho = pearson(&counting_ranks(x), &counting_ranks(y));
    let n = x.len() as f64;
    if rho.abs() >= 1.0 {
        return (rho, 0.0);
    }
    let t = rho * ((n - 2.0) / (1.0 - rho * rho)).sqrt();
    (rho, t_two_sided(t, n - 2.0))
}
