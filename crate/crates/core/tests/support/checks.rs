//! Oracle comparison procedures. Each returns a small report so callers can
//! assert on it or print it.

#![allow(dead_code)]

use emocam_core::analytics::spearman;
use emocam_core::attribution::ablation_scores;
use emocam_core::importance::box_importance;
use emocam_core::tensor::zoo::{alexnet_family, random_weights, AlexNetConfig};
use emocam_core::tensor::{ForwardTrace, LayerKind};
use emocam_core::{ActivationMap, BoundingBox, ModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::models::{build, conv, labels, layer, linear, random_input, random_tail_model, random_tensor};
use super::oracles::{brute_force_c_act, conv2d_six_loop, reference_tail, spearman_oracle};

fn widen(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

#[derive(Debug)]
pub struct ConvReport {
    pub combos: usize,
    pub max_abs_err: f64,
}

pub fn conv_sweep(combos: usize, seed: u64) -> ConvReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs_err = 0f64;
    for i in 0..combos {
        let c = rng.random_range(1..=8);
        let out_c = rng.random_range(1..=8);
        let h = rng.random_range(1..=16);
        let w = rng.random_range(1..=16);
        let pad = rng.random_range(0..=2);
        let kh = rng.random_range(1..=(h + 2 * pad).min(5));
        let kw = rng.random_range(1..=(w + 2 * pad).min(5));
        let stride = rng.random_range(1..=3);
        let model = build(
            [c, h, w],
            vec![
                conv("conv", out_c, [kh, kw], stride, pad),
                layer("flatten", LayerKind::Flatten),
                linear("fc", 1),
            ],
            1,
            seed.wrapping_add(i as u64),
        );
        let input = random_tensor(&[c, h, w], &mut rng);
        let got = model
            .apply_layer(&model.layers()[0], &input, &mut ForwardTrace::new())
            .unwrap();
        let wt = model.tensor("conv.weight").unwrap();
        let bias = model.tensor("conv.bias").unwrap();
        let (want, oh, ow) = conv2d_six_loop(
            &widen(input.data()),
            (c, h, w),
            &widen(wt.data()),
            &widen(bias.data()),
            out_c,
            (kh, kw),
            stride,
            pad,
        );
        assert_eq!(got.shape(), &[out_c, oh, ow]);
        for (a, b) in got.data().iter().zip(&want) {
            max_abs_err = max_abs_err.max((*a as f64 - b).abs());
        }
    }
    ConvReport { combos, max_abs_err }
}

#[derive(Debug)]
pub struct GradReport {
    pub tails: usize,
    pub checked: usize,
    pub excluded: usize,
    pub max_rel_err: f64,
}

/// Compares `tail_backward` against central differences of an f64
/// reference tail. Every tail layer is piecewise linear, so the central
/// difference is exact unless a step crosses a kink; such points are
/// detected by disagreeing one-sided differences and excluded.
pub fn gradient_check(tails: usize, step: f64) -> GradReport {
    let mut report = GradReport {
        tails,
        checked: 0,
        excluded: 0,
        max_rel_err: 0.0,
    };
    for seed in 0..tails as u64 {
        let model = random_tail_model(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let input = random_input(&model, &mut rng);
        let (acts, trace) = model.forward_split(&input, "target").unwrap();
        let class = seed as usize % model.labels().len();
        let grad = model.tail_backward(&trace, "target", class).unwrap();
        let shape = acts.shape().to_vec();
        let base = widen(acts.data());
        let f = |a: &[f64]| reference_tail(&model, "target", a, &shape)[class];
        let f0 = f(&base);
        let mut probe = base.clone();
        for j in 0..base.len() {
            probe[j] = base[j] + step;
            let fp = f(&probe);
            probe[j] = base[j] - step;
            let fm = f(&probe);
            probe[j] = base[j];
            let fwd = (fp - f0) / step;
            let bwd = (f0 - fm) / step;
            if (fwd - bwd).abs() > 1e-7 * (1.0 + fwd.abs() + bwd.abs()) {
                report.excluded += 1;
                continue;
            }
            let fd = (fp - fm) / (2.0 * step);
            let g = grad.data()[j] as f64;
            if fd.abs() > 1e-6 || g.abs() > 1e-6 {
                report.checked += 1;
                let rel = (g - fd).abs() / fd.abs().max(g.abs());
                report.max_rel_err = report.max_rel_err.max(rel);
            }
        }
    }
    report
}

/// A model with convolutions on both sides of the split point.
fn deep_split_model(seed: u64) -> ModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = rng.random_range(8..=14);
    build(
        [rng.random_range(1..=3), size, size],
        vec![
            conv("conv1", rng.random_range(2..=5), [3, 3], 1, 1),
            layer("relu1", LayerKind::Relu),
            conv("target", rng.random_range(2..=5), [3, 3], rng.random_range(1..=2), 1),
            layer("relu2", LayerKind::Relu),
            conv("conv3", rng.random_range(2..=5), [3, 3], 1, 0),
            layer("pool", LayerKind::Maxpool { kernel: 2, stride: 1 }),
            layer("avgpool", LayerKind::AdaptiveAvgpool { output: [2, 2] }),
            layer("flatten", LayerKind::Flatten),
            linear("fc", 4),
        ],
        4,
        seed ^ 0x77,
    )
}

/// Number of models (out of `count`) whose split logits are not bit-identical.
pub fn split_identity(count: usize) -> usize {
    let mut mismatches = 0;
    for seed in 0..count as u64 {
        let model = if seed % 2 == 0 {
            random_tail_model(seed + 500)
        } else {
            deep_split_model(seed)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 9000);
        let input = random_input(&model, &mut rng);
        let full = model.forward(&input).unwrap().logits;
        let (acts, _) = model.forward_split(&input, "target").unwrap();
        let split = model.tail_forward("target", &acts).unwrap();
        let same = full.len() == split.len() && full.iter().zip(&split).all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            mismatches += 1;
        }
    }
    mismatches
}

pub fn small_alexnet_config() -> AlexNetConfig {
    AlexNetConfig {
        input_size: 99,
        conv_channels: [16, 24, 32, 32, 24],
        hidden: [64, 64],
        pooled: 3,
    }
}

#[derive(Debug)]
pub struct AblationReport {
    pub channels: usize,
    pub max_abs_err: f64,
}

/// Tail-evaluated ablation scores vs. full re-runs with the channel's
/// conv5 weights and bias zeroed.
pub fn ablation_equivalence(seed: u64) -> AblationReport {
    let desc = alexnet_family(&small_alexnet_config(), labels(6));
    let weights = random_weights(&desc, seed).unwrap();
    let model = ModelSpec::new(desc, weights).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let input = random_input(&model, &mut rng);
    let class = model.forward(&input).unwrap().predicted_index;
    let (acts, _) = model.forward_split(&input, "conv5").unwrap();
    let scores = ablation_scores(&model, "conv5", &acts, class).unwrap();

    let mut max_abs_err = (scores.baseline as f64 - model.forward(&input).unwrap().logits[class] as f64).abs();
    let k = acts.shape()[0];
    let w = model.tensor("conv5.weight").unwrap();
    let per_out = w.len() / k;
    for ch in 0..k {
        let mut ablated = model.clone();
        ablated.tensor_mut("conv5.weight").unwrap()[ch * per_out..(ch + 1) * per_out].fill(0.0);
        ablated.tensor_mut("conv5.bias").unwrap()[ch] = 0.0;
        let rerun = ablated.forward(&input).unwrap().logits[class];
        max_abs_err = max_abs_err.max((rerun as f64 - scores.ablated[ch] as f64).abs());
    }
    AblationReport { channels: k, max_abs_err }
}

#[derive(Debug)]
pub struct CActReport {
    pub pairs: usize,
    pub max_abs_err: f64,
}

pub fn c_act_check(pairs: usize, seed: u64) -> CActReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs_err = 0f64;
    let mut done = 0;
    while done < pairs {
        let w = rng.random_range(1..=40);
        let h = rng.random_range(1..=40);
        let mut values: Vec<f32> = (0..w * h).map(|_| rng.random_range(0.0f32..1.0)).collect();
        let peak = rng.random_range(0..values.len());
        values[peak] = 1.0;
        let map = ActivationMap::new(w, h, values.clone()).unwrap();
        // Boxes may hang off the map edges; clipping is part of the contract.
        let x0 = rng.random_range(-5.0..w as f64 + 2.0);
        let y0 = rng.random_range(-5.0..h as f64 + 2.0);
        let b = [x0, y0, x0 + rng.random_range(0.1..w as f64 + 5.0), y0 + rng.random_range(0.1..h as f64 + 5.0)];
        let bbox = BoundingBox {
            x_min: b[0],
            y_min: b[1],
            x_max: b[2],
            y_max: b[3],
        };
        match (brute_force_c_act(&values, w, h, b), box_importance(&map, &bbox)) {
            (Some(want), Ok(got)) => {
                max_abs_err = max_abs_err.max((want - got).abs());
                done += 1;
            }
            (None, Err(_)) => {}
            (want, got) => panic!("box {b:?} on {w}x{h}: oracle {want:?}, got {got:?}"),
        }
    }
    CActReport { pairs, max_abs_err }
}

#[derive(Debug)]
pub struct SpearmanReport {
    pub pairs: usize,
    pub max_rho_err: f64,
    pub max_p_err: f64,
}

/// Random vectors drawn from a small integer alphabet so ties are common.
pub fn spearman_check(pairs: usize, seed: u64) -> SpearmanReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SpearmanReport {
        pairs: 0,
        max_rho_err: 0.0,
        max_p_err: 0.0,
    };
    while report.pairs < pairs {
        let n = rng.random_range(5..=60);
        let levels = rng.random_range(3..=20);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let mix = rng.random_range(0.0..1.0);
        let y: Vec<f64> = x
            .iter()
            .map(|&v| (mix * v + (1.0 - mix) * rng.random_range(0..levels) as f64).round())
            .collect();
        let Ok(got) = spearman(&x, &y) else { continue };
        let (rho, p) = spearman_oracle(&x, &y);
        report.max_rho_err = report.max_rho_err.max((got.rho - rho).abs());
        report.max_p_err = report.max_p_err.max((got.p_value - p).abs());
        report.pairs += 1;
    }
    report
}
