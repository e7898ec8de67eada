mod support;

use emocam_core::attribution::{
    ablation_cam_raw, grad_cam_from_parts, grad_cam_raw, normalize_map, occlusion_grid_raw,
};
use emocam_core::tensor::LayerKind;
use emocam_core::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::models::{build, conv, layer, linear, random_input};

#[test]
fn two_channel_hand_case() {
    let acts = Tensor::new(vec![2, 2, 2], vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    let grads = Tensor::new(vec![2, 2, 2], vec![0.5, 0.5, 0.5, 0.5, -0.5, -0.5, -0.5, -0.5]).unwrap();
    let raw = grad_cam_from_parts(&acts, &grads).unwrap();
    assert_eq!(raw.values, vec![0.5, 0.0, 0.0, -0.5]);
    assert_eq!(normalize_map(&raw, 2, 2).unwrap().values(), &[1.0, 0.0, 0.0, 0.0]);
}

fn linear_head_model(seed: u64) -> emocam_core::ModelSpec {
    build(
        [2, 6, 5],
        vec![
            conv("target", 3, [3, 3], 1, 1),
            layer("flatten", LayerKind::Flatten),
            linear("fc", 4),
        ],
        4,
        seed,
    )
}

#[test]
fn grad_cam_with_linear_head_uses_mean_weight_row() {
    let model = linear_head_model(5);
    let input = random_input(&model, &mut ChaCha8Rng::seed_from_u64(1));
    let (acts, _) = model.forward_split(&input, "target").unwrap();
    let w = model.tensor("fc.weight").unwrap().data();
    let (k, plane) = (3, 30);
    for class in 0..4 {
        let raw = grad_cam_raw(&model, &input, class, "target").unwrap();
        let row = &w[class * k * plane..(class + 1) * k * plane];
        for p in 0..plane {
            let want: f64 = (0..k)
                .map(|ch| {
                    let alpha = row[ch * plane..(ch + 1) * plane].iter().map(|&v| v as f64).sum::<f64>() / plane as f64;
                    alpha * acts.data()[ch * plane + p] as f64
                })
                .sum();
            assert!((raw.values[p] as f64 - want).abs() < 1e-6, "class {class} pixel {p}");
        }
    }
}

#[test]
fn ablation_cam_matches_rerun_weights() {
    let model = build(
        [3, 12, 12],
        vec![
            conv("conv1", 4, [3, 3], 1, 1),
            layer("relu1", LayerKind::Relu),
            conv("target", 5, [3, 3], 1, 1),
            layer("relu2", LayerKind::Relu),
            layer("pool", LayerKind::Maxpool { kernel: 2, stride: 2 }),
            layer("flatten", LayerKind::Flatten),
            linear("fc", 3),
        ],
        3,
        21,
    );
    let input = random_input(&model, &mut ChaCha8Rng::seed_from_u64(2));
    let class = model.forward(&input).unwrap().predicted_index;
    let y = model.forward(&input).unwrap().logits[class] as f64;
    let (acts, _) = model.forward_split(&input, "target").unwrap();
    let plane = 144;
    let mut want = vec![0f64; plane];
    for ch in 0..5 {
        let mut m = model.clone();
        m.tensor_mut("target.weight").unwrap()[ch * 36..(ch + 1) * 36].fill(0.0);
        m.tensor_mut("target.bias").unwrap()[ch] = 0.0;
        let yk = m.forward(&input).unwrap().logits[class] as f64;
        let wk = (y - yk) / y;
        for p in 0..plane {
            want[p] += wk * acts.data()[ch * plane + p] as f64;
        }
    }
    let raw = ablation_cam_raw(&model, &input, class, "target").unwrap();
    let scale = want.iter().fold(0f64, |m, v| m.max(v.abs()));
    for (a, b) in raw.values.iter().zip(&want) {
        assert!((*a as f64 - b).abs() <= 1e-5 * scale.max(1.0));
    }
}

#[test]
fn occlusion_matches_brute_force_cell_masking() {
    let model = build(
        [3, 13, 11],
        vec![
            conv("target", 4, [3, 3], 2, 1),
            layer("relu", LayerKind::Relu),
            layer("flatten", LayerKind::Flatten),
            linear("fc", 3),
        ],
        3,
        4,
    );
    let input = random_input(&model, &mut ChaCha8Rng::seed_from_u64(6));
    let class = 1;
    let reference = model.forward(&input).unwrap().logits[class] as f64;
    for n in [1, 3, 4, 7] {
        let raw = occlusion_grid_raw(&model, &input, class, n, 0.0).unwrap();
        assert_eq!((raw.width, raw.height), (n, n));
        let (h, w) = (13, 11);
        for gy in 0..n {
            for gx in 0..n {
                let mut occluded = input.clone();
                let data = occluded.data_mut();
                for ch in 0..3 {
                    for y in 0..h {
                        for x in 0..w {
                            let cell_y = (0..n).find(|&i| y < (i + 1) * h / n).unwrap();
                            let cell_x = (0..n).find(|&i| x < (i + 1) * w / n).unwrap();
                            if (cell_y, cell_x) == (gy, gx) {
                                data[(ch * h + y) * w + x] = 0.0;
                            }
                        }
                    }
                }
                let score = model.forward(&occluded).unwrap().logits[class] as f64;
                let got = raw.values[gy * n + gx] as f64;
                assert!((got - (reference - score)).abs() < 1e-6, "n={n} cell ({gx},{gy})");
            }
        }
    }
}

#[test]
fn normalized_maps_are_unit_range_for_every_method() {
    let model = linear_head_model(9);
    let input = random_input(&model, &mut ChaCha8Rng::seed_from_u64(3));
    let raws = [
        grad_cam_raw(&model, &input, 0, "target").unwrap(),
        ablation_cam_raw(&model, &input, 0, "target").unwrap(),
        occlusion_grid_raw(&model, &input, 0, 3, 0.0).unwrap(),
    ];
    for raw in raws {
        let m = normalize_map(&raw, 17, 23).unwrap();
        assert_eq!((m.width(), m.height()), (17, 23));
        let max = m.values().iter().copied().fold(0.0f32, f32::max);
        assert!(max == 1.0 || max == 0.0);
        assert!(m.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
