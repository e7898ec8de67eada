mod support;

use emocam_core::detection::{filter_detections, DEFAULT_DET_THRESHOLD};
use emocam_core::importance::{box_importance, select_important, DEFAULT_CACT_THRESHOLD};
use emocam_core::{ActivationMap, BoundingBox, Detection};
use support::checks;

fn det(class: &str, score: f64, b: [f64; 4]) -> Detection {
    Detection {
        class_name: class.into(),
        score,
        bbox: BoundingBox {
            x_min: b[0],
            y_min: b[1],
            x_max: b[2],
            y_max: b[3],
        },
    }
}

#[test]
fn box_importance_matches_brute_force() {
    let r = checks::c_act_check(1000, 17);
    assert!(r.max_abs_err <= 1e-9, "{r:?}");
}

#[test]
fn importance_threshold_is_strict() {
    // Three of ten pixels hot: mean exactly 0.3.
    let mut values = vec![0.0f32; 10];
    values[..3].fill(1.0);
    let map = ActivationMap::new(10, 1, values).unwrap();
    let at = det("at", 0.9, [0.0, 0.0, 10.0, 1.0]);
    let above = det("above", 0.9, [0.0, 0.0, 7.5, 1.0]);
    assert_eq!(box_importance(&map, &at.bbox).unwrap(), 0.3);
    let kept = select_important(&[at, above], &map, DEFAULT_CACT_THRESHOLD).unwrap();
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].detection.class_name, "above");
}

#[test]
fn detection_threshold_is_strict() {
    let b = [0.0, 0.0, 1.0, 1.0];
    let dets = vec![det("at", 0.005, b), det("above", 0.0051, b), det("below", 0.0049, b)];
    let kept = filter_detections(&dets, DEFAULT_DET_THRESHOLD);
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].class_name, "above");
}
