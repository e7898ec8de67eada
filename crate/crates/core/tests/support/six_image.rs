//! Six-image corpus with hand-made maps and detections, plus the expected
//! association tables counted by hand.

#![allow(dead_code)]

use emocam_core::{ActivationMap, BoundingBox, Detection};

pub const CLASSES: [&str; 4] = ["Building", "Clothing", "Human face", "Tree"];
pub const LABELS: [&str; 3] = ["Anger", "Joy", "Sadness"];

/// Left half of a 10×10 map is hot (1.0), the right half cold (0.0).
pub fn half_hot_map() -> ActivationMap {
    let values = (0..100).map(|i| if i % 10 < 5 { 1.0 } else { 0.0 }).collect();
    ActivationMap::new(10, 10, values).unwrap()
}

fn det(class: &str, score: f64, hot: bool) -> Detection {
    let (x_min, x_max) = if hot { (0.0, 5.0) } else { (5.0, 10.0) };
    Detection {
        class_name: class.into(),
        score,
        bbox: BoundingBox {
            x_min,
            y_min: 0.0,
            x_max,
            y_max: 10.0,
        },
    }
}

pub struct Image {
    pub id: &'static str,
    pub label: &'static str,
    pub detections: Vec<Detection>,
}

pub fn corpus() -> Vec<Image> {
    vec![
        Image {
            id: "a",
            label: "Joy",
            detections: vec![
                det("Human face", 0.9, true),
                det("Human face", 0.8, true),
                det("Clothing", 0.7, true),
                det("Tree", 0.9, false),
            ],
        },
        Image {
            id: "b",
            label: "Joy",
            detections: vec![det("Human face", 0.6, true), det("Clothing", 0.2, true)],
        },
        Image {
            id: "c",
            label: "Joy",
            detections: vec![det("Building", 0.9, false), det("Tree", 0.004, true)],
        },
        Image {
            id: "d",
            label: "Joy",
            detections: vec![det("Tree", 0.5, true), det("Human face", 0.5, true)],
        },
        Image {
            id: "e",
            label: "Sadness",
            detections: vec![det("Building", 0.3, true), det("Clothing", 0.9, false)],
        },
        Image {
            id: "f",
            label: "Sadness",
            detections: vec![
                det("Human face", 0.9, true),
                det("Building", 0.9, true),
                det("Building", 0.1, true),
            ],
        },
    ]
}

/// Rows follow `CLASSES`, columns follow `LABELS`.
pub const EXPECTED_COUNTS: [[u64; 3]; 4] = [
    [0, 0, 2], // Building: e, f
    [0, 2, 0], // Clothing: a, b
    [0, 3, 1], // Human face: a, b, d | f
    [0, 1, 0], // Tree: d (c is below the detection threshold, a is cold)
];
pub const EXPECTED_IMAGES_PER_LABEL: [u64; 3] = [0, 4, 2];
pub const EXPECTED_PERCENT: [[f64; 3]; 4] = [
    [0.0, 0.0, 100.0],
    [0.0, 50.0, 0.0],
    [0.0, 75.0, 50.0],
    [0.0, 25.0, 0.0],
];

pub const COUNTS_CSV: &str = "class,Anger,Joy,Sadness\n\
Building,0,0,2\n\
Clothing,0,2,0\n\
Human face,0,3,1\n\
Tree,0,1,0\n";

pub const PERCENT_CSV: &str = "class,Anger,Joy,Sadness\n\
Building,0.0000,0.0000,100.0000\n\
Clothing,0.0000,50.0000,0.0000\n\
Human face,0.0000,75.0000,50.0000\n\
Tree,0.0000,25.0000,0.0000\n";
