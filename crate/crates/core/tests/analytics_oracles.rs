mod support;

use emocam_core::analytics::{
    accumulate, rsa, rsa_vectors, spearman, write_counts_csv, write_percent_csv, FlattenMode,
};
use emocam_core::detection::{filter_detections, DEFAULT_DET_THRESHOLD};
use emocam_core::importance::{select_important, DEFAULT_CACT_THRESHOLD};
use emocam_core::AssociationMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracles::spearman_oracle;
use support::{checks, six_image};

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn six_image_matrix() -> AssociationMatrix {
    let map = six_image::half_hot_map();
    let records: Vec<(&str, Vec<String>)> = six_image::corpus()
        .iter()
        .map(|img| {
            let kept = filter_detections(&img.detections, DEFAULT_DET_THRESHOLD);
            let bstar = select_important(&kept, &map, DEFAULT_CACT_THRESHOLD).unwrap();
            (img.label, bstar.into_iter().map(|s| s.detection.class_name).collect())
        })
        .collect();
    accumulate(strings(&six_image::CLASSES), strings(&six_image::LABELS), records).unwrap()
}

#[test]
fn six_image_corpus_matches_hand_count() {
    let m = six_image_matrix();
    for (i, row) in six_image::EXPECTED_COUNTS.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            assert_eq!(m.count(i, j), want, "{} / {}", six_image::CLASSES[i], six_image::LABELS[j]);
        }
    }
    assert_eq!(m.images_per_emotion(), &six_image::EXPECTED_IMAGES_PER_LABEL);
    assert_eq!(m.corpus_size(), 6);
    let pct = m.normalize();
    for (i, row) in six_image::EXPECTED_PERCENT.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            assert_eq!(pct.get(i, j), want);
        }
    }
}

#[test]
fn six_image_csv_snapshot() {
    let m = six_image_matrix();
    let mut counts = Vec::new();
    write_counts_csv(&m, &mut counts).unwrap();
    assert_eq!(String::from_utf8(counts).unwrap(), six_image::COUNTS_CSV);
    let mut pct = Vec::new();
    write_percent_csv(&m.normalize(), &mut pct).unwrap();
    assert_eq!(String::from_utf8(pct).unwrap(), six_image::PERCENT_CSV);
}

#[test]
fn accumulation_is_order_independent() {
    let records = vec![
        ("Joy", vec!["Tree", "Dog"]),
        ("Fear", vec!["Dog"]),
        ("Joy", vec![]),
        ("Joy", vec!["Dog", "Dog"]),
    ];
    let classes = strings(&["Dog", "Tree"]);
    let labels = strings(&["Fear", "Joy"]);
    let forward = accumulate(classes.clone(), labels.clone(), records.clone()).unwrap();
    let reversed = accumulate(classes, labels, records.into_iter().rev()).unwrap();
    assert_eq!(forward, reversed);
}

#[test]
fn normalize_matches_elementwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (rows, cols) = (6, 5);
    let n: Vec<u64> = (0..cols).map(|j| if j == 2 { 0 } else { rng.random_range(1..20) }).collect();
    let counts: Vec<u64> = (0..rows * cols).map(|k| rng.random_range(0..=n[k % cols])).collect();
    let m = AssociationMatrix::from_parts(
        (0..rows).map(|i| format!("c{i}")).collect(),
        (0..cols).map(|j| format!("e{j}")).collect(),
        counts.clone(),
        n.clone(),
    )
    .unwrap();
    let pct = m.normalize();
    for i in 0..rows {
        for j in 0..cols {
            let want = if n[j] == 0 { 0.0 } else { 100.0 * counts[i * cols + j] as f64 / n[j] as f64 };
            assert!((pct.get(i, j) - want).abs() <= 1e-9);
        }
    }
    let flat = m.flatten();
    for i in 0..rows {
        for j in 0..cols {
            assert_eq!(flat[i * cols + j], counts[i * cols + j] as f64);
        }
    }
}

#[test]
fn top_k_matches_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (rows, cols) = (30, 4);
    let n = vec![10u64; cols];
    // Small count alphabet so several rows tie on their mean.
    let counts: Vec<u64> = (0..rows * cols).map(|_| rng.random_range(0..3)).collect();
    let names: Vec<String> = (0..rows).map(|i| format!("class{:02}", (i * 7) % rows)).collect();
    let m = AssociationMatrix::from_parts(names.clone(), (0..cols).map(|j| format!("e{j}")).collect(), counts.clone(), n)
        .unwrap();
    let mut oracle: Vec<(f64, String)> = (0..rows)
        .map(|i| (counts[i * cols..(i + 1) * cols].iter().map(|&c| c as f64 * 10.0).sum::<f64>() / cols as f64, names[i].clone()))
        .collect();
    oracle.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let want: Vec<String> = oracle.into_iter().take(25).map(|(_, n)| n).collect();
    let pct = m.normalize();
    assert_eq!(pct.top_k_classes(25).unwrap(), want);
    assert_eq!(pct.top_k_classes(10).unwrap(), want[..10]);
}

#[test]
fn spearman_matches_oracle_on_random_tied_vectors() {
    let r = checks::spearman_check(200, 5);
    assert!(r.max_rho_err <= 1e-9 && r.max_p_err <= 1e-6, "{r:?}");
}

#[test]
fn spearman_fixed_vectors_with_ties() {
    let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0, 9.0, 7.0, 9.0, 3.0, 2.0, 3.0, 8.0, 4.0];
    let y = [2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 1.0, 8.0, 2.0, 8.0, 4.0, 5.0, 9.0, 0.0, 4.0, 5.0, 2.0, 3.0, 5.0, 3.0];
    let got = spearman(&x, &y).unwrap();
    let (rho, p) = spearman_oracle(&x, &y);
    assert!((got.rho - rho).abs() <= 1e-9);
    assert!((got.p_value - p).abs() <= 1e-6);
}

#[test]
fn spearman_identity_and_reversal() {
    let x: Vec<f64> = (0..12).map(|i| (i * i) as f64).collect();
    let same = spearman(&x, &x).unwrap();
    assert_eq!(same.rho, 1.0);
    assert_eq!(same.p_value, 0.0);
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    assert_eq!(spearman(&x, &rev).unwrap().rho, -1.0);
    assert!(spearman(&x, &[2.0; 12]).is_err());
}

#[test]
fn rsa_of_three_matrices_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let classes = strings(&["a", "b", "c", "d", "e"]);
    let labels = strings(&["x", "y", "z"]);
    let n = vec![6u64, 6, 6];
    let mats: Vec<(String, AssociationMatrix)> = ["gradcam", "ablationcam", "occlusion"]
        .iter()
        .map(|name| {
            let counts = (0..15).map(|_| rng.random_range(0..=6)).collect();
            (name.to_string(), AssociationMatrix::from_parts(classes.clone(), labels.clone(), counts, n.clone()).unwrap())
        })
        .collect();
    let r = rsa(&mats, FlattenMode::Counts).unwrap();
    for i in 0..3 {
        assert_eq!(r.rho_at(i, i), 1.0);
        for j in 0..3 {
            assert_eq!(r.rho_at(i, j).to_bits(), r.rho_at(j, i).to_bits());
            assert_eq!(r.p_at(i, j).to_bits(), r.p_at(j, i).to_bits());
            if i != j {
                let (rho, p) = spearman_oracle(&mats[i].1.flatten(), &mats[j].1.flatten());
                assert!((r.rho_at(i, j) - rho).abs() <= 1e-9);
                assert!((r.p_at(i, j) - p).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn rsa_identical_and_negated() {
    let v: Vec<f64> = vec![1.0, 4.0, 2.0, 8.0, 5.0, 7.0];
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let r = rsa_vectors(strings(&["a", "b", "c"]), &[v.clone(), v, neg]).unwrap();
    assert_eq!(r.rho_at(0, 1), 1.0);
    assert_eq!(r.rho_at(0, 2), -1.0);
    assert!(rsa_vectors(strings(&["a"]), &[vec![1.0, 2.0, 3.0]]).is_err());
}
