//! Corpus-level aggregation: class × emotion association counts, their
//! per-emotion percentage form, class ranking, and cross-method RSA.

mod export;
mod spearman;

pub use export::{
    write_counts_csv, write_percent_csv, write_rsa_csv, write_matrix_heatmap, RsaTable,
};
pub use spearman::{average_ranks, rsa, rsa_vectors, spearman, FlattenMode, RsaMatrix, Spearman};

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[i][j]`: images predicted as emotion `j` whose high-importance set
/// contains class `i` at least once. `images_per_emotion[j]`: images
/// predicted as emotion `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationMatrix {
    class_names: Vec<String>,
    emotion_labels: Vec<String>,
    counts: Vec<u64>,
    images_per_emotion: Vec<u64>,
}

fn index_of(names: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate {what} \"{n}\"")));
        }
    }
    Ok(map)
}

impl AssociationMatrix {
    pub fn empty(class_names: Vec<String>, emotion_labels: Vec<String>) -> Result<Self> {
        index_of(&class_names, "class")?;
        index_of(&emotion_labels, "emotion label")?;
        let counts = vec![0; class_names.len() * emotion_labels.len()];
        let images_per_emotion = vec![0; emotion_labels.len()];
        Ok(Self {
            class_names,
            emotion_labels,
            counts,
            images_per_emotion,
        })
    }

    /// Builds a matrix from raw parts, checking `a_ij <= n_j`.
    pub fn from_parts(
        class_names: Vec<String>,
        emotion_labels: Vec<String>,
        counts: Vec<u64>,
        images_per_emotion: Vec<u64>,
    ) -> Result<Self> {
        let mut m = Self::empty(class_names, emotion_labels)?;
        if counts.len() != m.counts.len() || images_per_emotion.len() != m.images_per_emotion.len() {
            return Err(Error::Dimensions("association matrix parts have the wrong size".into()));
        }
        m.counts = counts;
        m.images_per_emotion = images_per_emotion;
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let cols = self.emotion_labels.len();
        for (i, &a) in self.counts.iter().enumerate() {
            if a > self.images_per_emotion[i % cols] {
                return Err(Error::InvalidArgument(format!(
                    "count {a} for ({}, {}) exceeds the emotion total",
                    self.class_names[i / cols],
                    self.emotion_labels[i % cols]
                )));
            }
        }
        Ok(())
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn emotion_labels(&self) -> &[String] {
        &self.emotion_labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn images_per_emotion(&self) -> &[u64] {
        &self.images_per_emotion
    }

    pub fn count(&self, class: usize, emotion: usize) -> u64 {
        self.counts[class * self.emotion_labels.len() + emotion]
    }

    pub fn corpus_size(&self) -> u64 {
        self.images_per_emotion.iter().sum()
    }

    pub fn same_ordering(&self, other: &Self) -> bool {
        self.class_names == other.class_names && self.emotion_labels == other.emotion_labels
    }

    /// Elementwise sum of two partial matrices over the same orderings.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if !self.same_ordering(other) {
            return Err(Error::OrderingMismatch("cannot merge matrices with different orderings".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.images_per_emotion.iter_mut().zip(&other.images_per_emotion) {
            *a += b;
        }
        Ok(())
    }

    pub fn normalize(&self) -> NormalizedAssociation {
        let cols = self.emotion_labels.len();
        let percentages = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &a)| match self.images_per_emotion[i % cols] {
                0 => 0.0,
                n => 100.0 * a as f64 / n as f64,
            })
            .collect();
        NormalizedAssociation {
            class_names: self.class_names.clone(),
            emotion_labels: self.emotion_labels.clone(),
            percentages,
        }
    }

    /// Row-major concatenation of the counts.
    pub fn flatten(&self) -> Vec<f64> {
        self.counts.iter().map(|&a| a as f64).collect()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: Self = serde_json::from_str(&text)?;
        Self::from_parts(raw.class_names, raw.emotion_labels, raw.counts, raw.images_per_emotion)
    }
}

/// Incremental builder keeping name → index lookups.
#[derive(Debug, Clone)]
pub struct Accumulator {
    matrix: AssociationMatrix,
    class_index: HashMap<String, usize>,
    label_index: HashMap<String, usize>,
}

impl Accumulator {
    pub fn new(class_names: Vec<String>, emotion_labels: Vec<String>) -> Result<Self> {
        let class_index = index_of(&class_names, "class")?;
        let label_index = index_of(&emotion_labels, "emotion label")?;
        Ok(Self {
            matrix: AssociationMatrix::empty(class_names, emotion_labels)?,
            class_index,
            label_index,
        })
    }

    /// Adds one image. Classes are deduplicated: each counts at most once.
    pub fn add_image<S: AsRef<str>>(&mut self, label: &str, classes: impl IntoIterator<Item = S>) -> Result<()> {
        let j = *self
            .label_index
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))?;
        let mut rows = BTreeSet::new();
        for c in classes {
            let c = c.as_ref();
            rows.insert(*self.class_index.get(c).ok_or_else(|| Error::UnknownClass(c.to_owned()))?);
        }
        let cols = self.matrix.emotion_labels.len();
        for i in rows {
            self.matrix.counts[i * cols + j] += 1;
        }
        self.matrix.images_per_emotion[j] += 1;
        Ok(())
    }

    pub fn finish(self) -> AssociationMatrix {
        self.matrix
    }
}

/// Builds the association matrix from per-image `(predicted label, classes)`.
pub fn accumulate<L, C, S>(
    class_names: Vec<String>,
    emotion_labels: Vec<String>,
    records: impl IntoIterator<Item = (L, C)>,
) -> Result<AssociationMatrix>
where
    L: AsRef<str>,
    C: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut acc = Accumulator::new(class_names, emotion_labels)?;
    for (label, classes) in records {
        acc.add_image(label.as_ref(), classes)?;
    }
    Ok(acc.finish())
}

/// Column-normalized association in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAssociation {
    pub class_names: Vec<String>,
    pub emotion_labels: Vec<String>,
    pub percentages: Vec<f64>,
}

impl NormalizedAssociation {
    pub fn get(&self, class: usize, emotion: usize) -> f64 {
        self.percentages[class * self.emotion_labels.len() + emotion]
    }

    pub fn row_mean(&self, class: usize) -> f64 {
        let cols = self.emotion_labels.len();
        if cols == 0 {
            return 0.0;
        }
        self.percentages[class * cols..(class + 1) * cols].iter().sum::<f64>() / cols as f64
    }

    /// Classes by descending row mean, ties broken by name; at most `k`.
    pub fn top_k_classes(&self, k: usize) -> Result<Vec<String>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let mut rows: Vec<(f64, &String)> = (0..self.class_names.len())
            .map(|i| (self.row_mean(i), &self.class_names[i]))
            .collect();
        rows.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        Ok(rows.into_iter().take(k).map(|(_, n)| n.clone()).collect())
    }

    /// The rows for `classes`, in that order.
    pub fn restrict(&self, classes: &[String]) -> Result<Self> {
        let cols = self.emotion_labels.len();
        let mut percentages = Vec::with_capacity(classes.len() * cols);
        for c in classes {
            let i = self
                .class_names
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| Error::UnknownClass(c.clone()))?;
            percentages.extend_from_slice(&self.percentages[i * cols..(i + 1) * cols]);
        }
        Ok(Self {
            class_names: classes.to_vec(),
            emotion_labels: self.emotion_labels.clone(),
            percentages,
        })
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.percentages.clone()
    }
}
