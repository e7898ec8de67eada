use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed weights container: {0}")]
    Container(String),

    #[error("invalid model descriptor: {0}")]
    Descriptor(String),

    #[error("missing tensor \"{0}\" in weights container")]
    MissingTensor(String),

    #[error("layer {layer}: tensor \"{tensor}\" has shape {found:?}, expected {expected:?}")]
    WeightShape {
        layer: String,
        tensor: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("layer {layer}: incompatible input shape {shape:?} ({reason})")]
    LayerShape {
        layer: String,
        shape: Vec<usize>,
        reason: String,
    },

    #[error("invalid tensor: {0}")]
    Tensor(String),

    #[error("unknown layer \"{0}\"")]
    UnknownLayer(String),

    #[error("layer \"{0}\" is not a conv2d layer")]
    NotConvLayer(String),

    #[error("layer \"{layer}\" of kind {kind} is not supported in the backward tail")]
    UnsupportedTailLayer { layer: String, kind: &'static str },

    #[error("class index {index} out of range for {count} labels")]
    ClassIndex { index: usize, count: usize },

    #[error("trace does not match model: {0}")]
    TraceMismatch(String),

    #[error("image decode failed for {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("image encode failed: {0}")]
    Encode(String),

    #[error("dimension mismatch: {0}")]
    Dimensions(String),

    #[error("class score {0:e} too close to zero for ablation weights")]
    DegenerateScore(f64),

    #[error("non-finite value in activation map")]
    NonFinite,

    #[error("malformed map file: {0}")]
    MapFormat(String),

    #[error("detections line {line}: {reason}")]
    DetectionLine { line: usize, reason: String },

    #[error("detections for image \"{image_id}\": {reason}")]
    DetectionRecord { image_id: String, reason: String },

    #[error("box {0:?} covers no pixel of the map")]
    DegenerateBox([f64; 4]),

    #[error("unknown emotion label \"{0}\"")]
    UnknownLabel(String),

    #[error("unknown object class \"{0}\"")]
    UnknownClass(String),

    #[error("association matrices disagree on ordering: {0}")]
    OrderingMismatch(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
