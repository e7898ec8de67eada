//! Class-activation attribution toolkit for image emotion classifiers: a
//! small CPU inference engine with tail gradients, Grad-CAM / Ablation-CAM /
//! occlusion maps, detector-box importance scoring, object–emotion
//! association matrices with RSA, and a patch-pasting perturbation harness.

pub mod analytics;
pub mod attribution;
pub mod detection;
mod error;
pub mod hash;
pub mod imaging;
pub mod importance;
pub mod perturbation;
pub mod synthetic;
pub mod tensor;

pub use analytics::{AssociationMatrix, NormalizedAssociation, RsaMatrix, Spearman};
pub use attribution::{ActivationMap, CamMethod, RawMap};
pub use detection::{BoundingBox, Detection, DetectionSet, ImageDetections};
pub use error::{Error, Result};
pub use imaging::ImageRgba;
pub use importance::{BStarEntry, BStarRecord, ScoredDetection};
pub use perturbation::{NamedPatch, PerturbationOutcome, PositionGrid};
pub use tensor::{load_model, ModelDescriptor, ModelSpec, Prediction, Tensor};
