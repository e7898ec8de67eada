//! Corpus-level pipeline behind the `emocam` binary: prediction, CAM
//! analysis into association matrices, RSA, patch perturbation and overlay
//! rendering, with an on-disk cache keyed by model hash.

mod cache;
mod commands;
mod config;
mod corpus;

pub use commands::{
    cmd_analyze, cmd_overlay, cmd_perturb, cmd_predict, cmd_rsa, cmd_synth, AnalyzeReport, PerturbReport, PredictReport,
    PredictionRecord, SynthOptions,
};
pub use config::{parse_methods, ConfigLayer, RunConfig, DEFAULT_GRID_N, WORKERS_ENV};
pub use corpus::{list_images, IMAGE_EXTENSIONS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot load model: {0}")]
    Model(emocam_core::Error),
    #[error(transparent)]
    Core(#[from] emocam_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("all {0} images failed")]
    AllFailed(usize),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub(crate) fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for problems detected before any work starts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(_) => 2,
            _ => 1,
        }
    }
}
