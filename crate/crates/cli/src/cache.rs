//! On-disk cache: `<out>/cache/<model hash>/{pred,<method key>}/<image id>.*`.

use std::path::{Path, PathBuf};

use emocam_core::{ActivationMap, CamMethod, ModelSpec};
use log::warn;

use crate::commands::PredictionRecord;

#[derive(Debug, Clone)]
pub(crate) struct Cache {
    root: Option<PathBuf>,
    grid_n: usize,
}

/// Occlusion maps depend on the grid size, so it is part of the key.
fn method_key(method: CamMethod, grid_n: usize) -> String {
    match method {
        CamMethod::OcclusionGrid => format!("{}-g{grid_n}", method.as_str()),
        _ => method.as_str().to_owned(),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) {
    let result = (|| {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("partial");
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        warn!("cache write {} failed: {e}", path.display());
    }
}

impl Cache {
    pub fn new(out: &Path, model: &ModelSpec, enabled: bool, grid_n: usize) -> Self {
        let root = enabled.then(|| out.join("cache").join(format!("{:016x}", model.content_hash())));
        Self { root, grid_n }
    }

    fn path(&self, dir: &str, id: &str, ext: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(dir).join(format!("{id}.{ext}")))
    }

    pub fn load_prediction(&self, id: &str) -> Option<PredictionRecord> {
        let bytes = std::fs::read(self.path("pred", id, "json")?).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn store_prediction(&self, record: &PredictionRecord) {
        if let Some(path) = self.path("pred", &record.image_id, "json") {
            write_atomic(&path, &serde_json::to_vec(record).expect("record serializes"));
        }
    }

    pub fn load_map(&self, method: CamMethod, id: &str) -> Option<ActivationMap> {
        let path = self.path(&method_key(method, self.grid_n), id, "map")?;
        ActivationMap::from_bytes(&std::fs::read(path).ok()?).ok()
    }

    pub fn store_map(&self, method: CamMethod, id: &str, map: &ActivationMap) {
        if let Some(path) = self.path(&method_key(method, self.grid_n), id, "map") {
            write_atomic(&path, &map.to_bytes());
        }
    }
}
