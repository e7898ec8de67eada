use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const IMAGE_EXTENSIONS: [&str; 8] = ["png", "jpg", "jpeg", "ppm", "pgm", "pnm", "pbm", "bmp"];

/// Image files directly under `dir`, keyed by file stem and sorted by id.
pub fn list_images(dir: &Path) -> Result<Vec<(String, PathBuf)>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Config(format!("cannot read image directory {}: {e}", dir.display())))?;
    let mut found: BTreeMap<String, PathBuf> = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let known = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if !known || !path.is_file() {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
            continue;
        };
        if let Some(prev) = found.insert(id.clone(), path.clone()) {
            return Err(CliError::Config(format!(
                "image id {id:?} is ambiguous: {} and {}",
                prev.display(),
                path.display()
            )));
        }
    }
    Ok(found.into_iter().collect())
}
