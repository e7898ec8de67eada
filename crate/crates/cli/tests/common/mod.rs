#![allow(dead_code)]

use std::path::{Path, PathBuf};

use emocam_cli::{cmd_synth, ConfigLayer, RunConfig, SynthOptions};

/// Generates a seeded demo corpus under `dir` and returns a config for it
/// with outputs in `dir/out`.
pub fn demo(dir: &Path, images: usize, size: usize, seed: u64) -> RunConfig {
    cmd_synth(&SynthOptions {
        out: dir.to_path_buf(),
        images,
        image_size: size,
        model_input: size,
        seed,
    })
    .unwrap();
    let layer = ConfigLayer::load(&dir.join("emocam.toml")).unwrap();
    RunConfig::resolve(ConfigLayer { workers: Some(1), ..Default::default() }.over(layer)).unwrap()
}

pub fn read(path: impl AsRef<Path>) -> String {
    let path = path.as_ref();
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares against a frozen snapshot. Set `EMOCAM_BLESS=1` to (re)write it.
pub fn check_golden(name: &str, actual: &[u8]) {
    let path = golden_path(name);
    if std::env::var_os("EMOCAM_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let want = std::fs::read(&path).unwrap_or_else(|e| panic!("golden {}: {e}", path.display()));
    assert!(want == actual, "output differs from golden {}", path.display());
}
