//! JSON run configuration. Every field is optional; explicit flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use swipegan::eval::RecognizerConfig;
use swipegan::gan::GanConfig;
use swipegan::synth::StyleParams;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub layout: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub style: Option<StyleParams>,
    pub length: Option<usize>,
    pub per_word: Option<usize>,
    pub seed: Option<u64>,
    pub gan: Option<GanConfig>,
    pub recognizer: Option<RecognizerConfig>,
}

impl RunConfig {
    /// Loads `path`, resolving file references relative to its directory.
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("--config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("--config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.layout, &mut cfg.lexicon].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
