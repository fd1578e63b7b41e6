//! Session configuration: input paths, tunables and strictness flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::EngineConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("alpha must be positive, got {0}")]
    Alpha(f64),
    #[error("threshold must be non-negative, got {0}")]
    Threshold(f64),
    #[error("depth must be at least 1, got {0}")]
    Depth(usize),
}

/// Everything needed to open a session. Unset paths fall back to the
/// bundled data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub kb: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub classes: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub alpha: f64,
    pub threshold: f64,
    pub depth: usize,
    /// Abort on malformed KB lines instead of skipping them.
    pub strict_parse: bool,
    /// Reject object labels missing from the class registry.
    pub strict_classes: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let e = EngineConfig::default();
        SessionConfig {
            kb: None,
            annotations: None,
            templates: None,
            classes: None,
            attributes: None,
            alpha: e.alpha,
            threshold: e.threshold,
            depth: e.depth,
            strict_parse: false,
            strict_classes: false,
        }
    }
}

impl SessionConfig {
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if !(self.threshold >= 0.0) {
            return Err(ConfigError::Threshold(self.threshold));
        }
        if self.depth < 1 {
            return Err(ConfigError::Depth(self.depth));
        }
        Ok(())
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig { alpha: self.alpha, threshold: self.threshold, depth: self.depth }
    }
}
