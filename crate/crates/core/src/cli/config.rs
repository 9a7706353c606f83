//! Run settings: command-line flags over a JSON file over built-in defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::RefinementConfig;
use crate::subdivision::{Scheme, FOUR_POINT_W};
use crate::trace::DEFAULT_MASS_THRESHOLD;

/// Contents of a `--config` file. Every key is optional; unknown keys are
/// rejected so typos do not silently fall back to defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub degree: Option<usize>,
    pub level: Option<usize>,
    pub scheme: Option<Scheme>,
    pub p: Option<f64>,
    pub epsilon: Option<f64>,
    pub w: Option<f64>,
    pub merge_tol: Option<f64>,
    pub mass_threshold: Option<f64>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Fills every unset key from `fallback`.
    pub fn or(self, fallback: FileConfig) -> FileConfig {
        FileConfig {
            degree: self.degree.or(fallback.degree),
            level: self.level.or(fallback.level),
            scheme: self.scheme.or(fallback.scheme),
            p: self.p.or(fallback.p),
            epsilon: self.epsilon.or(fallback.epsilon),
            w: self.w.or(fallback.w),
            merge_tol: self.merge_tol.or(fallback.merge_tol),
            mass_threshold: self.mass_threshold.or(fallback.mass_threshold),
            seed: self.seed.or(fallback.seed),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let base = RefinementConfig::default();
        let refinement = RefinementConfig {
            degree: self.degree.unwrap_or(base.degree),
            level: self.level.unwrap_or(base.level),
            cost_exponent: self.p.unwrap_or(base.cost_exponent),
            prune_threshold: self.epsilon.unwrap_or(base.prune_threshold),
            merge_tolerance: self.merge_tol.unwrap_or(base.merge_tolerance),
            seed: self.seed.unwrap_or(base.seed),
        };
        refinement.validate()?;
        let mass_threshold = self.mass_threshold.unwrap_or(DEFAULT_MASS_THRESHOLD);
        if !(0.0..1.0).contains(&mass_threshold) {
            return Err(Error::Config(format!(
                "mass threshold must lie in [0, 1), got {mass_threshold}"
            )));
        }
        Ok(RunConfig {
            refinement,
            scheme: self.scheme.unwrap_or(Scheme::Wlr),
            w: self.w.unwrap_or(FOUR_POINT_W),
            mass_threshold,
        })
    }
}

/// Fully resolved settings, recorded in every manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub refinement: RefinementConfig,
    pub scheme: Scheme,
    pub w: f64,
    pub mass_threshold: f64,
}

/// Layers `flags` over the optional file over the defaults.
pub fn resolve(flags: FileConfig, file: Option<&Path>) -> Result<RunConfig> {
    let from_file = match file {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    flags.or(from_file).resolve()
}
