//! Toolkit configuration: a single TOML file plus flag overrides, resolved
//! into one effective configuration that is echoed into every report.
//!
//! Environment variables are deliberately never consulted; the effective
//! configuration plus the manifest bytes and the seed fully determine every
//! output byte.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::FailureThresholds;
use crate::inventory::{load_inventory, CharacterInventory, InventoryError, InventoryOverride};
use crate::metrics::ScoreOptions;
use crate::textnorm::NormalizationConfig;

/// Raw config file contents. Every section is optional; omitted sections
/// take the built-in defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub normalization: NormalizationFlags,
    #[serde(default)]
    pub scoring: Option<ScoreOptions>,
    #[serde(default)]
    pub thresholds: Option<FailureThresholds>,
    #[serde(default)]
    pub bootstrap: Option<BootstrapDefaults>,
    #[serde(default)]
    pub inventory: Option<InventoryOverride>,
}

/// The four normalization switches as they appear in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationFlags {
    #[serde(default = "on")]
    pub strip_arabic_punctuation: bool,
    #[serde(default = "on")]
    pub strip_latin_punctuation: bool,
    #[serde(default = "on")]
    pub remove_zero_width: bool,
    #[serde(default = "on")]
    pub collapse_whitespace: bool,
}

fn on() -> bool {
    true
}

impl Default for NormalizationFlags {
    fn default() -> Self {
        Self {
            strip_arabic_punctuation: true,
            strip_latin_punctuation: true,
            remove_zero_width: true,
            collapse_whitespace: true,
        }
    }
}

/// Bootstrap parameters from the config file. The seed never appears here;
/// it must come from the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapDefaults {
    #[serde(default = "default_resamples")]
    pub n_resamples: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub smoothed_p: bool,
}

fn default_resamples() -> usize {
    1000
}

fn default_confidence() -> f64 {
    0.95
}

impl Default for BootstrapDefaults {
    fn default() -> Self {
        Self {
            n_resamples: 1000,
            confidence: 0.95,
            smoothed_p: false,
        }
    }
}

/// The fully resolved configuration echoed into every report. Together with
/// the manifest bytes and the seed it reproduces a report bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub normalization: NormalizationConfig,
    pub scoring: ScoreOptions,
    pub thresholds: FailureThresholds,
    pub bootstrap: BootstrapDefaults,
    pub inventory: CharacterInventory,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Inventory(#[from] InventoryError),
}

impl EffectiveConfig {
    /// Resolves a parsed config file (or `None` for pure defaults).
    pub fn resolve(file: Option<&FileConfig>) -> Result<Self, ConfigError> {
        let file = file.cloned().unwrap_or_default();
        let mut inventory = load_inventory(None)?;
        if let Some(over) = &file.inventory {
            inventory.merge(over)?;
        }
        let mut normalization = NormalizationConfig::from_inventory(&inventory);
        normalization.strip_arabic_punctuation = file.normalization.strip_arabic_punctuation;
        normalization.strip_latin_punctuation = file.normalization.strip_latin_punctuation;
        normalization.remove_zero_width = file.normalization.remove_zero_width;
        normalization.collapse_whitespace = file.normalization.collapse_whitespace;
        Ok(Self {
            normalization,
            scoring: file.scoring.unwrap_or_default(),
            thresholds: file.thresholds.unwrap_or_default(),
            bootstrap: file.bootstrap.unwrap_or_default(),
            inventory,
        })
    }

    /// Parses and resolves TOML config text.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file: FileConfig = toml::from_str(text)?;
        Self::resolve(Some(&file))
    }

    pub fn default_config() -> Self {
        Self::resolve(None).expect("built-in defaults are valid")
    }
}

/// Parses config-file TOML without resolving it.
pub fn parse_file_config(text: &str) -> Result<FileConfig, ConfigError> {
    Ok(toml::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_and_are_stable() {
        let a = EffectiveConfig::default_config();
        let b = EffectiveConfig::default_config();
        assert_eq!(a, b);
        assert!(a.normalization.strip_latin_punctuation);
        assert_eq!(a.bootstrap.n_resamples, 1000);
    }

    #[test]
    fn file_flags_override_defaults() {
        let cfg = EffectiveConfig::from_toml(
            "[normalization]\nstrip_latin_punctuation = false\n\n[bootstrap]\nn_resamples = 50\n",
        )
        .unwrap();
        assert!(!cfg.normalization.strip_latin_punctuation);
        assert!(cfg.normalization.strip_arabic_punctuation);
        assert_eq!(cfg.bootstrap.n_resamples, 50);
    }

    #[test]
    fn inventory_override_flows_into_normalization() {
        let cfg = EffectiveConfig::from_toml(
            "[inventory]\nadd_stripped_punctuation = [\"\u{061B}\"]\n",
        )
        .unwrap();
        assert!(cfg.normalization.arabic_punctuation.contains(&'\u{061B}'));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(EffectiveConfig::from_toml("[normalizaton]\n").is_err());
    }

    #[test]
    fn config_echo_round_trips_through_json() {
        let cfg = EffectiveConfig::default_config();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: EffectiveConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }
}
