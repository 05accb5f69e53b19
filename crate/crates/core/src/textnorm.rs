//! Deterministic text normalization, the prerequisite for every metric.
//!
//! The default pipeline applies, in order: Unicode NFC composition, kashida
//! (U+0640) removal, punctuation stripping (Arabic comma/full stop/question
//! mark plus a configurable ASCII set), zero-width and directional control
//! removal, and whitespace collapse to single U+0020 with trimming. The
//! output is a fixed point of the pipeline and byte-identical across runs
//! and platforms for identical input.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::inventory::{CharacterInventory, KASHIDA};

/// Zero-width and directional control characters stripped by default:
/// ZWNJ, ZWJ, LRM, RLM, BOM/ZWNBSP. Keyboard artifacts that would
/// otherwise split tokens invisibly.
pub const ZERO_WIDTH: [char; 5] = ['\u{200C}', '\u{200D}', '\u{200E}', '\u{200F}', '\u{FEFF}'];

/// Configuration of the normalization pipeline. The default reproduces the
/// reference pipeline (NFC + kashida + punctuation stripping) with the
/// ASCII punctuation extension switched on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub strip_arabic_punctuation: bool,
    pub strip_latin_punctuation: bool,
    pub remove_zero_width: bool,
    pub collapse_whitespace: bool,
    /// Arabic-script punctuation stripped when `strip_arabic_punctuation`.
    pub arabic_punctuation: BTreeSet<char>,
    /// ASCII punctuation stripped when `strip_latin_punctuation`.
    pub latin_punctuation: BTreeSet<char>,
    /// Control characters removed when `remove_zero_width`.
    pub zero_width: BTreeSet<char>,
}

impl NormalizationConfig {
    /// Builds the configuration from a character inventory, partitioning its
    /// strip set into Arabic and ASCII halves.
    pub fn from_inventory(inv: &CharacterInventory) -> Self {
        let (latin, arabic): (BTreeSet<char>, BTreeSet<char>) =
            inv.stripped_punctuation.iter().partition(|c| c.is_ascii());
        Self {
            strip_arabic_punctuation: true,
            strip_latin_punctuation: true,
            remove_zero_width: true,
            collapse_whitespace: true,
            arabic_punctuation: arabic,
            latin_punctuation: latin,
            zero_width: ZERO_WIDTH.iter().copied().collect(),
        }
    }

    fn strips(&self, c: char) -> bool {
        if c == KASHIDA {
            return true;
        }
        if self.strip_arabic_punctuation && self.arabic_punctuation.contains(&c) {
            return true;
        }
        if self.strip_latin_punctuation && self.latin_punctuation.contains(&c) {
            return true;
        }
        if self.remove_zero_width && self.zero_width.contains(&c) {
            return true;
        }
        false
    }
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self::from_inventory(&CharacterInventory::default_inventory())
    }
}

/// Normalized text: NFC-composed, kashida-free, punctuation-free,
/// single-space-separated, trimmed. Only produced by [`normalize`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Number of Unicode scalar values, internal spaces included.
    pub fn char_count(&self) -> usize {
        self.0.chars().count()
    }
}

impl AsRef<str> for NormalizedText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Runs the normalization pipeline. Total on valid UTF-8; invalid encoding
/// is rejected at ingestion, never here.
pub fn normalize(raw: &str, config: &NormalizationConfig) -> NormalizedText {
    let composed: String = raw.nfc().collect();
    let stripped: String = composed.chars().filter(|&c| !config.strips(c)).collect();
    if !config.collapse_whitespace {
        return NormalizedText(stripped);
    }
    let mut out = String::with_capacity(stripped.len());
    let mut pending_space = false;
    for c in stripped.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    NormalizedText(out)
}

/// True iff the text contains no non-whitespace character. References that
/// are effectively empty are excluded from scoring.
pub fn is_effectively_empty(t: &NormalizedText) -> bool {
    t.0.chars().all(char::is_whitespace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(s: &str) -> String {
        normalize(s, &NormalizationConfig::default()).into_string()
    }

    #[test]
    fn kashida_is_removed() {
        assert_eq!(norm("ک\u{0640}تاب"), "کتاب");
    }

    #[test]
    fn arabic_punctuation_is_stripped() {
        assert_eq!(norm("سلام\u{060C} دنیا\u{061F}"), "سلام دنیا");
    }

    #[test]
    fn latin_punctuation_flag() {
        assert_eq!(norm("a, b."), "a b");
        let mut cfg = NormalizationConfig::default();
        cfg.strip_latin_punctuation = false;
        assert_eq!(normalize("a, b.", &cfg).as_str(), "a, b.");
    }

    // NFC fixtures computed with a reference Unicode implementation before
    // this module was written: U+0647 U+0654 has no precomposed form and
    // stays decomposed; U+06D5 U+0654 composes to U+06C0.
    #[test]
    fn nfc_keeps_heh_hamza_decomposed() {
        let out = norm("\u{0647}\u{0654}");
        let cps: Vec<u32> = out.chars().map(|c| c as u32).collect();
        assert_eq!(cps, vec![0x0647, 0x0654]);
    }

    #[test]
    fn nfc_composes_ae_hamza_to_heh_with_yeh_above() {
        let out = norm("\u{06D5}\u{0654}");
        let cps: Vec<u32> = out.chars().map(|c| c as u32).collect();
        assert_eq!(cps, vec![0x06C0]);
    }

    #[test]
    fn whitespace_collapses_and_trims() {
        assert_eq!(norm("  سلام \t\u{00A0} دنیا \n"), "سلام دنیا");
    }

    #[test]
    fn zero_width_characters_are_removed() {
        assert_eq!(norm("کار\u{200C}ګر\u{FEFF}"), "کارګر");
    }

    #[test]
    fn digits_are_left_untouched() {
        assert_eq!(norm("۱۲۳ 456"), "۱۲۳ 456");
    }

    #[test]
    fn effectively_empty_cases() {
        let cfg = NormalizationConfig::default();
        assert!(is_effectively_empty(&normalize("", &cfg)));
        assert!(is_effectively_empty(&normalize("\u{0640}\u{0640}\u{060C}\u{061F}", &cfg)));
        assert!(!is_effectively_empty(&normalize("ا", &cfg)));
    }

    #[test]
    fn idempotent_on_fixture_strings() {
        let cfg = NormalizationConfig::default();
        for s in ["کـتاب", "سلام، دنیا؟", "  a  b  ", "\u{06D5}\u{0654}x"] {
            let once = normalize(s, &cfg);
            let twice = normalize(once.as_str(), &cfg);
            assert_eq!(once, twice);
        }
    }
}
