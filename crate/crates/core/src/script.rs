//! Script-fidelity audit: five-way classification of hypothesis text.
//!
//! A hypothesis is Pashto-script only when the majority of its
//! non-whitespace characters fall in U+0600–U+06FF *and* at least one
//! Pashto-unique code point is present; pure Arabic-script output without
//! a unique code point is Ar/Da/Ur (the audit cannot distinguish Pashto
//! from Dari or classical Arabic there). Majority means strictly more than
//! half; 50/50 mixes land in Indeterminate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::CharacterInventory;
use crate::textnorm::NormalizedText;

/// The five audit categories. Every hypothesis receives exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScriptLabel {
    Pashto,
    ArDaUr,
    Latin,
    Empty,
    Indeterminate,
}

impl std::fmt::Display for ScriptLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScriptLabel::Pashto => "Pashto",
            ScriptLabel::ArDaUr => "ArDaUr",
            ScriptLabel::Latin => "Latin",
            ScriptLabel::Empty => "Empty",
            ScriptLabel::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

/// Category fractions, as percentages of n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptDistribution {
    pub pashto_pct: f64,
    pub ardaur_pct: f64,
    pub latin_pct: f64,
    pub empty_pct: f64,
    pub indeterminate_pct: f64,
    pub n: usize,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("no hypotheses to audit")]
    EmptyManifest,
}

/// Digits count as non-whitespace characters outside both tested groups,
/// so a digits-only output is Indeterminate even though the Arabic-Indic
/// forms sit inside U+0600–U+06FF.
fn is_digit_char(c: char) -> bool {
    c.is_ascii_digit() || ('\u{0660}'..='\u{0669}').contains(&c) || ('\u{06F0}'..='\u{06F9}').contains(&c)
}

fn is_latin_letter(c: char) -> bool {
    c.is_ascii_alphabetic()
}

/// Classifies one normalized hypothesis by the two-tier Unicode criterion.
pub fn classify(hyp: &NormalizedText, inv: &CharacterInventory) -> ScriptLabel {
    let chars: Vec<char> = hyp.as_str().chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return ScriptLabel::Empty;
    }
    let total = chars.len() as f64;
    let arabic = chars
        .iter()
        .filter(|&&c| inv.in_arabic_block(c) && !is_digit_char(c))
        .count() as f64;
    let latin = chars.iter().filter(|&&c| is_latin_letter(c)).count() as f64;
    if arabic / total > 0.5 {
        if chars.iter().any(|c| inv.pashto_unique.contains(c)) {
            return ScriptLabel::Pashto;
        }
        return ScriptLabel::ArDaUr;
    }
    if latin / total > 0.5 {
        return ScriptLabel::Latin;
    }
    ScriptLabel::Indeterminate
}

/// Classifies every hypothesis and returns category fractions.
pub fn audit(
    hypotheses: &[NormalizedText],
    inv: &CharacterInventory,
) -> Result<ScriptDistribution, ScriptError> {
    let labels: Vec<ScriptLabel> = hypotheses.iter().map(|h| classify(h, inv)).collect();
    distribution(&labels)
}

/// Category fractions from precomputed labels.
pub fn distribution(labels: &[ScriptLabel]) -> Result<ScriptDistribution, ScriptError> {
    if labels.is_empty() {
        return Err(ScriptError::EmptyManifest);
    }
    let n = labels.len();
    let pct = |want: ScriptLabel| {
        100.0 * labels.iter().filter(|&&l| l == want).count() as f64 / n as f64
    };
    Ok(ScriptDistribution {
        pashto_pct: pct(ScriptLabel::Pashto),
        ardaur_pct: pct(ScriptLabel::ArDaUr),
        latin_pct: pct(ScriptLabel::Latin),
        empty_pct: pct(ScriptLabel::Empty),
        indeterminate_pct: pct(ScriptLabel::Indeterminate),
        n,
    })
}
