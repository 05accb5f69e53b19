//! Decoder-failure diagnostics: repetition loops, language-switched loops,
//! near-empty output, and real-time-factor aggregation.
//!
//! The loop thresholds are heuristics, not measured constants: the defaults
//! separate the documented looping patterns from clean transcriptions and
//! are configurable. Detection keys on hypothesis structure (length ratio,
//! bigram repetition share, distinct-token ratio), never on WER.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::UtteranceRecord;
use crate::script::ScriptLabel;

/// Structural signals over one (reference, hypothesis) token pair. Bigram
/// and distinct-token signals are null when the hypothesis has fewer than
/// two tokens; the length ratio is null when the reference is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSignals {
    pub length_ratio: Option<f64>,
    pub top_bigram_share: Option<f64>,
    pub distinct_token_ratio: Option<f64>,
    /// Hypothesis has at most one non-whitespace character.
    pub near_empty: bool,
}

/// Failure classification, one label per utterance. NearEmpty takes
/// precedence over the loop labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureLabel {
    RepetitionLoop,
    LanguageSwitchLoop,
    NearEmpty,
    None,
}

impl std::fmt::Display for FailureLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FailureLabel::RepetitionLoop => "RepetitionLoop",
            FailureLabel::LanguageSwitchLoop => "LanguageSwitchLoop",
            FailureLabel::NearEmpty => "NearEmpty",
            FailureLabel::None => "None",
        };
        f.write_str(s)
    }
}

/// Detection thresholds. Length ratios gate the two loop labels; the bigram
/// share gates both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureThresholds {
    pub repetition_length_ratio: f64,
    pub switch_length_ratio: f64,
    pub top_bigram_share: f64,
}

impl Default for FailureThresholds {
    fn default() -> Self {
        Self {
            repetition_length_ratio: 2.0,
            switch_length_ratio: 1.5,
            top_bigram_share: 0.3,
        }
    }
}

/// Computes the four structural signals.
pub fn loop_signals(ref_tokens: &[&str], hyp_tokens: &[&str]) -> LoopSignals {
    let length_ratio = if ref_tokens.is_empty() {
        None
    } else {
        Some(hyp_tokens.len() as f64 / ref_tokens.len() as f64)
    };
    let (top_bigram_share, distinct_token_ratio) = if hyp_tokens.len() < 2 {
        (None, None)
    } else {
        let mut bigrams: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for pair in hyp_tokens.windows(2) {
            *bigrams.entry((pair[0], pair[1])).or_insert(0) += 1;
        }
        let total = (hyp_tokens.len() - 1) as f64;
        let top = *bigrams.values().max().expect("at least one bigram") as f64;
        let distinct: std::collections::BTreeSet<&str> = hyp_tokens.iter().copied().collect();
        (
            Some(top / total),
            Some(distinct.len() as f64 / hyp_tokens.len() as f64),
        )
    };
    let non_ws_chars: usize = hyp_tokens.iter().map(|t| t.chars().count()).sum();
    LoopSignals {
        length_ratio,
        top_bigram_share,
        distinct_token_ratio,
        near_empty: non_ws_chars <= 1,
    }
}

/// Applies the precedence rule NearEmpty > RepetitionLoop >
/// LanguageSwitchLoop > None.
pub fn classify_failure(
    signals: &LoopSignals,
    script: ScriptLabel,
    thresholds: &FailureThresholds,
) -> FailureLabel {
    if signals.near_empty {
        return FailureLabel::NearEmpty;
    }
    let (Some(ratio), Some(bigram)) = (signals.length_ratio, signals.top_bigram_share) else {
        return FailureLabel::None;
    };
    if bigram >= thresholds.top_bigram_share {
        if ratio >= thresholds.repetition_length_ratio {
            return FailureLabel::RepetitionLoop;
        }
        if ratio >= thresholds.switch_length_ratio && script == ScriptLabel::ArDaUr {
            return FailureLabel::LanguageSwitchLoop;
        }
    }
    FailureLabel::None
}

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("no records carry both timing fields; real-time factor is undefined")]
    NoTimedRecords,
    #[error("total audio duration is zero; real-time factor is undefined")]
    ZeroDuration,
}

/// Corpus real-time factor with a coverage note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtfSummary {
    /// Σ decode_time_s / Σ audio_duration_s over covered records.
    pub rtf: f64,
    pub covered: usize,
    pub excluded: usize,
}

impl RtfSummary {
    pub fn coverage_note(&self) -> String {
        format!(
            "{} of {} records excluded (missing timing fields)",
            self.excluded,
            self.covered + self.excluded
        )
    }
}

/// Aggregates decode time over audio duration. Records missing either
/// timing field are excluded and counted.
pub fn corpus_rtf(records: &[UtteranceRecord]) -> Result<RtfSummary, DiagnosticsError> {
    let mut decode = 0.0;
    let mut audio = 0.0;
    let mut covered = 0usize;
    for r in records {
        if let (Some(d), Some(a)) = (r.decode_time_s, r.audio_duration_s) {
            decode += d;
            audio += a;
            covered += 1;
        }
    }
    if covered == 0 {
        return Err(DiagnosticsError::NoTimedRecords);
    }
    if audio <= 0.0 {
        return Err(DiagnosticsError::ZeroDuration);
    }
    Ok(RtfSummary {
        rtf: decode / audio,
        covered,
        excluded: records.len() - covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        if s.is_empty() { Vec::new() } else { s.split(' ').collect() }
    }

    #[test]
    fn alternating_pair_loop_signals() {
        // 9-token reference vs 24 tokens alternating between two words:
        // ratio 24/9, top bigram 12 of 23, 2 distinct tokens.
        let reference = "a b c d e f g h i";
        let hypothesis = "و او و او و او و او و او و او و او و او و او و او و او و او";
        let s = loop_signals(&toks(reference), &toks(hypothesis));
        assert!((s.length_ratio.unwrap() - 24.0 / 9.0).abs() < 1e-12);
        assert!((s.top_bigram_share.unwrap() - 12.0 / 23.0).abs() < 1e-12);
        assert!(s.top_bigram_share.unwrap() > 0.4);
        assert!((s.distinct_token_ratio.unwrap() - 2.0 / 24.0).abs() < 1e-12);
        assert!(!s.near_empty);
    }

    #[test]
    fn identical_distinct_hypothesis_signals() {
        let text = "a b c d e f g h i j";
        let s = loop_signals(&toks(text), &toks(text));
        assert_eq!(s.distinct_token_ratio, Some(1.0));
        assert!(s.top_bigram_share.unwrap() <= 1.0 / 9.0);
    }

    #[test]
    fn single_token_hypothesis_has_null_bigram_signals() {
        let s = loop_signals(&toks("a b"), &toks("سلام"));
        assert!(s.top_bigram_share.is_none());
        assert!(s.distinct_token_ratio.is_none());
        assert!(!s.near_empty);
    }

    #[test]
    fn empty_reference_has_null_length_ratio() {
        let s = loop_signals(&[], &toks("a b"));
        assert!(s.length_ratio.is_none());
    }

    #[test]
    fn repetition_loop_fires_regardless_of_script() {
        let reference = "a b c d e f g h i";
        let hypothesis = "و او و او و او و او و او و او و او و او و او و او و او و او";
        let s = loop_signals(&toks(reference), &toks(hypothesis));
        let t = FailureThresholds::default();
        assert_eq!(classify_failure(&s, ScriptLabel::Indeterminate, &t), FailureLabel::RepetitionLoop);
        assert_eq!(classify_failure(&s, ScriptLabel::ArDaUr, &t), FailureLabel::RepetitionLoop);
    }

    #[test]
    fn switched_loop_needs_ardaur_script() {
        // 8-token reference vs the same token repeated 12 times: ratio 1.5.
        let reference = "a b c d e f g h";
        let hypothesis = "باریس باریس باریس باریس باریس باریس باریس باریس باریس باریس باریس باریس";
        let s = loop_signals(&toks(reference), &toks(hypothesis));
        let t = FailureThresholds::default();
        assert_eq!(classify_failure(&s, ScriptLabel::ArDaUr, &t), FailureLabel::LanguageSwitchLoop);
        assert_eq!(classify_failure(&s, ScriptLabel::Indeterminate, &t), FailureLabel::None);
    }

    #[test]
    fn empty_hypothesis_is_near_empty_first() {
        let s = loop_signals(&toks("a b c"), &[]);
        assert!(s.near_empty);
        let t = FailureThresholds::default();
        assert_eq!(classify_failure(&s, ScriptLabel::Empty, &t), FailureLabel::NearEmpty);
    }

    #[test]
    fn clean_transcription_is_unlabeled() {
        let text = "دا یوه روښانه ورځ ده";
        let s = loop_signals(&toks(text), &toks(text));
        let t = FailureThresholds::default();
        assert_eq!(classify_failure(&s, ScriptLabel::Pashto, &t), FailureLabel::None);
    }

    fn timed(id: &str, decode: Option<f64>, audio: Option<f64>) -> UtteranceRecord {
        UtteranceRecord {
            id: id.into(),
            reference: "r".into(),
            hypothesis: "h".into(),
            model: String::new(),
            dataset: String::new(),
            audio_duration_s: audio,
            decode_time_s: decode,
        }
    }

    #[test]
    fn single_record_rtf_matches_ratio() {
        let r = corpus_rtf(&[timed("u1", Some(7.07), Some(10.0))]).unwrap();
        assert!((r.rtf - 0.707).abs() < 1e-12);
        assert_eq!(r.covered, 1);
    }

    #[test]
    fn rtf_aggregates_totals() {
        let r = corpus_rtf(&[
            timed("u1", Some(1.0), Some(10.0)),
            timed("u2", Some(1.0), Some(10.0)),
        ])
        .unwrap();
        assert!((r.rtf - 0.1).abs() < 1e-12);
    }

    #[test]
    fn missing_timing_is_excluded_with_note() {
        let r = corpus_rtf(&[
            timed("u1", Some(1.0), Some(10.0)),
            timed("u2", None, Some(10.0)),
        ])
        .unwrap();
        assert_eq!(r.covered, 1);
        assert_eq!(r.excluded, 1);
        assert_eq!(r.coverage_note(), "1 of 2 records excluded (missing timing fields)");
    }

    #[test]
    fn zero_duration_is_an_error() {
        assert!(matches!(
            corpus_rtf(&[timed("u1", Some(1.0), Some(0.0))]),
            Err(DiagnosticsError::ZeroDuration)
        ));
        assert!(matches!(
            corpus_rtf(&[timed("u1", None, None)]),
            Err(DiagnosticsError::NoTimedRecords)
        ));
    }
}
