//! Character-class WER stratification.
//!
//! For each class, selects the utterances whose normalized *reference*
//! contains at least one class member (selecting on hypotheses would
//! condition on the outcome), micro-averages WER/CER over the subset, and
//! reports the deviation from the overall corpus WER. Classes overlap; the
//! catalogue is not a partition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::CharClass;
use crate::metrics::{CorpusScore, UtteranceScore};
use crate::textnorm::NormalizedText;

/// Per-class subset metrics. Metrics are null when no reference contains a
/// class member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumResult {
    pub class_name: String,
    /// Space-separated member characters, for table rendering.
    pub chars: String,
    pub pashto_unique: bool,
    pub n: usize,
    pub wer: Option<f64>,
    pub cer: Option<f64>,
    /// Subset WER minus overall WER, in ratio units.
    pub delta: Option<f64>,
}

#[derive(Debug, Error)]
pub enum StrataError {
    #[error("empty class catalogue")]
    EmptyCatalogue,
}

/// Computes one stratum per class over (normalized reference, score) rows.
pub fn stratify(
    rows: &[(&NormalizedText, &UtteranceScore)],
    classes: &[CharClass],
    overall: &CorpusScore,
) -> Result<Vec<StratumResult>, StrataError> {
    if classes.is_empty() {
        return Err(StrataError::EmptyCatalogue);
    }
    let mut out = Vec::with_capacity(classes.len());
    for class in classes {
        let subset: Vec<&UtteranceScore> = rows
            .iter()
            .filter(|(reference, _)| reference.as_str().chars().any(|c| class.chars.contains(&c)))
            .map(|(_, score)| *score)
            .collect();
        let n = subset.len();
        let (wer, cer, delta) = if n == 0 {
            (None, None, None)
        } else {
            let ref_tokens: usize = subset.iter().map(|s| s.ref_tokens).sum();
            let word_edits: usize = subset.iter().map(|s| s.word_edits).sum();
            let ref_chars: usize = subset.iter().map(|s| s.ref_chars).sum();
            let char_edits: usize = subset.iter().map(|s| s.char_edits).sum();
            let wer = word_edits as f64 / ref_tokens as f64;
            let cer = char_edits as f64 / ref_chars as f64;
            (Some(wer), Some(cer), Some(wer - overall.wer))
        };
        out.push(StratumResult {
            class_name: class.name.clone(),
            chars: class.chars_display(),
            pashto_unique: class.pashto_unique,
            n,
            wer,
            cer,
            delta,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::CharacterInventory;
    use crate::metrics::{score_corpus, score_normalized, ScoreOptions};
    use crate::textnorm::{normalize, NormalizationConfig};

    fn scored(pairs: &[(&str, &str)]) -> (Vec<NormalizedText>, Vec<UtteranceScore>) {
        let cfg = NormalizationConfig::default();
        let opts = ScoreOptions::default();
        let mut refs = Vec::new();
        let mut scores = Vec::new();
        for (i, (r, h)) in pairs.iter().enumerate() {
            let nr = normalize(r, &cfg);
            let nh = normalize(h, &cfg);
            scores.push(score_normalized(&format!("u{i}"), &nr, &nh, &opts).unwrap());
            refs.push(nr);
        }
        (refs, scores)
    }

    fn rows<'a>(
        refs: &'a [NormalizedText],
        scores: &'a [UtteranceScore],
    ) -> Vec<(&'a NormalizedText, &'a UtteranceScore)> {
        refs.iter().zip(scores.iter()).collect()
    }

    #[test]
    fn class_present_in_no_reference_has_null_metrics() {
        let (refs, scores) = scored(&[("سلام دنیا", "سلام دنیا")]);
        let overall = score_corpus(&scores).unwrap();
        let classes = vec![CharClass::new("Lateral fricative", &['\u{069A}'], true)];
        let strata = stratify(&rows(&refs, &scores), &classes, &overall).unwrap();
        assert_eq!(strata[0].n, 0);
        assert!(strata[0].wer.is_none() && strata[0].cer.is_none() && strata[0].delta.is_none());
    }

    #[test]
    fn elevated_subset_has_positive_delta() {
        // Utterances containing ښ score 0.5; the others are perfect.
        let (refs, scores) = scored(&[
            ("ښار لوی دی", "ښار لوی نه"),      // 1 edit / 3 tokens... wer > 0, contains ښ
            ("ورځ ښه وه", "ورځ بد وه"),         // contains ښ, 1 edit
            ("سلام دنیا", "سلام دنیا"),
            ("کتاب دی", "کتاب دی"),
        ]);
        let overall = score_corpus(&scores).unwrap();
        let classes = vec![CharClass::new("Lateral fricative", &['\u{069A}'], true)];
        let strata = stratify(&rows(&refs, &scores), &classes, &overall).unwrap();
        assert_eq!(strata[0].n, 2);
        assert!(strata[0].delta.unwrap() > 0.0);
    }

    #[test]
    fn union_class_reproduces_overall_score() {
        let (refs, scores) = scored(&[
            ("ښار لوی دی", "ښار کوچنی دی"),
            ("سلام دنیا", "سلام"),
            ("دا کتاب دی", "دا کتاب دی"),
        ]);
        let overall = score_corpus(&scores).unwrap();
        let all_chars: Vec<char> = refs
            .iter()
            .flat_map(|r| r.as_str().chars())
            .filter(|c| !c.is_whitespace())
            .collect();
        let classes = vec![CharClass::new("everything", &all_chars, false)];
        let strata = stratify(&rows(&refs, &scores), &classes, &overall).unwrap();
        assert_eq!(strata[0].n, 3);
        assert!((strata[0].wer.unwrap() - overall.wer).abs() < 1e-15);
        assert!((strata[0].cer.unwrap() - overall.cer).abs() < 1e-15);
        assert!(strata[0].delta.unwrap().abs() < 1e-15);
    }

    #[test]
    fn selection_is_on_references_not_hypotheses() {
        let inv = CharacterInventory::default_inventory();
        let (refs_a, scores_a) = scored(&[("سلام دنیا", "ښار ښکلی")]);
        let (refs_b, scores_b) = scored(&[("سلام دنیا", "بل شی")]);
        let overall_a = score_corpus(&scores_a).unwrap();
        let overall_b = score_corpus(&scores_b).unwrap();
        let sa = stratify(&rows(&refs_a, &scores_a), &inv.strata_classes, &overall_a).unwrap();
        let sb = stratify(&rows(&refs_b, &scores_b), &inv.strata_classes, &overall_b).unwrap();
        for (x, y) in sa.iter().zip(sb.iter()) {
            assert_eq!(x.n, y.n, "class {} selection changed with hypothesis", x.class_name);
        }
    }

    #[test]
    fn empty_catalogue_is_an_error() {
        let (refs, scores) = scored(&[("سلام", "سلام")]);
        let overall = score_corpus(&scores).unwrap();
        assert!(matches!(
            stratify(&rows(&refs, &scores), &[], &overall),
            Err(StrataError::EmptyCatalogue)
        ));
    }

    #[test]
    fn delta_is_wer_minus_overall_by_construction() {
        let (refs, scores) = scored(&[("ږغ ښه دی", "ږغ بد دی"), ("سلام دنیا", "سلام دنیا")]);
        let overall = score_corpus(&scores).unwrap();
        let classes = vec![CharClass::new("Voiced lateral fric.", &['\u{0696}'], true)];
        let strata = stratify(&rows(&refs, &scores), &classes, &overall).unwrap();
        let s = &strata[0];
        assert_eq!(s.delta.unwrap(), s.wer.unwrap() - overall.wer);
    }
}
