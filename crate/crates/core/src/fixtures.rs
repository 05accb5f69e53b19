//! Bundled reference utterances: the scoring examples behind the unit and
//! acceptance tests, the decoder-failure patterns, and the hand-labeled
//! script-audit set. Useful for demo runs (`pseval evaluate` on the
//! combined manifest reproduces the per-utterance scores asserted in the
//! acceptance suite).

use crate::corpus::{Manifest, UtteranceRecord};
use crate::script::ScriptLabel;

/// Nine-plus-one-word read-speech sentence whose reference carries six
/// Pashto-unique characters; the first word is heh + combining hamza
/// (U+0647 U+0654), which NFC keeps decomposed.
pub const ISLANDS_REF: &str = "پهٔ ټاپوګانواو جهيلونو کې تاسو کوچنۍ کښتۍ اړتیا نه لرئ";
/// Zero-shot output on [`ISLANDS_REF`]: every Pashto-unique character is
/// replaced by an Arabic-script lookalike; no word survives intact.
pub const ISLANDS_HYP_ZEROSHOT: &str = "پتاپوگانو او جیلونو کی تازو کوچنی کختی عرطیان نلری";
/// Fine-tuned W2V-BERT output on [`ISLANDS_REF`].
pub const ISLANDS_HYP_W2VBERT: &str = "پهٔ ټاپوګانو او جیلونو کې تاسو کوچني کښتۍ اړتیا نلرئ";
/// Fine-tuned Whisper-Base output on [`ISLANDS_REF`].
pub const ISLANDS_HYP_WHISPER_FT: &str = "پهٔ ټاپوګانو او جیلونو کې تازو کوچنۍ کښتې اړتیا نلري";

/// Ten-word sentence with a sentence-final lateral-fricative verb.
pub const FACTORY_REF: &str = "تلویزوني راپورونه د کارخانې څخه د سپین دود راوتل ښایي";
/// W2V-BERT output on [`FACTORY_REF`]: two substitutions.
pub const FACTORY_HYP_W2VBERT: &str = "تلویزیوني راپورونه د کارخانې څخه د سپین دود راوتل کیږي";

/// Eight-word sentence.
pub const PARIS_REF: &str = "پاریسیان بد او تکبر اناګونسیک شهرت درلودونکي دي";
/// W2V-BERT output on [`PARIS_REF`]: two substitutions.
pub const PARIS_HYP_W2VBERT: &str = "پاریسیان باد او تکبر اناګونسیک شهرت ترېلونکي دي";
/// Whisper-Base output on [`PARIS_REF`]: errors on four of eight content
/// words plus split tokens.
pub const PARIS_HYP_WHISPER_FT: &str = "پارسیان بد او تقبر عنه ګونديک شورت تر لونکي دي";

/// Repetition-loop pattern: the decoder commits to a short high-frequency
/// token pair and repeats it, 24 tokens against a 9-word reference.
pub const LOOP_REPETITION_REF: &str = "زه نن سهار د ښار بازار ته ولاړم خو";
pub const LOOP_REPETITION_HYP: &str = "و او و او و او و او و او و او و او و او و او و او و او و او";

/// Language-switched loop: one Arabic-script word repeated twelve times
/// against an 8-word reference.
pub const LOOP_SWITCHED_REF: &str = "دوی تېر کال پاریس ته سفر وکړ چې";
pub const LOOP_SWITCHED_HYP: &str = "باریس باریس باریس باریس باریس باریس باریس باریس باریس باریس باریس باریس";

/// Reference paired with an empty hypothesis (near-empty pattern).
pub const NEAR_EMPTY_REF: &str = "هوا نن ډېره ښه ده";

fn record(
    id: &str,
    model: &str,
    reference: &str,
    hypothesis: &str,
    audio_duration_s: Option<f64>,
    decode_time_s: Option<f64>,
) -> UtteranceRecord {
    UtteranceRecord {
        id: id.to_string(),
        reference: reference.to_string(),
        hypothesis: hypothesis.to_string(),
        model: model.to_string(),
        dataset: "fixtures".to_string(),
        audio_duration_s,
        decode_time_s,
    }
}

/// The five scoring examples, in canonical order. Expected per-utterance
/// WERs: 1.00, 0.60, 0.70, 0.20, 0.25.
pub fn scoring_records() -> Vec<UtteranceRecord> {
    vec![
        record("u01", "whisper-large-v3", ISLANDS_REF, ISLANDS_HYP_ZEROSHOT, None, None),
        record("u02", "pashto-asr-v3", ISLANDS_REF, ISLANDS_HYP_W2VBERT, None, None),
        record("u03", "ps-base-l1", ISLANDS_REF, ISLANDS_HYP_WHISPER_FT, None, None),
        record("u04", "pashto-asr-v3", FACTORY_REF, FACTORY_HYP_W2VBERT, None, None),
        record("u05", "pashto-asr-v3", PARIS_REF, PARIS_HYP_W2VBERT, None, None),
    ]
}

/// Sixth scoring example: the Whisper-Base output on [`PARIS_REF`], whose
/// alignment gives WER 0.875 (7 edits over 8 reference words).
pub fn sixth_scoring_record() -> UtteranceRecord {
    record("u06", "ps-base-l1", PARIS_REF, PARIS_HYP_WHISPER_FT, None, None)
}

/// The three decoder-failure patterns. The first carries timing metadata
/// (decode 7.07 s over 10 s of audio, RTF 0.707); the second leaves decode
/// time unset to exercise the RTF coverage note.
pub fn failure_records() -> Vec<UtteranceRecord> {
    vec![
        record("u07", "whisper-medium", LOOP_REPETITION_REF, LOOP_REPETITION_HYP, Some(10.0), Some(7.07)),
        record("u08", "whisper-medium", LOOP_SWITCHED_REF, LOOP_SWITCHED_HYP, Some(8.0), None),
        record("u09", "whisper-medium", NEAR_EMPTY_REF, "", Some(6.0), Some(0.012)),
    ]
}

/// All nine fixture records as one manifest.
pub fn combined_manifest() -> Manifest {
    let mut records = scoring_records();
    records.push(sixth_scoring_record());
    records.extend(failure_records());
    Manifest {
        records,
        dataset_name: "fixtures".to_string(),
        source_note: "bundled fixtures".to_string(),
    }
}

/// Thirty raw hypotheses hand-labeled before the classifier was written,
/// covering all five script categories. Labels apply to the text after
/// normalization with the default pipeline.
pub const SCRIPT_AUDIT_SET: [(&str, ScriptLabel); 30] = [
    ("ښار ښکلی دی", ScriptLabel::Pashto),
    ("زه پوهنتون ته ځم", ScriptLabel::Pashto),
    ("دا کتاب ډېر ښه دی", ScriptLabel::Pashto),
    ("موږ ږغ اورو", ScriptLabel::Pashto),
    ("هغه ټول خلک راغلل", ScriptLabel::Pashto),
    ("کوچنۍ کښتۍ", ScriptLabel::Pashto),
    ("ګل په باغ کې دی", ScriptLabel::Pashto),
    ("سړی ړوند دی", ScriptLabel::Pashto),
    ("مرحبا بكم في باريس", ScriptLabel::ArDaUr),
    ("این کتاب خوب است", ScriptLabel::ArDaUr),
    ("سلام دنیا", ScriptLabel::ArDaUr),
    ("ما به مدرسه می رویم", ScriptLabel::ArDaUr),
    ("الحمد لله رب العالمين", ScriptLabel::ArDaUr),
    ("باریس باریس باریس", ScriptLabel::ArDaUr),
    ("کتاب او قلم", ScriptLabel::ArDaUr),
    ("hello world", ScriptLabel::Latin),
    ("this is english text", ScriptLabel::Latin),
    ("Paris is a nice city", ScriptLabel::Latin),
    ("abc def ghi", ScriptLabel::Latin),
    ("ASR output here", ScriptLabel::Latin),
    ("", ScriptLabel::Empty),
    ("   ", ScriptLabel::Empty),
    ("،؟", ScriptLabel::Empty),
    ("ـــ", ScriptLabel::Empty),
    ("123 456", ScriptLabel::Indeterminate),
    ("۱۲۳ ۴۵۶", ScriptLabel::Indeterminate),
    ("سلام ok 12", ScriptLabel::Indeterminate),
    ("αβγδ εζηθ", ScriptLabel::Indeterminate),
    ("خوب good 99", ScriptLabel::Indeterminate),
    ("ایا yes", ScriptLabel::Indeterminate),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_strings_survive_transcription_intact() {
        // Guard against source-encoding corruption: pin the code point
        // shapes the other tests depend on.
        let first: Vec<u32> = ISLANDS_REF.chars().take(3).map(|c| c as u32).collect();
        assert_eq!(first, vec![0x067E, 0x0647, 0x0654]);
        assert_eq!(ISLANDS_REF.split(' ').count(), 10);
        assert_eq!(FACTORY_REF.split(' ').count(), 10);
        assert_eq!(PARIS_REF.split(' ').count(), 8);
        assert_eq!(LOOP_REPETITION_REF.split(' ').count(), 9);
        assert_eq!(LOOP_REPETITION_HYP.split(' ').count(), 24);
        assert_eq!(LOOP_SWITCHED_REF.split(' ').count(), 8);
        assert_eq!(LOOP_SWITCHED_HYP.split(' ').count(), 12);
        assert_eq!(NEAR_EMPTY_REF.split(' ').count(), 5);
    }

    #[test]
    fn script_audit_set_covers_all_five_categories() {
        use std::collections::BTreeSet;
        assert_eq!(SCRIPT_AUDIT_SET.len(), 30);
        let labels: BTreeSet<ScriptLabel> = SCRIPT_AUDIT_SET.iter().map(|(_, l)| *l).collect();
        assert_eq!(labels.len(), 5);
    }

    #[test]
    fn combined_manifest_has_unique_ids() {
        use std::collections::BTreeSet;
        let m = combined_manifest();
        let ids: BTreeSet<&str> = m.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids.len(), m.len());
        assert_eq!(m.len(), 9);
    }
}
