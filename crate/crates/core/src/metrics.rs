//! Edit-distance alignment and WER/CER computation.
//!
//! WER is the minimum word-level edit distance (uniform cost 1) divided by
//! the reference word count; CER is the same ratio over Unicode scalar
//! values of the normalized strings. Both may exceed 1 when the hypothesis
//! contains more errors than the reference has units. Corpus scores are
//! micro-averages: total edits over total reference units, never the mean
//! of per-utterance ratios.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::UtteranceRecord;
use crate::textnorm::{normalize, NormalizationConfig, NormalizedText};

/// One alignment operation, indices into the reference/hypothesis sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AlignOp {
    Hit { ref_idx: usize, hyp_idx: usize },
    Substitute { ref_idx: usize, hyp_idx: usize },
    Delete { ref_idx: usize },
    Insert { hyp_idx: usize },
}

/// Minimum-edit-distance alignment between two sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub hits: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub ops: Vec<AlignOp>,
}

impl Alignment {
    /// Minimum edit distance under uniform cost 1.
    pub fn distance(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Splits normalized text on U+0020. Empty text yields an empty sequence.
pub fn tokenize(t: &NormalizedText) -> Vec<&str> {
    if t.as_str().is_empty() {
        Vec::new()
    } else {
        t.as_str().split(' ').collect()
    }
}

/// Levenshtein alignment with deterministic backtrace. Tie-breaking prefers
/// match > substitution > deletion > insertion; the distance itself is
/// unaffected, only the ops list.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Alignment {
    let n = reference.len();
    let m = hypothesis.len();
    let width = m + 1;
    let mut dp = vec![0usize; (n + 1) * width];
    for i in 0..=n {
        dp[i * width] = i;
    }
    for j in 0..=m {
        dp[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(reference[i - 1] != hypothesis[j - 1]);
            let diag = dp[(i - 1) * width + (j - 1)] + cost;
            let del = dp[(i - 1) * width + j] + 1;
            let ins = dp[i * width + (j - 1)] + 1;
            dp[i * width + j] = diag.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 && reference[i - 1] == hypothesis[j - 1] && here == dp[(i - 1) * width + (j - 1)] {
            ops.push(AlignOp::Hit { ref_idx: i - 1, hyp_idx: j - 1 });
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && here == dp[(i - 1) * width + (j - 1)] + 1 {
            ops.push(AlignOp::Substitute { ref_idx: i - 1, hyp_idx: j - 1 });
            i -= 1;
            j -= 1;
        } else if i > 0 && here == dp[(i - 1) * width + j] + 1 {
            ops.push(AlignOp::Delete { ref_idx: i - 1 });
            i -= 1;
        } else {
            ops.push(AlignOp::Insert { hyp_idx: j - 1 });
            j -= 1;
        }
    }
    ops.reverse();

    let mut alignment = Alignment {
        hits: 0,
        substitutions: 0,
        insertions: 0,
        deletions: 0,
        ops,
    };
    for op in &alignment.ops {
        match op {
            AlignOp::Hit { .. } => alignment.hits += 1,
            AlignOp::Substitute { .. } => alignment.substitutions += 1,
            AlignOp::Delete { .. } => alignment.deletions += 1,
            AlignOp::Insert { .. } => alignment.insertions += 1,
        }
    }
    debug_assert_eq!(alignment.distance(), dp[n * width + m]);
    alignment
}

/// Per-utterance WER/CER with the raw counts behind both ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceScore {
    pub id: String,
    pub ref_tokens: usize,
    pub hyp_tokens: usize,
    pub word_edits: usize,
    pub wer: f64,
    pub ref_chars: usize,
    pub hyp_chars: usize,
    pub char_edits: usize,
    pub cer: f64,
    pub word_hits: usize,
    pub word_substitutions: usize,
    pub word_insertions: usize,
    pub word_deletions: usize,
}

/// Corpus-level micro-averaged totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusScore {
    pub n_utterances: usize,
    pub total_ref_tokens: usize,
    pub total_word_edits: usize,
    pub wer: f64,
    pub total_ref_chars: usize,
    pub total_char_edits: usize,
    pub cer: f64,
}

/// Scoring options beyond normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    /// Count internal single spaces as characters in CER. Word boundaries
    /// carry information in space-delimited script; disable to compare with
    /// the space-free convention.
    pub cer_includes_spaces: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            cer_includes_spaces: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("record {0}: reference normalizes to empty; filtering must run before scoring")]
    EmptyReference(String),
    #[error("no utterance scores to aggregate")]
    EmptyCorpus,
}

/// Scores one record: word-level alignment on tokenized normalized texts,
/// character-level alignment on the normalized strings.
pub fn score_utterance(
    record: &UtteranceRecord,
    config: &NormalizationConfig,
) -> Result<UtteranceScore, MetricsError> {
    score_utterance_with(record, config, &ScoreOptions::default())
}

pub fn score_utterance_with(
    record: &UtteranceRecord,
    config: &NormalizationConfig,
    opts: &ScoreOptions,
) -> Result<UtteranceScore, MetricsError> {
    let norm_ref = normalize(&record.reference, config);
    let norm_hyp = normalize(&record.hypothesis, config);
    score_normalized(&record.id, &norm_ref, &norm_hyp, opts)
}

/// Scores already-normalized texts; the pipeline uses this to avoid
/// normalizing twice.
pub fn score_normalized(
    id: &str,
    norm_ref: &NormalizedText,
    norm_hyp: &NormalizedText,
    opts: &ScoreOptions,
) -> Result<UtteranceScore, MetricsError> {
    let ref_tokens = tokenize(norm_ref);
    let hyp_tokens = tokenize(norm_hyp);
    if ref_tokens.is_empty() {
        return Err(MetricsError::EmptyReference(id.to_string()));
    }
    let word = align(&ref_tokens, &hyp_tokens);

    let char_seq = |t: &NormalizedText| -> Vec<char> {
        if opts.cer_includes_spaces {
            t.as_str().chars().collect()
        } else {
            t.as_str().chars().filter(|&c| c != ' ').collect()
        }
    };
    let ref_chars = char_seq(norm_ref);
    let hyp_chars = char_seq(norm_hyp);
    let chars = align(&ref_chars, &hyp_chars);

    Ok(UtteranceScore {
        id: id.to_string(),
        ref_tokens: ref_tokens.len(),
        hyp_tokens: hyp_tokens.len(),
        word_edits: word.distance(),
        wer: word.distance() as f64 / ref_tokens.len() as f64,
        ref_chars: ref_chars.len(),
        hyp_chars: hyp_chars.len(),
        char_edits: chars.distance(),
        cer: chars.distance() as f64 / ref_chars.len() as f64,
        word_hits: word.hits,
        word_substitutions: word.substitutions,
        word_insertions: word.insertions,
        word_deletions: word.deletions,
    })
}

/// Micro-averaged corpus score: Σ edits / Σ reference units.
pub fn score_corpus(scores: &[UtteranceScore]) -> Result<CorpusScore, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let total_ref_tokens: usize = scores.iter().map(|s| s.ref_tokens).sum();
    let total_word_edits: usize = scores.iter().map(|s| s.word_edits).sum();
    let total_ref_chars: usize = scores.iter().map(|s| s.ref_chars).sum();
    let total_char_edits: usize = scores.iter().map(|s| s.char_edits).sum();
    Ok(CorpusScore {
        n_utterances: scores.len(),
        total_ref_tokens,
        total_word_edits,
        wer: total_word_edits as f64 / total_ref_tokens as f64,
        total_ref_chars,
        total_char_edits,
        cer: total_char_edits as f64 / total_ref_chars as f64,
    })
}
