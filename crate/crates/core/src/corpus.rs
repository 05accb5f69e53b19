//! Transcript manifest ingestion, validation, filtering, and pairing.
//!
//! A manifest is a UTF-8 JSON Lines file, one record per line. Required
//! fields: `id`, `reference`, `hypothesis`. Optional: `model`, `dataset`,
//! `audio_duration_s`, `decode_time_s`. Hypotheses that normalize to empty
//! are kept (they score as all-deletions); only empty references are
//! dropped.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textnorm::{is_effectively_empty, normalize, NormalizationConfig};

/// One (reference, hypothesis) pair with tags and optional timing metadata;
/// the atomic evaluation unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub reference: String,
    pub hypothesis: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub model: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub dataset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_time_s: Option<f64>,
}

/// Ordered collection of validated records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub records: Vec<UtteranceRecord>,
    pub dataset_name: String,
    pub source_note: String,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Serializes back to JSON Lines, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serialization cannot fail"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: {message}")]
    InvalidRecord { line: usize, message: String },
    #[error("duplicate id {id:?}: lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("manifests share no utterance ids; nothing to pair")]
    IncomparableManifests,
    #[error("manifests come from different datasets ({a:?} vs {b:?}); a direct significance test is not applicable")]
    DatasetMismatch { a: String, b: String },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses a line-delimited record stream, preserving input order and
/// validating every record. Blank lines are skipped.
pub fn load_manifest(reader: impl BufRead, source_note: &str) -> Result<Manifest, CorpusError> {
    let mut records = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: UtteranceRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        if record.id.is_empty() {
            return Err(CorpusError::InvalidRecord {
                line: line_no,
                message: "id must be non-empty".into(),
            });
        }
        for (name, value) in [
            ("audio_duration_s", record.audio_duration_s),
            ("decode_time_s", record.decode_time_s),
        ] {
            if let Some(v) = value {
                if !(v >= 0.0) {
                    return Err(CorpusError::InvalidRecord {
                        line: line_no,
                        message: format!("{name} must be >= 0, got {v}"),
                    });
                }
            }
        }
        if let Some(&first) = seen.get(&record.id) {
            return Err(CorpusError::DuplicateId {
                id: record.id,
                first_line: first,
                second_line: line_no,
            });
        }
        seen.insert(record.id.clone(), line_no);
        records.push(record);
    }
    let dataset_name = uniform_dataset(&records);
    Ok(Manifest {
        records,
        dataset_name,
        source_note: source_note.to_string(),
    })
}

fn uniform_dataset(records: &[UtteranceRecord]) -> String {
    let mut tags = records.iter().map(|r| r.dataset.as_str()).filter(|t| !t.is_empty());
    match tags.next() {
        Some(first) if tags.all(|t| t == first) => first.to_string(),
        _ => String::new(),
    }
}

/// Splits a manifest into records whose normalized reference is non-empty
/// (kept) and the rest (dropped). Relative order is preserved in both
/// outputs; filtering is total.
pub fn filter_empty_references(
    manifest: &Manifest,
    config: &NormalizationConfig,
) -> (Manifest, Manifest) {
    let (kept, dropped): (Vec<_>, Vec<_>) = manifest
        .records
        .iter()
        .cloned()
        .partition(|r| !is_effectively_empty(&normalize(&r.reference, config)));
    let mk = |records: Vec<UtteranceRecord>| Manifest {
        records,
        dataset_name: manifest.dataset_name.clone(),
        source_note: manifest.source_note.clone(),
    };
    (mk(kept), mk(dropped))
}

/// Records from two manifests matched by id, in the first manifest's order.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<(String, UtteranceRecord, UtteranceRecord)>,
    pub unmatched_a: Vec<String>,
    pub unmatched_b: Vec<String>,
}

/// Matches records by id for paired comparison. Unmatched ids are reported,
/// not fatal; an empty intersection or a dataset mismatch is an error.
pub fn pair_systems(a: &Manifest, b: &Manifest) -> Result<Pairing, CorpusError> {
    if !a.dataset_name.is_empty() && !b.dataset_name.is_empty() && a.dataset_name != b.dataset_name
    {
        return Err(CorpusError::DatasetMismatch {
            a: a.dataset_name.clone(),
            b: b.dataset_name.clone(),
        });
    }
    let by_id: BTreeMap<&str, &UtteranceRecord> =
        b.records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut pairs = Vec::new();
    let mut unmatched_a = Vec::new();
    for ra in &a.records {
        match by_id.get(ra.id.as_str()) {
            Some(rb) => pairs.push((ra.id.clone(), ra.clone(), (*rb).clone())),
            None => unmatched_a.push(ra.id.clone()),
        }
    }
    let paired: std::collections::BTreeSet<&str> =
        pairs.iter().map(|(id, _, _)| id.as_str()).collect();
    let unmatched_b: Vec<String> = b
        .records
        .iter()
        .filter(|r| !paired.contains(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect();
    if pairs.is_empty() {
        return Err(CorpusError::IncomparableManifests);
    }
    Ok(Pairing {
        pairs,
        unmatched_a,
        unmatched_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, reference: &str, hypothesis: &str) -> String {
        serde_json::json!({"id": id, "reference": reference, "hypothesis": hypothesis}).to_string()
    }

    #[test]
    fn loads_three_records_in_order() {
        let src = format!("{}\n{}\n{}\n", line("u1", "a", "x"), line("u2", "b", "y"), line("u3", "c", "z"));
        let m = load_manifest(src.as_bytes(), "test").unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.records[0].id, "u1");
        assert_eq!(m.records[2].id, "u3");
    }

    #[test]
    fn missing_hypothesis_names_the_line() {
        let src = format!("{}\n{{\"id\":\"u2\",\"reference\":\"b\"}}\n", line("u1", "a", "x"));
        let err = load_manifest(src.as_bytes(), "test").unwrap_err();
        match err {
            CorpusError::MalformedLine { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("hypothesis"), "message: {message}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn duplicate_id_names_both_lines() {
        let src = format!("{}\n{}\n{}\n", line("u1", "a", "x"), line("u2", "b", "y"), line("u1", "c", "z"));
        let err = load_manifest(src.as_bytes(), "test").unwrap_err();
        match err {
            CorpusError::DuplicateId { id, first_line, second_line } => {
                assert_eq!(id, "u1");
                assert_eq!((first_line, second_line), (1, 3));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn negative_duration_is_rejected() {
        let src = "{\"id\":\"u1\",\"reference\":\"a\",\"hypothesis\":\"x\",\"audio_duration_s\":-1.0}\n";
        let err = load_manifest(src.as_bytes(), "test").unwrap_err();
        assert!(matches!(err, CorpusError::InvalidRecord { line: 1, .. }));
    }

    #[test]
    fn round_trip_is_identity() {
        let src = format!("{}\n{}\n", line("u1", "سلام", "x"), line("u2", "دنیا", "y"));
        let m = load_manifest(src.as_bytes(), "test").unwrap();
        let again = load_manifest(m.to_jsonl().as_bytes(), "test").unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn punctuation_only_reference_is_dropped() {
        let cfg = NormalizationConfig::default();
        let src = format!(
            "{}\n{}\n{}\n{}\n{}\n",
            line("u1", "سلام", "a"),
            line("u2", "\u{060C}\u{061F}", "b"),
            line("u3", "دنیا", "c"),
            line("u4", "\u{0640}\u{0640}", "d"),
            line("u5", "ښه", "e"),
        );
        let m = load_manifest(src.as_bytes(), "test").unwrap();
        let (kept, dropped) = filter_empty_references(&m, &cfg);
        assert_eq!(kept.len(), 3);
        assert_eq!(dropped.len(), 2);
        assert_eq!(kept.len() + dropped.len(), m.len());
        assert_eq!(dropped.records[0].id, "u2");
        assert_eq!(dropped.records[1].id, "u4");
    }

    #[test]
    fn empty_hypothesis_is_kept() {
        let cfg = NormalizationConfig::default();
        let src = line("u1", "سلام", "");
        let m = load_manifest(format!("{src}\n").as_bytes(), "test").unwrap();
        let (kept, dropped) = filter_empty_references(&m, &cfg);
        assert_eq!(kept.len(), 1);
        assert!(dropped.is_empty());
    }

    fn manifest_with_ids(ids: &[&str]) -> Manifest {
        let records = ids
            .iter()
            .map(|id| UtteranceRecord {
                id: id.to_string(),
                reference: "ref".into(),
                hypothesis: "hyp".into(),
                model: String::new(),
                dataset: String::new(),
                audio_duration_s: None,
                decode_time_s: None,
            })
            .collect();
        Manifest { records, dataset_name: String::new(), source_note: String::new() }
    }

    #[test]
    fn pairing_matches_by_id() {
        let a = manifest_with_ids(&["u1", "u2", "u3", "u4"]);
        let b = manifest_with_ids(&["u4", "u3", "u2", "u1"]);
        let p = pair_systems(&a, &b).unwrap();
        assert_eq!(p.pairs.len(), 4);
        assert!(p.unmatched_a.is_empty() && p.unmatched_b.is_empty());
        // a's order is preserved
        assert_eq!(p.pairs[0].0, "u1");
    }

    #[test]
    fn partial_overlap_reports_unmatched() {
        let a = manifest_with_ids(&["u1", "u2"]);
        let b = manifest_with_ids(&["u2", "u3"]);
        let p = pair_systems(&a, &b).unwrap();
        assert_eq!(p.pairs.len(), 1);
        assert_eq!(p.unmatched_a, vec!["u1"]);
        assert_eq!(p.unmatched_b, vec!["u3"]);
    }

    #[test]
    fn disjoint_ids_are_incomparable() {
        let a = manifest_with_ids(&["u1"]);
        let b = manifest_with_ids(&["u2"]);
        assert!(matches!(pair_systems(&a, &b), Err(CorpusError::IncomparableManifests)));
    }

    #[test]
    fn cross_dataset_pairing_is_refused() {
        let mut a = manifest_with_ids(&["u1"]);
        let mut b = manifest_with_ids(&["u1"]);
        a.dataset_name = "fleurs".into();
        b.dataset_name = "cv24".into();
        assert!(matches!(pair_systems(&a, &b), Err(CorpusError::DatasetMismatch { .. })));
    }
}
