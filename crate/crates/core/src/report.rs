//! End-to-end evaluation pipeline and report rendering.
//!
//! `run_evaluate` composes normalize → filter → score → classify →
//! stratify → (optional) bootstrap → diagnose over a manifest and returns
//! one [`EvalReport`]. Rendering produces per-utterance score lines
//! (JSON Lines), a structured summary (JSON), and markdown/CSV tables.
//! Identical inputs produce byte-identical outputs; every number in a
//! rendered table is recomputable from the score file alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EffectiveConfig;
use crate::corpus::{filter_empty_references, CorpusError, Manifest};
use crate::diagnostics::{
    classify_failure, corpus_rtf, loop_signals, DiagnosticsError, FailureLabel, LoopSignals,
    RtfSummary,
};
use crate::metrics::{
    score_corpus, score_normalized, tokenize, CorpusScore, MetricsError, UtteranceScore,
};
use crate::script::{classify, distribution, ScriptDistribution, ScriptError, ScriptLabel};
use crate::stats::{bootstrap_ci, BootstrapConfig, BootstrapResult, Metric, StatsError};
use crate::strata::{stratify, StrataError, StratumResult};
use crate::textnorm::normalize;

/// One line of the per-utterance score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceReport {
    pub model: String,
    pub dataset: String,
    #[serde(flatten)]
    pub score: UtteranceScore,
    /// Normalized texts, so every table number is recomputable from the
    /// score file alone.
    pub norm_ref: String,
    pub norm_hyp: String,
    pub script: ScriptLabel,
    pub failure: FailureLabel,
    #[serde(flatten)]
    pub signals: LoopSignals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtf: Option<f64>,
}

/// Per-model aggregate: one row of the model and script tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub corpus: CorpusScore,
    pub script: ScriptDistribution,
    pub failure_counts: BTreeMap<String, usize>,
    /// Fraction of utterances with a non-None failure label.
    pub flag_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtf: Option<RtfSummary>,
}

/// The complete evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub n_input: usize,
    pub n_kept: usize,
    pub n_dropped: usize,
    pub corpus: CorpusScore,
    pub script_distribution: ScriptDistribution,
    pub models: Vec<ModelReport>,
    pub strata: Vec<StratumResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtf: Option<RtfSummary>,
    pub per_utterance: Vec<UtteranceReport>,
    pub inventory_checksum: String,
    pub config_echo: EffectiveConfig,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("metrics: {0}")]
    Metrics(MetricsError),
    #[error("script: {0}")]
    Script(#[from] ScriptError),
    #[error("strata: {0}")]
    Strata(#[from] StrataError),
    #[error("stats: {0}")]
    Stats(#[from] StatsError),
    #[error("diagnostics: {0}")]
    Diagnostics(#[from] DiagnosticsError),
    #[error("no scorable utterances after filtering")]
    NothingToScore,
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

impl ReportError {
    /// Exit code contract: 1 for input errors, 2 for internal invariant
    /// violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Internal(_) => 2,
            _ => 1,
        }
    }
}

/// Runs the full pipeline. Bootstrap runs only when a seed is supplied.
pub fn run_evaluate(
    manifest: &Manifest,
    config: &EffectiveConfig,
    seed: Option<u64>,
) -> Result<EvalReport, ReportError> {
    let (kept, dropped) = filter_empty_references(manifest, &config.normalization);
    if kept.is_empty() {
        return Err(ReportError::NothingToScore);
    }

    let mut per_utterance = Vec::with_capacity(kept.len());
    let mut norm_refs = Vec::with_capacity(kept.len());
    for record in &kept.records {
        let norm_ref = normalize(&record.reference, &config.normalization);
        let norm_hyp = normalize(&record.hypothesis, &config.normalization);
        // Filtering guarantees a non-empty reference; a failure here is a bug.
        let score = score_normalized(&record.id, &norm_ref, &norm_hyp, &config.scoring)
            .map_err(|e| ReportError::Internal(format!("scoring kept record: {e}")))?;
        let script = classify(&norm_hyp, &config.inventory);
        let signals = loop_signals(&tokenize(&norm_ref), &tokenize(&norm_hyp));
        let failure = classify_failure(&signals, script, &config.thresholds);
        let rtf = match (record.decode_time_s, record.audio_duration_s) {
            (Some(d), Some(a)) if a > 0.0 => Some(d / a),
            _ => None,
        };
        per_utterance.push(UtteranceReport {
            model: record.model.clone(),
            dataset: record.dataset.clone(),
            score,
            norm_ref: norm_ref.as_str().to_string(),
            norm_hyp: norm_hyp.as_str().to_string(),
            script,
            failure,
            signals,
            rtf,
        });
        norm_refs.push(norm_ref);
    }

    let scores: Vec<UtteranceScore> = per_utterance.iter().map(|u| u.score.clone()).collect();
    let corpus = score_corpus(&scores).map_err(ReportError::Metrics)?;

    let labels: Vec<ScriptLabel> = per_utterance.iter().map(|u| u.script).collect();
    let script_distribution = distribution(&labels)?;

    let rows: Vec<_> = norm_refs
        .iter()
        .zip(scores.iter())
        .collect();
    let strata = stratify(&rows, &config.inventory.strata_classes, &corpus)?;

    let bootstrap = match seed {
        Some(seed) => {
            let cfg = BootstrapConfig {
                n_resamples: config.bootstrap.n_resamples,
                confidence: config.bootstrap.confidence,
                seed,
                smoothed_p: config.bootstrap.smoothed_p,
            };
            Some(bootstrap_ci(&scores, Metric::Wer, &cfg)?)
        }
        None => None,
    };

    let rtf = match corpus_rtf(&kept.records) {
        Ok(summary) => Some(summary),
        Err(DiagnosticsError::NoTimedRecords) => None,
        Err(e) => return Err(e.into()),
    };

    let mut by_model: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, u) in per_utterance.iter().enumerate() {
        by_model.entry(u.model.clone()).or_default().push(i);
    }
    let mut models = Vec::with_capacity(by_model.len());
    for (model, idxs) in by_model {
        let model_scores: Vec<UtteranceScore> =
            idxs.iter().map(|&i| per_utterance[i].score.clone()).collect();
        let model_corpus = score_corpus(&model_scores).map_err(ReportError::Metrics)?;
        let model_labels: Vec<ScriptLabel> = idxs.iter().map(|&i| per_utterance[i].script).collect();
        let model_script = distribution(&model_labels)?;
        let mut failure_counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut flagged = 0usize;
        for &i in &idxs {
            let label = per_utterance[i].failure;
            *failure_counts.entry(label.to_string()).or_insert(0) += 1;
            if label != FailureLabel::None {
                flagged += 1;
            }
        }
        let model_records: Vec<_> = idxs.iter().map(|&i| kept.records[i].clone()).collect();
        let model_rtf = match corpus_rtf(&model_records) {
            Ok(summary) => Some(summary),
            Err(DiagnosticsError::NoTimedRecords) => None,
            Err(e) => return Err(e.into()),
        };
        models.push(ModelReport {
            model,
            corpus: model_corpus,
            script: model_script,
            failure_counts,
            flag_rate: flagged as f64 / idxs.len() as f64,
            rtf: model_rtf,
        });
    }

    Ok(EvalReport {
        dataset: manifest.dataset_name.clone(),
        n_input: manifest.len(),
        n_kept: kept.len(),
        n_dropped: dropped.len(),
        corpus,
        script_distribution,
        models,
        strata,
        bootstrap,
        rtf,
        per_utterance,
        inventory_checksum: config.inventory.checksum(),
        config_echo: config.clone(),
    })
}

/// Output formats for rendered tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Markdown,
    Csv,
    Structured,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "structured" | "json" => Ok(Format::Structured),
            other => Err(format!("unknown format {other:?} (expected markdown, csv, or structured)")),
        }
    }
}

/// Percentage with one decimal, half-to-even rounding.
pub fn pct(ratio: f64) -> String {
    let scaled = (ratio * 1000.0).round_ties_even() / 10.0;
    format!("{scaled:.1}")
}

/// Signed percentage-point delta with one decimal.
pub fn pct_delta(ratio: f64) -> String {
    let scaled = (ratio * 1000.0).round_ties_even() / 10.0;
    if scaled >= 0.0 {
        format!("+{scaled:.1}")
    } else {
        format!("{scaled:.1}")
    }
}

fn opt_pct(v: Option<f64>) -> String {
    v.map(pct).unwrap_or_else(|| "-".into())
}

fn opt_delta(v: Option<f64>) -> String {
    v.map(pct_delta).unwrap_or_else(|| "-".into())
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
}

fn md_row(fields: &[String]) -> String {
    format!("| {} |", fields.iter().map(|f| f.replace('|', "\\|")).collect::<Vec<_>>().join(" | "))
}

struct Table {
    name: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn markdown(&self, checksum: &str) -> String {
        let mut out = String::new();
        out.push_str(&md_row(&self.header));
        out.push('\n');
        out.push_str(&md_row(&vec!["---".to_string(); self.header.len()]));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&md_row(row));
            out.push('\n');
        }
        out.push_str(&format!("\nInventory checksum: {checksum}\n"));
        out
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&csv_row(&self.header));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&csv_row(row));
            out.push('\n');
        }
        out
    }
}

fn models_table(report: &EvalReport) -> Table {
    let header = ["Model", "N", "WER", "CER", "Ps%", "RTF"]
        .map(String::from)
        .to_vec();
    let rows = report
        .models
        .iter()
        .map(|m| {
            vec![
                m.model.clone(),
                m.corpus.n_utterances.to_string(),
                pct(m.corpus.wer),
                pct(m.corpus.cer),
                pct(m.script.pashto_pct / 100.0),
                m.rtf
                    .as_ref()
                    .map(|r| format!("{:.3}", r.rtf))
                    .unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    Table { name: "models", header, rows }
}

fn scripts_table(report: &EvalReport) -> Table {
    let header = ["Model", "N", "Ps%", "Ar/Da/Ur%", "La%", "Em%", "In%"]
        .map(String::from)
        .to_vec();
    let rows = report
        .models
        .iter()
        .map(|m| {
            vec![
                m.model.clone(),
                m.script.n.to_string(),
                pct(m.script.pashto_pct / 100.0),
                pct(m.script.ardaur_pct / 100.0),
                pct(m.script.latin_pct / 100.0),
                pct(m.script.empty_pct / 100.0),
                pct(m.script.indeterminate_pct / 100.0),
            ]
        })
        .collect();
    Table { name: "scripts", header, rows }
}

fn strata_table(report: &EvalReport) -> Table {
    let header = ["Class", "Chars", "WER%", "CER%", "Delta", "N"]
        .map(String::from)
        .to_vec();
    let rows = report
        .strata
        .iter()
        .map(|s| {
            vec![
                s.class_name.clone(),
                s.chars.clone(),
                opt_pct(s.wer),
                opt_pct(s.cer),
                opt_delta(s.delta),
                s.n.to_string(),
            ]
        })
        .collect();
    Table { name: "strata", header, rows }
}

fn diagnostics_table(report: &EvalReport) -> Table {
    let header = ["Model", "N", "RepetitionLoop", "LanguageSwitchLoop", "NearEmpty", "FlagRate%", "RTF"]
        .map(String::from)
        .to_vec();
    let rows = report
        .models
        .iter()
        .map(|m| {
            let count = |k: &str| m.failure_counts.get(k).copied().unwrap_or(0).to_string();
            vec![
                m.model.clone(),
                m.script.n.to_string(),
                count("RepetitionLoop"),
                count("LanguageSwitchLoop"),
                count("NearEmpty"),
                pct(m.flag_rate),
                m.rtf
                    .as_ref()
                    .map(|r| format!("{:.3}", r.rtf))
                    .unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    Table { name: "diagnostics", header, rows }
}

/// Per-utterance score lines, one JSON object per line, manifest order.
pub fn render_scores_jsonl(report: &EvalReport) -> String {
    let mut out = String::new();
    for u in &report.per_utterance {
        out.push_str(&serde_json::to_string(u).expect("score serialization cannot fail"));
        out.push('\n');
    }
    out
}

/// The full report as pretty JSON.
pub fn render_summary_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Renders the requested formats as (file name, contents) pairs.
pub fn render_tables(report: &EvalReport, formats: &[Format]) -> Vec<(String, String)> {
    let mut files = Vec::new();
    let tables = [
        models_table(report),
        scripts_table(report),
        strata_table(report),
        diagnostics_table(report),
    ];
    let mut wanted: Vec<Format> = formats.to_vec();
    wanted.sort();
    wanted.dedup();
    for format in wanted {
        match format {
            Format::Markdown => {
                for t in &tables {
                    files.push((
                        format!("table_{}.md", t.name),
                        t.markdown(&report.inventory_checksum),
                    ));
                }
            }
            Format::Csv => {
                for t in &tables {
                    files.push((format!("table_{}.csv", t.name), t.csv()));
                }
            }
            Format::Structured => {
                files.push(("summary.json".to_string(), render_summary_json(report)));
                files.push(("scores.jsonl".to_string(), render_scores_jsonl(report)));
            }
        }
    }
    files
}

/// Parses a summary back into a report (structured round-trip).
pub fn parse_summary_json(text: &str) -> Result<EvalReport, serde_json::Error> {
    serde_json::from_str(text)
}

/// Reads per-utterance score lines written by [`render_scores_jsonl`].
pub fn load_score_lines(reader: impl std::io::BufRead) -> Result<Vec<UtteranceReport>, CorpusError> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: UtteranceReport =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
                line: idx + 1,
                message: e.to_string(),
            })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Script audit without scoring: classification needs only hypotheses, so
/// no reference filtering applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub overall: ScriptDistribution,
    pub models: Vec<(String, ScriptDistribution)>,
    pub inventory_checksum: String,
}

pub fn run_audit(manifest: &Manifest, config: &EffectiveConfig) -> Result<AuditReport, ReportError> {
    let labels: Vec<(String, ScriptLabel)> = manifest
        .records
        .iter()
        .map(|r| {
            let hyp = normalize(&r.hypothesis, &config.normalization);
            (r.model.clone(), classify(&hyp, &config.inventory))
        })
        .collect();
    let overall = distribution(&labels.iter().map(|(_, l)| *l).collect::<Vec<_>>())?;
    let mut by_model: BTreeMap<String, Vec<ScriptLabel>> = BTreeMap::new();
    for (model, label) in labels {
        by_model.entry(model).or_default().push(label);
    }
    let mut models = Vec::with_capacity(by_model.len());
    for (model, labels) in by_model {
        models.push((model, distribution(&labels)?));
    }
    Ok(AuditReport {
        overall,
        models,
        inventory_checksum: config.inventory.checksum(),
    })
}

fn audit_table(report: &AuditReport) -> Table {
    let header = ["Model", "N", "Ps%", "Ar/Da/Ur%", "La%", "Em%", "In%"]
        .map(String::from)
        .to_vec();
    let rows = report
        .models
        .iter()
        .map(|(model, d)| {
            vec![
                model.clone(),
                d.n.to_string(),
                pct(d.pashto_pct / 100.0),
                pct(d.ardaur_pct / 100.0),
                pct(d.latin_pct / 100.0),
                pct(d.empty_pct / 100.0),
                pct(d.indeterminate_pct / 100.0),
            ]
        })
        .collect();
    Table { name: "scripts", header, rows }
}

/// Renders the audit table in the requested formats.
pub fn render_audit(report: &AuditReport, formats: &[Format]) -> Vec<(String, String)> {
    let table = audit_table(report);
    let mut files = Vec::new();
    let mut wanted: Vec<Format> = formats.to_vec();
    wanted.sort();
    wanted.dedup();
    for format in wanted {
        match format {
            Format::Markdown => files.push((
                "table_scripts.md".to_string(),
                table.markdown(&report.inventory_checksum),
            )),
            Format::Csv => files.push(("table_scripts.csv".to_string(), table.csv())),
            Format::Structured => files.push((
                "audit.json".to_string(),
                serde_json::to_string_pretty(report).expect("audit serialization cannot fail") + "\n",
            )),
        }
    }
    files
}

/// One diagnostics line: structural signals and failure label, no scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseRow {
    pub id: String,
    pub model: String,
    pub script: ScriptLabel,
    pub failure: FailureLabel,
    #[serde(flatten)]
    pub signals: LoopSignals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtf: Option<f64>,
}

/// Per-model diagnostics summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDiagnostics {
    pub model: String,
    pub n: usize,
    pub failure_counts: BTreeMap<String, usize>,
    pub flag_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtf: Option<RtfSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub rows: Vec<DiagnoseRow>,
    pub models: Vec<ModelDiagnostics>,
    pub inventory_checksum: String,
}

/// Failure diagnostics over a manifest. References are used only for the
/// length-ratio signal, so empty references are tolerated here.
pub fn run_diagnose(
    manifest: &Manifest,
    config: &EffectiveConfig,
) -> Result<DiagnoseReport, ReportError> {
    let mut rows = Vec::with_capacity(manifest.len());
    for record in &manifest.records {
        let norm_ref = normalize(&record.reference, &config.normalization);
        let norm_hyp = normalize(&record.hypothesis, &config.normalization);
        let script = classify(&norm_hyp, &config.inventory);
        let signals = loop_signals(&tokenize(&norm_ref), &tokenize(&norm_hyp));
        let failure = classify_failure(&signals, script, &config.thresholds);
        let rtf = match (record.decode_time_s, record.audio_duration_s) {
            (Some(d), Some(a)) if a > 0.0 => Some(d / a),
            _ => None,
        };
        rows.push(DiagnoseRow {
            id: record.id.clone(),
            model: record.model.clone(),
            script,
            failure,
            signals,
            rtf,
        });
    }
    let mut by_model: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        by_model.entry(row.model.clone()).or_default().push(i);
    }
    let mut models = Vec::with_capacity(by_model.len());
    for (model, idxs) in by_model {
        let mut failure_counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut flagged = 0usize;
        for &i in &idxs {
            *failure_counts.entry(rows[i].failure.to_string()).or_insert(0) += 1;
            if rows[i].failure != FailureLabel::None {
                flagged += 1;
            }
        }
        let records: Vec<_> = idxs.iter().map(|&i| manifest.records[i].clone()).collect();
        let rtf = match corpus_rtf(&records) {
            Ok(summary) => Some(summary),
            Err(DiagnosticsError::NoTimedRecords) => None,
            Err(e) => return Err(e.into()),
        };
        models.push(ModelDiagnostics {
            model,
            n: idxs.len(),
            failure_counts,
            flag_rate: flagged as f64 / idxs.len() as f64,
            rtf,
        });
    }
    Ok(DiagnoseReport {
        rows,
        models,
        inventory_checksum: config.inventory.checksum(),
    })
}

/// Renders diagnostics: per-utterance JSON lines plus a per-model table.
pub fn render_diagnose(report: &DiagnoseReport, formats: &[Format]) -> Vec<(String, String)> {
    let header = ["Model", "N", "RepetitionLoop", "LanguageSwitchLoop", "NearEmpty", "FlagRate%", "RTF"]
        .map(String::from)
        .to_vec();
    let table_rows = report
        .models
        .iter()
        .map(|m| {
            let count = |k: &str| m.failure_counts.get(k).copied().unwrap_or(0).to_string();
            vec![
                m.model.clone(),
                m.n.to_string(),
                count("RepetitionLoop"),
                count("LanguageSwitchLoop"),
                count("NearEmpty"),
                pct(m.flag_rate),
                m.rtf
                    .as_ref()
                    .map(|r| format!("{:.3}", r.rtf))
                    .unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    let table = Table { name: "diagnostics", header, rows: table_rows };
    let mut files = Vec::new();
    let mut wanted: Vec<Format> = formats.to_vec();
    wanted.sort();
    wanted.dedup();
    for format in wanted {
        match format {
            Format::Markdown => files.push((
                "table_diagnostics.md".to_string(),
                table.markdown(&report.inventory_checksum),
            )),
            Format::Csv => files.push(("table_diagnostics.csv".to_string(), table.csv())),
            Format::Structured => {
                let mut lines = String::new();
                for row in &report.rows {
                    lines.push_str(
                        &serde_json::to_string(row).expect("row serialization cannot fail"),
                    );
                    lines.push('\n');
                }
                files.push(("diagnostics.jsonl".to_string(), lines));
                files.push((
                    "diagnostics_summary.json".to_string(),
                    serde_json::to_string_pretty(report)
                        .expect("diagnostics serialization cannot fail")
                        + "\n",
                ));
            }
        }
    }
    files
}
