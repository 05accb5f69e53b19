//! `pseval`: deterministic evaluation of Pashto ASR output.
//!
//! Subcommands mirror the pipeline stages so any single report can be
//! produced in isolation: `normalize`, `filter`, `evaluate`, `audit`,
//! `stratify`, `compare`, `diagnose`, `inventory show`.
//!
//! Exit codes: 0 success, 1 input error, 2 internal invariant violation.
//! Environment variables are never consulted.

use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use pseval_core::config::{EffectiveConfig, FileConfig};
use pseval_core::corpus::{self, CorpusError, Manifest};
use pseval_core::report::{self, Format, ReportError, UtteranceReport};
use pseval_core::stats::{paired_bootstrap, BootstrapConfig, Metric};
use pseval_core::textnorm::normalize;

#[derive(Parser)]
#[command(name = "pseval", version, about = "Deterministic Pashto ASR evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize text lines (stdin or a file) to normalized lines
    Normalize {
        /// Input text file; stdin when omitted
        input: Option<PathBuf>,
        /// Output file; stdout when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Split a manifest into kept/dropped by the empty-reference rule
    Filter {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory for kept.jsonl and dropped.jsonl
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the full pipeline and write score files and tables
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bootstrap seed; bootstrap runs only when given
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated: markdown, csv, structured
        #[arg(long, value_delimiter = ',', default_value = "markdown,csv,structured")]
        formats: Vec<String>,
    },
    /// Script-fidelity audit (one table row per model tag)
    Audit {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory for table files; table prints to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "markdown,csv")]
        formats: Vec<String>,
    },
    /// Character-class stratification table
    Stratify {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "markdown,csv")]
        formats: Vec<String>,
    },
    /// Paired bootstrap comparison of two per-utterance score files
    Compare {
        #[arg(long)]
        scores_a: PathBuf,
        #[arg(long)]
        scores_b: PathBuf,
        /// Seed for the deterministic resampling stream (required)
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        resamples: Option<usize>,
        #[arg(long)]
        confidence: Option<f64>,
        /// wer or cer
        #[arg(long, default_value = "wer")]
        metric: String,
        /// Apply +1/(R+1) smoothing to the p-value
        #[arg(long)]
        smoothed: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Decoder-failure diagnostics (loop labels, signals, RTF)
    Diagnose {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "markdown,structured")]
        formats: Vec<String>,
    },
    /// Character-inventory inspection
    Inventory {
        #[command(subcommand)]
        command: InventoryCommand,
    },
}

#[derive(Subcommand)]
enum InventoryCommand {
    /// Print the active inventory and its checksum
    Show {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successes; anything else is an input error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<ReportError>()
                .map(ReportError::exit_code)
                .unwrap_or(1);
            std::process::exit(code);
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<EffectiveConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?;
            let file: FileConfig = toml_parse(&text)?;
            Ok(EffectiveConfig::resolve(Some(&file))?)
        }
        None => Ok(EffectiveConfig::default_config()),
    }
}

fn toml_parse(text: &str) -> Result<FileConfig> {
    pseval_core::config::parse_file_config(text).map_err(Into::into)
}

fn load_manifest_file(path: &Path) -> Result<Manifest> {
    let file = fs::File::open(path)
        .with_context(|| format!("cannot open manifest {}", path.display()))?;
    let manifest = corpus::load_manifest(BufReader::new(file), &path.display().to_string())?;
    Ok(manifest)
}

fn parse_formats(formats: &[String]) -> Result<Vec<Format>> {
    formats
        .iter()
        .map(|s| s.parse::<Format>().map_err(anyhow::Error::msg))
        .collect()
}

fn write_files(out: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    for (name, content) in files {
        let path = out.join(name);
        fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, files: &[(String, String)]) -> Result<()> {
    match out {
        Some(dir) => {
            write_files(dir, files)?;
            for (name, _) in files {
                println!("wrote {}", dir.join(name).display());
            }
        }
        None => {
            let stdout = io::stdout();
            let mut handle = stdout.lock();
            for (_, content) in files {
                handle.write_all(content.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Normalize { input, output, config } => {
            let config = load_config(config.as_deref())?;
            let text = match &input {
                Some(p) => {
                    fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?
                }
                None => {
                    let mut buf = String::new();
                    io::stdin().read_to_string(&mut buf).context("cannot read stdin")?;
                    buf
                }
            };
            let mut out = String::new();
            for line in text.lines() {
                out.push_str(normalize(line, &config.normalization).as_str());
                out.push('\n');
            }
            match &output {
                Some(p) => fs::write(p, out)
                    .with_context(|| format!("cannot write {}", p.display()))?,
                None => io::stdout().write_all(out.as_bytes())?,
            }
            Ok(())
        }
        Command::Filter { manifest, out, config } => {
            let config = load_config(config.as_deref())?;
            let manifest = load_manifest_file(&manifest)?;
            let (kept, dropped) = corpus::filter_empty_references(&manifest, &config.normalization);
            write_files(
                &out,
                &[
                    ("kept.jsonl".to_string(), kept.to_jsonl()),
                    ("dropped.jsonl".to_string(), dropped.to_jsonl()),
                ],
            )?;
            println!("total={} kept={} dropped={}", manifest.len(), kept.len(), dropped.len());
            Ok(())
        }
        Command::Evaluate { manifest, out, config, seed, formats } => {
            let config = load_config(config.as_deref())?;
            let formats = parse_formats(&formats)?;
            let manifest = load_manifest_file(&manifest)?;
            let eval = report::run_evaluate(&manifest, &config, seed)?;
            let mut files = report::render_tables(&eval, &formats);
            if !formats.contains(&Format::Structured) {
                // Score lines are always written; tables must be recomputable
                // from them.
                files.push(("scores.jsonl".to_string(), report::render_scores_jsonl(&eval)));
            }
            write_files(&out, &files)?;
            println!(
                "n={} kept={} dropped={} wer={} cer={} inventory={}",
                eval.n_input,
                eval.n_kept,
                eval.n_dropped,
                report::pct(eval.corpus.wer),
                report::pct(eval.corpus.cer),
                eval.inventory_checksum,
            );
            if let Some(b) = &eval.bootstrap {
                println!(
                    "bootstrap: wer={:.4} ci95=[{:.4}, {:.4}] resamples={} seed={}",
                    b.point, b.ci_low, b.ci_high, b.n_resamples, b.seed
                );
            }
            Ok(())
        }
        Command::Audit { manifest, out, config, formats } => {
            let config = load_config(config.as_deref())?;
            let formats = parse_formats(&formats)?;
            let manifest = load_manifest_file(&manifest)?;
            let audit = report::run_audit(&manifest, &config)?;
            emit(out.as_deref(), &report::render_audit(&audit, &formats))
        }
        Command::Stratify { manifest, out, config, formats } => {
            let config = load_config(config.as_deref())?;
            let formats = parse_formats(&formats)?;
            let manifest = load_manifest_file(&manifest)?;
            let eval = report::run_evaluate(&manifest, &config, None)?;
            let files: Vec<(String, String)> = report::render_tables(&eval, &formats)
                .into_iter()
                .filter(|(name, _)| name.starts_with("table_strata") || name.starts_with("summary"))
                .collect();
            emit(out.as_deref(), &files)
        }
        Command::Compare {
            scores_a,
            scores_b,
            seed,
            resamples,
            confidence,
            metric,
            smoothed,
            config,
        } => {
            let config = load_config(config.as_deref())?;
            let metric = match metric.as_str() {
                "wer" => Metric::Wer,
                "cer" => Metric::Cer,
                other => bail!("unknown metric {other:?} (expected wer or cer)"),
            };
            let rows_a = load_scores_file(&scores_a)?;
            let rows_b = load_scores_file(&scores_b)?;
            check_same_dataset(&rows_a, &rows_b)?;
            let (pairs, unmatched_a, unmatched_b) = pair_rows(&rows_a, &rows_b)?;
            for id in &unmatched_a {
                eprintln!("warning: id {id:?} only in {}", scores_a.display());
            }
            for id in &unmatched_b {
                eprintln!("warning: id {id:?} only in {}", scores_b.display());
            }
            let bootstrap = BootstrapConfig {
                n_resamples: resamples.unwrap_or(config.bootstrap.n_resamples),
                confidence: confidence.unwrap_or(config.bootstrap.confidence),
                seed,
                smoothed_p: smoothed || config.bootstrap.smoothed_p,
            };
            let result = paired_bootstrap(&pairs, metric, &bootstrap)?;
            println!(
                "pairs={} unmatched_a={} unmatched_b={}",
                pairs.len(),
                unmatched_a.len(),
                unmatched_b.len()
            );
            println!(
                "paired bootstrap: metric={} resamples={} seed={} confidence={}",
                if metric == Metric::Wer { "wer" } else { "cer" },
                result.n_resamples,
                result.seed,
                bootstrap.confidence,
            );
            println!(
                "delta(A-B)={:+.6} ci=[{:+.6}, {:+.6}] p={:.6} significant={}",
                result.delta_point,
                result.ci_low,
                result.ci_high,
                result.p_value,
                if result.significant { "yes" } else { "no" },
            );
            Ok(())
        }
        Command::Diagnose { manifest, out, config, formats } => {
            let config = load_config(config.as_deref())?;
            let formats = parse_formats(&formats)?;
            let manifest = load_manifest_file(&manifest)?;
            let diag = report::run_diagnose(&manifest, &config)?;
            emit(out.as_deref(), &report::render_diagnose(&diag, &formats))
        }
        Command::Inventory { command } => match command {
            InventoryCommand::Show { config } => {
                let config = load_config(config.as_deref())?;
                let inv = &config.inventory;
                println!("checksum: {}", inv.checksum());
                let chars: Vec<String> = inv
                    .pashto_unique
                    .iter()
                    .map(|c| format!("{c} (U+{:04X})", *c as u32))
                    .collect();
                println!("pashto_unique ({}): {}", chars.len(), chars.join(" "));
                let punct: Vec<String> = inv
                    .stripped_punctuation
                    .iter()
                    .map(|c| format!("U+{:04X}", *c as u32))
                    .collect();
                println!("stripped_punctuation ({}): {}", punct.len(), punct.join(" "));
                println!("kashida: U+{:04X}", inv.kashida as u32);
                println!(
                    "arabic_block: U+{:04X}..=U+{:04X}",
                    inv.arabic_block.0, inv.arabic_block.1
                );
                println!("classes ({}):", inv.strata_classes.len());
                for class in &inv.strata_classes {
                    println!(
                        "  {} [{}]{}",
                        class.name,
                        class.chars_display(),
                        if class.pashto_unique { " (pashto-unique)" } else { "" }
                    );
                }
                Ok(())
            }
        },
    }
}

fn load_scores_file(path: &Path) -> Result<Vec<UtteranceReport>> {
    let file =
        fs::File::open(path).with_context(|| format!("cannot open scores {}", path.display()))?;
    let rows = report::load_score_lines(BufReader::new(file))
        .with_context(|| format!("in {}", path.display()))?;
    if rows.is_empty() {
        bail!("{} contains no score lines", path.display());
    }
    Ok(rows)
}

fn unique_dataset(rows: &[UtteranceReport]) -> String {
    let mut tags = rows.iter().map(|r| r.dataset.as_str()).filter(|t| !t.is_empty());
    match tags.next() {
        Some(first) if tags.clone().all(|t| t == first) => first.to_string(),
        Some(_) => "mixed".to_string(),
        None => String::new(),
    }
}

fn check_same_dataset(a: &[UtteranceReport], b: &[UtteranceReport]) -> Result<()> {
    let (da, db) = (unique_dataset(a), unique_dataset(b));
    if !da.is_empty() && !db.is_empty() && da != db {
        return Err(CorpusError::DatasetMismatch { a: da, b: db }.into());
    }
    if da.is_empty() || db.is_empty() {
        eprintln!("warning: dataset tags missing; cannot verify both systems ran on the same test set");
    }
    Ok(())
}

type ScorePairs = Vec<(pseval_core::metrics::UtteranceScore, pseval_core::metrics::UtteranceScore)>;

fn pair_rows(
    a: &[UtteranceReport],
    b: &[UtteranceReport],
) -> Result<(ScorePairs, Vec<String>, Vec<String>)> {
    use std::collections::BTreeMap;
    let by_id: BTreeMap<&str, &UtteranceReport> =
        b.iter().map(|r| (r.score.id.as_str(), r)).collect();
    let mut pairs = Vec::new();
    let mut unmatched_a = Vec::new();
    for ra in a {
        match by_id.get(ra.score.id.as_str()) {
            Some(rb) => pairs.push((ra.score.clone(), rb.score.clone())),
            None => unmatched_a.push(ra.score.id.clone()),
        }
    }
    let paired: std::collections::BTreeSet<&str> =
        pairs.iter().map(|(s, _)| s.id.as_str()).collect();
    let unmatched_b: Vec<String> = b
        .iter()
        .filter(|r| !paired.contains(r.score.id.as_str()))
        .map(|r| r.score.id.clone())
        .collect();
    if pairs.is_empty() {
        return Err(CorpusError::IncomparableManifests.into());
    }
    Ok((pairs, unmatched_a, unmatched_b))
}
