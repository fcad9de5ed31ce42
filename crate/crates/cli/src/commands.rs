use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use negscope::agreement::{agreement_report, format_kappa, read_annotation_csv, write_heatmap_csv};
use negscope::classifier::{classify_corpus, negation_matcher, write_occurrences_csv, ClassifierConfig, Interview};
use negscope::evaluation::{align, confusion, format_table, metrics, read_label_csv, write_confusion_csv, EvalError};
use negscope::ingest::{ingest_transcript, HeaderSchema, MarkerSet};
use negscope::token_stream::read_conllu;
use negscope::{AgreementReport, CorpusSummary, Label, Matcher, MetricsReport, OverlapPolicy, SpeakerMetadata};
use negscope::{TranscriptDocument, VerbLexicon};
use serde::Serialize;

use crate::config::{InputMode, PolicyArg, RunConfig};

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("writing {}", path.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// A single file, or the files of a directory with one of `extensions`, sorted by name.
fn list_files(path: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).with_context(|| format!("reading {}", path.display()))? {
        let p = entry?.path();
        let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
        if p.is_file() && extensions.contains(&ext) {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn markers(cfg: &RunConfig) -> Result<MarkerSet> {
    Ok(match &cfg.markers {
        Some(m) => MarkerSet::new(m)?,
        None => MarkerSet::default(),
    })
}

fn lexicon(cfg: &RunConfig) -> Result<VerbLexicon> {
    match &cfg.lexicon {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            VerbLexicon::parse(&text).with_context(|| format!("lexicon {}", path.display()))
        }
        None => Ok(VerbLexicon::starter()),
    }
}

fn matcher(cfg: &RunConfig) -> Result<Matcher> {
    let m = match &cfg.patterns {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Matcher::from_json(&text).with_context(|| format!("patterns {}", path.display()))?
        }
        None => negation_matcher(),
    };
    Ok(match cfg.max_gap {
        Some(gap) => m.with_max_gap(gap),
        None => m,
    })
}

pub fn ingest(cfg: &RunConfig, print_json: bool) -> Result<ExitCode> {
    let Some(InputMode::Transcripts(input)) = &cfg.input else {
        bail!("ingest needs --input");
    };
    let files = list_files(input, &["txt"])?;
    if files.is_empty() {
        eprintln!("no input files");
        return Ok(ExitCode::FAILURE);
    }
    let out = if print_json && cfg.out.is_none() {
        None
    } else {
        Some(cfg.out_dir()?)
    };
    let (schema, markers) = (HeaderSchema::default(), markers(cfg)?);
    let (mut ok, mut removals, mut failed) = (0, 0, 0);
    for file in &files {
        let doc = fs::read_to_string(file)
            .map_err(anyhow::Error::from)
            .and_then(|raw| Ok(ingest_transcript(&raw, &schema, &markers)?));
        match doc {
            Ok(doc) => {
                if let Some(out) = out {
                    write_atomic(&out.join(format!("{}.json", stem(file))), &json_bytes(&doc)?)?;
                }
                if print_json {
                    println!("{}", serde_json::to_string(&doc)?);
                }
                ok += 1;
                removals += doc.removals.len();
            }
            Err(e) => {
                eprintln!("{}: {e:#}", file.display());
                failed += 1;
            }
        }
    }
    eprintln!(
        "ingested {ok} of {} files ({removals} removals, {failed} failed)",
        files.len()
    );
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn load_interview(file: &Path, cfg: &RunConfig, lexicon: &VerbLexicon) -> Result<Interview> {
    let text = fs::read_to_string(file)?;
    match (&cfg.input, file.extension().and_then(|e| e.to_str())) {
        (Some(InputMode::Conllu(_)), _) => Ok(Interview {
            metadata: SpeakerMetadata::with_id(stem(file)),
            utterances: read_conllu(&text)?,
        }),
        (_, Some("json")) => {
            let doc: TranscriptDocument = serde_json::from_str(&text)?;
            Ok(Interview::from_transcript(&doc, lexicon)?)
        }
        _ => {
            let doc = ingest_transcript(&text, &HeaderSchema::default(), &markers(cfg)?)?;
            Ok(Interview::from_transcript(&doc, lexicon)?)
        }
    }
}

#[derive(Serialize)]
struct SummaryFile {
    total_nao: usize,
    classified: usize,
    counts: BTreeMap<Label, usize>,
    proportions: BTreeMap<Label, Option<f64>>,
}

impl From<CorpusSummary> for SummaryFile {
    fn from(s: CorpusSummary) -> Self {
        SummaryFile {
            total_nao: s.total_nao_tokens,
            classified: s.classified_count,
            counts: s.counts,
            proportions: s.proportions,
        }
    }
}

pub fn classify(cfg: &RunConfig) -> Result<ExitCode> {
    let files = match &cfg.input {
        Some(InputMode::Transcripts(p)) => list_files(p, &["txt", "json"])?,
        Some(InputMode::Conllu(p)) => list_files(p, &["conllu", "conll"])?,
        None => bail!("classify needs --input or --conllu"),
    };
    if files.is_empty() {
        eprintln!("no input files");
        return Ok(ExitCode::FAILURE);
    }
    let out = cfg.out_dir()?;
    let lexicon = lexicon(cfg)?;
    let matcher = matcher(cfg)?;
    let mut interviews = Vec::new();
    let mut failed = 0;
    for file in &files {
        match load_interview(file, cfg, &lexicon) {
            Ok(i) => interviews.push(i),
            Err(e) => {
                eprintln!("{}: {e:#}", file.display());
                failed += 1;
            }
        }
    }
    let config = ClassifierConfig {
        policy: match cfg.policy {
            PolicyArg::Longest => matcher.longest_match_policy(),
            PolicyArg::ReportAll => OverlapPolicy::ReportAll,
        },
        variants_enabled: cfg.variants,
        context_window: cfg.context,
    };
    let (occurrences, summary) = classify_corpus::<f64>(&interviews, &matcher, &config)?;
    let mut csv = Vec::new();
    write_occurrences_csv(&mut csv, &occurrences)?;
    write_atomic(&out.join("occurrences.csv"), &csv)?;
    let summary = summary.rounded(3);
    let line = Label::ALL
        .iter()
        .map(|l| format!("{l} {}", summary.counts[l]))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "{} occurrences ({line}); total não = {}",
        summary.classified_count, summary.total_nao_tokens
    );
    write_atomic(&out.join("summary.json"), &json_bytes(&SummaryFile::from(summary))?)?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

pub fn agree(cfg: &RunConfig) -> Result<ExitCode> {
    let Some(InputMode::Transcripts(input)) = &cfg.input else {
        bail!("agree needs --input <annotations.csv>");
    };
    let file = fs::File::open(input).with_context(|| format!("reading {}", input.display()))?;
    let matrix = read_annotation_csv(file).with_context(|| input.display().to_string())?;
    let report: AgreementReport = agreement_report(&matrix)?;
    println!("Fleiss kappa: {}", format_kappa(report.fleiss_kappa));
    let width = report.annotators.iter().map(|a| a.len()).max().unwrap_or(0).max(9) + 2;
    print!("{:width$}", "");
    for a in &report.annotators {
        print!("{a:>width$}");
    }
    println!();
    for (a, row) in report.annotators.iter().zip(&report.pairwise_cohen) {
        print!("{a:width$}");
        for k in row {
            print!("{:>width$}", format_kappa(*k));
        }
        println!();
    }
    if report.tie_count > 0 {
        println!("{} items tied under majority vote", report.tie_count);
    }
    if cfg.out.is_some() {
        let out = cfg.out_dir()?;
        write_atomic(&out.join("agreement.json"), &json_bytes(&report)?)?;
        let mut csv = Vec::new();
        write_heatmap_csv(&mut csv, &report)?;
        write_atomic(&out.join("kappa_heatmap.csv"), &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EvalFile {
    #[serde(flatten)]
    metrics: MetricsReport,
    uncovered: Vec<String>,
    spurious: Vec<String>,
    unresolved_gold: Vec<String>,
}

pub fn eval(cfg: &RunConfig, gold: &Path, predicted: &Path) -> Result<ExitCode> {
    let read = |p: &Path| -> Result<_> {
        let f = fs::File::open(p).with_context(|| format!("reading {}", p.display()))?;
        read_label_csv(f).with_context(|| p.display().to_string())
    };
    let (gold, predicted) = (read(gold)?, read(predicted)?);
    let alignment = match align(&gold.labels, &predicted.labels) {
        Err(EvalError::EmptyIntersection) => {
            eprintln!("error: {}", EvalError::EmptyIntersection);
            return Ok(ExitCode::FAILURE);
        }
        other => other?,
    };
    let mut categories: Vec<String> = Label::ALL.iter().map(|l| l.to_string()).collect();
    for (g, p) in &alignment.pairs {
        for l in [g, p] {
            if !categories.contains(l) {
                categories.push(l.clone());
            }
        }
    }
    let cm = confusion(&alignment.pairs, &categories)?;
    let report: MetricsReport = metrics(&cm)?;
    print!("{}", format_table(&report));
    if !alignment.uncovered.is_empty() || !alignment.spurious.is_empty() || !gold.unresolved.is_empty() {
        println!(
            "\n{} gold items without prediction, {} predictions without gold, {} tied gold items",
            alignment.uncovered.len(),
            alignment.spurious.len(),
            gold.unresolved.len()
        );
    }
    if cfg.out.is_some() {
        let out = cfg.out_dir()?;
        let mut csv = Vec::new();
        write_confusion_csv(&mut csv, &cm)?;
        write_atomic(&out.join("confusion.csv"), &csv)?;
        let file = EvalFile {
            metrics: report,
            uncovered: alignment.uncovered,
            spurious: alignment.spurious,
            unresolved_gold: gold.unresolved,
        };
        write_atomic(&out.join("metrics.json"), &json_bytes(&file)?)?;
    }
    Ok(ExitCode::SUCCESS)
}
