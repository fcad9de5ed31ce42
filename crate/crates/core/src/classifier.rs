//! NEG1/NEG2/NEG3 classification over a tagged corpus.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{SpeakerMetadata, TranscriptDocument};
use crate::matcher::{MatchSpan, Matcher, MatcherError, OverlapPolicy};
use crate::scalar::Real;
use crate::token_stream::{tag_utterance, TagError, TaggedUtterance, VerbLexicon};

/// The three negation patterns as a pattern file.
pub const NEGATION_PATTERNS: &str = include_str!("../patterns/neg_table1.json");

/// Written-register spellings of `não`.
pub const NAO_VARIANTS: [&str; 2] = ["n", "ñ"];

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("pattern set lacks required pattern `{0}`")]
    MissingRequiredPattern(Label),
    #[error(transparent)]
    Matcher(#[from] MatcherError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "NEG1")]
    Neg1,
    #[serde(rename = "NEG2")]
    Neg2,
    #[serde(rename = "NEG3")]
    Neg3,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Neg1, Label::Neg2, Label::Neg3];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Neg1 => "NEG1",
            Label::Neg2 => "NEG2",
            Label::Neg3 => "NEG3",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown label `{s}`"))
    }
}

/// Matcher loaded with the bundled NEG1/NEG2/NEG3 patterns.
pub fn negation_matcher() -> Matcher {
    Matcher::from_json(NEGATION_PATTERNS).expect("bundled patterns are valid")
}

/// One interview track ready for classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interview {
    pub metadata: SpeakerMetadata,
    pub utterances: Vec<TaggedUtterance>,
}

impl Interview {
    pub fn from_transcript(doc: &TranscriptDocument, lexicon: &VerbLexicon) -> Result<Self, TagError> {
        Ok(Interview {
            metadata: doc.metadata.clone(),
            utterances: doc
                .utterances
                .iter()
                .map(|u| tag_utterance(u, lexicon))
                .collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierConfig {
    pub policy: OverlapPolicy,
    pub variants_enabled: bool,
    /// Tokens of context on each side of a match.
    pub context_window: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            policy: OverlapPolicy::LongestMatchPriority {
                priority: vec!["NEG2".into(), "NEG1".into(), "NEG3".into()],
            },
            variants_enabled: false,
            context_window: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegOccurrence {
    pub label: Label,
    pub metadata: SpeakerMetadata,
    pub utterance_index: usize,
    pub span: MatchSpan,
    pub matched_text: String,
    pub context_window: String,
    pub nao_token_indices: Vec<usize>,
    /// Shared by occurrences whose spans overlap (only under `ReportAll`).
    pub overlap_group: Option<usize>,
}

fn is_nao(norm: &str, variants_enabled: bool) -> bool {
    norm == "não" || (variants_enabled && NAO_VARIANTS.contains(&norm))
}

/// Number of `não` tokens (plus `n`/`ñ` when variants are enabled).
pub fn count_nao(corpus: &[TaggedUtterance], variants_enabled: bool) -> usize {
    corpus
        .iter()
        .flat_map(|u| &u.tokens)
        .filter(|t| is_nao(&t.norm, variants_enabled))
        .count()
}

fn with_variants_normalized(utterance: &TaggedUtterance) -> TaggedUtterance {
    let mut utt = utterance.clone();
    for t in &mut utt.tokens {
        if NAO_VARIANTS.contains(&t.norm.as_str()) {
            t.norm = "não".to_string();
        }
    }
    utt
}

/// Matches, resolves overlaps and labels every utterance, in corpus order.
pub fn classify_corpus<F: Real>(
    corpus: &[Interview],
    matcher: &Matcher,
    config: &ClassifierConfig,
) -> Result<(Vec<NegOccurrence>, CorpusSummary<F>), ClassifyError> {
    for label in Label::ALL {
        if matcher.pattern(label.as_str()).is_none() {
            return Err(ClassifyError::MissingRequiredPattern(label));
        }
    }
    let mut occurrences = Vec::new();
    let mut total_nao = 0;
    let mut next_group = 1;
    for interview in corpus {
        total_nao += count_nao(&interview.utterances, config.variants_enabled);
        for original in &interview.utterances {
            let normalized;
            let utt = if config.variants_enabled {
                normalized = with_variants_normalized(original);
                &normalized
            } else {
                original
            };
            let spans = matcher.resolve_overlaps(matcher.find_matches(utt), &config.policy)?;
            let spans: Vec<(Label, MatchSpan)> = spans
                .into_iter()
                .filter_map(|s| s.pattern_id.parse::<Label>().ok().map(|l| (l, s)))
                .collect();
            let groups = overlap_groups(&spans.iter().map(|(_, s)| s).collect::<Vec<_>>(), &mut next_group);
            for ((label, span), overlap_group) in spans.into_iter().zip(groups) {
                occurrences.push(occurrence(label, span, utt, &interview.metadata, config, overlap_group));
            }
        }
    }
    let summary = summarize(&occurrences, total_nao);
    Ok((occurrences, summary))
}

/// Connected components of overlapping spans; singletons get no group.
fn overlap_groups(spans: &[&MatchSpan], next_group: &mut usize) -> Vec<Option<usize>> {
    let n = spans.len();
    let mut component: Vec<usize> = (0..n).collect();
    fn root(c: &mut [usize], mut i: usize) -> usize {
        while c[i] != i {
            c[i] = c[c[i]];
            i = c[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if spans[i].overlaps(spans[j]) {
                let (a, b) = (root(&mut component, i), root(&mut component, j));
                component[a.max(b)] = a.min(b);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| root(&mut component, i)).collect();
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    roots
        .iter()
        .map(|&r| {
            if roots.iter().filter(|&&x| x == r).count() < 2 {
                return None;
            }
            Some(*ids.entry(r).or_insert_with(|| {
                let id = *next_group;
                *next_group += 1;
                id
            }))
        })
        .collect()
}

fn occurrence(
    label: Label,
    span: MatchSpan,
    utt: &TaggedUtterance,
    metadata: &SpeakerMetadata,
    config: &ClassifierConfig,
    overlap_group: Option<usize>,
) -> NegOccurrence {
    let last = utt.tokens.len() - 1;
    let ctx_first = span.start.saturating_sub(config.context_window);
    let ctx_last = (span.end - 1 + config.context_window).min(last);
    let nao_token_indices = span
        .matched_token_indices
        .iter()
        .copied()
        .filter(|&i| utt.tokens[i].norm == "não")
        .collect();
    NegOccurrence {
        label,
        metadata: metadata.clone(),
        utterance_index: utt.utterance_index,
        matched_text: utt.slice_tokens(span.start, span.end - 1),
        context_window: utt.slice_tokens(ctx_first, ctx_last),
        nao_token_indices,
        span,
        overlap_group,
    }
}

/// Label tallies. Proportions are `None` when nothing was classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary<F> {
    pub total_nao_tokens: usize,
    pub classified_count: usize,
    pub counts: BTreeMap<Label, usize>,
    pub proportions: BTreeMap<Label, Option<F>>,
}

impl<F: Real> CorpusSummary<F> {
    /// Copy with proportions rounded for reporting.
    pub fn rounded(&self, places: i32) -> Self {
        CorpusSummary {
            proportions: self
                .proportions
                .iter()
                .map(|(l, p)| (*l, p.map(|p| p.round_to(places))))
                .collect(),
            ..self.clone()
        }
    }
}

pub fn summarize<F: Real>(occurrences: &[NegOccurrence], total_nao: usize) -> CorpusSummary<F> {
    let mut counts: BTreeMap<Label, usize> = Label::ALL.iter().map(|l| (*l, 0)).collect();
    for o in occurrences {
        *counts.get_mut(&o.label).unwrap() += 1;
    }
    let classified = occurrences.len();
    let proportions = counts
        .iter()
        .map(|(l, &c)| (*l, (classified > 0).then(|| F::ratio(c, classified))))
        .collect();
    CorpusSummary {
        total_nao_tokens: total_nao,
        classified_count: classified,
        counts,
        proportions,
    }
}

/// Column order of the occurrence CSV.
pub const OCCURRENCE_CSV_HEADER: [&str; 14] = [
    "interview_id",
    "location",
    "gender",
    "age",
    "city_of_origin",
    "city_of_residence",
    "undergrad_period",
    "utterance_index",
    "label",
    "start",
    "end",
    "matched_text",
    "context_window",
    "overlap_group",
];

/// Writes occurrences as CSV with a header row (written even when empty).
pub fn write_occurrences_csv<W: io::Write>(writer: W, occurrences: &[NegOccurrence]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(OCCURRENCE_CSV_HEADER)?;
    let opt = |v: &Option<String>| v.clone().unwrap_or_default();
    for o in occurrences {
        let m = &o.metadata;
        w.write_record([
            m.interview_id.clone(),
            opt(&m.location),
            opt(&m.gender),
            m.age.map(|a| a.to_string()).unwrap_or_default(),
            opt(&m.city_of_origin),
            opt(&m.city_of_residence),
            opt(&m.undergrad_period),
            o.utterance_index.to_string(),
            o.label.to_string(),
            o.span.start.to_string(),
            o.span.end.to_string(),
            o.matched_text.clone(),
            o.context_window.clone(),
            o.overlap_group.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
