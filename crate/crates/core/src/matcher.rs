//! Token-attribute pattern matching over tagged utterances.
//!
//! A pattern is an ordered list of per-token specs, each constraining the
//! normalized text and/or the UPOS tag. Specs use the same JSON shape as the
//! spaCy `Matcher`:
//!
//! ```json
//! {"id": "NEG1", "priority": 2, "max_gap": 0,
//!  "specs": [{"TEXT": "não"}, {"POS": {"IN": ["VERB", "AUX"]}}]}
//! ```
//!
//! Consecutive specs may be separated by up to `max_gap` skipped tokens; a `?`
//! token is never skipped.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::token_stream::{normalize, TaggedUtterance, Token, Upos};

#[derive(Debug, Error)]
pub enum MatcherError {
    #[error("duplicate pattern id `{0}`")]
    DuplicatePatternId(String),
    #[error("pattern `{0}` has no token specs")]
    EmptyPattern(String),
    #[error("pattern `{pattern}`: invalid token spec: {reason}")]
    InvalidSpec { pattern: String, reason: String },
    #[error("priority list names unknown pattern `{0}`")]
    UnknownPatternInPriorityList(String),
    #[error("pattern file: {0}")]
    PatternFile(#[from] serde_json::Error),
}

/// Constraint on one token. Both fields present means both must hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpec {
    pub text_equals: Option<BTreeSet<String>>,
    pub pos_in: Option<BTreeSet<Upos>>,
}

impl TokenSpec {
    pub fn text<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TokenSpec {
            text_equals: Some(words.into_iter().map(|w| normalize(w.as_ref())).collect()),
            pos_in: None,
        }
    }

    pub fn pos<I: IntoIterator<Item = Upos>>(tags: I) -> Self {
        TokenSpec {
            text_equals: None,
            pos_in: Some(tags.into_iter().collect()),
        }
    }

    /// Adds a POS constraint to a text spec (or vice versa).
    pub fn and_pos<I: IntoIterator<Item = Upos>>(mut self, tags: I) -> Self {
        self.pos_in = Some(tags.into_iter().collect());
        self
    }

    fn validate(&self) -> Result<(), String> {
        match (&self.text_equals, &self.pos_in) {
            (None, None) => Err("spec needs TEXT or POS".to_string()),
            (Some(t), _) if t.is_empty() => Err("empty TEXT set".to_string()),
            (_, Some(p)) if p.is_empty() => Err("empty POS set".to_string()),
            _ => Ok(()),
        }
    }

    pub fn accepts(&self, token: &Token) -> bool {
        self.text_equals.as_ref().is_none_or(|t| t.contains(&token.norm))
            && self.pos_in.as_ref().is_none_or(|p| p.contains(&token.upos))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrIn<T> {
    One(T),
    In {
        #[serde(rename = "IN")]
        values: Vec<T>,
    },
}

impl<T> OneOrIn<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrIn::One(v) => vec![v],
            OneOrIn::In { values } => values,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    #[serde(rename = "TEXT", default, skip_serializing_if = "Option::is_none")]
    text: Option<OneOrIn<String>>,
    #[serde(rename = "POS", default, skip_serializing_if = "Option::is_none")]
    pos: Option<OneOrIn<Upos>>,
}

impl Serialize for TokenSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let text = self.text_equals.as_ref().map(|t| {
            if t.len() == 1 {
                OneOrIn::One(t.iter().next().unwrap().clone())
            } else {
                OneOrIn::In {
                    values: t.iter().cloned().collect(),
                }
            }
        });
        let pos = self.pos_in.as_ref().map(|p| OneOrIn::In {
            values: p.iter().copied().collect(),
        });
        SpecRepr { text, pos }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TokenSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SpecRepr::deserialize(deserializer)?;
        Ok(TokenSpec {
            text_equals: repr.text.map(|t| t.into_vec().iter().map(|w| normalize(w)).collect()),
            pos_in: repr.pos.map(|p| p.into_vec().into_iter().collect()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenPattern {
    pub id: String,
    /// Lower values win ties during overlap resolution.
    #[serde(default)]
    pub priority: i64,
    #[serde(default)]
    pub max_gap: usize,
    pub specs: Vec<TokenSpec>,
}

impl TokenPattern {
    pub fn new(id: impl Into<String>, specs: Vec<TokenSpec>) -> Self {
        TokenPattern {
            id: id.into(),
            priority: 0,
            max_gap: 0,
            specs,
        }
    }

    pub fn with_priority(mut self, priority: i64) -> Self {
        self.priority = priority;
        self
    }

    pub fn with_max_gap(mut self, max_gap: usize) -> Self {
        self.max_gap = max_gap;
        self
    }

    fn validate(&self) -> Result<(), MatcherError> {
        if self.specs.is_empty() {
            return Err(MatcherError::EmptyPattern(self.id.clone()));
        }
        for spec in &self.specs {
            spec.validate().map_err(|reason| MatcherError::InvalidSpec {
                pattern: self.id.clone(),
                reason,
            })?;
        }
        Ok(())
    }

    /// Checks that `indices` is a valid assignment of this pattern's specs to `tokens`.
    pub fn accepts(&self, tokens: &[Token], indices: &[usize]) -> bool {
        if indices.len() != self.specs.len() {
            return false;
        }
        for (k, (&i, spec)) in indices.iter().zip(&self.specs).enumerate() {
            if i >= tokens.len() || !spec.accepts(&tokens[i]) {
                return false;
            }
            if k > 0 {
                let prev = indices[k - 1];
                if i <= prev || i - prev - 1 > self.max_gap {
                    return false;
                }
                if tokens[prev + 1..i].iter().any(is_boundary) {
                    return false;
                }
            }
        }
        true
    }
}

/// Tokens that may never be skipped over by a gap.
pub fn is_boundary(token: &Token) -> bool {
    token.text == "?"
}

/// Parses a JSON array of patterns.
pub fn parse_pattern_file(json: &str) -> Result<Vec<TokenPattern>, MatcherError> {
    Ok(serde_json::from_str(json)?)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchSpan {
    pub pattern_id: String,
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub utterance_index: usize,
    pub matched_token_indices: Vec<usize>,
}

impl MatchSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn overlaps(&self, other: &MatchSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

fn span_order(a: &MatchSpan, b: &MatchSpan) -> std::cmp::Ordering {
    (a.start, Reverse(a.len()), &a.pattern_id, &a.matched_token_indices).cmp(&(
        b.start,
        Reverse(b.len()),
        &b.pattern_id,
        &b.matched_token_indices,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverlapPolicy {
    /// Keep the longest span of each conflict; ties go to the earlier pattern
    /// in `priority`, then to the earlier start.
    LongestMatchPriority {
        priority: Vec<String>,
    },
    ReportAll,
}

/// A set of patterns with unique ids. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct Matcher {
    patterns: Vec<TokenPattern>,
}

impl Matcher {
    pub fn new() -> Self {
        Matcher::default()
    }

    pub fn from_patterns(patterns: Vec<TokenPattern>) -> Result<Self, MatcherError> {
        let mut m = Matcher::new();
        for p in patterns {
            m.add_pattern(p)?;
        }
        Ok(m)
    }

    pub fn from_json(json: &str) -> Result<Self, MatcherError> {
        Matcher::from_patterns(parse_pattern_file(json)?)
    }

    pub fn add_pattern(&mut self, pattern: TokenPattern) -> Result<(), MatcherError> {
        pattern.validate()?;
        if self.pattern(&pattern.id).is_some() {
            return Err(MatcherError::DuplicatePatternId(pattern.id));
        }
        self.patterns.push(pattern);
        Ok(())
    }

    pub fn with_pattern(mut self, pattern: TokenPattern) -> Result<Self, MatcherError> {
        self.add_pattern(pattern)?;
        Ok(self)
    }

    /// Overrides `max_gap` on every pattern.
    pub fn with_max_gap(mut self, max_gap: usize) -> Self {
        for p in &mut self.patterns {
            p.max_gap = max_gap;
        }
        self
    }

    pub fn patterns(&self) -> &[TokenPattern] {
        &self.patterns
    }

    pub fn pattern(&self, id: &str) -> Option<&TokenPattern> {
        self.patterns.iter().find(|p| p.id == id)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Pattern ids ordered by their `priority` field, registration order breaking ties.
    pub fn default_priority(&self) -> Vec<String> {
        let mut ids: Vec<(i64, usize, &str)> = self
            .patterns
            .iter()
            .enumerate()
            .map(|(i, p)| (p.priority, i, p.id.as_str()))
            .collect();
        ids.sort();
        ids.into_iter().map(|(_, _, id)| id.to_string()).collect()
    }

    pub fn longest_match_policy(&self) -> OverlapPolicy {
        OverlapPolicy::LongestMatchPriority {
            priority: self.default_priority(),
        }
    }

    /// Every span matching any pattern, overlaps included, ordered by
    /// (start, longest first, pattern id).
    pub fn find_matches(&self, utterance: &TaggedUtterance) -> Vec<MatchSpan> {
        let tokens = &utterance.tokens;
        let mut out = Vec::new();
        let mut indices = Vec::new();
        for pattern in &self.patterns {
            for start in 0..tokens.len() {
                if pattern.specs[0].accepts(&tokens[start]) {
                    indices.clear();
                    indices.push(start);
                    extend(pattern, tokens, &mut indices, utterance.utterance_index, &mut out);
                }
            }
        }
        out.sort_by(span_order);
        out
    }

    /// Filters overlapping spans from one utterance according to `policy`.
    pub fn resolve_overlaps(
        &self,
        spans: Vec<MatchSpan>,
        policy: &OverlapPolicy,
    ) -> Result<Vec<MatchSpan>, MatcherError> {
        let priority = match policy {
            OverlapPolicy::ReportAll => return Ok(spans),
            OverlapPolicy::LongestMatchPriority { priority } => priority,
        };
        if let Some(unknown) = priority.iter().find(|id| self.pattern(id).is_none()) {
            return Err(MatcherError::UnknownPatternInPriorityList(unknown.clone()));
        }
        let rank = |id: &str| priority.iter().position(|p| p == id).unwrap_or(priority.len());

        let mut candidates: Vec<&MatchSpan> = spans.iter().collect();
        candidates.sort_by(|a, b| {
            (Reverse(a.len()), rank(&a.pattern_id), a.start)
                .cmp(&(Reverse(b.len()), rank(&b.pattern_id), b.start))
                .then_with(|| span_order(a, b))
        });
        let mut kept: Vec<MatchSpan> = Vec::new();
        for span in candidates {
            if kept.iter().all(|k| !k.overlaps(span)) {
                kept.push(span.clone());
            }
        }
        kept.sort_by(span_order);
        Ok(kept)
    }
}

fn extend(
    pattern: &TokenPattern,
    tokens: &[Token],
    indices: &mut Vec<usize>,
    utterance_index: usize,
    out: &mut Vec<MatchSpan>,
) {
    let k = indices.len();
    let last = indices[k - 1];
    if k == pattern.specs.len() {
        out.push(MatchSpan {
            pattern_id: pattern.id.clone(),
            start: indices[0],
            end: last + 1,
            utterance_index,
            matched_token_indices: indices.clone(),
        });
        return;
    }
    let spec = &pattern.specs[k];
    for next in last + 1..tokens.len().min(last + 2 + pattern.max_gap) {
        if next > last + 1 && is_boundary(&tokens[next - 1]) {
            // can't skip past a boundary token
            break;
        }
        if spec.accepts(&tokens[next]) {
            indices.push(next);
            extend(pattern, tokens, indices, utterance_index, out);
            indices.pop();
        }
    }
}
