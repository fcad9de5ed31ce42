//! Transcript ingestion: `@key: value` header block, disfluency cleaning with a
//! lossless audit trail, and utterance segmentation.
//!
//! A transcript file holds one speaker track:
//!
//! ```text
//! @id: D20-07
//! @local: Itabaiana
//! @genero: F
//! @idade: 21
//!
//! eu go/ gosto não ((pausa)) tenho problema
//! ```
//!
//! The header ends at the first blank line (or at end of file).

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: no header block found")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed header field: {reason}")]
    MalformedField { line: usize, reason: String },
    #[error("line {line}: required header field `{key}` is missing")]
    MissingField { key: String, line: usize },
    #[error("invalid header field pattern `{pattern}`: {source}")]
    InvalidSchemaPattern {
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("invalid disfluency marker pattern `{pattern}`: {source}")]
    InvalidMarkerPattern {
        pattern: String,
        #[source]
        source: regex::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Informant,
    Documenter,
}

impl Role {
    fn parse(value: &str) -> Option<Role> {
        match value.to_lowercase().as_str() {
            "informante" | "informant" => Some(Role::Informant),
            "documentador" | "documentadora" | "documenter" => Some(Role::Documenter),
            _ => None,
        }
    }

    fn header_value(self) -> &'static str {
        match self {
            Role::Informant => "informante",
            Role::Documenter => "documentador",
        }
    }
}

/// Interview header data. Absent fields are `None`, never empty strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerMetadata {
    pub interview_id: String,
    pub location: Option<String>,
    pub gender: Option<String>,
    pub age: Option<u32>,
    pub city_of_origin: Option<String>,
    pub city_of_residence: Option<String>,
    pub undergrad_period: Option<String>,
    pub role: Option<Role>,
}

impl SpeakerMetadata {
    pub fn with_id(interview_id: impl Into<String>) -> Self {
        SpeakerMetadata {
            interview_id: interview_id.into(),
            location: None,
            gender: None,
            age: None,
            city_of_origin: None,
            city_of_residence: None,
            undergrad_period: None,
            role: None,
        }
    }
}

/// Metadata slot a header key fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderField {
    Id,
    Location,
    Gender,
    Age,
    Origin,
    Residence,
    Period,
    Role,
}

#[derive(Debug, Clone)]
struct FieldRule {
    key: String,
    field: HeaderField,
    pattern: Regex,
}

/// Maps header keys to metadata fields, each with a validation regex.
#[derive(Debug, Clone)]
pub struct HeaderSchema {
    rules: Vec<FieldRule>,
}

impl Default for HeaderSchema {
    fn default() -> Self {
        let text = r"^\S(.*\S)?$";
        let rules = [
            ("id", HeaderField::Id, r"^\S+$"),
            ("local", HeaderField::Location, text),
            ("genero", HeaderField::Gender, r"^\S+$"),
            ("idade", HeaderField::Age, r"^[1-9][0-9]{0,2}$"),
            ("origem", HeaderField::Origin, text),
            ("residencia", HeaderField::Residence, text),
            ("periodo", HeaderField::Period, text),
            (
                "papel",
                HeaderField::Role,
                r"(?i)^(informante|informant|documentadora?|documenter)$",
            ),
        ];
        HeaderSchema {
            rules: rules
                .into_iter()
                .map(|(key, field, pattern)| FieldRule {
                    key: key.to_string(),
                    field,
                    pattern: Regex::new(pattern).unwrap(),
                })
                .collect(),
        }
    }
}

impl HeaderSchema {
    /// Replaces (or adds) the key and validation regex used for `field`.
    pub fn with_key(mut self, field: HeaderField, key: &str, pattern: &str) -> Result<Self, IngestError> {
        let pattern = Regex::new(pattern).map_err(|source| IngestError::InvalidSchemaPattern {
            pattern: pattern.to_string(),
            source,
        })?;
        self.rules.retain(|r| r.field != field);
        self.rules.push(FieldRule {
            key: key.to_string(),
            field,
            pattern,
        });
        Ok(self)
    }

    fn rule(&self, key: &str) -> Option<&FieldRule> {
        self.rules.iter().find(|r| r.key == key)
    }

    fn key_for(&self, field: HeaderField) -> Option<&str> {
        self.rules.iter().find(|r| r.field == field).map(|r| r.key.as_str())
    }
}

/// Where the body starts after the header block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BodyStart {
    byte_offset: usize,
    first_line: usize,
}

/// Extracts the header block into [`SpeakerMetadata`].
pub fn parse_header(raw: &str, schema: &HeaderSchema) -> Result<SpeakerMetadata, IngestError> {
    split_header(raw, schema).map(|(meta, _)| meta)
}

fn split_header(raw: &str, schema: &HeaderSchema) -> Result<(SpeakerMetadata, BodyStart), IngestError> {
    let line_re = Regex::new(r"^@([^:\s]+):(.*)$").unwrap();
    let mut meta = SpeakerMetadata::with_id("");
    let mut seen: Vec<HeaderField> = Vec::new();
    let mut offset = 0usize;
    let mut line_no = 0usize;
    let mut header_lines = 0usize;
    let mut body = None;

    for line in raw.split_inclusive('\n') {
        line_no += 1;
        offset += line.len();
        let content = line.trim_end_matches(['\n', '\r']);
        let content = if line_no == 1 {
            content.trim_start_matches('\u{feff}')
        } else {
            content
        };

        if content.trim().is_empty() {
            if header_lines == 0 {
                continue;
            }
            body = Some(BodyStart {
                byte_offset: offset,
                first_line: line_no + 1,
            });
            break;
        }
        if !content.starts_with('@') {
            // Either no header at all, or a header never closed by a blank line.
            return Err(IngestError::MissingHeader { line: line_no });
        }
        let caps = line_re.captures(content).ok_or_else(|| IngestError::MalformedField {
            line: line_no,
            reason: format!("expected `@key: value`, got `{content}`"),
        })?;
        let key = &caps[1];
        let value = caps[2].trim();
        let rule = schema.rule(key).ok_or_else(|| IngestError::MalformedField {
            line: line_no,
            reason: format!("unknown header key `{key}`"),
        })?;
        if seen.contains(&rule.field) {
            return Err(IngestError::MalformedField {
                line: line_no,
                reason: format!("duplicate header key `{key}`"),
            });
        }
        seen.push(rule.field);
        header_lines += 1;

        if value.is_empty() {
            continue;
        }
        if !rule.pattern.is_match(value) {
            return Err(IngestError::MalformedField {
                line: line_no,
                reason: format!("value `{value}` for `{key}` does not match `{}`", rule.pattern),
            });
        }
        let owned = Some(value.to_string());
        match rule.field {
            HeaderField::Id => meta.interview_id = value.to_string(),
            HeaderField::Location => meta.location = owned,
            HeaderField::Gender => meta.gender = owned,
            HeaderField::Origin => meta.city_of_origin = owned,
            HeaderField::Residence => meta.city_of_residence = owned,
            HeaderField::Period => meta.undergrad_period = owned,
            HeaderField::Age => {
                let age: u32 = value.parse().map_err(|_| IngestError::MalformedField {
                    line: line_no,
                    reason: format!("age `{value}` is not a positive integer"),
                })?;
                if age == 0 {
                    return Err(IngestError::MalformedField {
                        line: line_no,
                        reason: "age must be positive".to_string(),
                    });
                }
                meta.age = Some(age);
            }
            HeaderField::Role => {
                meta.role = Some(Role::parse(value).ok_or_else(|| IngestError::MalformedField {
                    line: line_no,
                    reason: format!("unknown role `{value}`"),
                })?)
            }
        }
    }

    if header_lines == 0 {
        return Err(IngestError::MissingHeader { line: line_no.max(1) });
    }
    let body = body.unwrap_or(BodyStart {
        byte_offset: raw.len(),
        first_line: line_no + 1,
    });
    if meta.interview_id.is_empty() {
        return Err(IngestError::MissingField {
            key: schema.key_for(HeaderField::Id).unwrap_or("id").to_string(),
            line: body.first_line - 1,
        });
    }
    Ok((meta, body))
}

/// Writes a header block that [`parse_header`] reads back to the same metadata.
pub fn render_header(meta: &SpeakerMetadata, schema: &HeaderSchema) -> String {
    let fields = [
        (HeaderField::Id, Some(meta.interview_id.clone())),
        (HeaderField::Location, meta.location.clone()),
        (HeaderField::Gender, meta.gender.clone()),
        (HeaderField::Age, meta.age.map(|a| a.to_string())),
        (HeaderField::Origin, meta.city_of_origin.clone()),
        (HeaderField::Residence, meta.city_of_residence.clone()),
        (HeaderField::Period, meta.undergrad_period.clone()),
        (HeaderField::Role, meta.role.map(|r| r.header_value().to_string())),
    ];
    let mut out = String::new();
    for (field, value) in fields {
        if let (Some(key), Some(value)) = (schema.key_for(field), value) {
            out.push('@');
            out.push_str(key);
            out.push_str(": ");
            out.push_str(&value);
            out.push('\n');
        }
    }
    out.push('\n');
    out
}

/// Compiled disfluency marker patterns.
#[derive(Debug, Clone)]
pub struct MarkerSet {
    patterns: Vec<Regex>,
}

pub const DEFAULT_MARKERS: [&str; 2] = [r"\(\([^)]*\)\)", r"\(\.\.\.\)"];

impl MarkerSet {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self, IngestError> {
        let patterns = patterns
            .iter()
            .map(|p| {
                Regex::new(p.as_ref()).map_err(|source| IngestError::InvalidMarkerPattern {
                    pattern: p.as_ref().to_string(),
                    source,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(MarkerSet { patterns })
    }
}

impl Default for MarkerSet {
    fn default() -> Self {
        MarkerSet::new(&DEFAULT_MARKERS).unwrap()
    }
}

/// One contiguous deletion from the raw text. `offset` is a byte offset in the raw text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub offset: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanedText {
    pub cleaned: String,
    pub removals: Vec<Removal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Owner {
    Marker(usize),
    Space,
}

struct KeptView {
    text: String,
    // raw char index of each kept char, plus the kept byte offset it starts at
    chars: Vec<(usize, usize)>,
}

fn kept_view(raw: &[(usize, char)], deleted: &[Option<Owner>]) -> KeptView {
    let mut text = String::new();
    let mut chars = Vec::new();
    for (i, &(_, c)) in raw.iter().enumerate() {
        if deleted[i].is_none() {
            chars.push((i, text.len()));
            text.push(c);
        }
    }
    KeptView { text, chars }
}

/// Deletes every marker match and collapses whitespace, recording each deletion.
///
/// Whitespace runs inside a line shrink to one character (a space when the run
/// has one), runs spanning line breaks shrink to a single `\n`, and runs at the
/// start or end of the text are dropped. Marker deletion and whitespace
/// collapsing repeat until neither changes the text, so the output is a fixed
/// point. Whitespace deleted next to a marker is reported as part of that
/// marker's removal.
pub fn clean_disfluencies(raw: &str, markers: &MarkerSet) -> CleanedText {
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let mut deleted: Vec<Option<Owner>> = vec![None; chars.len()];
    let mut next_marker = 0usize;

    loop {
        // markers to a fixed point
        loop {
            let mut hit = false;
            for re in &markers.patterns {
                let view = kept_view(&chars, &deleted);
                let starts: Vec<usize> = view.chars.iter().map(|&(_, b)| b).collect();
                for m in re.find_iter(&view.text) {
                    if m.start() == m.end() {
                        continue;
                    }
                    let lo = starts.partition_point(|&b| b < m.start());
                    let hi = starts.partition_point(|&b| b < m.end());
                    for &(raw_idx, _) in &view.chars[lo..hi] {
                        deleted[raw_idx] = Some(Owner::Marker(next_marker));
                    }
                    next_marker += 1;
                    hit = true;
                }
            }
            if !hit {
                break;
            }
        }

        let view = kept_view(&chars, &deleted);
        let kept: Vec<usize> = view.chars.iter().map(|&(i, _)| i).collect();
        let mut changed = false;
        let mut k = 0;
        while k < kept.len() {
            if !chars[kept[k]].1.is_whitespace() {
                k += 1;
                continue;
            }
            let run_start = k;
            while k < kept.len() && chars[kept[k]].1.is_whitespace() {
                k += 1;
            }
            let run = &kept[run_start..k];
            let keep = if run_start == 0 || k == kept.len() {
                None
            } else if let Some(&nl) = run.iter().find(|&&i| chars[i].1 == '\n') {
                Some(nl)
            } else {
                Some(*run.iter().find(|&&i| chars[i].1 == ' ').unwrap_or(&run[0]))
            };
            for &i in run {
                if Some(i) != keep {
                    deleted[i] = Some(Owner::Space);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // attach collapsed whitespace to an adjacent marker deletion
    for i in 1..deleted.len() {
        if deleted[i] == Some(Owner::Space) {
            if let Some(Owner::Marker(m)) = deleted[i - 1] {
                deleted[i] = Some(Owner::Marker(m));
            }
        }
    }
    for i in (0..deleted.len().saturating_sub(1)).rev() {
        if deleted[i] == Some(Owner::Space) {
            if let Some(Owner::Marker(m)) = deleted[i + 1] {
                deleted[i] = Some(Owner::Marker(m));
            }
        }
    }

    let mut cleaned = String::new();
    let mut removals: Vec<Removal> = Vec::new();
    let mut prev: Option<Owner> = None;
    for (i, &(offset, c)) in chars.iter().enumerate() {
        match deleted[i] {
            None => cleaned.push(c),
            Some(owner) => {
                let contiguous = i > 0 && prev == Some(owner);
                match removals.last_mut() {
                    Some(last) if contiguous => last.text.push(c),
                    _ => removals.push(Removal {
                        offset,
                        text: c.to_string(),
                    }),
                }
            }
        }
        prev = deleted[i];
    }
    CleanedText { cleaned, removals }
}

/// Re-inserts `removals` into `cleaned`. Returns `None` when the removals do
/// not fit the cleaned text.
pub fn restore(cleaned: &str, removals: &[Removal]) -> Option<String> {
    let mut out = String::with_capacity(cleaned.len() + removals.iter().map(|r| r.text.len()).sum::<usize>());
    let mut rest = cleaned;
    for r in removals {
        let take = r.offset.checked_sub(out.len())?;
        out.push_str(rest.get(..take)?);
        rest = &rest[take..];
        out.push_str(&r.text);
    }
    out.push_str(rest);
    Some(out)
}

/// Maps a byte offset in cleaned text back to the raw text.
fn raw_offset(cleaned_offset: usize, removals: &[Removal]) -> usize {
    let mut pos = cleaned_offset;
    for r in removals {
        if r.offset <= pos {
            pos += r.text.len();
        } else {
            break;
        }
    }
    pos
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub index: usize,
    pub text: String,
    /// First and last line (1-based, inclusive) the utterance came from.
    pub source_line_span: (usize, usize),
    pub ends_with_question: bool,
}

impl Utterance {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        Utterance {
            index,
            ends_with_question: text.ends_with('?'),
            text,
            source_line_span: (1, 1),
        }
    }
}

/// Splits cleaned text at line breaks and after every `?`. Line numbers in the
/// result are relative to `cleaned`.
pub fn segment_utterances(cleaned: &str) -> Vec<Utterance> {
    segment_with_offsets(cleaned).into_iter().map(|(u, _)| u).collect()
}

fn segment_with_offsets(cleaned: &str) -> Vec<(Utterance, usize)> {
    let mut out = Vec::new();
    let mut line_start = 0usize;
    for (line_idx, line) in cleaned.split('\n').enumerate() {
        let mut bounds = Vec::new();
        let mut seg_start = 0usize;
        for (i, _) in line.match_indices('?') {
            bounds.push((seg_start, i + 1));
            seg_start = i + 1;
        }
        bounds.push((seg_start, line.len()));
        for (s, e) in bounds {
            let seg = &line[s..e];
            let trimmed = seg.trim();
            if trimmed.is_empty() {
                continue;
            }
            let lead = seg.len() - seg.trim_start().len();
            let line_no = line_idx + 1;
            out.push((
                Utterance {
                    index: out.len(),
                    text: trimmed.to_string(),
                    source_line_span: (line_no, line_no),
                    ends_with_question: trimmed.ends_with('?'),
                },
                line_start + s + lead,
            ));
        }
        line_start += line.len() + 1;
    }
    out
}

/// A cleaned, segmented transcript track.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptDocument {
    pub metadata: SpeakerMetadata,
    pub utterances: Vec<Utterance>,
    pub raw_char_count: usize,
    pub cleaned_char_count: usize,
    /// Byte offset where the body starts; removal offsets are relative to it.
    pub body_offset: usize,
    pub removals: Vec<Removal>,
}

/// Header extraction, cleaning and segmentation of one transcript file.
/// Utterance line spans refer to lines of the original file.
pub fn ingest_transcript(
    raw: &str,
    schema: &HeaderSchema,
    markers: &MarkerSet,
) -> Result<TranscriptDocument, IngestError> {
    let (metadata, body_start) = split_header(raw, schema)?;
    let body = &raw[body_start.byte_offset..];
    let CleanedText { cleaned, removals } = clean_disfluencies(body, markers);
    let utterances = segment_with_offsets(&cleaned)
        .into_iter()
        .map(|(mut u, cleaned_offset)| {
            let raw_start = raw_offset(cleaned_offset, &removals);
            let last = u.text.chars().next_back().map_or(1, char::len_utf8);
            let raw_end = raw_offset(cleaned_offset + u.text.len() - last, &removals);
            let line_of = |pos: usize| body_start.first_line + body[..pos].matches('\n').count();
            u.source_line_span = (line_of(raw_start), line_of(raw_end));
            u
        })
        .collect();
    Ok(TranscriptDocument {
        metadata,
        utterances,
        raw_char_count: raw.chars().count(),
        cleaned_char_count: cleaned.chars().count(),
        body_offset: body_start.byte_offset,
        removals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_meta() -> SpeakerMetadata {
        SpeakerMetadata {
            interview_id: "D20-07".into(),
            location: Some("Itabaiana".into()),
            gender: Some("F".into()),
            age: Some(21),
            city_of_origin: Some("Lagarto".into()),
            city_of_residence: Some("São Cristóvão".into()),
            undergrad_period: Some("2019.1".into()),
            role: Some(Role::Informant),
        }
    }

    #[test]
    fn header_fields() {
        let raw = "@id: D20-07\n@local: Itabaiana\n@genero: F\n@idade: 21\n\neu gosto\n";
        let meta = parse_header(raw, &HeaderSchema::default()).unwrap();
        assert_eq!(meta.interview_id, "D20-07");
        assert_eq!(meta.location.as_deref(), Some("Itabaiana"));
        assert_eq!(meta.gender.as_deref(), Some("F"));
        assert_eq!(meta.age, Some(21));
        assert_eq!(meta.city_of_origin, None);
        assert_eq!(meta.role, None);
    }

    #[test]
    fn header_round_trip() {
        let schema = HeaderSchema::default();
        let meta = full_meta();
        let text = render_header(&meta, &schema) + "corpo\n";
        assert_eq!(parse_header(&text, &schema).unwrap(), meta);
    }

    #[test]
    fn minimal_header() {
        let meta = parse_header("@id: X\n\n", &HeaderSchema::default()).unwrap();
        assert_eq!(meta, SpeakerMetadata::with_id("X"));
    }

    #[test]
    fn header_errors_name_lines() {
        let schema = HeaderSchema::default();
        assert!(matches!(
            parse_header("só texto\nmais texto\n", &schema),
            Err(IngestError::MissingHeader { line: 1 })
        ));
        assert!(matches!(
            parse_header("", &schema),
            Err(IngestError::MissingHeader { .. })
        ));
        assert!(matches!(
            parse_header("@id: X\n@idade: vinte\n\n", &schema),
            Err(IngestError::MalformedField { line: 2, .. })
        ));
        assert!(matches!(
            parse_header("@id: X\n@idade: 0\n\n", &schema),
            Err(IngestError::MalformedField { line: 2, .. })
        ));
        assert!(matches!(
            parse_header("@id: X\n@cor: azul\n\n", &schema),
            Err(IngestError::MalformedField { line: 2, .. })
        ));
        assert!(matches!(
            parse_header("@id: X\n@id: Y\n\n", &schema),
            Err(IngestError::MalformedField { line: 2, .. })
        ));
        assert!(matches!(
            parse_header("@id X\n\n", &schema),
            Err(IngestError::MalformedField { line: 1, .. })
        ));
        assert!(matches!(
            parse_header("@local: Aracaju\n\n", &schema),
            Err(IngestError::MissingField { .. })
        ));
        // header not closed by a blank line before body text
        assert!(matches!(
            parse_header("@id: X\neu gosto\n", &schema),
            Err(IngestError::MissingHeader { line: 2 })
        ));
    }

    #[test]
    fn empty_values_are_absent() {
        let meta = parse_header("@id: X\n@local:\n\n", &HeaderSchema::default()).unwrap();
        assert_eq!(meta.location, None);
    }

    #[test]
    fn custom_schema_key() {
        let schema = HeaderSchema::default()
            .with_key(HeaderField::Location, "place", r"^.+$")
            .unwrap();
        let meta = parse_header("@id: X\n@place: Aracaju\n\n", &schema).unwrap();
        assert_eq!(meta.location.as_deref(), Some("Aracaju"));
    }

    #[test]
    fn clean_truncated_word_example() {
        let raw = "eu go/ gosto não ((pausa)) tenho problema";
        let out = clean_disfluencies(raw, &MarkerSet::default());
        assert_eq!(out.cleaned, "eu go/ gosto não tenho problema");
        assert_eq!(out.removals.len(), 1);
        assert_eq!(out.removals[0].text, "((pausa)) ");
        assert_eq!(restore(&out.cleaned, &out.removals).unwrap(), raw);
    }

    #[test]
    fn clean_without_markers_is_identity() {
        let raw = "como que é a relação? eu gosto não";
        let out = clean_disfluencies(raw, &MarkerSet::default());
        assert_eq!(out.cleaned, raw);
        assert!(out.removals.is_empty());
    }

    #[test]
    fn clean_all_markers() {
        let raw = "((riso)) ((pausa))";
        let out = clean_disfluencies(raw, &MarkerSet::default());
        assert_eq!(out.cleaned, "");
        assert_eq!(out.removals.len(), 2);
        assert_eq!(restore("", &out.removals).unwrap(), raw);
    }

    #[test]
    fn clean_ellipsis_and_lines() {
        let raw = "  a (...) b\n\n\n  ((tosse))\nc  \t d \n";
        let out = clean_disfluencies(raw, &MarkerSet::default());
        assert_eq!(out.cleaned, "a b\nc d");
        assert_eq!(restore(&out.cleaned, &out.removals).unwrap(), raw);
    }

    #[test]
    fn clean_reaches_fixed_point() {
        // removing the inner marker forms a new one
        let raw = "a ((...)(x)) b";
        let out = clean_disfluencies(raw, &MarkerSet::default());
        assert_eq!(out.cleaned, "a b");
        assert_eq!(restore(&out.cleaned, &out.removals).unwrap(), raw);
        let again = clean_disfluencies(&out.cleaned, &MarkerSet::default());
        assert!(again.removals.is_empty());
    }

    #[test]
    fn invalid_marker() {
        assert!(matches!(
            MarkerSet::new(&["(("]),
            Err(IngestError::InvalidMarkerPattern { .. })
        ));
    }

    #[test]
    fn segmentation() {
        let utts = segment_utterances("como que é a relação? eu gosto não");
        assert_eq!(utts.len(), 2);
        assert_eq!(utts[0].text, "como que é a relação?");
        assert!(utts[0].ends_with_question);
        assert_eq!(utts[1].text, "eu gosto não");
        assert!(!utts[1].ends_with_question);
        assert_eq!(utts[1].index, 1);

        assert_eq!(segment_utterances("gosto não").len(), 1);
        assert!(segment_utterances("").is_empty());

        let utts = segment_utterances("a\nb? c?\n?");
        let texts: Vec<_> = utts.iter().map(|u| u.text.as_str()).collect();
        assert_eq!(texts, ["a", "b?", "c?", "?"]);
        assert_eq!(utts[3].source_line_span, (3, 3));
    }

    #[test]
    fn ingest_maps_file_lines() {
        let raw = "@id: D1\n@idade: 30\n\n((pausa))\n\neu gosto não\nvocê gosta? não\n";
        let doc = ingest_transcript(raw, &HeaderSchema::default(), &MarkerSet::default()).unwrap();
        assert_eq!(doc.metadata.age, Some(30));
        let spans: Vec<_> = doc
            .utterances
            .iter()
            .map(|u| (u.text.as_str(), u.source_line_span))
            .collect();
        assert_eq!(
            spans,
            [("eu gosto não", (6, 6)), ("você gosta?", (7, 7)), ("não", (7, 7))]
        );
        assert!(doc.cleaned_char_count <= doc.raw_char_count);
        let body = &raw[doc.body_offset..];
        let cleaned = "eu gosto não\nvocê gosta? não";
        assert_eq!(restore(cleaned, &doc.removals).unwrap(), body);
    }

    #[test]
    fn line_span_with_multibyte_ending() {
        let raw = "@id: D2\n\neu sei ñ\ntá bom é\n";
        let doc = ingest_transcript(raw, &HeaderSchema::default(), &MarkerSet::default()).unwrap();
        let spans: Vec<_> = doc.utterances.iter().map(|u| u.source_line_span).collect();
        assert_eq!(spans, [(3, 3), (4, 4)]);
    }
}
