//! Tokenization and UPOS tagging.
//!
//! Two tag providers: a lexicon tagger with a suffix fallback for utterances
//! produced by [`crate::ingest`], and a CoNLL-U reader for externally tagged text.
//! Token offsets are *character* offsets into the utterance text.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::ingest::Utterance;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TagError {
    #[error("no lexicon loaded")]
    LexiconNotLoaded,
    #[error("lexicon line {line}: {reason}")]
    MalformedLexicon { line: usize, reason: String },
    #[error("CoNLL-U line {line}: {reason}")]
    MalformedConllu { line: usize, reason: String },
}

/// Universal POS tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Upos {
    pub const ALL: [Upos; 17] = [
        Upos::Adj,
        Upos::Adp,
        Upos::Adv,
        Upos::Aux,
        Upos::Cconj,
        Upos::Det,
        Upos::Intj,
        Upos::Noun,
        Upos::Num,
        Upos::Part,
        Upos::Pron,
        Upos::Propn,
        Upos::Punct,
        Upos::Sconj,
        Upos::Sym,
        Upos::Verb,
        Upos::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
        }
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownUpos(pub String);

impl fmt::Display for UnknownUpos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown UPOS tag `{}`", self.0)
    }
}

impl std::error::Error for UnknownUpos {}

impl FromStr for Upos {
    type Err = UnknownUpos;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Upos::ALL
            .iter()
            .copied()
            .find(|u| u.as_str() == s)
            .ok_or_else(|| UnknownUpos(s.to_string()))
    }
}

/// NFC-normalized lowercase form. Diacritics are kept.
pub fn normalize(text: &str) -> String {
    text.nfc().collect::<String>().to_lowercase().nfc().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub norm: String,
    pub upos: Upos,
    pub index: usize,
    pub char_start: usize,
    pub char_end: usize,
    pub utterance_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagSource {
    Conllu,
    LexiconTagger,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedUtterance {
    pub utterance_index: usize,
    pub text: String,
    pub tokens: Vec<Token>,
    pub tag_source: TagSource,
}

impl TaggedUtterance {
    /// Text between the start of token `first` and the end of token `last`, inclusive.
    pub fn slice_tokens(&self, first: usize, last: usize) -> String {
        let start = self.tokens[first].char_start;
        let end = self.tokens[last].char_end;
        self.text.chars().skip(start).take(end - start).collect()
    }

    /// Rebuilds the utterance text from token offsets, filling gaps with spaces.
    pub fn detokenize(&self) -> String {
        let mut out = String::new();
        let mut pos = 0;
        for t in &self.tokens {
            out.extend(std::iter::repeat_n(' ', t.char_start - pos));
            out.push_str(&t.text);
            pos = t.char_end;
        }
        out
    }
}

/// A token before tagging: surface text and character offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

impl RawToken {
    fn new(text: &str, char_start: usize, char_end: usize) -> Self {
        RawToken {
            text: text.to_string(),
            char_start,
            char_end,
        }
    }
}

/// Splits on whitespace; every `?` becomes a token of its own.
pub fn tokenize(text: &str) -> Vec<RawToken> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let flush = |current: &mut String, start: usize, end: usize, out: &mut Vec<RawToken>| {
        if !current.is_empty() {
            out.push(RawToken::new(current, start, end));
            current.clear();
        }
    };
    for (pos, c) in text.chars().enumerate() {
        if c.is_whitespace() {
            flush(&mut current, start, pos, &mut out);
        } else if c == '?' {
            flush(&mut current, start, pos, &mut out);
            out.push(RawToken::new("?", pos, pos + 1));
        } else {
            if current.is_empty() {
                start = pos;
            }
            current.push(c);
        }
    }
    let len = text.chars().count();
    flush(&mut current, start, len, &mut out);
    out
}

const STARTER_LEXICON: &str = include_str!("../data/starter_lexicon.tsv");
const VERB_SUFFIXES: &str = include_str!("../data/verb_suffixes.txt");

/// `form -> UPOS` lookup table plus verb inflection suffixes for unknown words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerbLexicon {
    entries: HashMap<String, Upos>,
    suffixes: Vec<String>,
}

impl VerbLexicon {
    /// Parses `form<TAB>UPOS` lines. Blank lines and `#` comments are skipped.
    /// The bundled suffix list is attached; replace it with [`Self::with_suffixes`].
    pub fn parse(text: &str) -> Result<Self, TagError> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| TagError::MalformedLexicon { line: i + 1, reason };
            let (form, tag) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected `form<TAB>UPOS`".to_string()))?;
            let upos: Upos = tag.trim().parse().map_err(|e: UnknownUpos| malformed(e.to_string()))?;
            let form = normalize(form.trim());
            if form.is_empty() {
                return Err(malformed("empty form".to_string()));
            }
            entries.insert(form, upos);
        }
        Ok(VerbLexicon {
            entries,
            suffixes: parse_suffixes(VERB_SUFFIXES),
        })
    }

    /// The bundled lexicon of high-frequency Portuguese forms.
    pub fn starter() -> Self {
        VerbLexicon::parse(STARTER_LEXICON).expect("bundled lexicon parses")
    }

    /// Replaces the suffix list (one suffix per line, `#` comments allowed).
    pub fn with_suffixes(mut self, text: &str) -> Self {
        self.suffixes = parse_suffixes(text);
        self
    }

    pub fn insert(&mut self, form: &str, upos: Upos) {
        self.entries.insert(normalize(form), upos);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, norm: &str) -> Option<Upos> {
        self.entries.get(norm).copied()
    }

    /// Tag for one normalized form: `não` is always ADV, then exact lexicon
    /// hits, punctuation, verb suffixes, and `X` as a fallback.
    pub fn tag_word(&self, norm: &str) -> Upos {
        if norm == "não" {
            return Upos::Adv;
        }
        if let Some(upos) = self.lookup(norm) {
            return upos;
        }
        if !norm.is_empty() && norm.chars().all(|c| c.is_ascii_punctuation()) {
            return Upos::Punct;
        }
        if norm.chars().all(char::is_alphabetic) {
            let len = norm.chars().count();
            let verbal = self
                .suffixes
                .iter()
                .any(|s| norm.ends_with(s.as_str()) && len >= s.chars().count() + 2);
            if verbal {
                return Upos::Verb;
            }
        }
        Upos::X
    }
}

fn parse_suffixes(text: &str) -> Vec<String> {
    let mut suffixes: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| normalize(l.trim_start_matches('-')))
        .collect();
    // longest first so the matching suffix is the most specific one
    suffixes.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
    suffixes
}

/// Tags already tokenized text with the lexicon.
pub fn tag_with_lexicon(
    utterance_index: usize,
    text: &str,
    tokens: &[RawToken],
    lexicon: &VerbLexicon,
) -> Result<TaggedUtterance, TagError> {
    if lexicon.is_empty() {
        return Err(TagError::LexiconNotLoaded);
    }
    let tokens = tokens
        .iter()
        .enumerate()
        .map(|(index, raw)| {
            let norm = normalize(&raw.text);
            Token {
                upos: lexicon.tag_word(&norm),
                text: raw.text.clone(),
                norm,
                index,
                char_start: raw.char_start,
                char_end: raw.char_end,
                utterance_index,
            }
        })
        .collect();
    Ok(TaggedUtterance {
        utterance_index,
        text: text.to_string(),
        tokens,
        tag_source: TagSource::LexiconTagger,
    })
}

/// Tokenizes and tags an utterance.
pub fn tag_utterance(utterance: &Utterance, lexicon: &VerbLexicon) -> Result<TaggedUtterance, TagError> {
    let tokens = tokenize(&utterance.text);
    tag_with_lexicon(utterance.index, &utterance.text, &tokens, lexicon)
}

/// Reads CoNLL-U sentences. Multiword ranges (`1-2`) and empty nodes (`1.1`)
/// are skipped; offsets are synthesized by joining forms with single spaces.
pub fn read_conllu(text: &str) -> Result<Vec<TaggedUtterance>, TagError> {
    let mut out = Vec::new();
    let mut forms: Vec<(String, Upos)> = Vec::new();

    let finish = |forms: &mut Vec<(String, Upos)>, out: &mut Vec<TaggedUtterance>| {
        if forms.is_empty() {
            return;
        }
        let utterance_index = out.len();
        let mut text = String::new();
        let mut pos = 0;
        let mut tokens = Vec::with_capacity(forms.len());
        for (index, (form, upos)) in forms.drain(..).enumerate() {
            if index > 0 {
                text.push(' ');
                pos += 1;
            }
            let len = form.chars().count();
            text.push_str(&form);
            tokens.push(Token {
                norm: normalize(&form),
                text: form,
                upos,
                index,
                char_start: pos,
                char_end: pos + len,
                utterance_index,
            });
            pos += len;
        }
        out.push(TaggedUtterance {
            utterance_index,
            text,
            tokens,
            tag_source: TagSource::Conllu,
        });
    };

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(&mut forms, &mut out);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| TagError::MalformedConllu { line: line_no, reason };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(malformed(format!(
                "expected 10 tab-separated columns, found {}",
                cols.len()
            )));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            let valid = id
                .split(['-', '.'])
                .all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
            if !valid {
                return Err(malformed(format!("invalid token id `{id}`")));
            }
            continue;
        }
        id.parse::<u32>()
            .map_err(|_| malformed(format!("token id `{id}` is not an integer")))?;
        let form = cols[1];
        if form.is_empty() {
            return Err(malformed("empty FORM".to_string()));
        }
        let upos = match cols[3] {
            "_" => Upos::X,
            tag => tag.parse().map_err(|e: UnknownUpos| malformed(e.to_string()))?,
        };
        forms.push((form.to_string(), upos));
    }
    finish(&mut forms, &mut out);
    Ok(out)
}

/// Writes one CoNLL-U block per utterance, with a `# text` comment.
pub fn write_conllu(utterances: &[TaggedUtterance]) -> String {
    let mut out = String::new();
    for utt in utterances {
        out.push_str("# text = ");
        out.push_str(&utt.text);
        out.push('\n');
        for (i, t) in utt.tokens.iter().enumerate() {
            out.push_str(&format!("{}\t{}\t_\t{}\t_\t_\t_\t_\t_\t_\n", i + 1, t.text, t.upos));
        }
        out.push('\n');
    }
    out
}
