//! Seeded generators for synthetic transcripts and labelled negation corpora,
//! used by the round-trip and distribution checks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::classifier::Label;
use crate::evaluation::item_key;
use crate::ingest::{render_header, HeaderSchema, Role, SpeakerMetadata};

/// Verb and auxiliary forms the starter lexicon tags VERB or AUX.
pub const VERBS: [&str; 16] = [
    "gosto", "sei", "acho", "quero", "fiz", "moro", "estudo", "lembro", "entendo", "conheço", "preciso", "é", "foi",
    "vou", "tenho", "posso",
];

/// Words the starter lexicon tags with neither VERB nor AUX.
pub const FILLERS: [&str; 16] = [
    "eu", "ela", "a", "casa", "de", "com", "muito", "hoje", "cidade", "que", "mas", "assim", "isso", "pra", "aqui",
    "gente",
];

const MARKER_SAMPLES: [&str; 5] = ["((pausa))", "((riso))", "((hesitação))", "(...)", "((tosse longa))"];
const BODY_WORDS: [&str; 12] = [
    "eu", "não", "gosto", "go/", "da", "cidade", "né", "então", "você", "acha", "mesmo", "ñ",
];

/// Random metadata with each optional field present about half the time.
pub fn random_metadata<R: Rng>(rng: &mut R, id: &str) -> SpeakerMetadata {
    let mut pick = |values: &[&str]| {
        rng.gen_bool(0.5)
            .then(|| values[rng.gen_range(0..values.len())].to_string())
    };
    let location = pick(&["Itabaiana", "Aracaju", "Lagarto", "São Cristóvão"]);
    let gender = pick(&["F", "M"]);
    let city_of_origin = pick(&["Estância", "Propriá", "Aracaju"]);
    let city_of_residence = pick(&["Aracaju", "Itabaiana"]);
    let undergrad_period = pick(&["2019.1", "2020.2", "3º período"]);
    SpeakerMetadata {
        interview_id: id.to_string(),
        location,
        gender,
        age: rng.gen_bool(0.5).then(|| rng.gen_range(17..70)),
        city_of_origin,
        city_of_residence,
        undergrad_period,
        role: match rng.gen_range(0..3) {
            0 => Some(Role::Informant),
            1 => Some(Role::Documenter),
            _ => None,
        },
    }
}

/// A header plus a body of words, disfluency markers, `?`, and irregular whitespace.
pub struct SyntheticTranscript {
    pub raw: String,
    pub metadata: SpeakerMetadata,
    pub body: String,
}

pub fn random_transcript<R: Rng>(rng: &mut R, id: &str) -> SyntheticTranscript {
    let metadata = random_metadata(rng, id);
    let header = render_header(&metadata, &HeaderSchema::default());
    let mut body = String::new();
    for _ in 0..rng.gen_range(0..40) {
        let piece = match rng.gen_range(0..10) {
            0..=5 => BODY_WORDS[rng.gen_range(0..BODY_WORDS.len())],
            6 | 7 => MARKER_SAMPLES[rng.gen_range(0..MARKER_SAMPLES.len())],
            8 => "?",
            _ => "\n",
        };
        body.push_str(piece);
        let sep = match rng.gen_range(0..8) {
            0 => "",
            1 => "  ",
            2 => "\t",
            3 => " \n ",
            _ => " ",
        };
        body.push_str(sep);
    }
    SyntheticTranscript {
        raw: format!("{header}{body}"),
        metadata,
        body,
    }
}

/// Label counts for `n` items at the given proportions (largest remainder rounding).
pub fn allocate(n: usize, proportions: &[(Label, f64)]) -> Vec<(Label, usize)> {
    let total: f64 = proportions.iter().map(|(_, p)| p).sum();
    let exact: Vec<f64> = proportions.iter().map(|(_, p)| p / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    proportions.iter().map(|(l, _)| *l).zip(counts).collect()
}

/// Transcript files whose utterances each carry one negation structure, and
/// the ground-truth label for every item key.
pub struct SyntheticCorpus {
    pub transcripts: Vec<String>,
    pub truth: BTreeMap<String, Label>,
}

pub fn negation_corpus<R: Rng>(
    rng: &mut R,
    items: usize,
    proportions: &[(Label, f64)],
    interviews: usize,
) -> SyntheticCorpus {
    let mut labels: Vec<Label> = allocate(items, proportions)
        .into_iter()
        .flat_map(|(l, c)| std::iter::repeat_n(l, c))
        .collect();
    labels.shuffle(rng);

    let interviews = interviews.max(1);
    let per_interview = labels.len().div_ceil(interviews).max(1);
    let mut transcripts = Vec::new();
    let mut truth = BTreeMap::new();
    for (n, chunk) in labels.chunks(per_interview).enumerate() {
        let id = format!("SYN-{n:03}");
        let mut text = render_header(&random_metadata(rng, &id), &HeaderSchema::default());
        for (utt_index, label) in chunk.iter().enumerate() {
            let mut words: Vec<&str> = (0..rng.gen_range(0..4))
                .map(|_| FILLERS[rng.gen_range(0..FILLERS.len())])
                .collect();
            let start = words.len();
            let verb = VERBS[rng.gen_range(0..VERBS.len())];
            match label {
                Label::Neg1 => words.extend(["não", verb]),
                Label::Neg2 => words.extend(["não", verb, "não"]),
                Label::Neg3 => words.extend([verb, "não"]),
            }
            words.extend((0..rng.gen_range(0..4)).map(|_| FILLERS[rng.gen_range(0..FILLERS.len())]));
            if rng.gen_bool(0.2) {
                words.insert(rng.gen_range(0..=start.min(1)), "((pausa))");
            }
            // markers vanish during cleaning, so token indices are unaffected
            let line = words.join(" ");
            text.push_str(&line);
            text.push('\n');
            truth.insert(item_key(&id, utt_index, start), *label);
        }
        transcripts.push(text);
    }
    SyntheticCorpus { transcripts, truth }
}
