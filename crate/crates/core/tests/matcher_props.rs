mod support;

use negscope::classifier::negation_matcher;
use negscope::token_stream::Upos;
use negscope::{Matcher, OverlapPolicy, TokenPattern, TokenSpec};
use proptest::prelude::*;
use support::oracles::{brute_force_matches, tagged};

const WORDS: [&str; 4] = ["não", "a", "b", "?"];
const TAGS: [Upos; 5] = [Upos::Verb, Upos::Aux, Upos::Noun, Upos::Adv, Upos::Punct];

fn utterance() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0..WORDS.len(), 0..TAGS.len()), 0..=12)
}

fn spec() -> impl Strategy<Value = TokenSpec> {
    prop_oneof![
        (0..3usize).prop_map(|w| TokenSpec::text([WORDS[w]])),
        prop::collection::btree_set(0..TAGS.len(), 1..=2).prop_map(|s| TokenSpec::pos(s.into_iter().map(|t| TAGS[t]))),
        (0..3usize, 0..TAGS.len()).prop_map(|(w, t)| TokenSpec::text([WORDS[w]]).and_pos([TAGS[t]])),
    ]
}

fn patterns() -> impl Strategy<Value = Vec<TokenPattern>> {
    prop::collection::vec((prop::collection::vec(spec(), 1..=3), 0..=2usize, -2..3i64), 1..=3).prop_map(|ps| {
        ps.into_iter()
            .enumerate()
            .map(|(i, (specs, gap, prio))| {
                TokenPattern::new(format!("P{i}"), specs)
                    .with_max_gap(gap)
                    .with_priority(prio)
            })
            .collect()
    })
}

fn build(words: &[(usize, usize)]) -> negscope::TaggedUtterance {
    let pairs: Vec<(&str, Upos)> = words.iter().map(|&(w, t)| (WORDS[w], TAGS[t])).collect();
    tagged(&pairs)
}

proptest! {
    #[test]
    fn matches_equal_brute_force(words in utterance(), pats in patterns()) {
        let utt = build(&words);
        let matcher = Matcher::from_patterns(pats.clone()).unwrap();
        let found: std::collections::BTreeSet<_> = matcher
            .find_matches(&utt)
            .into_iter()
            .map(|s| (s.pattern_id, s.matched_token_indices))
            .collect();
        prop_assert_eq!(found, brute_force_matches(&pats, &utt));
    }

    #[test]
    fn every_match_is_sound(words in utterance(), pats in patterns()) {
        let utt = build(&words);
        let matcher = Matcher::from_patterns(pats).unwrap();
        for span in matcher.find_matches(&utt) {
            let p = matcher.pattern(&span.pattern_id).unwrap();
            prop_assert!(p.accepts(&utt.tokens, &span.matched_token_indices));
            prop_assert_eq!(span.start, span.matched_token_indices[0]);
            prop_assert_eq!(span.end, *span.matched_token_indices.last().unwrap() + 1);
        }
    }

    #[test]
    fn resolution_keeps_disjoint_maximal_subset(words in utterance(), pats in patterns()) {
        let utt = build(&words);
        let matcher = Matcher::from_patterns(pats).unwrap();
        let all = matcher.find_matches(&utt);
        let kept = matcher.resolve_overlaps(all.clone(), &matcher.longest_match_policy()).unwrap();
        for (i, a) in kept.iter().enumerate() {
            prop_assert!(all.contains(a));
            for b in &kept[i + 1..] {
                prop_assert!(!a.overlaps(b));
            }
        }
        for dropped in all.iter().filter(|s| !kept.contains(s)) {
            prop_assert!(kept.iter().any(|k| k.overlaps(dropped) && k.len() >= dropped.len()));
        }
        let everything = matcher.resolve_overlaps(all.clone(), &OverlapPolicy::ReportAll).unwrap();
        prop_assert_eq!(everything, all);
    }

    #[test]
    fn neg2_triple_wins_wherever_it_sits(
        before in prop::collection::vec(0..2usize, 0..4),
        after in prop::collection::vec(0..2usize, 0..4),
        verb in prop::sample::select(vec![Upos::Verb, Upos::Aux]),
    ) {
        let filler = [("casa", Upos::Noun), ("de", Upos::Adp)];
        let mut words: Vec<(&str, Upos)> = before.iter().map(|&i| filler[i]).collect();
        let start = words.len();
        words.extend([("não", Upos::Adv), ("gosto", verb), ("não", Upos::Adv)]);
        words.extend(after.iter().map(|&i| filler[i]));
        let utt = tagged(&words);
        let matcher = negation_matcher();
        let kept = matcher
            .resolve_overlaps(matcher.find_matches(&utt), &matcher.longest_match_policy())
            .unwrap();
        prop_assert_eq!(kept.len(), 1);
        prop_assert_eq!(&kept[0].pattern_id, "NEG2");
        prop_assert_eq!(&kept[0].matched_token_indices, &vec![start, start + 1, start + 2]);
    }
}

#[test]
fn gap_never_crosses_question_mark() {
    let matcher = Matcher::from_patterns(vec![TokenPattern::new(
        "G",
        vec![TokenSpec::text(["não"]), TokenSpec::pos([Upos::Verb])],
    )
    .with_max_gap(2)])
    .unwrap();
    let utt = tagged(&[("não", Upos::Adv), ("?", Upos::Punct), ("sei", Upos::Verb)]);
    assert!(matcher.find_matches(&utt).is_empty());
    let utt = tagged(&[("não", Upos::Adv), ("a", Upos::Det), ("sei", Upos::Verb)]);
    assert_eq!(matcher.find_matches(&utt).len(), 1);
}

#[test]
fn noun_after_nao_is_not_negation() {
    let matcher = negation_matcher();
    let utt = tagged(&[("não", Upos::Adv), ("trabalho", Upos::Noun), ("aqui", Upos::Adv)]);
    assert!(matcher.find_matches(&utt).is_empty());
}
