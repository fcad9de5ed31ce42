//! Reference implementations written straight from the definitions. They do not
//! call into the code paths they check.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use negscope::token_stream::{normalize, TagSource, TaggedUtterance, Token, Upos};
use negscope::TokenPattern;

/// Every (pattern id, matched indices) found by trying each start and each
/// gap assignment in `[0, max_gap]^(k-1)`.
pub fn brute_force_matches(patterns: &[TokenPattern], utt: &TaggedUtterance) -> BTreeSet<(String, Vec<usize>)> {
    let tokens = &utt.tokens;
    let mut found = BTreeSet::new();
    for p in patterns {
        let k = p.specs.len();
        let gap_choices = (p.max_gap + 1).pow((k - 1) as u32);
        for start in 0..tokens.len() {
            for code in 0..gap_choices {
                let mut gaps = Vec::with_capacity(k - 1);
                let mut c = code;
                for _ in 1..k {
                    gaps.push(c % (p.max_gap + 1));
                    c /= p.max_gap + 1;
                }
                let mut indices = vec![start];
                for g in &gaps {
                    indices.push(indices.last().unwrap() + 1 + g);
                }
                if *indices.last().unwrap() >= tokens.len() {
                    continue;
                }
                let specs_ok = indices.iter().zip(&p.specs).all(|(&i, spec)| {
                    let t = &tokens[i];
                    let text_ok = match &spec.text_equals {
                        Some(set) => set.iter().any(|w| *w == t.norm),
                        None => true,
                    };
                    let pos_ok = match &spec.pos_in {
                        Some(set) => set.iter().any(|u| *u == t.upos),
                        None => true,
                    };
                    text_ok && pos_ok
                });
                let skipped_ok = indices
                    .windows(2)
                    .all(|w| (w[0] + 1..w[1]).all(|s| tokens[s].text != "?"));
                if specs_ok && skipped_ok {
                    found.insert((p.id.clone(), indices));
                }
            }
        }
    }
    found
}

/// Builds a tagged utterance from (word, tag) pairs joined by single spaces.
pub fn tagged(words: &[(&str, Upos)]) -> TaggedUtterance {
    let mut text = String::new();
    let mut tokens = Vec::new();
    for (index, (w, upos)) in words.iter().enumerate() {
        if index > 0 {
            text.push(' ');
        }
        let start = text.chars().count();
        text.push_str(w);
        tokens.push(Token {
            text: w.to_string(),
            norm: normalize(w),
            upos: *upos,
            index,
            char_start: start,
            char_end: start + w.chars().count(),
            utterance_index: 0,
        });
    }
    TaggedUtterance {
        utterance_index: 0,
        text,
        tokens,
        tag_source: TagSource::Conllu,
    }
}

/// Fleiss' kappa, step by step: n_ij table, P_i, mean P, p_j, P_e.
pub fn fleiss_oracle(rows: &[Vec<usize>], categories: usize) -> Option<f64> {
    let n_items = rows.len() as f64;
    let n = rows[0].len() as f64;
    let mut table = vec![vec![0f64; categories]; rows.len()];
    for (i, row) in rows.iter().enumerate() {
        for &c in row {
            table[i][c] += 1.0;
        }
    }
    let p_i: Vec<f64> = table
        .iter()
        .map(|r| (r.iter().map(|x| x * x).sum::<f64>() - n) / (n * (n - 1.0)))
        .collect();
    let p_bar = p_i.iter().sum::<f64>() / n_items;
    let p_j: Vec<f64> = (0..categories)
        .map(|j| table.iter().map(|r| r[j]).sum::<f64>() / (n_items * n))
        .collect();
    let p_e: f64 = p_j.iter().map(|p| p * p).sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return None;
    }
    Some((p_bar - p_e) / (1.0 - p_e))
}

/// Cohen's kappa from a contingency table.
pub fn cohen_oracle(a: &[usize], b: &[usize], categories: usize) -> Option<f64> {
    let n = a.len() as f64;
    let mut table = vec![vec![0f64; categories]; categories];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1.0;
    }
    let p_o = (0..categories).map(|k| table[k][k]).sum::<f64>() / n;
    let p_e: f64 = (0..categories)
        .map(|k| {
            let row: f64 = table[k].iter().sum();
            let col: f64 = table.iter().map(|r| r[k]).sum();
            (row / n) * (col / n)
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return None;
    }
    Some((p_o - p_e) / (1.0 - p_e))
}

pub struct RecountedClass {
    pub tp: usize,
    pub predicted: usize,
    pub gold: usize,
}

/// Per-class counts by rescanning all pairs for every (class, class) cell.
pub fn recount(pairs: &[(usize, usize)], categories: usize) -> (Vec<Vec<usize>>, Vec<RecountedClass>) {
    let mut cells = vec![vec![0; categories]; categories];
    for g in 0..categories {
        for p in 0..categories {
            cells[g][p] = pairs.iter().filter(|&&(x, y)| x == g && y == p).count();
        }
    }
    let classes = (0..categories)
        .map(|k| RecountedClass {
            tp: pairs.iter().filter(|&&(g, p)| g == k && p == k).count(),
            predicted: pairs.iter().filter(|&&(_, p)| p == k).count(),
            gold: pairs.iter().filter(|&&(g, _)| g == k).count(),
        })
        .collect();
    (cells, classes)
}
