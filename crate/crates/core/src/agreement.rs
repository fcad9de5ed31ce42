//! Inter-annotator agreement: Fleiss' kappa, pairwise Cohen's kappa and
//! majority-vote unification of labels.
//!
//! Kappas are `None` when chance agreement is 1 (every label identical), which
//! makes the coefficient 0/0. Both coefficients are computed from integer
//! tallies with one division per term, so they are exactly invariant under
//! item, rater and category permutations.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum AgreementError {
    #[error("annotation matrix is empty")]
    EmptyMatrix,
    #[error("item `{item}` has {found} labels, expected {expected}")]
    RaggedMatrix {
        item: String,
        found: usize,
        expected: usize,
    },
    #[error("label sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("at least two annotators are required, found {0}")]
    TooFewAnnotators(usize),
    #[error("item `{item}`: label `{label}` is not one of the categories")]
    UnknownLabel { item: String, label: String },
    #[error("annotation CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Items × annotators grid. Missing cells are `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationMatrix {
    pub item_ids: Vec<String>,
    pub annotator_ids: Vec<String>,
    pub labels: Vec<Vec<Option<String>>>,
}

impl AnnotationMatrix {
    /// Builds a complete matrix from label rows.
    pub fn from_rows<S: Into<String>>(item_ids: Vec<String>, annotator_ids: Vec<String>, rows: Vec<Vec<S>>) -> Self {
        AnnotationMatrix {
            item_ids,
            annotator_ids,
            labels: rows
                .into_iter()
                .map(|r| r.into_iter().map(|l| Some(l.into())).collect())
                .collect(),
        }
    }

    /// Rows with every cell present, or `RaggedMatrix` naming the first incomplete item.
    pub fn complete_rows(&self) -> Result<Vec<Vec<&str>>, AgreementError> {
        let expected = self.annotator_ids.len();
        self.labels
            .iter()
            .zip(&self.item_ids)
            .map(|(row, item)| {
                let cells: Vec<&str> = row.iter().flatten().map(String::as_str).collect();
                if cells.len() != expected || row.len() != expected {
                    Err(AgreementError::RaggedMatrix {
                        item: item.clone(),
                        found: cells.len(),
                        expected,
                    })
                } else {
                    Ok(cells)
                }
            })
            .collect()
    }

    /// Labels given by annotator `j`, in item order.
    pub fn column(&self, j: usize) -> Result<Vec<&str>, AgreementError> {
        Ok(self.complete_rows()?.into_iter().map(|r| r[j]).collect())
    }

    pub fn validate_labels<S: AsRef<str>>(&self, categories: &[S]) -> Result<(), AgreementError> {
        for (row, item) in self.labels.iter().zip(&self.item_ids) {
            for label in row.iter().flatten() {
                if !categories.iter().any(|c| c.as_ref() == label) {
                    return Err(AgreementError::UnknownLabel {
                        item: item.clone(),
                        label: label.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Fleiss' kappa of a complete matrix.
pub fn fleiss_kappa<F: Real>(matrix: &AnnotationMatrix) -> Result<Option<F>, AgreementError> {
    fleiss_kappa_rows(&matrix.complete_rows()?)
}

/// Fleiss' kappa over rows of labels, one row per item, same rater count per row.
pub fn fleiss_kappa_rows<F: Real, L: Ord>(rows: &[Vec<L>]) -> Result<Option<F>, AgreementError> {
    let items = rows.len();
    if items == 0 {
        return Err(AgreementError::EmptyMatrix);
    }
    let raters = rows[0].len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != raters) {
        return Err(AgreementError::RaggedMatrix {
            item: i.to_string(),
            found: row.len(),
            expected: raters,
        });
    }
    if raters < 2 {
        return Err(AgreementError::TooFewAnnotators(raters));
    }

    let mut totals: BTreeMap<&L, usize> = BTreeMap::new();
    let mut sum_sq = 0usize;
    for row in rows {
        let mut counts: BTreeMap<&L, usize> = BTreeMap::new();
        for label in row {
            *counts.entry(label).or_default() += 1;
            *totals.entry(label).or_default() += 1;
        }
        sum_sq += counts.values().map(|c| c * c).sum::<usize>();
    }
    let cells = items * raters;
    let chance_num: usize = totals.values().map(|t| t * t).sum();
    if chance_num == cells * cells {
        return Ok(None);
    }
    let observed = F::ratio(sum_sq - cells, cells * (raters - 1));
    let chance = F::ratio(chance_num, cells * cells);
    Ok(Some((observed - chance) / (F::one() - chance)))
}

/// Cohen's kappa between two label sequences.
pub fn cohen_kappa<F: Real, L: Ord>(a: &[L], b: &[L]) -> Result<Option<F>, AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n == 0 {
        return Err(AgreementError::EmptyMatrix);
    }
    let mut marginals: BTreeMap<&L, (usize, usize)> = BTreeMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        marginals.entry(x).or_default().0 += 1;
        marginals.entry(y).or_default().1 += 1;
        if x == y {
            agree += 1;
        }
    }
    let chance_num: usize = marginals.values().map(|(ca, cb)| ca * cb).sum();
    if chance_num == n * n {
        return Ok(None);
    }
    let observed = F::ratio(agree, n);
    let chance = F::ratio(chance_num, n * n);
    Ok(Some((observed - chance) / (F::one() - chance)))
}

/// Majority-vote outcome for one item.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unified {
    Label(String),
    Unresolved,
}

pub const UNRESOLVED: &str = "UNRESOLVED";

impl Unified {
    pub fn label(&self) -> Option<&str> {
        match self {
            Unified::Label(l) => Some(l),
            Unified::Unresolved => None,
        }
    }
}

impl Serialize for Unified {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label().unwrap_or(UNRESOLVED))
    }
}

impl<'de> Deserialize<'de> for Unified {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(if s == UNRESOLVED {
            Unified::Unresolved
        } else {
            Unified::Label(s)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unification {
    pub unified: BTreeMap<String, Unified>,
    pub tie_count: usize,
}

/// Per-item modal label over the labels present; a shared maximum is `Unresolved`.
pub fn majority_unify(matrix: &AnnotationMatrix) -> Unification {
    let mut unified = BTreeMap::new();
    let mut tie_count = 0;
    for (row, item) in matrix.labels.iter().zip(&matrix.item_ids) {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for label in row.iter().flatten() {
            *counts.entry(label).or_default() += 1;
        }
        let max = counts.values().copied().max().unwrap_or(0);
        let modal: Vec<&str> = counts.iter().filter(|(_, &c)| c == max).map(|(l, _)| *l).collect();
        let outcome = match modal.as_slice() {
            [only] => Unified::Label(only.to_string()),
            _ => {
                tie_count += 1;
                Unified::Unresolved
            }
        };
        unified.insert(item.clone(), outcome);
    }
    Unification { unified, tie_count }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport<F> {
    pub annotators: Vec<String>,
    pub fleiss_kappa: Option<F>,
    /// Symmetric; `pairwise_cohen[i][j]` is kappa between annotators `i` and `j`.
    pub pairwise_cohen: Vec<Vec<Option<F>>>,
    pub unified_labels: BTreeMap<String, Unified>,
    pub tie_count: usize,
}

pub fn agreement_report<F: Real>(matrix: &AnnotationMatrix) -> Result<AgreementReport<F>, AgreementError> {
    let fleiss = fleiss_kappa(matrix)?;
    let k = matrix.annotator_ids.len();
    let columns: Vec<Vec<&str>> = (0..k).map(|j| matrix.column(j)).collect::<Result<_, _>>()?;
    let mut pairwise = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let kappa = cohen_kappa(&columns[i], &columns[j])?;
            pairwise[i][j] = kappa;
            pairwise[j][i] = kappa;
        }
    }
    let Unification { unified, tie_count } = majority_unify(matrix);
    Ok(AgreementReport {
        annotators: matrix.annotator_ids.clone(),
        fleiss_kappa: fleiss,
        pairwise_cohen: pairwise,
        unified_labels: unified,
        tie_count,
    })
}

/// Two-decimal rendering used in human-readable reports.
pub fn format_kappa<F: Real>(kappa: Option<F>) -> String {
    match kappa {
        Some(k) => format!("{:.2}", k.to_f64().unwrap()),
        None => "undefined".to_string(),
    }
}

/// Reads `item_id,<annotator>,<annotator>,...` CSV. Empty cells are missing labels.
pub fn read_annotation_csv<R: io::Read>(reader: R) -> Result<AnnotationMatrix, AgreementError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 3 {
        return Err(AgreementError::TooFewAnnotators(headers.len().saturating_sub(1)));
    }
    let annotator_ids: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut item_ids = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => AgreementError::RaggedMatrix {
                item: pos
                    .as_ref()
                    .map(|p| format!("line {}", p.line()))
                    .unwrap_or_else(|| "?".to_string()),
                found: (*len as usize).saturating_sub(1),
                expected: (*expected_len as usize).saturating_sub(1),
            },
            _ => AgreementError::Csv(e),
        })?;
        item_ids.push(record[0].to_string());
        labels.push(
            record
                .iter()
                .skip(1)
                .map(|c| (!c.is_empty()).then(|| c.to_string()))
                .collect(),
        );
    }
    if item_ids.is_empty() {
        return Err(AgreementError::EmptyMatrix);
    }
    Ok(AnnotationMatrix {
        item_ids,
        annotator_ids,
        labels,
    })
}

/// Pairwise kappa values only (no headers), one row per annotator. Undefined cells are empty.
pub fn write_heatmap_csv<W: io::Write, F: Real>(writer: W, report: &AgreementReport<F>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in &report.pairwise_cohen {
        w.write_record(row.iter().map(|k| k.map(|k| k.to_string()).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}
